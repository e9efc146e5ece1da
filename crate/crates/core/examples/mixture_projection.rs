//! Unweighted and weighted mixture-consistency projections on one bin and on
//! a full pair of masked estimates.
//!
//! cargo run --release --example mixture_projection

use num_complex::Complex64;
use spectral_consistency::consistency::MixtureWeighting;
use spectral_consistency::masking::oracle_sources_for_mixture;
use spectral_consistency::mixer::{mix_at_snr, synth_test_signals};
use spectral_consistency::pipeline::mixture_residual_max;
use spectral_consistency::*;

fn main() -> Result<()> {
    // One bin: estimates 1 and 1 against a mixture of 4.
    let cfg = StftConfig::new(2, 1, 2, 16_000)?;
    let bin = |v: f64| ComplexSpectrogram::new(vec![Complex64::new(v, 0.0); 2], 1, cfg, 0);
    let set = SourceSet::new(vec![bin(1.0)?, bin(1.0)?], bin(4.0)?)?;
    let even = project_mixture_consistency(&set)?;
    let weights = WeightField::new(vec![vec![1.0; 2], vec![3.0; 2]], 1, 2, false)?;
    let skewed = project_mixture_weighted(&set, &weights)?;
    println!(
        "estimates (1, 1), mixture 4: unweighted -> ({}, {}), variances (1, 3) -> ({}, {})",
        even.source(0).get(0, 0).re,
        even.source(1).get(0, 0).re,
        skewed.source(0).get(0, 0).re,
        skewed.source(1).get(0, 0).re,
    );

    // A bounded mask no longer sums to one, so its estimates miss the mixture.
    let stft = Stft::new(StftConfig::default())?;
    let pair = synth_test_signals(3, 2.0, 16_000)?;
    let mix = mix_at_snr(&pair.speech, &pair.noise, 0.0)?;
    let (s, v, y) = (
        stft.forward(&mix.speech)?,
        stft.forward(&mix.scaled_noise)?,
        stft.forward(&mix.mixture)?,
    );
    let est = oracle_sources_for_mixture(&[&s, &v], &y, &MaskSpec::bounded(1.0))?.estimates;
    println!(
        "bounded-mask estimates: max |sum - Y| = {:.3e}",
        mixture_residual_max(&est)
    );
    for (name, w) in [
        ("uniform", MixtureWeighting::Uniform),
        ("magsq", MixtureWeighting::MagnitudeSquared),
    ] {
        let p = w.project(&est)?;
        println!(
            "{name:>8}: residual {:.1e}, speech error {:.4e} -> {:.4e}",
            mixture_residual_max(&p),
            mag_sq_error(est.source(0), &s)?,
            mag_sq_error(p.source(0), &s)?,
        );
    }
    Ok(())
}
