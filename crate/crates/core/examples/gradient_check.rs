//! Backpropagates the power-compressed loss through the mixture projection and
//! mask application, then checks a few mask gradients by central differences.
//!
//! cargo run --release --example gradient_check

use num_complex::Complex64;
use spectral_consistency::masking::vjp_apply_mask;
use spectral_consistency::mixer::{synth_test_signals, SplitMix64};
use spectral_consistency::*;

fn main() -> Result<()> {
    let stft = Stft::new(StftConfig::default())?;
    let pair = synth_test_signals(2, 0.25, 16_000)?;
    let s = stft.forward(&pair.speech)?;
    let v = stft.forward(&pair.noise)?;
    let y = s.add(&v)?;
    let (frames, bins) = y.shape();
    let mut rng = SplitMix64::new(9);
    let mut random_mask = || {
        Mask::complex(
            (0..frames * bins)
                .map(|_| Complex64::new(rng.next_f64(), rng.next_f64() - 0.5))
                .collect(),
            frames,
            bins,
        )
    };
    let masks = vec![random_mask()?, random_mask()?];
    let truth = vec![s, v];
    let loss = SpectralLoss::default();

    let evaluate = |m: &[Mask]| -> Result<(f64, SourceSet)> {
        let est = vec![apply_mask(&m[0], &y)?, apply_mask(&m[1], &y)?];
        let p = project_mixture_consistency(&SourceSet::new(est, y.clone())?)?;
        Ok((loss.value(&truth, p.sources())?, p))
    };
    let (value, projected) = evaluate(&masks)?;
    println!("loss {value:.6}");

    let (g_est, _) = vjp_mixture_consistency(&loss.gradient(&truth, projected.sources())?)?;
    let g0 = vjp_apply_mask(&masks[0], &y, &g_est[0])?.0;

    let h = 1e-6;
    for idx in [bins * 3 + 10, bins * 7 + 40, bins * 12 + 90] {
        let bumped = |delta: f64| -> Result<f64> {
            let mut m = masks.clone();
            if let Mask::Complex { data, .. } = &mut m[0] {
                data[idx].re += delta;
            }
            Ok(evaluate(&m)?.0)
        };
        let fd = (bumped(h)? - bumped(-h)?) / (2.0 * h);
        println!(
            "bin {idx:5}: analytic {:+.6e}, finite difference {fd:+.6e}",
            g0.value(idx).re
        );
    }
    Ok(())
}
