//! Forward STFT, exact inverse, and the consistency projection of a
//! perturbed spectrogram.
//!
//! cargo run --release --example stft_roundtrip

use num_complex::Complex64;
use spectral_consistency::mixer::{synth_test_signals, SplitMix64};
use spectral_consistency::{Stft, StftConfig};

fn main() -> spectral_consistency::Result<()> {
    let config = StftConfig::default();
    let stft = Stft::new(config)?;
    let pair = synth_test_signals(0, 1.0, config.sample_rate)?;
    let x = pair.speech;

    let spec = stft.forward(&x)?;
    println!(
        "{} samples -> {} frames x {} bins",
        x.len(),
        spec.frames(),
        spec.bins()
    );

    let back = stft.inverse(&spec)?;
    let err = x
        .samples()
        .iter()
        .zip(back.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("round trip max abs error: {err:.3e}");

    // Random phase noise makes the spectrogram inconsistent; projecting pulls it back.
    let mut rng = SplitMix64::new(1);
    let noisy = spec.map(|z| z * Complex64::from_polar(1.0, 0.5 * (rng.next_f64() - 0.5)));
    let projected = stft.project(&noisy)?;
    let dist = |a: &spectral_consistency::ComplexSpectrogram| a.sub(&spec).map(|d| d.norm());
    println!(
        "distance to clean: perturbed {:.4}, projected {:.4}",
        dist(&noisy)?,
        dist(&projected)?
    );
    let again = stft.project(&projected)?;
    println!(
        "second projection moves it by {:.3e}",
        again.sub(&projected)?.norm()
    );
    Ok(())
}
