//! Seeded mixing: SNR and gain draws, exact-SNR mixing, and the f32 artifacts.
//!
//! cargo run --release --example mixing -- [seed]

use spectral_consistency::mixer::{
    db_to_amplitude, mix_at_snr, sample_mix_spec, synth_test_signals,
};

fn main() -> spectral_consistency::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(42);
    let spec = sample_mix_spec(seed);
    println!(
        "seed {seed}: SNR {:.3} dB, gain {:.3} dB",
        spec.snr_db, spec.gain_db
    );

    let pair = synth_test_signals(seed, 2.0, 16_000)?;
    let mix = mix_at_snr(&pair.speech, &pair.noise, spec.snr_db)?.with_gain_db(spec.gain_db)?;
    let achieved = 20.0 * (mix.speech.rms() / mix.scaled_noise.rms()).log10();
    println!(
        "noise gain {:.4}, achieved SNR {achieved:.6} dB, mixture peak {:.4} (overall gain x{:.4})",
        mix.noise_gain,
        mix.mixture.peak(),
        db_to_amplitude(spec.gain_db),
    );

    let stored = mix.quantized_f32()?;
    let exact = (0..stored.mixture.len()).all(|i| {
        stored.mixture.samples()[i] as f32
            == stored.speech.samples()[i] as f32 + stored.scaled_noise.samples()[i] as f32
    });
    println!("f32 references sum to the f32 mixture: {exact}");

    let draws: Vec<f64> = (0..10_000).map(|s| sample_mix_spec(s).snr_db).collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    println!("mean SNR over 10000 seeds: {mean:.3} dB");
    Ok(())
}
