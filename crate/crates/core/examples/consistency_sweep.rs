//! Compares oracle-mask enhancement with and without consistency projections
//! over a batch of seeded synthetic mixtures.
//!
//! cargo run --release --example consistency_sweep -- [runs] [snr_db]

use spectral_consistency::consistency::MixtureWeighting;
use spectral_consistency::mixer::{mix_at_snr, synth_test_signals};
use spectral_consistency::{enhance_oracle, Consistency, EnhanceSettings, MaskSpec};

fn main() -> spectral_consistency::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(10);
    let snr_db: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.0);

    let masks = [
        ("psm", MaskSpec::default()),
        ("psm[0,1]", MaskSpec::unit_interval()),
        ("psm|m|<=1", MaskSpec::bounded(1.0)),
    ];
    let variants = [
        ("none", Consistency::None, MixtureWeighting::Uniform),
        ("stft", Consistency::Stft, MixtureWeighting::Uniform),
        ("mix", Consistency::Mix, MixtureWeighting::Uniform),
        ("both", Consistency::Both, MixtureWeighting::Uniform),
        (
            "both/magsq",
            Consistency::Both,
            MixtureWeighting::MagnitudeSquared,
        ),
    ];

    for (mask_name, mask) in masks {
        println!("mask {mask_name}, {runs} runs at {snr_db} dB SNR");
        let mut sums = vec![0.0; variants.len()];
        let mut wins = 0;
        for seed in 0..runs {
            let pair = synth_test_signals(seed, 2.0, 16_000)?;
            let mix = mix_at_snr(&pair.speech, &pair.noise, snr_db)?;
            let mut row = Vec::new();
            for (i, (_, consistency, weighting)) in variants.iter().enumerate() {
                let settings = EnhanceSettings {
                    mask,
                    consistency: *consistency,
                    weighting: weighting.clone(),
                    ..EnhanceSettings::default()
                };
                let out = enhance_oracle(&mix.mixture, &mix.speech, &mix.scaled_noise, &settings)?;
                let imp = out.report.get("si_sdr_improvement_db").unwrap_or(f64::NAN);
                sums[i] += imp;
                row.push(imp);
            }
            if row[3] > row[0] {
                wins += 1;
            }
            let cells: Vec<String> = row.iter().map(|v| format!("{v:8.3}")).collect();
            println!("  seed {seed:3}: {}", cells.join(" "));
        }
        let means: Vec<String> = variants
            .iter()
            .zip(&sums)
            .map(|((name, _, _), s)| format!("{name}={:.3}", s / runs as f64))
            .collect();
        println!("  mean SI-SDR improvement: {}", means.join("  "));
        println!("  both > none in {wins}/{runs} runs\n");
    }
    Ok(())
}
