//! End-to-end runs of the `speccon` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use spectral_consistency::cli::write_input_wav;
use spectral_consistency::io::{cspec, wav};
use spectral_consistency::*;
use tempfile::TempDir;

fn speccon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_speccon"))
        .args(args)
        .output()
        .expect("failed to launch speccon")
}

fn ok(args: &[&str]) -> Value {
    let out = speccon(args);
    assert!(
        out.status.success(),
        "speccon {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a seeded speech/noise pair of equal RMS.
fn equal_rms_inputs(dir: &Path, seed: u64) -> (PathBuf, PathBuf) {
    let pair = synth_test_signals(seed, 1.0, 16_000).unwrap();
    let noise = pair.noise.scaled(pair.speech.rms() / pair.noise.rms());
    let (sp, np) = (dir.join("in_speech.wav"), dir.join("in_noise.wav"));
    write_input_wav(&sp, &pair.speech, false).unwrap();
    write_input_wav(&np, &noise, false).unwrap();
    (sp, np)
}

fn mix_files(dir: &Path, snr: &str, seed: u64) -> (PathBuf, PathBuf) {
    let (sp, np) = equal_rms_inputs(dir, seed);
    let mix = dir.join("mix.wav");
    let refs = dir.join("refs");
    ok(&[
        "mix",
        "--speech",
        s(&sp),
        "--noise",
        s(&np),
        "--snr",
        snr,
        "--out-mix",
        s(&mix),
        "--out-refs",
        s(&refs),
    ]);
    (mix, refs)
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map(|rd| {
            rd.map(|e| e.unwrap().file_name().into_string().unwrap())
                .collect()
        })
        .unwrap_or_default();
    names.sort();
    names
}

#[test]
fn mix_references_sum_to_mixture() {
    let dir = TempDir::new().unwrap();
    let (mix, refs) = mix_files(dir.path(), "0", 1);
    let y = wav::read_wav(&mix).unwrap();
    let sp = wav::read_wav(&refs.join("speech.wav")).unwrap();
    let n = wav::read_wav(&refs.join("noise.wav")).unwrap();
    for i in 0..y.len() {
        assert_eq!(
            y.samples()[i] as f32,
            sp.samples()[i] as f32 + n.samples()[i] as f32,
            "sample {i}"
        );
    }
}

#[test]
fn mix_reports_noise_gain_for_equal_rms() {
    let dir = TempDir::new().unwrap();
    // Negated speech: identical RMS after f32 storage.
    let pair = synth_test_signals(2, 1.0, 16_000).unwrap();
    let (sp, np) = (dir.path().join("s.wav"), dir.path().join("n.wav"));
    write_input_wav(&sp, &pair.speech, false).unwrap();
    write_input_wav(&np, &pair.speech.scaled(-1.0), false).unwrap();
    let report = ok(&[
        "mix",
        "--speech",
        s(&sp),
        "--noise",
        s(&np),
        "--snr",
        "20",
        "--out-mix",
        s(&dir.path().join("m.wav")),
        "--out-refs",
        s(&dir.path().join("r")),
    ]);
    assert!((report["noise_gain"].as_f64().unwrap() - 0.1).abs() < 1e-12);
    assert_eq!(report["snr_db"].as_f64().unwrap(), 20.0);
}

#[test]
fn seeded_mix_is_byte_deterministic() {
    let dirs = [TempDir::new().unwrap(), TempDir::new().unwrap()];
    let mut stdout = Vec::new();
    for d in &dirs {
        let out = speccon(&[
            "mix",
            "--seed",
            "42",
            "--duration",
            "1.0",
            "--out-mix",
            s(&d.path().join("mix.wav")),
            "--out-refs",
            s(&d.path().join("refs")),
        ]);
        assert!(out.status.success());
        stdout.push(out.stdout);
    }
    assert_eq!(stdout[0], stdout[1]);
    for f in ["mix.wav", "refs/speech.wav", "refs/noise.wav"] {
        let a = std::fs::read(dirs[0].path().join(f)).unwrap();
        let b = std::fs::read(dirs[1].path().join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
}

#[test]
fn mix_rejects_conflicting_flags() {
    let dir = TempDir::new().unwrap();
    let out = speccon(&[
        "mix",
        "--seed",
        "1",
        "--snr",
        "3",
        "--out-mix",
        s(&dir.path().join("m.wav")),
        "--out-refs",
        s(&dir.path().join("r")),
    ]);
    assert!(!out.status.success());
    assert!(files_in(dir.path()).is_empty());
}

fn enhance(dir: &Path, mix: &Path, refs: &Path, extra: &[&str]) -> (PathBuf, Value) {
    let out = dir.join(format!("enh_{}", extra.join("_").replace([':', '/'], "-")));
    let sp = refs.join("speech.wav");
    let np = refs.join("noise.wav");
    let mut args = vec![
        "enhance",
        "--mix",
        s(mix),
        "--speech-ref",
        s(&sp),
        "--noise-ref",
        s(&np),
        "--out",
        s(&out),
    ];
    args.extend_from_slice(extra);
    let stdout = ok(&args);
    let file: Value =
        serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(stdout, file);
    (out, file)
}

#[test]
fn enhance_both_reduces_spectral_error() {
    let dir = TempDir::new().unwrap();
    let (mix, refs) = mix_files(dir.path(), "0", 3);
    let (out, report) = enhance(dir.path(), &mix, &refs, &["--consistency", "both"]);
    let masked = report["mag_sq_error_masked"].as_f64().unwrap();
    let consistent = report["mag_sq_error_consistent"].as_f64().unwrap();
    assert!(consistent < masked, "{consistent} >= {masked}");
    assert!(report["si_sdr_improvement_db"].as_f64().is_some());
    assert_eq!(
        files_in(&out),
        [
            "enhanced_noise.wav",
            "enhanced_speech.wav",
            "masked_noise.cspec",
            "masked_speech.cspec",
            "projected_noise.cspec",
            "projected_speech.cspec",
            "report.json",
        ]
    );
    let projected = cspec::read_cspec(&out.join("projected_speech.cspec")).unwrap();
    assert_eq!(projected.shape(), (101, 513));
}

#[test]
fn enhance_is_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let (mix, refs) = mix_files(dir.path(), "5", 4);
    let run = |tag: &str| {
        let out = dir.path().join(tag);
        ok(&[
            "enhance",
            "--mix",
            s(&mix),
            "--speech-ref",
            s(&refs.join("speech.wav")),
            "--noise-ref",
            s(&refs.join("noise.wav")),
            "--consistency",
            "both",
            "--mix-weighting",
            "magsq",
            "--out",
            s(&out),
        ]);
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in files_in(&a) {
        assert_eq!(
            std::fs::read(a.join(&f)).unwrap(),
            std::fs::read(b.join(&f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn enhance_zero_noise_is_perfect() {
    let dir = TempDir::new().unwrap();
    // Broadband input: no bin falls under the mask's magnitude floor.
    let pair = synth_test_signals(5, 1.0, 16_000).unwrap();
    let mut hiss = spectral_consistency::mixer::SplitMix64::new(5);
    let speech: Vec<f64> = pair
        .speech
        .samples()
        .iter()
        .map(|x| x + 0.05 * hiss.next_normal())
        .collect();
    let speech = Waveform::new(speech, 16_000).unwrap();
    let (sp, np) = (dir.path().join("s.wav"), dir.path().join("n.wav"));
    write_input_wav(&sp, &speech, false).unwrap();
    write_input_wav(&np, &Waveform::zeros(speech.len(), 16_000).unwrap(), false).unwrap();
    let out = dir.path().join("out");
    let report = ok(&[
        "enhance",
        "--mix",
        s(&sp),
        "--speech-ref",
        s(&sp),
        "--noise-ref",
        s(&np),
        "--consistency",
        "none",
        "--out",
        s(&out),
    ]);
    assert_eq!(report["si_sdr_db"], Value::from("inf"));
}

#[test]
fn enhance_magsq_mix_sums_to_mixture() {
    let dir = TempDir::new().unwrap();
    let (mix, refs) = mix_files(dir.path(), "0", 6);
    let (out, _) = enhance(
        dir.path(),
        &mix,
        &refs,
        &[
            "--consistency",
            "mix",
            "--mix-weighting",
            "magsq",
            "--psm-bound",
            "1",
        ],
    );
    let y = wav::read_wav(&mix).unwrap();
    let a = wav::read_wav(&out.join("enhanced_speech.wav")).unwrap();
    let b = wav::read_wav(&out.join("enhanced_noise.wav")).unwrap();
    let worst = (0..y.len())
        .map(|i| (a.samples()[i] + b.samples()[i] - y.samples()[i]).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-5, "max deviation {worst}");
}

#[test]
fn enhance_weights_from_file() {
    let dir = TempDir::new().unwrap();
    let (mix, refs) = mix_files(dir.path(), "0", 7);
    let csv: String = (0..101)
        .map(|_| vec!["0.7"; 513].join(",") + "\n")
        .collect();
    let w = dir.path().join("w.csv");
    std::fs::write(&w, csv).unwrap();
    let spec = format!("file:{}", w.display());
    let (out, report) = enhance(
        dir.path(),
        &mix,
        &refs,
        &[
            "--consistency",
            "mix",
            "--mix-weighting",
            &spec,
            "--psm-unit",
            "--export-csv",
        ],
    );
    assert!(report["mixture_residual_max"].as_f64().unwrap() < 1e-9);
    let csv = std::fs::read_to_string(out.join("true_speech_magnitude.csv")).unwrap();
    assert_eq!(csv.lines().count(), 101);
    assert_eq!(csv.lines().next().unwrap().split(',').count(), 513);
}

#[test]
fn enhance_usage_and_missing_reference_errors() {
    let dir = TempDir::new().unwrap();
    let (mix, refs) = mix_files(dir.path(), "0", 8);
    let sp = refs.join("speech.wav");
    let out = dir.path().join("bad");
    for flags in [
        ["--consistency", "sometimes"],
        ["--mask", "ibm"],
        ["--mix-weighting", "cubic"],
    ] {
        let mut args = vec![
            "enhance",
            "--mix",
            s(&mix),
            "--speech-ref",
            s(&sp),
            "--noise-ref",
            s(&sp),
            "--out",
            s(&out),
        ];
        args.extend_from_slice(&flags);
        let o = speccon(&args);
        assert!(!o.status.success(), "{flags:?} accepted");
        assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    }
    let o = speccon(&[
        "enhance",
        "--mix",
        s(&mix),
        "--speech-ref",
        s(&sp),
        "--out",
        s(&out),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("noise"));
    let missing = dir.path().join("nope.wav");
    let o = speccon(&[
        "enhance",
        "--mix",
        s(&mix),
        "--speech-ref",
        s(&sp),
        "--noise-ref",
        s(&missing),
        "--out",
        s(&out),
    ]);
    assert!(!o.status.success());
    assert!(
        files_in(&out).is_empty(),
        "partial outputs left: {:?}",
        files_in(&out)
    );
}

#[test]
fn stft_round_trip_and_header() {
    let dir = TempDir::new().unwrap();
    let pair = synth_test_signals(9, 1.0, 16_000).unwrap();
    let wav_in = dir.path().join("x.wav");
    write_input_wav(&wav_in, &pair.speech, false).unwrap();
    let spec = dir.path().join("x.cspec");
    let back = dir.path().join("y.wav");
    let summary = ok(&["stft", "--in", s(&wav_in), "--out", s(&spec)]);
    assert_eq!(summary["frames"], 101);
    assert_eq!(summary["bins"], 513);
    let bytes = std::fs::read(&spec).unwrap();
    let header_end = 7 + bytes[7..].iter().position(|&b| b == b'\n').unwrap();
    let header: Value = serde_json::from_slice(&bytes[7..header_end]).unwrap();
    assert_eq!(header["frames"], 101);
    assert_eq!(header["bins"], 513);
    ok(&["stft", "--in", s(&spec), "--out", s(&back), "--inverse"]);
    let x = wav::read_wav(&wav_in).unwrap();
    let y = wav::read_wav(&back).unwrap();
    assert_eq!(x.len(), y.len());
    let worst = x
        .samples()
        .iter()
        .zip(y.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "max error {worst}");
}

#[test]
fn stft_inverse_reports_truncation_and_bad_magic() {
    let dir = TempDir::new().unwrap();
    let x = Waveform::new((0..1600).map(|i| (i as f64 * 0.01).sin()).collect(), 16_000).unwrap();
    let wav_in = dir.path().join("x.wav");
    write_input_wav(&wav_in, &x, true).unwrap();
    let spec = dir.path().join("x.cspec");
    ok(&["stft", "--in", s(&wav_in), "--out", s(&spec)]);
    let mut bytes = std::fs::read(&spec).unwrap();
    let full = 11 * 513 * 8;
    bytes.truncate(bytes.len() - 5);
    std::fs::write(&spec, &bytes).unwrap();
    let out = dir.path().join("y.wav");
    let o = speccon(&["stft", "--in", s(&spec), "--out", s(&out), "--inverse"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains(&format!("expected {full} bytes, found {}", full - 5)),
        "{err}"
    );
    assert!(!out.exists());

    bytes[2] = b'X';
    std::fs::write(&spec, &bytes).unwrap();
    let o = speccon(&["stft", "--in", s(&spec), "--out", s(&out), "--inverse"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("byte 2"));
}

#[test]
fn metrics_sentinels_and_scale_invariance() {
    let dir = TempDir::new().unwrap();
    let (mix, refs) = mix_files(dir.path(), "0", 10);
    let sp = refs.join("speech.wav");
    let same = ok(&[
        "metrics",
        "--ref",
        s(&sp),
        "--est",
        s(&mix),
        "--mix",
        s(&mix),
    ]);
    assert_eq!(same["si_sdr_improvement_db"].as_f64().unwrap(), 0.0);
    let perfect = ok(&[
        "metrics",
        "--ref",
        s(&sp),
        "--est",
        s(&sp),
        "--mix",
        s(&mix),
    ]);
    assert_eq!(perfect["si_sdr_db"], Value::from("inf"));

    // Estimate on a 2^-12 grid so that 3x is exact in f32.
    let est = wav::read_wav(&mix).unwrap();
    let scaled = Waveform::new(
        est.samples()
            .iter()
            .map(|v| ((0.5 * v + 0.25 * v * v) * 4096.0).round() / 4096.0)
            .collect(),
        16_000,
    )
    .unwrap();
    let (e1, e3) = (dir.path().join("e1.wav"), dir.path().join("e3.wav"));
    write_input_wav(&e1, &scaled, false).unwrap();
    write_input_wav(&e3, &scaled.scaled(3.0), false).unwrap();
    let a = ok(&[
        "metrics",
        "--ref",
        s(&sp),
        "--est",
        s(&e1),
        "--mix",
        s(&mix),
    ]);
    let b = ok(&[
        "metrics",
        "--ref",
        s(&sp),
        "--est",
        s(&e3),
        "--mix",
        s(&mix),
    ]);
    let (a, b) = (
        a["si_sdr_db"].as_f64().unwrap(),
        b["si_sdr_db"].as_f64().unwrap(),
    );
    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
}

#[test]
fn metrics_rejects_length_mismatch() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.wav"), dir.path().join("b.wav"));
    write_input_wav(&a, &Waveform::new(vec![0.1; 100], 16_000).unwrap(), false).unwrap();
    write_input_wav(&b, &Waveform::new(vec![0.1; 90], 16_000).unwrap(), false).unwrap();
    let o = speccon(&["metrics", "--ref", s(&a), "--est", s(&b), "--mix", s(&a)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("samples"));
}
