//! File-level commands behind the `speccon` binary.
//!
//! Every command writes its outputs atomically and removes whatever it
//! already wrote if a later step fails.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::consistency::{MixtureWeighting, WeightField};
use crate::error::{Error, Result};
use crate::io::{cspec, wav, write_atomic};
use crate::masking::MaskSpec;
use crate::metrics::{si_sdr, si_sdr_improvement, MetricsReport};
use crate::mixer::{mix_at_snr, sample_mix_spec, synth_test_signals};
use crate::pipeline::{enhance_oracle, Consistency, EnhanceSettings};
use crate::stft::Stft;
use crate::types::{ComplexSpectrogram, StftConfig, Waveform};

/// Tracks written files and deletes them unless [`Outputs::commit`] is called.
#[derive(Debug, Default)]
struct Outputs {
    written: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    fn write(&mut self, path: PathBuf, bytes: &[u8]) -> Result<()> {
        write_atomic(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }

    fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Debug, Clone)]
pub struct MixOptions {
    pub speech: Option<PathBuf>,
    pub noise: Option<PathBuf>,
    pub snr_db: Option<f64>,
    pub seed: Option<u64>,
    pub out_mix: PathBuf,
    pub out_refs: PathBuf,
    /// Length of synthesized signals when no input files are given.
    pub duration_s: f64,
    pub sample_rate: u32,
}

/// Mixes speech and noise and writes the mixture plus both scaled references
/// (`speech.wav`, `noise.wav`) as float32 WAV. Returns the realized mix as JSON.
///
/// With `--seed`, SNR and gain are drawn from the seeded distributions and
/// missing inputs are synthesized from the same seed. With `--snr`, the gain is 0 dB.
pub fn run_mix(opts: &MixOptions) -> Result<String> {
    let (snr_db, gain_db, seed) = match (opts.snr_db, opts.seed) {
        (Some(snr), None) => (snr, 0.0, None),
        (None, Some(seed)) => {
            let spec = sample_mix_spec(seed);
            (spec.snr_db, spec.gain_db, Some(seed))
        }
        (Some(_), Some(_)) => {
            return Err(Error::invalid("--snr and --seed are mutually exclusive"))
        }
        (None, None) => return Err(Error::invalid("one of --snr or --seed is required")),
    };
    let (speech, noise) = match (&opts.speech, &opts.noise, seed) {
        (Some(s), Some(n), _) => (wav::read_wav(s)?, wav::read_wav(n)?),
        (None, None, Some(seed)) => {
            let pair = synth_test_signals(seed, opts.duration_s, opts.sample_rate)?;
            (pair.speech, pair.noise)
        }
        (None, None, None) => {
            return Err(Error::invalid(
                "--speech and --noise are required without --seed",
            ))
        }
        _ => {
            return Err(Error::invalid(
                "--speech and --noise must be given together",
            ))
        }
    };
    let mix = mix_at_snr(&speech, &noise, snr_db)?
        .with_gain_db(gain_db)?
        .quantized_f32()?;

    create_dir(&opts.out_refs)?;
    if let Some(parent) = opts.out_mix.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let mut out = Outputs::default();
    out.write(opts.out_mix.clone(), &wav::encode_wav_f32(&mix.mixture)?)?;
    out.write(
        opts.out_refs.join("speech.wav"),
        &wav::encode_wav_f32(&mix.speech)?,
    )?;
    out.write(
        opts.out_refs.join("noise.wav"),
        &wav::encode_wav_f32(&mix.scaled_noise)?,
    )?;
    let report = json!({
        "snr_db": snr_db,
        "gain_db": gain_db,
        "seed": seed,
        "noise_gain": mix.noise_gain,
        "samples": mix.mixture.len(),
        "sample_rate": mix.mixture.sample_rate(),
    });
    out.commit();
    Ok(serde_json::to_string(&report)?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightingChoice {
    Uniform,
    MagSq,
    File(PathBuf),
}

impl std::str::FromStr for WeightingChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(WeightingChoice::Uniform),
            "magsq" => Ok(WeightingChoice::MagSq),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(WeightingChoice::File(PathBuf::from(p))),
                _ => Err(Error::invalid(format!(
                    "unknown mix weighting '{s}' (expected uniform, magsq or file:PATH)"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnhanceOptions {
    pub mix: PathBuf,
    pub speech_ref: Option<PathBuf>,
    pub noise_ref: Option<PathBuf>,
    pub mask: MaskSpec,
    pub consistency: Consistency,
    pub weighting: WeightingChoice,
    pub out: PathBuf,
    pub config: StftConfig,
    pub export_csv: bool,
}

pub const ENHANCE_OUTPUTS: [&str; 7] = [
    "enhanced_speech.wav",
    "enhanced_noise.wav",
    "masked_speech.cspec",
    "masked_noise.cspec",
    "projected_speech.cspec",
    "projected_noise.cspec",
    "report.json",
];

/// Oracle enhancement of a mixture file; returns the metrics report.
pub fn run_enhance(opts: &EnhanceOptions) -> Result<MetricsReport> {
    let speech_path = opts.speech_ref.as_ref().ok_or_else(|| {
        Error::invalid("--speech-ref is required: masks are computed from references")
    })?;
    let noise_path = opts.noise_ref.as_ref().ok_or_else(|| {
        Error::invalid("--noise-ref is required: masks are computed from references")
    })?;
    let mixture = wav::read_wav(&opts.mix)?;
    let speech = wav::read_wav(speech_path)?;
    let noise = wav::read_wav(noise_path)?;
    for w in [&mixture, &speech, &noise] {
        if w.sample_rate() != opts.config.sample_rate {
            return Err(Error::invalid(format!(
                "input sample rate {} Hz does not match configured {} Hz",
                w.sample_rate(),
                opts.config.sample_rate
            )));
        }
    }
    let weighting = match &opts.weighting {
        WeightingChoice::Uniform => MixtureWeighting::Uniform,
        WeightingChoice::MagSq => MixtureWeighting::MagnitudeSquared,
        WeightingChoice::File(p) => {
            let (frames, bins) = (opts.config.frame_count(mixture.len()), opts.config.bins());
            MixtureWeighting::Supplied(read_speech_share_csv(p, frames, bins)?)
        }
    };
    let settings = EnhanceSettings {
        config: opts.config,
        mask: opts.mask,
        consistency: opts.consistency,
        weighting,
        ..EnhanceSettings::default()
    };
    let result = enhance_oracle(&mixture, &speech, &noise, &settings)?;

    create_dir(&opts.out)?;
    let mut out = Outputs::default();
    let dir = &opts.out;
    out.write(
        dir.join(ENHANCE_OUTPUTS[0]),
        &wav::encode_wav_f32(result.speech())?,
    )?;
    out.write(
        dir.join(ENHANCE_OUTPUTS[1]),
        &wav::encode_wav_f32(result.noise())?,
    )?;
    out.write(
        dir.join(ENHANCE_OUTPUTS[2]),
        &cspec::encode(result.masked.source(0))?,
    )?;
    out.write(
        dir.join(ENHANCE_OUTPUTS[3]),
        &cspec::encode(result.masked.source(1))?,
    )?;
    out.write(
        dir.join(ENHANCE_OUTPUTS[4]),
        &cspec::encode(result.projected.source(0))?,
    )?;
    out.write(
        dir.join(ENHANCE_OUTPUTS[5]),
        &cspec::encode(result.projected.source(1))?,
    )?;
    if opts.export_csv {
        let panels = [
            ("true_speech", &result.truth[0]),
            ("mixture", result.masked.mixture()),
            ("masked_speech", result.masked.source(0)),
            ("projected_speech", result.projected.source(0)),
        ];
        for (name, spec) in panels {
            out.write(
                dir.join(format!("{name}_magnitude.csv")),
                magnitude_csv(spec).as_bytes(),
            )?;
        }
    }
    let mut report_json = result.report.to_json_pretty()?;
    report_json.push('\n');
    out.write(dir.join(ENHANCE_OUTPUTS[6]), report_json.as_bytes())?;
    out.commit();
    Ok(result.report)
}

/// Frames as rows, bins as columns, `|X|` per cell.
pub fn magnitude_csv(spec: &ComplexSpectrogram) -> String {
    let mut s = String::new();
    for t in 0..spec.frames() {
        let row: Vec<String> = spec
            .frame(t)
            .iter()
            .map(|z| format!("{:e}", z.norm()))
            .collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Reads per-bin speech shares (`frames` lines of `bins` comma-separated
/// values in `[0, 1]`); the noise share is the complement.
pub fn read_speech_share_csv(path: &Path, frames: usize, bins: usize) -> Result<WeightField> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::with_capacity(frames * bins);
    let mut rows = 0;
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        let before = values.len();
        for cell in line.split(',') {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::invalid(format!(
                    "{}:{}: invalid weight '{}'",
                    path.display(),
                    line_no + 1,
                    cell.trim()
                ))
            })?;
            values.push(v);
        }
        if values.len() - before != bins {
            return Err(Error::invalid(format!(
                "{}:{}: expected {bins} weights, found {}",
                path.display(),
                line_no + 1,
                values.len() - before
            )));
        }
    }
    if rows != frames {
        return Err(Error::invalid(format!(
            "{}: expected {frames} rows of weights, found {rows}",
            path.display()
        )));
    }
    WeightField::from_speech_share(values, frames, bins)
}

#[derive(Debug, Clone)]
pub struct StftOptions {
    pub input: PathBuf,
    pub output: PathBuf,
    pub inverse: bool,
    pub config: StftConfig,
}

/// WAV → CSPEC, or CSPEC → WAV with `inverse`. Returns a one-line JSON summary.
pub fn run_stft(opts: &StftOptions) -> Result<String> {
    let mut out = Outputs::default();
    let summary = if opts.inverse {
        let spec = cspec::read_cspec(&opts.input)?;
        let x = Stft::new(*spec.config())?.inverse(&spec)?;
        out.write(opts.output.clone(), &wav::encode_wav_f32(&x)?)?;
        json!({ "samples": x.len(), "sample_rate": x.sample_rate() })
    } else {
        let x = wav::read_wav(&opts.input)?;
        let spec = Stft::new(opts.config)?.forward(&x)?;
        out.write(opts.output.clone(), &cspec::encode(&spec)?)?;
        json!({ "frames": spec.frames(), "bins": spec.bins() })
    };
    out.commit();
    Ok(serde_json::to_string(&summary)?)
}

#[derive(Debug, Clone)]
pub struct MetricsOptions {
    pub reference: PathBuf,
    pub estimate: PathBuf,
    pub mixture: PathBuf,
}

pub fn run_metrics(opts: &MetricsOptions) -> Result<MetricsReport> {
    let reference = wav::read_wav(&opts.reference)?;
    let estimate = wav::read_wav(&opts.estimate)?;
    let mixture = wav::read_wav(&opts.mixture)?;
    let mut report = MetricsReport::new();
    report.insert("si_sdr_db", si_sdr(&reference, &estimate)?);
    report.insert(
        "si_sdr_improvement_db",
        si_sdr_improvement(&reference, &estimate, &mixture)?,
    );
    Ok(report)
}

/// Writes a waveform for use as a CLI input; PCM16 when `pcm16`, else float32.
pub fn write_input_wav(path: &Path, x: &Waveform, pcm16: bool) -> Result<()> {
    let bytes = if pcm16 {
        wav::encode_wav_pcm16(x)?
    } else {
        wav::encode_wav_f32(x)?
    };
    write_atomic(path, &bytes)
}
