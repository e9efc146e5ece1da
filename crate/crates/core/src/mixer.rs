//! Deterministic synthetic mixtures.
//!
//! All randomness comes from [`SplitMix64`] with Box–Muller normals, so a
//! seed reproduces the same mixture on every platform.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::Waveform;

pub const SNR_MEAN_DB: f64 = 5.0;
pub const SNR_STD_DB: f64 = 10.0;
pub const GAIN_MEAN_DB: f64 = -10.0;
pub const GAIN_STD_DB: f64 = 5.0;

/// SplitMix64 generator (Steele, Lea & Flood constants).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
    pub const MIX1: u64 = 0xBF58_476D_1CE4_E5B9;
    pub const MIX2: u64 = 0x94D0_49BB_1331_11EB;

    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(Self::GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(Self::MIX1);
        z = (z ^ (z >> 27)).wrapping_mul(Self::MIX2);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `(0, 1]`; safe as a logarithm argument.
    pub fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// A pair of independent standard normals (Box–Muller).
    pub fn next_normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        (r * theta.cos(), r * theta.sin())
    }

    pub fn next_normal(&mut self) -> f64 {
        self.next_normal_pair().0
    }
}

/// Realized mixing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixSpec {
    pub snr_db: f64,
    pub gain_db: f64,
    pub seed: u64,
}

/// Draws `snr_db ~ N(5, 10²)` and `gain_db ~ N(-10, 5²)` from one Box–Muller pair.
pub fn sample_mix_spec(seed: u64) -> MixSpec {
    let mut rng = SplitMix64::new(seed);
    let (a, b) = rng.next_normal_pair();
    MixSpec {
        snr_db: SNR_MEAN_DB + SNR_STD_DB * a,
        gain_db: GAIN_MEAN_DB + GAIN_STD_DB * b,
        seed,
    }
}

pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// Result of [`mix_at_snr`]: `mixture == speech + scaled_noise` sample for sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub mixture: Waveform,
    pub speech: Waveform,
    pub scaled_noise: Waveform,
    pub noise_gain: f64,
}

/// Scales `noise` so the full-signal RMS ratio to `speech` equals `snr_db`.
pub fn mix_at_snr(speech: &Waveform, noise: &Waveform, snr_db: f64) -> Result<Mixture> {
    if speech.len() != noise.len() {
        return Err(Error::invalid(format!(
            "speech has {} samples but noise has {}",
            speech.len(),
            noise.len()
        )));
    }
    if speech.sample_rate() != noise.sample_rate() {
        return Err(Error::invalid("speech and noise sample rates differ"));
    }
    if !snr_db.is_finite() {
        return Err(Error::invalid("snr must be finite"));
    }
    let (rs, rn) = (speech.rms(), noise.rms());
    if rs == 0.0 || rn == 0.0 {
        return Err(Error::invalid("speech and noise must have nonzero RMS"));
    }
    let noise_gain = (rs / rn) * db_to_amplitude(-snr_db);
    let scaled_noise = noise.scaled(noise_gain);
    let mixture = Waveform::new(
        speech
            .samples()
            .iter()
            .zip(scaled_noise.samples())
            .map(|(s, n)| s + n)
            .collect(),
        speech.sample_rate(),
    )?;
    Ok(Mixture {
        mixture,
        speech: speech.clone(),
        scaled_noise,
        noise_gain,
    })
}

impl Mixture {
    /// Applies a common gain to the mixture and both references.
    pub fn with_gain_db(&self, gain_db: f64) -> Result<Self> {
        let g = db_to_amplitude(gain_db);
        let speech = self.speech.scaled(g);
        let scaled_noise = self.scaled_noise.scaled(g);
        let mixture = Waveform::new(
            speech
                .samples()
                .iter()
                .zip(scaled_noise.samples())
                .map(|(s, n)| s + n)
                .collect(),
            speech.sample_rate(),
        )?;
        Ok(Self {
            mixture,
            speech,
            scaled_noise,
            noise_gain: self.noise_gain * g,
        })
    }

    /// Rounds both references to `f32` and rebuilds the mixture from them, so the
    /// stored mixture is the `f32` sum of the stored references.
    pub fn quantized_f32(&self) -> Result<Self> {
        let speech = self.speech.quantized_f32();
        let scaled_noise = self.scaled_noise.quantized_f32();
        let mixture = Waveform::new(
            speech
                .samples()
                .iter()
                .zip(scaled_noise.samples())
                .map(|(&s, &n)| (s as f32 + n as f32) as f64)
                .collect(),
            speech.sample_rate(),
        )?;
        Ok(Self {
            mixture,
            speech,
            scaled_noise,
            noise_gain: self.noise_gain,
        })
    }
}

/// Speech-like and noise-like stand-in signals.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    pub speech: Waveform,
    pub noise: Waveform,
    /// Nominal fundamental of the speech-like tone stack.
    pub fundamental_hz: f64,
}

const HARMONICS: usize = 12;
const VIBRATO_HZ: f64 = 5.0;
const VIBRATO_DEPTH: f64 = 0.005;

/// Deterministic harmonic-plus-vibrato tone stack and bursty filtered noise,
/// each peak-normalized to 0.5.
///
/// The speech-like signal has a fundamental in [110, 220) Hz, twelve
/// harmonics with `1/k` amplitudes and a slow syllabic envelope. The
/// noise-like signal is white noise through a one-pole low-pass, gated by a
/// random sequence of bursts over a low floor.
pub fn synth_test_signals(seed: u64, duration_s: f64, sample_rate: u32) -> Result<SyntheticPair> {
    if !duration_s.is_finite() || duration_s <= 0.0 {
        return Err(Error::invalid("duration must be positive"));
    }
    if sample_rate == 0 {
        return Err(Error::invalid("sample_rate must be positive"));
    }
    let len = (duration_s * sample_rate as f64).round().max(1.0) as usize;
    let fs = sample_rate as f64;
    let mut rng = SplitMix64::new(seed);

    let f0 = 110.0 + 110.0 * rng.next_f64();
    let syllable_hz = 2.5 + 2.0 * rng.next_f64();
    let phases: Vec<f64> = (0..HARMONICS).map(|_| 2.0 * PI * rng.next_f64()).collect();
    let nyquist = fs / 2.0;
    let mut phase = 0.0;
    let mut speech = Vec::with_capacity(len);
    for n in 0..len {
        let t = n as f64 / fs;
        let inst_f0 = f0 * (1.0 + VIBRATO_DEPTH * (2.0 * PI * VIBRATO_HZ * t).sin());
        phase += 2.0 * PI * inst_f0 / fs;
        let env = 0.55 - 0.45 * (2.0 * PI * syllable_hz * t).cos();
        let mut v = 0.0;
        for (k, ph) in phases.iter().enumerate() {
            let h = (k + 1) as f64;
            if h * f0 * (1.0 + VIBRATO_DEPTH) < nyquist {
                v += (h * phase + ph).sin() / h;
            }
        }
        speech.push(env * v);
    }

    let cutoff_hz = 1_000.0 + 3_000.0 * rng.next_f64();
    let alpha = 1.0 - (-2.0 * PI * cutoff_hz / fs).exp();
    let burst_len = (0.05 * fs).max(1.0) as usize;
    let mut noise = Vec::with_capacity(len);
    let mut lp = 0.0;
    let mut gate = 0.2;
    for n in 0..len {
        if n % burst_len == 0 {
            gate = if rng.next_f64() < 0.5 { 1.0 } else { 0.2 };
        }
        lp += alpha * (rng.next_f64() * 2.0 - 1.0 - lp);
        noise.push(gate * lp);
    }

    Ok(SyntheticPair {
        speech: peak_normalize(speech, sample_rate, 0.5)?,
        noise: peak_normalize(noise, sample_rate, 0.5)?,
        fundamental_hz: f0,
    })
}

fn peak_normalize(samples: Vec<f64>, sample_rate: u32, target: f64) -> Result<Waveform> {
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak == 0.0 {
        return Waveform::new(samples, sample_rate);
    }
    // target * s / peak hits the target exactly at the peak sample.
    Waveform::new(
        samples.into_iter().map(|s| s * target / peak).collect(),
        sample_rate,
    )
}
