//! Forward and inverse short-time Fourier transforms.
//!
//! The forward operator center-pads the signal with `window_length / 2` zeros
//! per side, applies a periodic Hann window at each hop, zero-pads the frame to
//! `fft_length` and keeps the one-sided spectrum.
//!
//! The inverse is the least-squares (Moore–Penrose) inverse of the forward
//! operator with respect to the plain real inner product on the one-sided
//! coefficients. It is computed as a weighted overlap-add with the
//! canonical dual window followed by a small banded correction: in one-sided
//! coordinates the DC and Nyquist bins carry half the weight of the other
//! bins, which adds two rank-one terms per frame to the Gram matrix of the
//! forward operator. Undoing them with the Woodbury identity keeps the
//! inverse exact, so `forward ∘ inverse` is an orthogonal projection.

mod banded;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::types::{validate_config, ComplexSpectrogram, StftConfig, Waveform};
use crate::window::{folded_power_sum, hann_window};

use banded::{BandedCholesky, BandedSpd};

/// Intermediate windowed frames of a center-padded signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FramedSignal {
    /// `frames × window_length`, row-major.
    pub frames: Vec<f64>,
    pub config: StftConfig,
    pub original_length: usize,
}

impl FramedSignal {
    pub fn frame_count(&self) -> usize {
        self.frames.len() / self.config.window_length
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let w = self.config.window_length;
        &self.frames[t * w..(t + 1) * w]
    }
}

/// Canonical dual of the periodic Hann window: `w[n] / Σ_k w[n + k·hop]²`.
///
/// This is the interior synthesis window; frames near the signal edges are
/// normalized by the squared-window sum that actually covers them.
pub fn synthesis_window(config: &StftConfig) -> Result<Vec<f64>> {
    validate_config(config)?;
    let w = hann_window(config.window_length)?;
    let denom = folded_power_sum(&w, config.hop, 2);
    w.iter()
        .enumerate()
        .map(|(i, &wi)| {
            let d = denom[i % config.hop];
            if d < 1e-12 {
                Err(Error::DegenerateWindow { index: i })
            } else {
                Ok(wi / d)
            }
        })
        .collect()
}

pub fn stft_forward(x: &Waveform, config: &StftConfig) -> Result<ComplexSpectrogram> {
    Stft::new(*config)?.forward(x)
}

pub fn stft_inverse(spec: &ComplexSpectrogram) -> Result<Waveform> {
    Stft::new(*spec.config())?.inverse(spec)
}

/// Reusable STFT operator pair for one configuration.
///
/// Holds FFT plans and caches the inverse's banded correction per signal
/// length, so repeated projections of equally sized spectrograms are cheap.
pub struct Stft {
    config: StftConfig,
    window: Vec<f64>,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
    gram_cache: Mutex<HashMap<usize, Arc<GramInverse>>>,
}

impl std::fmt::Debug for Stft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stft")
            .field("config", &self.config)
            .finish()
    }
}

impl Stft {
    pub fn new(config: StftConfig) -> Result<Self> {
        validate_config(&config)?;
        let window = hann_window(config.window_length)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            config,
            window,
            fft_forward: planner.plan_fft_forward(config.fft_length),
            fft_inverse: planner.plan_fft_inverse(config.fft_length),
            gram_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    fn pad(&self) -> usize {
        self.config.window_length / 2
    }

    /// Original-signal index covered by position `i` of frame `t`, if any.
    #[inline]
    fn sample_index(&self, t: usize, i: usize, len: usize) -> Option<usize> {
        (t * self.config.hop + i)
            .checked_sub(self.pad())
            .filter(|&n| n < len)
    }

    /// Windowed frames of the center-padded signal.
    pub fn frame(&self, x: &Waveform) -> Result<FramedSignal> {
        self.check_rate(x)?;
        let len = x.len();
        let wl = self.config.window_length;
        let frames = self.config.frame_count(len);
        let mut out = vec![0.0; frames * wl];
        for t in 0..frames {
            for (i, &w) in self.window.iter().enumerate() {
                if let Some(n) = self.sample_index(t, i, len) {
                    out[t * wl + i] = x.samples()[n] * w;
                }
            }
        }
        Ok(FramedSignal {
            frames: out,
            config: self.config,
            original_length: len,
        })
    }

    pub fn forward(&self, x: &Waveform) -> Result<ComplexSpectrogram> {
        let framed = self.frame(x)?;
        let n_fft = self.config.fft_length;
        let bins = self.config.bins();
        let frames = framed.frame_count();
        let mut data = Vec::with_capacity(frames * bins);
        let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
        for t in 0..frames {
            buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            for (b, &v) in buf.iter_mut().zip(framed.frame(t)) {
                b.re = v;
            }
            self.fft_forward.process(&mut buf);
            data.extend_from_slice(&buf[..bins]);
        }
        Ok(ComplexSpectrogram::from_parts_unchecked(
            data,
            frames,
            self.config,
            framed.original_length,
        ))
    }

    /// Least-squares inverse: the unique signal whose STFT is closest to `spec`.
    ///
    /// The signal length is `spec.original_length()`; spectrograms built
    /// without an originating waveform (`original_length == 0` with a frame
    /// count that does not match) use the natural length `(frames - 1) * hop`.
    pub fn inverse(&self, spec: &ComplexSpectrogram) -> Result<Waveform> {
        if *spec.config() != self.config {
            return Err(Error::invalid(
                "spectrogram configuration differs from the operator's",
            ));
        }
        let len = self.signal_length(spec)?;
        let gram = self.gram_inverse(len)?;
        let mut x = self.adjoint(spec, len);
        gram.apply(&mut x);
        Waveform::new(x, self.config.sample_rate)
    }

    /// `S{S⁻¹{X}}`: orthogonal projection onto the consistent spectrograms.
    pub fn project(&self, spec: &ComplexSpectrogram) -> Result<ComplexSpectrogram> {
        let x = self.inverse(spec)?;
        self.forward(&x)
    }

    fn signal_length(&self, spec: &ComplexSpectrogram) -> Result<usize> {
        let frames = spec.frames();
        if frames == 0 {
            return Err(Error::invalid("cannot invert a spectrogram with no frames"));
        }
        let original = spec.original_length();
        if self.config.frame_count(original) == frames {
            Ok(original)
        } else if original == 0 {
            Ok((frames - 1) * self.config.hop)
        } else {
            Err(Error::invalid(format!(
                "{frames} frames cannot originate from {original} samples (expected {})",
                self.config.frame_count(original)
            )))
        }
    }

    /// Transpose of the forward operator, restricted to a signal of `len` samples.
    fn adjoint(&self, spec: &ComplexSpectrogram, len: usize) -> Vec<f64> {
        let n_fft = self.config.fft_length;
        let mut out = vec![0.0; len];
        let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
        for t in 0..spec.frames() {
            buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            buf[..spec.bins()].copy_from_slice(spec.frame(t));
            // Unnormalized inverse DFT of the zero-filled one-sided spectrum; its real
            // part is the transpose of the one-sided forward DFT.
            self.fft_inverse.process(&mut buf);
            for (i, &w) in self.window.iter().enumerate() {
                if let Some(n) = self.sample_index(t, i, len) {
                    out[n] += w * buf[i].re;
                }
            }
        }
        out
    }

    fn gram_inverse(&self, len: usize) -> Result<Arc<GramInverse>> {
        let mut cache = self.gram_cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(g) = cache.get(&len) {
            return Ok(Arc::clone(g));
        }
        let g = Arc::new(GramInverse::build(self, len)?);
        cache.insert(len, Arc::clone(&g));
        Ok(g)
    }

    fn check_rate(&self, x: &Waveform) -> Result<()> {
        if x.sample_rate() != self.config.sample_rate {
            return Err(Error::invalid(format!(
                "waveform sample rate {} Hz does not match STFT config {} Hz",
                x.sample_rate(),
                self.config.sample_rate
            )));
        }
        Ok(())
    }
}

/// Inverse of the forward operator's Gram matrix `SᵀS` for one signal length.
///
/// `SᵀS = A + ½ V Vᵀ` where `A = (N/2)·diag(envelope)` and `V` stacks, per
/// frame, the placed window and the placed window modulated by `(-1)^i`
/// (the DC and Nyquist rows of the one-sided DFT).
struct GramInverse {
    frames: usize,
    hop: usize,
    pad: usize,
    len: usize,
    /// `1 / A[n]`.
    inv_diag: Vec<f64>,
    window: Vec<f64>,
    capacitance: BandedCholesky,
}

impl GramInverse {
    fn build(stft: &Stft, len: usize) -> Result<Self> {
        let cfg = stft.config;
        let frames = cfg.frame_count(len);
        let half_n = cfg.fft_length as f64 / 2.0;
        let window = stft.window.clone();

        let mut envelope = vec![0.0; len];
        for t in 0..frames {
            for (i, &w) in window.iter().enumerate() {
                if let Some(n) = stft.sample_index(t, i, len) {
                    envelope[n] += w * w;
                }
            }
        }
        if let Some(index) = envelope.iter().position(|&e| e < 1e-12) {
            return Err(Error::DegenerateWindow { index });
        }
        let inv_diag: Vec<f64> = envelope.iter().map(|e| 1.0 / (half_n * e)).collect();

        // Frames t and s share samples only when |t - s| * hop < window_length.
        let overlap = cfg.window_length / cfg.hop;
        let half_bandwidth = 2 * overlap - 1;
        let mut cap = BandedSpd::zeros(2 * frames, half_bandwidth);
        let shifted = |i: usize| if i.is_multiple_of(2) { 1.0 } else { -1.0 };
        for t in 0..frames {
            for s in t.saturating_sub(overlap - 1)..=t {
                let mut dd = 0.0;
                let mut dn = 0.0;
                let mut nd = 0.0;
                let mut nn = 0.0;
                let offset = (t - s) * cfg.hop;
                for i in 0..cfg.window_length - offset {
                    // Position i of frame t and position i + offset of frame s coincide.
                    let Some(n) = stft.sample_index(t, i, len) else {
                        continue;
                    };
                    let j = i + offset;
                    let a = window[i] * window[j] * inv_diag[n];
                    dd += a;
                    dn += a * shifted(j);
                    nd += a * shifted(i);
                    nn += a * shifted(i) * shifted(j);
                }
                let (p, q) = (2 * t, 2 * s);
                cap.add(p, q, 0.5 * dd);
                cap.add(p + 1, q + 1, 0.5 * nn);
                cap.add(p + 1, q, 0.5 * nd);
                if s < t {
                    cap.add(p, q + 1, 0.5 * dn);
                }
            }
            cap.add(2 * t, 2 * t, 1.0);
            cap.add(2 * t + 1, 2 * t + 1, 1.0);
        }
        let capacitance = cap
            .cholesky()
            .ok_or_else(|| Error::invalid("STFT Gram correction is not positive definite"))?;
        Ok(Self {
            frames,
            hop: cfg.hop,
            pad: cfg.window_length / 2,
            len,
            inv_diag,
            window,
            capacitance,
        })
    }

    fn sample_index(&self, t: usize, i: usize) -> Option<usize> {
        (t * self.hop + i)
            .checked_sub(self.pad)
            .filter(|&n| n < self.len)
    }

    /// Overwrites `x` (= `Sᵀ X`) with `(SᵀS)⁻¹ x` via the Woodbury identity.
    fn apply(&self, x: &mut [f64]) {
        for (v, d) in x.iter_mut().zip(&self.inv_diag) {
            *v *= d;
        }
        let mut y = vec![0.0; 2 * self.frames];
        for t in 0..self.frames {
            let (mut dc, mut ny) = (0.0, 0.0);
            for (i, &w) in self.window.iter().enumerate() {
                if let Some(n) = self.sample_index(t, i) {
                    let v = w * x[n];
                    dc += v;
                    ny += if i % 2 == 0 { v } else { -v };
                }
            }
            y[2 * t] = dc;
            y[2 * t + 1] = ny;
        }
        self.capacitance.solve_in_place(&mut y);
        for t in 0..self.frames {
            let (dc, ny) = (y[2 * t], y[2 * t + 1]);
            for (i, &w) in self.window.iter().enumerate() {
                if let Some(n) = self.sample_index(t, i) {
                    let v = if i % 2 == 0 { dc + ny } else { dc - ny };
                    x[n] -= 0.5 * w * v * self.inv_diag[n];
                }
            }
        }
    }
}
