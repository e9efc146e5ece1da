//! Shared domain types.

use num_complex::Complex64;

use crate::error::{ConfigError, Error, Result};

/// Real-valued mono time-domain signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample_rate must be positive"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn zeros(len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }

    /// Rounds every sample to the nearest `f32`, as stored in a float WAV file.
    pub fn quantized_f32(&self) -> Self {
        Self {
            samples: self.samples.iter().map(|&s| s as f32 as f64).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Window, hop and FFT geometry shared by every transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StftConfig {
    pub window_length: usize,
    pub hop: usize,
    pub fft_length: usize,
    pub sample_rate: u32,
}

impl StftConfig {
    pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;

    pub fn new(
        window_length: usize,
        hop: usize,
        fft_length: usize,
        sample_rate: u32,
    ) -> Result<Self> {
        let cfg = Self {
            window_length,
            hop,
            fft_length,
            sample_rate,
        };
        validate_config(&cfg)?;
        Ok(cfg)
    }

    pub fn bins(&self) -> usize {
        self.fft_length / 2 + 1
    }

    /// Number of frames produced for a signal of `len` samples under center padding.
    pub fn frame_count(&self, len: usize) -> usize {
        len / self.hop + 1
    }
}

impl Default for StftConfig {
    /// 50 ms Hann windows, 10 ms hop, 1024-point FFT at 16 kHz.
    fn default() -> Self {
        Self {
            window_length: 800,
            hop: 160,
            fft_length: 1024,
            sample_rate: Self::DEFAULT_SAMPLE_RATE,
        }
    }
}

/// Checks every [`StftConfig`] invariant, reporting the first violation.
pub fn validate_config(config: &StftConfig) -> Result<(), ConfigError> {
    let StftConfig {
        window_length,
        hop,
        fft_length,
        sample_rate,
    } = *config;
    if window_length < 2 {
        return Err(ConfigError::WindowTooShort);
    }
    if hop == 0 {
        return Err(ConfigError::ZeroHop);
    }
    if sample_rate == 0 {
        return Err(ConfigError::ZeroSampleRate);
    }
    if hop > window_length {
        return Err(ConfigError::HopExceedsWindow { hop, window_length });
    }
    if fft_length < window_length {
        return Err(ConfigError::FftShorterThanWindow {
            fft_length,
            window_length,
        });
    }
    if fft_length % 2 != 0 {
        return Err(ConfigError::OddFftLength(fft_length));
    }
    if window_length % hop != 0 {
        return Err(ConfigError::WindowNotMultipleOfHop { window_length, hop });
    }
    Ok(())
}

/// Frames-major (T × F) matrix of complex time-frequency coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    data: Vec<Complex64>,
    frames: usize,
    config: StftConfig,
    original_length: usize,
}

impl ComplexSpectrogram {
    pub fn new(
        data: Vec<Complex64>,
        frames: usize,
        config: StftConfig,
        original_length: usize,
    ) -> Result<Self> {
        validate_config(&config)?;
        let bins = config.bins();
        if data.len() != frames * bins {
            return Err(Error::invalid(format!(
                "data holds {} values, expected {frames} frames x {bins} bins",
                data.len()
            )));
        }
        if let Some(i) = data
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::invalid(format!(
                "non-finite coefficient at index {i}"
            )));
        }
        Ok(Self {
            data,
            frames,
            config,
            original_length,
        })
    }

    pub fn zeros(frames: usize, config: StftConfig, original_length: usize) -> Result<Self> {
        Self::new(
            vec![Complex64::new(0.0, 0.0); frames * config.bins()],
            frames,
            config,
            original_length,
        )
    }

    pub(crate) fn from_parts_unchecked(
        data: Vec<Complex64>,
        frames: usize,
        config: StftConfig,
        original_length: usize,
    ) -> Self {
        debug_assert_eq!(data.len(), frames * config.bins());
        Self {
            data,
            frames,
            config,
            original_length,
        }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.config.bins()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.frames, self.bins())
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn original_length(&self) -> usize {
        self.original_length
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn frame(&self, t: usize) -> &[Complex64] {
        let bins = self.bins();
        &self.data[t * bins..(t + 1) * bins]
    }

    pub fn get(&self, frame: usize, bin: usize) -> Complex64 {
        self.data[frame * self.bins() + bin]
    }

    /// Same geometry, new coefficients.
    pub fn with_data(&self, data: Vec<Complex64>) -> Result<Self> {
        Self::new(data, self.frames, self.config, self.original_length)
    }

    pub(crate) fn with_data_unchecked(&self, data: Vec<Complex64>) -> Self {
        Self::from_parts_unchecked(data, self.frames, self.config, self.original_length)
    }

    pub fn map(&self, f: impl FnMut(&Complex64) -> Complex64) -> Self {
        self.with_data_unchecked(self.data.iter().map(f).collect())
    }

    pub fn zip_map(
        &self,
        other: &Self,
        mut f: impl FnMut(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.ensure_same_shape(other)?;
        Ok(self.with_data_unchecked(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|z| z * c)
    }

    /// Frobenius norm over the complex entries.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Real inner product treating each entry as a (re, im) pair.
    pub fn real_inner(&self, other: &Self) -> Result<f64> {
        self.ensure_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum())
    }

    /// Rounds every component to `f32`, the precision stored in CSPEC files.
    pub fn quantized_f32(&self) -> Self {
        self.map(|z| Complex64::new(z.re as f32 as f64, z.im as f32 as f64))
    }

    pub fn ensure_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                actual: other.shape(),
            });
        }
        if self.config != other.config {
            return Err(Error::invalid(
                "spectrograms use different STFT configurations",
            ));
        }
        Ok(())
    }
}

/// Elementwise multiplier for a spectrogram, real or complex.
#[derive(Debug, Clone, PartialEq)]
pub enum Mask {
    Real {
        data: Vec<f64>,
        frames: usize,
        bins: usize,
    },
    Complex {
        data: Vec<Complex64>,
        frames: usize,
        bins: usize,
    },
}

impl Mask {
    pub fn real(data: Vec<f64>, frames: usize, bins: usize) -> Result<Self> {
        check_mask_len(data.len(), frames, bins)?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("mask contains non-finite values"));
        }
        Ok(Mask::Real { data, frames, bins })
    }

    pub fn complex(data: Vec<Complex64>, frames: usize, bins: usize) -> Result<Self> {
        check_mask_len(data.len(), frames, bins)?;
        if data.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("mask contains non-finite values"));
        }
        Ok(Mask::Complex { data, frames, bins })
    }

    pub fn shape(&self) -> (usize, usize) {
        match *self {
            Mask::Real { frames, bins, .. } | Mask::Complex { frames, bins, .. } => (frames, bins),
        }
    }

    pub fn value(&self, index: usize) -> Complex64 {
        match self {
            Mask::Real { data, .. } => Complex64::new(data[index], 0.0),
            Mask::Complex { data, .. } => data[index],
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Mask::Real { .. })
    }
}

fn check_mask_len(len: usize, frames: usize, bins: usize) -> Result<()> {
    if len != frames * bins {
        return Err(Error::invalid(format!(
            "mask holds {len} values, expected {frames} x {bins}"
        )));
    }
    Ok(())
}

/// `J >= 2` source estimates together with the mixture they should sum to.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSet {
    sources: Vec<ComplexSpectrogram>,
    mixture: ComplexSpectrogram,
}

impl SourceSet {
    pub fn new(sources: Vec<ComplexSpectrogram>, mixture: ComplexSpectrogram) -> Result<Self> {
        if sources.len() < 2 {
            return Err(Error::invalid(format!(
                "a source set needs at least 2 sources, got {}",
                sources.len()
            )));
        }
        for s in &sources {
            mixture.ensure_same_shape(s)?;
        }
        Ok(Self { sources, mixture })
    }

    pub fn sources(&self) -> &[ComplexSpectrogram] {
        &self.sources
    }

    pub fn source(&self, j: usize) -> &ComplexSpectrogram {
        &self.sources[j]
    }

    pub fn mixture(&self) -> &ComplexSpectrogram {
        &self.mixture
    }

    pub fn num_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.mixture.shape()
    }

    pub fn into_parts(self) -> (Vec<ComplexSpectrogram>, ComplexSpectrogram) {
        (self.sources, self.mixture)
    }

    /// Per-bin sum of the source estimates.
    pub fn estimated_mixture(&self) -> ComplexSpectrogram {
        let mut acc = self.sources[0].data().to_vec();
        for s in &self.sources[1..] {
            for (a, b) in acc.iter_mut().zip(s.data()) {
                *a += b;
            }
        }
        self.mixture.with_data_unchecked(acc)
    }

    pub(crate) fn from_parts_unchecked(
        sources: Vec<ComplexSpectrogram>,
        mixture: ComplexSpectrogram,
    ) -> Self {
        Self { sources, mixture }
    }
}
