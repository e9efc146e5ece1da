//! Evaluation metrics and the power-compressed spectral training loss.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::error::{Error, Result};
use crate::types::{ComplexSpectrogram, Waveform};

/// Residual energy below which SI-SDR reports perfect reconstruction.
pub const PERFECT_RESIDUAL: f64 = 1e-30;
/// Magnitude floor for the `|X̂|^(p-1)` factor of the loss gradient.
pub const GRADIENT_EPS: f64 = 1e-8;

/// Scale-invariant signal-to-distortion ratio in dB.
///
/// Returns `+inf` when the residual after optimal scaling is below
/// [`PERFECT_RESIDUAL`], and `-inf` when the estimate carries no component
/// along the reference.
pub fn si_sdr(reference: &Waveform, estimate: &Waveform) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(Error::invalid(format!(
            "reference has {} samples but estimate has {}",
            reference.len(),
            estimate.len()
        )));
    }
    let (x, xh) = (reference.samples(), estimate.samples());
    let ref_energy: f64 = x.iter().map(|v| v * v).sum();
    if ref_energy == 0.0 {
        return Err(Error::invalid("reference signal is all zeros"));
    }
    let alpha = x.iter().zip(xh).map(|(a, b)| a * b).sum::<f64>() / ref_energy;
    let target = alpha * alpha * ref_energy;
    let residual: f64 = x.iter().zip(xh).map(|(a, b)| (alpha * a - b).powi(2)).sum();
    if target == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if residual < PERFECT_RESIDUAL {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (target / residual).log10())
}

/// `si_sdr(reference, estimate) − si_sdr(reference, mixture)`; exactly zero
/// when both scores coincide, including two perfect scores.
pub fn si_sdr_improvement(
    reference: &Waveform,
    estimate: &Waveform,
    mixture: &Waveform,
) -> Result<f64> {
    if mixture.len() != reference.len() {
        return Err(Error::invalid(format!(
            "reference has {} samples but mixture has {}",
            reference.len(),
            mixture.len()
        )));
    }
    let est = si_sdr(reference, estimate)?;
    let mix = si_sdr(reference, mixture)?;
    Ok(if est == mix { 0.0 } else { est - mix })
}

pub const DEFAULT_POWER: f64 = 0.3;

#[inline]
fn compress(z: Complex64, p: f64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z * r.powf(p - 1.0)
    }
}

/// `|X|^p · e^{j∠X}` per bin, with `0 ↦ 0`.
pub fn power_compress(spec: &ComplexSpectrogram, p: f64) -> Result<ComplexSpectrogram> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!(
            "compression exponent {p} outside (0, 1]"
        )));
    }
    Ok(spec.map(|&z| compress(z, p)))
}

/// Weighted sum over sources and bins of
/// `(|X|^p − |X̂|^p)² + c·|X^p − X̂^p|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralLoss {
    pub power: f64,
    pub complex_weight: f64,
    pub source_weights: Vec<f64>,
}

impl Default for SpectralLoss {
    /// `p = 0.3`, `c = 0.2`, speech weight 0.8 and noise weight 0.2.
    fn default() -> Self {
        Self {
            power: DEFAULT_POWER,
            complex_weight: 0.2,
            source_weights: vec![0.8, 0.2],
        }
    }
}

impl SpectralLoss {
    fn check(&self, truth: &[ComplexSpectrogram], estimate: &[ComplexSpectrogram]) -> Result<()> {
        if !(self.power > 0.0 && self.power <= 1.0) {
            return Err(Error::invalid(format!(
                "compression exponent {} outside (0, 1]",
                self.power
            )));
        }
        if truth.len() != estimate.len() || truth.len() != self.source_weights.len() {
            return Err(Error::invalid(format!(
                "loss needs matching source counts: {} truths, {} estimates, {} weights",
                truth.len(),
                estimate.len(),
                self.source_weights.len()
            )));
        }
        let total: f64 = self.source_weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "source weights sum to {total}, expected 1"
            )));
        }
        for (t, e) in truth.iter().zip(estimate) {
            t.ensure_same_shape(e)?;
        }
        Ok(())
    }

    pub fn value(
        &self,
        truth: &[ComplexSpectrogram],
        estimate: &[ComplexSpectrogram],
    ) -> Result<f64> {
        self.check(truth, estimate)?;
        let p = self.power;
        let mut total = 0.0;
        for ((t, e), &z) in truth.iter().zip(estimate).zip(&self.source_weights) {
            let mut acc = 0.0;
            for (&x, &xh) in t.data().iter().zip(e.data()) {
                let mag = x.norm().powf(p) - xh.norm().powf(p);
                let cplx = (compress(x, p) - compress(xh, p)).norm_sqr();
                acc += mag * mag + self.complex_weight * cplx;
            }
            total += z * acc;
        }
        Ok(total)
    }

    /// Analytic gradient with respect to the real and imaginary parts of each estimate.
    pub fn gradient(
        &self,
        truth: &[ComplexSpectrogram],
        estimate: &[ComplexSpectrogram],
    ) -> Result<Vec<ComplexSpectrogram>> {
        self.check(truth, estimate)?;
        let p = self.power;
        let mut grads = Vec::with_capacity(estimate.len());
        for ((t, e), &z) in truth.iter().zip(estimate).zip(&self.source_weights) {
            let data = t
                .data()
                .iter()
                .zip(e.data())
                .map(|(&x, &xh)| z * self.bin_gradient(x, xh, p))
                .collect();
            grads.push(e.with_data_unchecked(data));
        }
        Ok(grads)
    }

    fn bin_gradient(&self, x: Complex64, xh: Complex64, p: f64) -> Complex64 {
        let r = xh.norm().max(GRADIENT_EPS);
        let u = xh / r;
        let scale = r.powf(p - 1.0);
        // d|X̂|^p = p r^(p-1) u
        let mag_err = x.norm().powf(p) - r.powf(p);
        let g_mag = u * (-2.0 * mag_err * p * scale);
        // d(X̂ r^(p-1)) is the symmetric map r^(p-1) (I + (p-1) u uᵀ)
        let diff = compress(x, p) - xh * scale;
        let along = u.re * diff.re + u.im * diff.im;
        let g_cplx = (diff + u * ((p - 1.0) * along)) * (-2.0 * self.complex_weight * scale);
        g_mag + g_cplx
    }
}

pub fn spectral_loss(
    truth: &[ComplexSpectrogram],
    estimate: &[ComplexSpectrogram],
    source_weights: &[f64],
) -> Result<f64> {
    SpectralLoss {
        source_weights: source_weights.to_vec(),
        ..SpectralLoss::default()
    }
    .value(truth, estimate)
}

pub fn grad_spectral_loss(
    truth: &[ComplexSpectrogram],
    estimate: &[ComplexSpectrogram],
    source_weights: &[f64],
) -> Result<Vec<ComplexSpectrogram>> {
    SpectralLoss {
        source_weights: source_weights.to_vec(),
        ..SpectralLoss::default()
    }
    .gradient(truth, estimate)
}

/// Mean over bins of `|A − B|²`.
pub fn mag_sq_error(a: &ComplexSpectrogram, b: &ComplexSpectrogram) -> Result<f64> {
    a.ensure_same_shape(b)?;
    let n = a.data().len();
    if n == 0 {
        return Ok(0.0);
    }
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    Ok(sum / n as f64)
}

/// Named scalar results, serialized as a flat JSON object with sorted keys.
/// Infinite values are written as the strings `"inf"` and `"-inf"`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsReport {
    values: BTreeMap<String, f64>,
}

impl MetricsReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.values.insert(key.into(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

impl Serialize for MetricsReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.values.len()))?;
        for (k, v) in &self.values {
            if v.is_nan() {
                map.serialize_entry(k, "nan")?;
            } else if v.is_infinite() {
                map.serialize_entry(k, if *v > 0.0 { "inf" } else { "-inf" })?;
            } else {
                map.serialize_entry(k, v)?;
            }
        }
        map.end()
    }
}
