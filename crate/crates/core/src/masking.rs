//! Mask application and oracle masks.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::{ComplexSpectrogram, Mask, SourceSet};

pub const DEFAULT_PSM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskKind {
    #[default]
    Real,
    Complex,
}

/// How oracle masks are post-processed.
///
/// Mask-head output ranges (sigmoid `(0, 1)` for real masks, `tanh` per
/// component for complex masks) are metadata only; externally supplied masks
/// are not forced into them.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MaskSpec {
    pub kind: MaskKind,
    /// Clamp interval for real masks.
    pub clamp: Option<(f64, f64)>,
    /// Magnitude bound `|M| <= b` on oracle outputs, sign preserved.
    pub truncation: Option<f64>,
}

impl MaskSpec {
    pub fn validate(&self) -> Result<()> {
        if let Some((lo, hi)) = self.clamp {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(Error::invalid(format!("empty clamp interval [{lo}, {hi}]")));
            }
        }
        if let Some(b) = self.truncation {
            if b.is_nan() || b < 0.0 {
                return Err(Error::invalid(format!(
                    "truncation bound {b} must be nonnegative"
                )));
            }
        }
        Ok(())
    }

    /// Truncated phase-sensitive mask restricted to `[0, 1]`.
    pub fn unit_interval() -> Self {
        Self {
            clamp: Some((0.0, 1.0)),
            ..Self::default()
        }
    }

    /// Phase-sensitive mask with magnitude bounded by `bound`.
    pub fn bounded(bound: f64) -> Self {
        Self {
            truncation: Some(bound),
            ..Self::default()
        }
    }

    fn post_process(&self, m: f64) -> f64 {
        let m = match self.truncation {
            Some(b) => m.clamp(-b, b),
            None => m,
        };
        match self.clamp {
            Some((lo, hi)) => m.clamp(lo, hi),
            None => m,
        }
    }
}

/// Elementwise product `M ⊙ Y`.
pub fn apply_mask(mask: &Mask, spec: &ComplexSpectrogram) -> Result<ComplexSpectrogram> {
    if mask.shape() != spec.shape() {
        return Err(Error::ShapeMismatch {
            expected: spec.shape(),
            actual: mask.shape(),
        });
    }
    let data = match mask {
        Mask::Real { data, .. } => spec.data().iter().zip(data).map(|(y, m)| y * m).collect(),
        Mask::Complex { data, .. } => spec.data().iter().zip(data).map(|(y, m)| y * m).collect(),
    };
    spec.with_data(data)
}

/// Gradients of a real loss through [`apply_mask`].
///
/// Given the upstream gradient `g` of the masked spectrogram (real and
/// imaginary parts as independent coordinates), returns the gradients with
/// respect to the mask and to the spectrogram.
pub fn vjp_apply_mask(
    mask: &Mask,
    spec: &ComplexSpectrogram,
    upstream: &ComplexSpectrogram,
) -> Result<(Mask, ComplexSpectrogram)> {
    spec.ensure_same_shape(upstream)?;
    if mask.shape() != spec.shape() {
        return Err(Error::ShapeMismatch {
            expected: spec.shape(),
            actual: mask.shape(),
        });
    }
    let (frames, bins) = spec.shape();
    let grad_mask: Vec<Complex64> = upstream
        .data()
        .iter()
        .zip(spec.data())
        .map(|(g, y)| g * y.conj())
        .collect();
    let grad_mask = match mask {
        Mask::Real { .. } => Mask::real(grad_mask.iter().map(|z| z.re).collect(), frames, bins)?,
        Mask::Complex { .. } => Mask::complex(grad_mask, frames, bins)?,
    };
    let grad_spec = upstream.with_data(
        upstream
            .data()
            .iter()
            .enumerate()
            .map(|(i, g)| g * mask.value(i).conj())
            .collect(),
    )?;
    Ok((grad_mask, grad_spec))
}

/// Oracle phase-sensitive mask `|S| / |Y| · cos(∠S − ∠Y)`, with `|Y|` floored at `eps`.
pub fn oracle_psm(
    source: &ComplexSpectrogram,
    mixture: &ComplexSpectrogram,
    eps: f64,
) -> Result<Mask> {
    oracle_psm_with(source, mixture, eps, &MaskSpec::default())
}

pub fn oracle_psm_with(
    source: &ComplexSpectrogram,
    mixture: &ComplexSpectrogram,
    eps: f64,
    spec: &MaskSpec,
) -> Result<Mask> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::invalid("eps must be positive"));
    }
    spec.validate()?;
    source.ensure_same_shape(mixture)?;
    let data = source
        .data()
        .iter()
        .zip(mixture.data())
        .map(|(s, y)| {
            let s_mag = s.norm();
            let m = if s_mag == 0.0 {
                0.0
            } else {
                s_mag / y.norm().max(eps) * (s.arg() - y.arg()).cos()
            };
            spec.post_process(m)
        })
        .collect();
    let (frames, bins) = source.shape();
    Mask::real(data, frames, bins)
}

/// Oracle source estimates plus the masks that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEstimate {
    pub estimates: SourceSet,
    pub masks: Vec<Mask>,
}

/// Builds `Y = S + V`, masks it with the oracle PSM of each source, and returns
/// `{X̂_speech, X̂_noise}` against `Y`.
pub fn oracle_sources(
    speech: &ComplexSpectrogram,
    noise: &ComplexSpectrogram,
    spec: &MaskSpec,
) -> Result<SourceSet> {
    let mixture = speech.add(noise)?;
    Ok(oracle_sources_for_mixture(&[speech, noise], &mixture, spec)?.estimates)
}

/// Oracle PSM estimates for any number of references against a given mixture.
pub fn oracle_sources_for_mixture(
    references: &[&ComplexSpectrogram],
    mixture: &ComplexSpectrogram,
    spec: &MaskSpec,
) -> Result<OracleEstimate> {
    if spec.kind == MaskKind::Complex {
        return Err(Error::invalid(
            "the phase-sensitive oracle produces real masks only",
        ));
    }
    let mut masks = Vec::with_capacity(references.len());
    let mut estimates = Vec::with_capacity(references.len());
    for r in references {
        let m = oracle_psm_with(r, mixture, DEFAULT_PSM_EPS, spec)?;
        estimates.push(apply_mask(&m, mixture)?);
        masks.push(m);
    }
    Ok(OracleEstimate {
        estimates: SourceSet::new(estimates, mixture.clone())?,
        masks,
    })
}
