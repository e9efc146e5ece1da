//! STFT-consistency and mixture-consistency projection layers.
//!
//! Both projections are linear (the weighted mixture projection is linear
//! for a fixed weight field), so each comes with an exact vector-Jacobian
//! product for use as a differentiable layer. Complex entries are treated as
//! pairs of independent real coordinates throughout.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::stft::Stft;
use crate::types::{ComplexSpectrogram, SourceSet};

/// Per-bin weight sums at or below this fall back to the uniform `1/J` split.
pub const DEGENERATE_WEIGHT_SUM: f64 = 1e-12;

/// Per-source, per-bin mixture-projection weights.
///
/// Unnormalized fields hold variances `v_j`; the residual share of source `j`
/// is `v_j / Σ v`. Normalized fields hold the shares `w_j` directly.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    weights: Vec<Vec<f64>>,
    frames: usize,
    bins: usize,
    normalized: bool,
}

impl WeightField {
    pub fn new(
        weights: Vec<Vec<f64>>,
        frames: usize,
        bins: usize,
        normalized: bool,
    ) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::invalid("a weight field needs at least 2 sources"));
        }
        for w in &weights {
            if w.len() != frames * bins {
                return Err(Error::invalid(format!(
                    "weight plane holds {} values, expected {frames} x {bins}",
                    w.len()
                )));
            }
            if let Some(v) = w.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::invalid(format!(
                    "weights must be finite and nonnegative, got {v}"
                )));
            }
        }
        if normalized {
            for i in 0..frames * bins {
                let s: f64 = weights.iter().map(|w| w[i]).sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid(format!(
                        "normalized weights sum to {s} at bin index {i}"
                    )));
                }
            }
        }
        Ok(Self {
            weights,
            frames,
            bins,
            normalized,
        })
    }

    /// Two-source shares from a per-bin speech share: `w_2 = 1 - w_1`.
    pub fn from_speech_share(share: Vec<f64>, frames: usize, bins: usize) -> Result<Self> {
        if let Some(v) = share.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("speech share {v} outside [0, 1]")));
        }
        let noise = share.iter().map(|w| 1.0 - w).collect();
        Self::new(vec![share, noise], frames, bins, true)
    }

    /// The same value for every source and bin.
    pub fn uniform(value: f64, sources: usize, frames: usize, bins: usize) -> Result<Self> {
        Self::new(
            vec![vec![value; frames * bins]; sources],
            frames,
            bins,
            false,
        )
    }

    pub fn num_sources(&self) -> usize {
        self.weights.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.frames, self.bins)
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn plane(&self, j: usize) -> &[f64] {
        &self.weights[j]
    }

    /// Residual shares at one bin, written into `out` (length `J`).
    fn shares_at(&self, index: usize, out: &mut [f64]) {
        let j_count = out.len();
        if self.normalized {
            for (o, w) in out.iter_mut().zip(&self.weights) {
                *o = w[index];
            }
            return;
        }
        let total: f64 = self.weights.iter().map(|w| w[index]).sum();
        if total <= DEGENERATE_WEIGHT_SUM {
            out.iter_mut().for_each(|o| *o = 1.0 / j_count as f64);
        } else {
            for (o, w) in out.iter_mut().zip(&self.weights) {
                *o = w[index] / total;
            }
        }
    }

    fn check_against(&self, set: &SourceSet) -> Result<()> {
        if self.num_sources() != set.num_sources() {
            return Err(Error::invalid(format!(
                "weight field has {} sources, source set has {}",
                self.num_sources(),
                set.num_sources()
            )));
        }
        if self.shape() != set.shape() {
            return Err(Error::ShapeMismatch {
                expected: set.shape(),
                actual: self.shape(),
            });
        }
        Ok(())
    }
}

/// Weighting scheme for the mixture projection.
#[derive(Debug, Clone, PartialEq)]
pub enum MixtureWeighting {
    /// Equal `1/J` split of the residual.
    Uniform,
    /// `v_j = |X̂_j|²`, recomputed from the estimates being projected.
    MagnitudeSquared,
    /// Externally supplied weights, e.g. shares predicted by a network.
    Supplied(WeightField),
}

impl MixtureWeighting {
    pub fn weights_for(&self, set: &SourceSet) -> Option<WeightField> {
        match self {
            MixtureWeighting::Uniform => None,
            MixtureWeighting::MagnitudeSquared => Some(magnitude_squared_weights(set)),
            MixtureWeighting::Supplied(w) => Some(w.clone()),
        }
    }

    pub fn project(&self, set: &SourceSet) -> Result<SourceSet> {
        match self.weights_for(set) {
            None => project_mixture_consistency(set),
            Some(w) => project_mixture_weighted(set, &w),
        }
    }
}

/// `S{S⁻¹{X}}`.
pub fn project_stft_consistency(spec: &ComplexSpectrogram) -> Result<ComplexSpectrogram> {
    Stft::new(*spec.config())?.project(spec)
}

/// Projects every source estimate onto the consistent spectrograms; the
/// mixture is passed through.
pub fn project_sources_stft(stft: &Stft, set: &SourceSet) -> Result<SourceSet> {
    let sources = set
        .sources()
        .iter()
        .map(|s| stft.project(s))
        .collect::<Result<Vec<_>>>()?;
    SourceSet::new(sources, set.mixture().clone())
}

/// `X̲_j = X̂_j + (Y − Σ_j' X̂_j') / J` at every bin.
pub fn project_mixture_consistency(set: &SourceSet) -> Result<SourceSet> {
    let j_count = set.num_sources();
    let shares = vec![1.0 / j_count as f64; j_count];
    Ok(distribute_residual(set, |_, out| {
        out.copy_from_slice(&shares)
    }))
}

/// `X̲_j = X̂_j + (v_j / Σ_j' v_j') (Y − Ŷ)`, or `w_j (Y − Ŷ)` for normalized weights.
pub fn project_mixture_weighted(set: &SourceSet, weights: &WeightField) -> Result<SourceSet> {
    weights.check_against(set)?;
    Ok(distribute_residual(set, |i, out| weights.shares_at(i, out)))
}

fn distribute_residual(set: &SourceSet, mut shares: impl FnMut(usize, &mut [f64])) -> SourceSet {
    let residual = set
        .mixture()
        .sub(&set.estimated_mixture())
        .expect("same shape");
    let j_count = set.num_sources();
    let mut out: Vec<Vec<Complex64>> = set.sources().iter().map(|s| s.data().to_vec()).collect();
    let mut share = vec![0.0; j_count];
    for (i, r) in residual.data().iter().enumerate() {
        shares(i, &mut share);
        for (o, &w) in out.iter_mut().zip(&share) {
            o[i] += r * w;
        }
    }
    let sources = out
        .into_iter()
        .map(|d| set.mixture().with_data_unchecked(d))
        .collect();
    SourceSet::from_parts_unchecked(sources, set.mixture().clone())
}

/// Variances `v_j = |X̂_j|²`: bins where a source is silent receive no correction on it.
pub fn magnitude_squared_weights(set: &SourceSet) -> WeightField {
    let (frames, bins) = set.shape();
    let weights = set
        .sources()
        .iter()
        .map(|s| s.data().iter().map(|z| z.norm_sqr()).collect())
        .collect();
    WeightField {
        weights,
        frames,
        bins,
        normalized: false,
    }
}

/// Mixture projection followed by STFT projection of each source.
///
/// With uniform weights the order does not matter whenever the mixture is a
/// consistent spectrogram; per-bin weights break that commutation.
pub fn project_joint(set: &SourceSet, weights: Option<&WeightField>) -> Result<SourceSet> {
    let stft = Stft::new(*set.mixture().config())?;
    project_joint_with(&stft, set, weights)
}

pub fn project_joint_with(
    stft: &Stft,
    set: &SourceSet,
    weights: Option<&WeightField>,
) -> Result<SourceSet> {
    let mixed = match weights {
        None => project_mixture_consistency(set)?,
        Some(w) => project_mixture_weighted(set, w)?,
    };
    project_sources_stft(stft, &mixed)
}

/// VJP of [`project_mixture_consistency`].
///
/// The per-bin Jacobian with respect to the estimates is the symmetric
/// matrix `I − 11ᵀ/J`; with respect to the mixture it is `1/J` for every source.
pub fn vjp_mixture_consistency(
    upstream: &[ComplexSpectrogram],
) -> Result<(Vec<ComplexSpectrogram>, ComplexSpectrogram)> {
    let j_count = upstream.len();
    if j_count < 2 {
        return Err(Error::invalid(
            "mixture projection needs at least 2 sources",
        ));
    }
    let shares = vec![1.0 / j_count as f64; j_count];
    vjp_residual_split(upstream, |_, out| out.copy_from_slice(&shares))
}

/// VJP of [`project_mixture_weighted`] for a fixed weight field.
pub fn vjp_mixture_weighted(
    upstream: &[ComplexSpectrogram],
    weights: &WeightField,
) -> Result<(Vec<ComplexSpectrogram>, ComplexSpectrogram)> {
    if upstream.len() != weights.num_sources() {
        return Err(Error::invalid(
            "upstream and weight field source counts differ",
        ));
    }
    if let Some(u) = upstream.first() {
        if u.shape() != weights.shape() {
            return Err(Error::ShapeMismatch {
                expected: weights.shape(),
                actual: u.shape(),
            });
        }
    }
    vjp_residual_split(upstream, |i, out| weights.shares_at(i, out))
}

fn vjp_residual_split(
    upstream: &[ComplexSpectrogram],
    mut shares: impl FnMut(usize, &mut [f64]),
) -> Result<(Vec<ComplexSpectrogram>, ComplexSpectrogram)> {
    let first = &upstream[0];
    for u in &upstream[1..] {
        first.ensure_same_shape(u)?;
    }
    let j_count = upstream.len();
    let n = first.data().len();
    let mut grad_sources: Vec<Vec<Complex64>> =
        upstream.iter().map(|u| u.data().to_vec()).collect();
    let mut grad_mixture = vec![Complex64::new(0.0, 0.0); n];
    let mut share = vec![0.0; j_count];
    for i in 0..n {
        shares(i, &mut share);
        let weighted: Complex64 = upstream
            .iter()
            .zip(&share)
            .map(|(u, &w)| u.data()[i] * w)
            .sum();
        grad_mixture[i] = weighted;
        for g in grad_sources.iter_mut() {
            g[i] -= weighted;
        }
    }
    Ok((
        grad_sources
            .into_iter()
            .map(|d| first.with_data_unchecked(d))
            .collect(),
        first.with_data_unchecked(grad_mixture),
    ))
}

/// VJP of [`project_stft_consistency`].
///
/// The projection is orthogonal, hence self-adjoint, so this is the
/// projection of the upstream gradient.
pub fn vjp_stft_consistency(upstream: &ComplexSpectrogram) -> Result<ComplexSpectrogram> {
    project_stft_consistency(upstream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::StftConfig;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// One-bin spectrograms (fft_length 2 gives 2 bins; we use frame count 1).
    fn single(values: &[Complex64]) -> ComplexSpectrogram {
        let cfg = StftConfig::new(2, 1, 2, 16_000).unwrap();
        ComplexSpectrogram::new(values.to_vec(), 1, cfg, 0).unwrap()
    }

    fn set(sources: &[Complex64], mixture: Complex64) -> SourceSet {
        SourceSet::new(
            sources.iter().map(|&s| single(&[s, c(0.0, 0.0)])).collect(),
            single(&[mixture, c(0.0, 0.0)]),
        )
        .unwrap()
    }

    #[test]
    fn residual_split_equally() {
        let s = set(&[c(1.0, 0.0), c(1.0, 0.0)], c(4.0, 0.0));
        let p = project_mixture_consistency(&s).unwrap();
        assert_eq!(p.source(0).get(0, 0), c(2.0, 0.0));
        assert_eq!(p.source(1).get(0, 0), c(2.0, 0.0));
    }

    #[test]
    fn consistent_input_unchanged() {
        let s = set(&[c(1.0, 2.0), c(-3.0, 0.5)], c(-2.0, 2.5));
        assert_eq!(project_mixture_consistency(&s).unwrap(), s);
    }

    #[test]
    fn weighted_split_follows_variances() {
        let s = set(&[c(0.0, 0.0), c(0.0, 0.0)], c(4.0, 0.0));
        let w = WeightField::new(vec![vec![1.0, 1.0], vec![3.0, 3.0]], 1, 2, false).unwrap();
        let p = project_mixture_weighted(&s, &w).unwrap();
        assert_eq!(p.source(0).get(0, 0), c(1.0, 0.0));
        assert_eq!(p.source(1).get(0, 0), c(3.0, 0.0));
    }

    #[test]
    fn magsq_weights_assign_residual_to_active_source() {
        let s = set(&[c(3.0, 4.0), c(0.0, 0.0)], c(5.0, 4.0));
        let w = magnitude_squared_weights(&s);
        assert_eq!(w.plane(0)[0], 25.0);
        assert_eq!(w.plane(1)[0], 0.0);
        let p = project_mixture_weighted(&s, &w).unwrap();
        assert_eq!(p.source(0).get(0, 0), c(5.0, 4.0));
        assert_eq!(p.source(1).get(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn degenerate_weights_fall_back_to_uniform() {
        let s = set(&[c(0.0, 0.0), c(0.0, 0.0)], c(2.0, -2.0));
        let w = magnitude_squared_weights(&s);
        let p = project_mixture_weighted(&s, &w).unwrap();
        assert_eq!(p.source(0).get(0, 0), c(1.0, -1.0));
        assert_eq!(p.source(1).get(0, 0), c(1.0, -1.0));
        assert!(p
            .source(0)
            .data()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite()));
    }

    #[test]
    fn weight_field_validation() {
        assert!(WeightField::new(vec![vec![1.0]], 1, 1, false).is_err());
        assert!(WeightField::new(vec![vec![-1.0], vec![1.0]], 1, 1, false).is_err());
        assert!(WeightField::new(vec![vec![0.3], vec![0.3]], 1, 1, true).is_err());
        assert!(WeightField::from_speech_share(vec![1.5], 1, 1).is_err());
        let w = WeightField::from_speech_share(vec![0.25], 1, 1).unwrap();
        assert_eq!(w.plane(1), &[0.75]);
    }

    #[test]
    fn learned_shares_used_directly() {
        let s = set(&[c(0.0, 0.0), c(0.0, 0.0)], c(4.0, 0.0));
        let w = WeightField::from_speech_share(vec![0.25, 0.5], 1, 2).unwrap();
        let p = project_mixture_weighted(&s, &w).unwrap();
        assert_eq!(p.source(0).get(0, 0), c(1.0, 0.0));
        assert_eq!(p.source(1).get(0, 0), c(3.0, 0.0));
    }

    #[test]
    fn mixture_vjp_closed_cases() {
        let up = vec![
            single(&[c(1.0, 0.0), c(0.0, 0.0)]),
            single(&[c(1.0, 0.0), c(0.0, 0.0)]),
        ];
        let (gx, gy) = vjp_mixture_consistency(&up).unwrap();
        assert_eq!(gx[0].get(0, 0), c(0.0, 0.0));
        assert_eq!(gx[1].get(0, 0), c(0.0, 0.0));
        assert_eq!(gy.get(0, 0), c(1.0, 0.0));

        let up = vec![
            single(&[c(1.0, 0.0), c(0.0, 0.0)]),
            single(&[c(0.0, 0.0), c(0.0, 0.0)]),
        ];
        let (gx, gy) = vjp_mixture_consistency(&up).unwrap();
        assert_eq!(gx[0].get(0, 0), c(0.5, 0.0));
        assert_eq!(gx[1].get(0, 0), c(-0.5, 0.0));
        assert_eq!(gy.get(0, 0), c(0.5, 0.0));
    }

    #[test]
    fn mismatched_weights_rejected() {
        let s = set(&[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], c(4.0, 0.0));
        let w = WeightField::uniform(1.0, 2, 1, 2).unwrap();
        assert!(project_mixture_weighted(&s, &w).is_err());
    }
}
