//! Cholesky factorization of symmetric positive-definite banded matrices.

/// Lower-triangular band storage: `rows[i][d]` holds entry `(i, i - d)`.
#[derive(Debug, Clone)]
pub(crate) struct BandedSpd {
    n: usize,
    half_bandwidth: usize,
    rows: Vec<Vec<f64>>,
}

impl BandedSpd {
    pub(crate) fn zeros(n: usize, half_bandwidth: usize) -> Self {
        Self {
            n,
            half_bandwidth,
            rows: vec![vec![0.0; half_bandwidth + 1]; n],
        }
    }

    /// Adds `value` to entry `(i, j)`; requires `j <= i` and `i - j <= half_bandwidth`.
    pub(crate) fn add(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(j <= i && i - j <= self.half_bandwidth);
        self.rows[i][i - j] += value;
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.rows[i][i - j]
    }

    /// In-place `L Lᵀ` factorization. Returns `None` if a pivot is not positive.
    pub(crate) fn cholesky(mut self) -> Option<BandedCholesky> {
        let hb = self.half_bandwidth;
        for i in 0..self.n {
            let lo = i.saturating_sub(hb);
            for j in lo..=i {
                let mut s = self.at(i, j);
                for k in lo..j {
                    s -= self.at(i, k) * self.at(j, k);
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return None;
                    }
                    self.rows[i][0] = s.sqrt();
                } else {
                    self.rows[i][i - j] = s / self.at(j, j);
                }
            }
        }
        Some(BandedCholesky { factor: self })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BandedCholesky {
    factor: BandedSpd,
}

impl BandedCholesky {
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let l = &self.factor;
        let hb = l.half_bandwidth;
        for i in 0..l.n {
            let mut s = b[i];
            for k in i.saturating_sub(hb)..i {
                s -= l.at(i, k) * b[k];
            }
            b[i] = s / l.at(i, i);
        }
        for i in (0..l.n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + hb + 1).min(l.n) {
                s -= l.at(k, i) * b[k];
            }
            b[i] = s / l.at(i, i);
        }
    }
}
