//! Analysis window construction.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Periodic (DFT-even) Hann window, `w[n] = 0.5 * (1 - cos(2πn / length))`.
///
/// The periodic form makes the squared-window overlap-add sum exactly
/// constant whenever the window length is a multiple of the hop.
pub fn hann_window(length: usize) -> Result<Vec<f64>> {
    if length < 2 {
        return Err(Error::invalid(format!(
            "hann window length must be at least 2, got {length}"
        )));
    }
    let n = length as f64;
    Ok((0..length)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n).cos()))
        .collect())
}

/// Sum of `window[n + k*hop]^power` over all `k`, folded onto one hop period.
pub(crate) fn folded_power_sum(window: &[f64], hop: usize, power: i32) -> Vec<f64> {
    let mut acc = vec![0.0; hop];
    for (i, &w) in window.iter().enumerate() {
        acc[i % hop] += w.powi(power);
    }
    acc
}
