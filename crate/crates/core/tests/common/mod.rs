#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use spectral_consistency::mixer::SplitMix64;
use spectral_consistency::{ComplexSpectrogram, SourceSet, Stft, StftConfig, Waveform};

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::new(seed ^ 0x005E_ED0F_7E57)
}

pub fn noise_waveform(len: usize, seed: u64) -> Waveform {
    let mut r = rng(seed);
    Waveform::new((0..len).map(|_| r.next_f64() - 0.5).collect(), 16_000).unwrap()
}

pub fn random_complex(r: &mut SplitMix64) -> Complex64 {
    let (a, b) = r.next_normal_pair();
    Complex64::new(a, b)
}

/// Random (generally inconsistent) spectrogram with the default geometry.
pub fn random_spectrogram(frames: usize, seed: u64) -> ComplexSpectrogram {
    let cfg = StftConfig::default();
    let mut r = rng(seed);
    let data = (0..frames * cfg.bins())
        .map(|_| random_complex(&mut r))
        .collect();
    ComplexSpectrogram::new(data, frames, cfg, (frames - 1) * cfg.hop).unwrap()
}

/// Random source estimates against a consistent mixture (the STFT of a waveform).
pub fn random_source_set(j: usize, len: usize, seed: u64) -> SourceSet {
    let stft = Stft::new(StftConfig::default()).unwrap();
    let mixture = stft.forward(&noise_waveform(len, seed)).unwrap();
    let frames = mixture.frames();
    let sources = (0..j)
        .map(|k| {
            let s = random_spectrogram(frames, seed * 31 + k as u64 + 1);
            ComplexSpectrogram::new(s.into_data(), frames, *mixture.config(), len).unwrap()
        })
        .collect();
    SourceSet::new(sources, mixture).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn set_norm(set: &SourceSet) -> f64 {
    set.sources()
        .iter()
        .map(|s| s.norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn set_diff_norm(a: &SourceSet, b: &SourceSet) -> f64 {
    a.sources()
        .iter()
        .zip(b.sources())
        .map(|(x, y)| x.sub(y).unwrap().norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Solves `min ½ Σ_j |x_j − x̂_j|² / v_j  s.t.  Σ_j x_j = y` for one complex bin by
/// assembling and solving the dense KKT system separately for the real and
/// imaginary parts.
pub fn kkt_projection(
    estimates: &[Complex64],
    variances: &[f64],
    mixture: Complex64,
) -> Vec<Complex64> {
    let j = estimates.len();
    let n = j + 1;
    let mut k = DMatrix::<f64>::zeros(n, n);
    for i in 0..j {
        k[(i, i)] = 1.0 / variances[i];
        k[(i, j)] = 1.0;
        k[(j, i)] = 1.0;
    }
    let lu = k.lu();
    let solve = |part: &dyn Fn(Complex64) -> f64| {
        let mut rhs = DVector::<f64>::zeros(n);
        for i in 0..j {
            rhs[i] = part(estimates[i]) / variances[i];
        }
        rhs[j] = part(mixture);
        lu.solve(&rhs).expect("KKT system is nonsingular")
    };
    let re = solve(&|z: Complex64| z.re);
    let im = solve(&|z: Complex64| z.im);
    (0..j).map(|i| Complex64::new(re[i], im[i])).collect()
}

/// Central difference of `f` along direction `dir` at step `h`.
pub fn directional_fd(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (f(h) - f(-h)) / (2.0 * h)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
