//! Consistency projection layers for masking-based speech enhancement.
//!
//! Masked STFT estimates are generally neither *STFT-consistent* (the STFT of
//! some real signal) nor *mixture-consistent* (summing to the mixture). This
//! crate provides both projections as linear layers with exact
//! vector-Jacobian products, the weighted mixture projection with
//! magnitude-squared or externally supplied weights, oracle phase-sensitive
//! masks, the power-compressed spectral loss with its gradient, SI-SDR, and a
//! deterministic synthetic mixer.
//!
//! ```
//! use spectral_consistency::{mixer, pipeline, Consistency, EnhanceSettings};
//!
//! let pair = mixer::synth_test_signals(1, 0.5, 16_000)?;
//! let mix = mixer::mix_at_snr(&pair.speech, &pair.noise, 0.0)?;
//! let settings = EnhanceSettings { consistency: Consistency::Both, ..Default::default() };
//! let out = pipeline::enhance_oracle(&mix.mixture, &mix.speech, &mix.scaled_noise, &settings)?;
//! assert!(out.report.get("si_sdr_improvement_db").unwrap() > 0.0);
//! # Ok::<(), spectral_consistency::Error>(())
//! ```

pub mod cli;
pub mod consistency;
pub mod error;
pub mod io;
pub mod masking;
pub mod metrics;
pub mod mixer;
pub mod pipeline;
pub mod stft;
pub mod types;
pub mod window;

pub use consistency::{
    magnitude_squared_weights, project_joint, project_mixture_consistency,
    project_mixture_weighted, project_stft_consistency, vjp_mixture_consistency,
    vjp_stft_consistency, MixtureWeighting, WeightField,
};
pub use error::{ConfigError, Error, Result};
pub use masking::{apply_mask, oracle_psm, oracle_sources, MaskKind, MaskSpec};
pub use metrics::{
    grad_spectral_loss, mag_sq_error, power_compress, si_sdr, si_sdr_improvement, spectral_loss,
    MetricsReport, SpectralLoss,
};
pub use mixer::{mix_at_snr, sample_mix_spec, synth_test_signals, MixSpec};
pub use pipeline::{enhance_oracle, Consistency, EnhanceSettings};
pub use stft::{stft_forward, stft_inverse, synthesis_window, Stft};
pub use types::{validate_config, ComplexSpectrogram, Mask, SourceSet, StftConfig, Waveform};
pub use window::hann_window;
