//! Oracle enhancement: mask a mixture with reference-derived masks, apply the
//! selected consistency projections, resynthesize and score.

use std::fmt;
use std::str::FromStr;

use crate::consistency::{project_sources_stft, MixtureWeighting};
use crate::error::{Error, Result};
use crate::masking::{oracle_sources_for_mixture, MaskSpec};
use crate::metrics::{mag_sq_error, si_sdr, si_sdr_improvement, MetricsReport, SpectralLoss};
use crate::stft::Stft;
use crate::types::{ComplexSpectrogram, SourceSet, StftConfig, Waveform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Consistency {
    #[default]
    None,
    Stft,
    Mix,
    Both,
}

impl Consistency {
    pub fn uses_mixture(self) -> bool {
        matches!(self, Consistency::Mix | Consistency::Both)
    }

    pub fn uses_stft(self) -> bool {
        matches!(self, Consistency::Stft | Consistency::Both)
    }
}

impl FromStr for Consistency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Consistency::None),
            "stft" => Ok(Consistency::Stft),
            "mix" => Ok(Consistency::Mix),
            "both" => Ok(Consistency::Both),
            other => Err(Error::invalid(format!(
                "unknown consistency '{other}' (expected none, stft, mix or both)"
            ))),
        }
    }
}

impl fmt::Display for Consistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Consistency::None => "none",
            Consistency::Stft => "stft",
            Consistency::Mix => "mix",
            Consistency::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnhanceSettings {
    pub config: StftConfig,
    pub mask: MaskSpec,
    pub consistency: Consistency,
    pub weighting: MixtureWeighting,
    pub loss: SpectralLoss,
}

impl Default for EnhanceSettings {
    fn default() -> Self {
        Self {
            config: StftConfig::default(),
            mask: MaskSpec::default(),
            consistency: Consistency::None,
            weighting: MixtureWeighting::Uniform,
            loss: SpectralLoss::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Enhancement {
    /// Reference spectrograms, speech first.
    pub truth: Vec<ComplexSpectrogram>,
    pub masked: SourceSet,
    pub projected: SourceSet,
    /// Resynthesized estimates at `f32` precision, speech first.
    pub waveforms: Vec<Waveform>,
    pub report: MetricsReport,
}

impl Enhancement {
    pub fn speech(&self) -> &Waveform {
        &self.waveforms[0]
    }

    pub fn noise(&self) -> &Waveform {
        &self.waveforms[1]
    }
}

/// Runs the oracle phase-sensitive-mask enhancement pipeline.
///
/// Order: mask → mixture projection → STFT projection. Report keys without a
/// prefix describe the speech estimate; `noise_` keys the noise estimate.
/// `mag_sq_error_consistent` is measured on the STFT of the resynthesized
/// waveform, i.e. on what the output actually sounds like.
pub fn enhance_oracle(
    mixture: &Waveform,
    speech_ref: &Waveform,
    noise_ref: &Waveform,
    settings: &EnhanceSettings,
) -> Result<Enhancement> {
    for (name, w) in [
        ("speech reference", speech_ref),
        ("noise reference", noise_ref),
    ] {
        if w.len() != mixture.len() {
            return Err(Error::invalid(format!(
                "{name} has {} samples but the mixture has {}",
                w.len(),
                mixture.len()
            )));
        }
    }
    let stft = Stft::new(settings.config)?;
    let y = stft.forward(mixture)?;
    let s = stft.forward(speech_ref)?;
    let v = stft.forward(noise_ref)?;

    let masked = oracle_sources_for_mixture(&[&s, &v], &y, &settings.mask)?.estimates;
    let mut projected = masked.clone();
    if settings.consistency.uses_mixture() {
        projected = settings.weighting.project(&projected)?;
    }
    if settings.consistency.uses_stft() {
        projected = project_sources_stft(&stft, &projected)?;
    }

    let mut waveforms = Vec::with_capacity(2);
    let mut resynth_specs = Vec::with_capacity(2);
    for src in projected.sources() {
        let w = stft.inverse(src)?;
        resynth_specs.push(stft.forward(&w)?);
        waveforms.push(w.quantized_f32());
    }
    let truth = vec![s, v];

    let mut report = MetricsReport::new();
    for (j, (prefix, reference)) in [("", speech_ref), ("noise_", noise_ref)]
        .into_iter()
        .enumerate()
    {
        if reference.samples().iter().any(|&x| x != 0.0) {
            report.insert(
                format!("{prefix}si_sdr_db"),
                si_sdr(reference, &waveforms[j])?,
            );
            report.insert(
                format!("{prefix}si_sdr_improvement_db"),
                si_sdr_improvement(reference, &waveforms[j], mixture)?,
            );
            report.insert(
                format!("{prefix}mixture_si_sdr_db"),
                si_sdr(reference, mixture)?,
            );
        }
        report.insert(
            format!("{prefix}mag_sq_error_masked"),
            mag_sq_error(masked.source(j), &truth[j])?,
        );
        report.insert(
            format!("{prefix}mag_sq_error_projected"),
            mag_sq_error(projected.source(j), &truth[j])?,
        );
        report.insert(
            format!("{prefix}mag_sq_error_consistent"),
            mag_sq_error(&resynth_specs[j], &truth[j])?,
        );
    }
    report.insert("loss", settings.loss.value(&truth, projected.sources())?);
    report.insert(
        "loss_masked",
        settings.loss.value(&truth, masked.sources())?,
    );
    report.insert("mixture_residual_max", mixture_residual_max(&projected));

    Ok(Enhancement {
        truth,
        masked,
        projected,
        waveforms,
        report,
    })
}

/// Largest per-bin `|Σ_j X_j − Y|`.
pub fn mixture_residual_max(set: &SourceSet) -> f64 {
    set.estimated_mixture()
        .data()
        .iter()
        .zip(set.mixture().data())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}
