use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spectral_consistency::cli::{
    self, EnhanceOptions, MetricsOptions, MixOptions, StftOptions, WeightingChoice,
};
use spectral_consistency::{Consistency, MaskSpec, StftConfig};

#[derive(Parser)]
#[command(
    name = "speccon",
    version,
    about = "STFT- and mixture-consistent oracle speech enhancement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct ConfigArgs {
    /// Analysis window length in samples.
    #[arg(long, default_value_t = 800)]
    window: usize,
    #[arg(long, default_value_t = 160)]
    hop: usize,
    #[arg(long, default_value_t = 1024)]
    fft: usize,
    #[arg(long, default_value_t = 16_000)]
    sample_rate: u32,
}

impl ConfigArgs {
    fn config(self) -> spectral_consistency::Result<StftConfig> {
        StftConfig::new(self.window, self.hop, self.fft, self.sample_rate)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MaskArg {
    Psm,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConsistencyArg {
    None,
    Stft,
    Mix,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Mix speech and noise at a fixed or seeded SNR.
    Mix {
        #[arg(long)]
        speech: Option<PathBuf>,
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(
            long,
            allow_hyphen_values = true,
            conflicts_with = "seed",
            required_unless_present = "seed"
        )]
        snr: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_mix: PathBuf,
        #[arg(long)]
        out_refs: PathBuf,
        /// Duration of synthesized inputs when --speech/--noise are omitted.
        #[arg(long, default_value_t = 3.0)]
        duration: f64,
        #[arg(long, default_value_t = 16_000)]
        sample_rate: u32,
    },
    /// Oracle-mask enhancement with selectable consistency projections.
    Enhance {
        #[arg(long)]
        mix: PathBuf,
        #[arg(long)]
        speech_ref: Option<PathBuf>,
        #[arg(long)]
        noise_ref: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "psm")]
        mask: MaskArg,
        /// Bound the oracle mask magnitude (sign preserved).
        #[arg(long)]
        psm_bound: Option<f64>,
        /// Clamp the oracle mask to [0, 1].
        #[arg(long)]
        psm_unit: bool,
        #[arg(long, value_enum, default_value = "none")]
        consistency: ConsistencyArg,
        /// uniform, magsq, or file:PATH (CSV of per-bin speech shares).
        #[arg(long, default_value = "uniform")]
        mix_weighting: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write spectrogram magnitudes as CSV.
        #[arg(long)]
        export_csv: bool,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Forward (WAV → CSPEC) or inverse (CSPEC → WAV) STFT.
    Stft {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        inverse: bool,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// SI-SDR and SI-SDR improvement of an estimate.
    Metrics {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        est: PathBuf,
        #[arg(long)]
        mix: PathBuf,
    },
}

fn run(command: Command) -> spectral_consistency::Result<String> {
    match command {
        Command::Mix {
            speech,
            noise,
            snr,
            seed,
            out_mix,
            out_refs,
            duration,
            sample_rate,
        } => cli::run_mix(&MixOptions {
            speech,
            noise,
            snr_db: snr,
            seed,
            out_mix,
            out_refs,
            duration_s: duration,
            sample_rate,
        }),
        Command::Enhance {
            mix,
            speech_ref,
            noise_ref,
            mask: MaskArg::Psm,
            psm_bound,
            psm_unit,
            consistency,
            mix_weighting,
            out,
            export_csv,
            config,
        } => {
            let mask = MaskSpec {
                truncation: psm_bound,
                clamp: psm_unit.then_some((0.0, 1.0)),
                ..MaskSpec::default()
            };
            mask.validate()?;
            let consistency = match consistency {
                ConsistencyArg::None => Consistency::None,
                ConsistencyArg::Stft => Consistency::Stft,
                ConsistencyArg::Mix => Consistency::Mix,
                ConsistencyArg::Both => Consistency::Both,
            };
            let report = cli::run_enhance(&EnhanceOptions {
                mix,
                speech_ref,
                noise_ref,
                mask,
                consistency,
                weighting: mix_weighting.parse::<WeightingChoice>()?,
                out,
                config: config.config()?,
                export_csv,
            })?;
            report.to_json()
        }
        Command::Stft {
            input,
            out,
            inverse,
            config,
        } => cli::run_stft(&StftOptions {
            input,
            output: out,
            inverse,
            config: config.config()?,
        }),
        Command::Metrics {
            reference,
            est,
            mix,
        } => cli::run_metrics(&MetricsOptions {
            reference,
            estimate: est,
            mixture: mix,
        })?
        .to_json(),
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match run(args.command) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
