//! `finestruct` command line.
//!
//! Exit codes: 0 success, 1 unexpected (including output I/O), 2 input or
//! parse error, 3 fit rank / degenerate model, 4 infeasible g-factor solve.

mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::extraction::{ExtractionError, GConvention};
use crate::io::IoError;
use crate::model::ModelError;
use crate::params::ParamError;
use crate::spectra::SpectrumError;

pub use commands::{
    cmd_classify, cmd_crossing, cmd_extract_g, cmd_fit, cmd_simulate, cmd_sweep, Report,
};
pub use config::{DotConfig, FieldConfig, NoiseConfig, RunConfig, SEED_ENV};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Params(ParamError),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Read(IoError),
    #[error(transparent)]
    Write(IoError),
    #[error(transparent)]
    Extraction(#[from] ExtractionError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Model(#[from] ModelError),
    /// The g-factor solve had no real branch; the partial report is kept.
    #[error("no real g-factor solution (discriminant {discriminant})")]
    Infeasible {
        discriminant: f64,
        report: Box<Report>,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Params(_) | CliError::Input(_) | CliError::Read(_) => 2,
            CliError::Write(_) => 1,
            CliError::Extraction(e) => match e {
                ExtractionError::Rank(_)
                | ExtractionError::ModelMismatch(_)
                | ExtractionError::Model(_) => 3,
                ExtractionError::Infeasible { .. } => 4,
                ExtractionError::InvalidSeries(_)
                | ExtractionError::InvalidSample { .. }
                | ExtractionError::InvalidArgument(_) => 2,
            },
            CliError::Spectrum(SpectrumError::Model(_)) | CliError::Model(_) => 3,
            CliError::Spectrum(_) => 2,
            CliError::Infeasible { .. } => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "finestruct",
    version,
    about = "Exciton fine structure in an in-plane magnetic field"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// PRNG seed for noise (falls back to FINESTRUCT_SEED, then 0)
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Signed,
    Magnitude,
}

impl From<ConventionArg> for GConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Signed => GConvention::SignedDifference,
            ConventionArg::Magnitude => GConvention::MagnitudeDifference,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Args)]
pub struct QuarticArgs {
    /// Include the b⁴ term in splitting fits (default)
    #[arg(long, overrides_with = "no_quartic")]
    pub quartic: bool,
    /// Fit s0 + K b² only
    #[arg(long = "no-quartic")]
    pub no_quartic: bool,
}

impl QuarticArgs {
    pub fn resolve(&self, cfg: &RunConfig) -> bool {
        if self.no_quartic {
            false
        } else if self.quartic {
            true
        } else {
            cfg.fit.include_quartic.unwrap_or(true)
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Args)]
pub struct ThresholdArgs {
    /// Lower classification threshold, T (default 5)
    #[arg(long)]
    pub lower_threshold: Option<f64>,
    /// Upper classification threshold, T (default 10)
    #[arg(long)]
    pub upper_threshold: Option<f64>,
}

/// Where a splitting curve comes from: a fitted CSV or the exact model.
#[derive(Debug, Clone, Default, Args)]
pub struct CurveSource {
    /// Splitting-series CSV to fit; without it the exact model of the dot
    /// parameters is used
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub quartic: QuarticArgs,
    /// Ignore the sigma_ueV column
    #[arg(long)]
    pub no_weights: bool,
    #[command(flatten)]
    pub dot: DotConfig,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize H/V spectra over a field sweep and read the splittings back
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        dot: DotConfig,
        #[command(flatten)]
        field: FieldConfig,
        #[command(flatten)]
        noise: NoiseConfig,
        /// Excitation power, arbitrary units
        #[arg(long)]
        power: Option<f64>,
        /// Spectral grid step, µeV
        #[arg(long)]
        grid_step: Option<f64>,
        /// Also write each spectrum as JSON (including its line list)
        #[arg(long)]
        json_spectra: bool,
    },
    /// Exact fine structure over a field sweep, plus model S/D_H/D_V series
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        dot: DotConfig,
        #[command(flatten)]
        field: FieldConfig,
    },
    /// Fit s0 + K b² + K' b⁴ to a splitting series
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        /// Splitting-series CSV (b_T,value_ueV[,sigma_ueV])
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        quartic: QuarticArgs,
        /// Ignore the sigma_ueV column
        #[arg(long)]
        no_weights: bool,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Extract D0, S0 and the in-plane g-factors from D_H, D_V and S series
    ExtractG {
        #[command(flatten)]
        common: CommonArgs,
        /// D_H series CSV
        #[arg(long)]
        dh: PathBuf,
        /// D_V series CSV
        #[arg(long)]
        dv: PathBuf,
        /// S series CSV
        #[arg(long)]
        s: PathBuf,
        /// How the g-factor difference constrains (g_e, g_h)
        #[arg(long, value_enum)]
        g_convention: Option<ConventionArg>,
        /// Difference used in the solve; defaults to the fitted |g_V|
        #[arg(long, allow_hyphen_values = true)]
        g_diff: Option<f64>,
        #[command(flatten)]
        quartic: QuarticArgs,
    },
    /// Smallest field at which S crosses zero
    Crossing {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        source: CurveSource,
        /// Upper end of the search, T
        #[arg(long, default_value_t = 10.0)]
        b_max: f64,
    },
    /// Bucket a dot by its crossing field
    Classify {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        source: CurveSource,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
}

/// Runs one command, writing its report to stdout (and to `--out` when
/// given). Returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Simulate {
            common,
            dot,
            field,
            noise,
            power,
            grid_step,
            json_spectra,
        } => RunConfig::load(common.config.as_deref()).and_then(|cfg| {
            cmd_simulate(
                &cfg,
                &common,
                &dot,
                &field,
                &noise,
                power,
                grid_step,
                json_spectra,
            )
        }),
        Command::Sweep { common, dot, field } => RunConfig::load(common.config.as_deref())
            .and_then(|cfg| cmd_sweep(&cfg, &common, &dot, &field)),
        Command::Fit {
            common,
            input,
            quartic,
            no_weights,
            thresholds,
        } => RunConfig::load(common.config.as_deref())
            .and_then(|cfg| cmd_fit(&cfg, &common, &input, quartic, no_weights, thresholds)),
        Command::ExtractG {
            common,
            dh,
            dv,
            s,
            g_convention,
            g_diff,
            quartic,
        } => RunConfig::load(common.config.as_deref()).and_then(|cfg| {
            cmd_extract_g(
                &cfg,
                &common,
                &dh,
                &dv,
                &s,
                g_convention.map(Into::into),
                g_diff,
                quartic,
            )
        }),
        Command::Crossing {
            common,
            source,
            b_max,
        } => RunConfig::load(common.config.as_deref())
            .and_then(|cfg| cmd_crossing(&cfg, &common, &source, b_max)),
        Command::Classify {
            common,
            source,
            thresholds,
        } => RunConfig::load(common.config.as_deref())
            .and_then(|cfg| cmd_classify(&cfg, &common, &source, thresholds)),
    };
    match result {
        Ok(report) => {
            print_report(&report);
            0
        }
        Err(err) => {
            if let CliError::Infeasible { report, .. } = &err {
                print_report(report);
            }
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn print_report(report: &Report) {
    match crate::io::json_bytes(report) {
        Ok(bytes) => print!("{}", String::from_utf8_lossy(&bytes)),
        Err(e) => eprintln!("error: could not encode report: {e}"),
    }
}
