//! Run configuration: JSON file values overlaid by command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::extraction::{ClassificationThresholds, GConvention};
use crate::params::DotParameters;

pub const SEED_ENV: &str = "FINESTRUCT_SEED";

/// Dot parameters; every field optional so flags can override a file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct DotConfig {
    /// Zero-field bright splitting S0, µeV
    #[arg(long, allow_hyphen_values = true)]
    pub s0: Option<f64>,
    /// Mean bright–dark exchange splitting D0, µeV
    #[arg(long, allow_hyphen_values = true)]
    pub d0: Option<f64>,
    /// Dark-state splitting, µeV
    #[arg(long, allow_hyphen_values = true)]
    pub sigma0: Option<f64>,
    /// In-plane electron g-factor
    #[arg(long, allow_hyphen_values = true)]
    pub g_e: Option<f64>,
    /// In-plane hole g-factor
    #[arg(long, allow_hyphen_values = true)]
    pub g_h: Option<f64>,
    /// Emission center energy, µeV
    #[arg(long, allow_hyphen_values = true)]
    pub e0: Option<f64>,
    /// Homogeneous linewidth (FWHM), µeV
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Biexciton binding energy, µeV
    #[arg(long, allow_hyphen_values = true)]
    pub xx_binding: Option<f64>,
    /// Confinement energy relative to the wetting layer, meV
    #[arg(long, allow_hyphen_values = true)]
    pub e_c: Option<f64>,
}

impl DotConfig {
    fn overlay(self, flags: DotConfig) -> DotConfig {
        DotConfig {
            s0: flags.s0.or(self.s0),
            d0: flags.d0.or(self.d0),
            sigma0: flags.sigma0.or(self.sigma0),
            g_e: flags.g_e.or(self.g_e),
            g_h: flags.g_h.or(self.g_h),
            e0: flags.e0.or(self.e0),
            gamma: flags.gamma.or(self.gamma),
            xx_binding: flags.xx_binding.or(self.xx_binding),
            e_c: flags.e_c.or(self.e_c),
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == DotConfig::default()
    }

    /// Missing fields default to a GaAs-barrier dot with typical S0
    /// (S0 = 22 µeV, D0 = 215 µeV, g_e = g_h = 0.395).
    pub fn build(&self) -> Result<DotParameters, CliError> {
        DotParameters::builder(
            self.s0.unwrap_or(22.0),
            self.d0.unwrap_or(215.0),
            self.g_e.unwrap_or(0.395),
            self.g_h.unwrap_or(0.395),
        )
        .sigma0(self.sigma0.unwrap_or(0.0))
        .e0(self.e0.unwrap_or(DotParameters::DEFAULT_E0))
        .gamma(self.gamma.unwrap_or(DotParameters::DEFAULT_GAMMA))
        .xx_binding(self.xx_binding.unwrap_or(DotParameters::DEFAULT_XX_BINDING))
        .e_c(self.e_c)
        .build()
        .map_err(CliError::Params)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    /// First field of the sweep, T
    #[arg(long = "b-start")]
    pub start: Option<f64>,
    /// Last field of the sweep, T
    #[arg(long = "b-end")]
    pub end: Option<f64>,
    /// Number of field points (>= 2)
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Gaussian noise level relative to the channel maximum
    #[arg(long)]
    pub sigma_rel: Option<f64>,
    #[arg(skip)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub include_quartic: Option<bool>,
    pub use_weights: Option<bool>,
    pub g_convention: Option<GConvention>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub power: Option<f64>,
    pub grid_step: Option<f64>,
}

/// Contents of a `--config` JSON file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dot: DotConfig,
    pub field: FieldConfig,
    pub noise: NoiseConfig,
    pub fit: FitConfig,
    pub thresholds: ThresholdConfig,
    pub spectrum: SpectrumConfig,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::Input(format!(
                "{}:{}: invalid config: {e}",
                path.display(),
                e.line()
            ))
        })
    }

    pub fn dot(&self, flags: &DotConfig) -> DotConfig {
        self.dot.clone().overlay(flags.clone())
    }

    pub fn field_grid(&self, flags: &FieldConfig) -> Result<(f64, f64, usize), CliError> {
        let start = flags.start.or(self.field.start).unwrap_or(0.0);
        let end = flags.end.or(self.field.end).unwrap_or(5.0);
        let steps = flags.steps.or(self.field.steps).unwrap_or(26);
        if steps < 2 {
            return Err(CliError::Input(format!("steps must be >= 2, got {steps}")));
        }
        if !(start >= 0.0 && end > start) {
            return Err(CliError::Input(format!(
                "field grid must satisfy 0 <= b_start < b_end (distinct points), got {start}..{end}"
            )));
        }
        Ok((start, end, steps))
    }

    /// Flag, then config file, then `FINESTRUCT_SEED`, then 0.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        if let Some(s) = flag.or(self.noise.seed) {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("{SEED_ENV}=`{v}` is not a u64"))),
            Err(_) => Ok(0),
        }
    }

    pub fn sigma_rel(&self, flag: Option<f64>) -> Result<f64, CliError> {
        let s = flag.or(self.noise.sigma_rel).unwrap_or(0.0);
        if !(s >= 0.0 && s.is_finite()) {
            return Err(CliError::Input(format!("sigma_rel must be >= 0, got {s}")));
        }
        Ok(s)
    }

    pub fn thresholds(
        &self,
        lower: Option<f64>,
        upper: Option<f64>,
    ) -> Result<ClassificationThresholds, CliError> {
        let d = ClassificationThresholds::default();
        let t = ClassificationThresholds {
            lower: lower.or(self.thresholds.lower).unwrap_or(d.lower),
            upper: upper.or(self.thresholds.upper).unwrap_or(d.upper),
        };
        if !(t.lower > 0.0 && t.upper >= t.lower) {
            return Err(CliError::Input(format!(
                "thresholds must satisfy 0 < lower <= upper, got {} and {}",
                t.lower, t.upper
            )));
        }
        Ok(t)
    }

    pub fn out_dir(&self, flag: Option<&Path>) -> Option<PathBuf> {
        flag.map(Path::to_path_buf).or_else(|| self.out.clone())
    }
}
