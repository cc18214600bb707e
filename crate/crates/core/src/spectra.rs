//! Polarization-resolved photoluminescence synthesis.
//!
//! Each channel is a sum of Lorentzian lines: the four exciton eigenstates
//! (heights ∝ power · bright fraction) and the biexciton cascade through the
//! two brighter states (heights ∝ power² · bright fraction). Biexciton photons
//! are emitted at `e0 − xx_binding − E_X`, so the XX doublet is the mirror of
//! the X doublet.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{fine_structure, Brightness, ModelError};
use crate::params::{DotParameters, Polarization};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid energy grid: {0}")]
    InvalidGrid(String),
    #[error("grid [{lo}, {hi}] µeV does not cover {origin} line ({polarization}) at {center} µeV")]
    Coverage {
        origin: LineOrigin,
        polarization: Polarization,
        center: f64,
        lo: f64,
        hi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineOrigin {
    #[serde(rename = "X-brighter")]
    XBrighter,
    #[serde(rename = "X-darker")]
    XDarker,
    #[serde(rename = "XX-H")]
    XxH,
    #[serde(rename = "XX-V")]
    XxV,
}

impl LineOrigin {
    pub fn is_exciton(self) -> bool {
        matches!(self, LineOrigin::XBrighter | LineOrigin::XDarker)
    }
}

impl std::fmt::Display for LineOrigin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LineOrigin::XBrighter => "X-brighter",
            LineOrigin::XDarker => "X-darker",
            LineOrigin::XxH => "XX-H",
            LineOrigin::XxV => "XX-V",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    /// Absolute energy, µeV.
    pub center: f64,
    pub fwhm: f64,
    pub height: f64,
    pub polarization: Polarization,
    pub origin: LineOrigin,
}

impl SpectralLine {
    pub fn profile(&self, energy: f64) -> f64 {
        let u = (energy - self.center) / (0.5 * self.fwhm);
        self.height / (1.0 + u * u)
    }

    /// Analytic area of the Lorentzian.
    pub fn area(&self) -> f64 {
        self.height * std::f64::consts::FRAC_PI_2 * self.fwhm
    }
}

/// Uniform energy grid described by its center, full width and step (µeV).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub center: f64,
    pub span: f64,
    pub step: f64,
}

impl GridSpec {
    /// Margin beyond the outermost fine-structure level.
    pub const DEFAULT_MARGIN: f64 = 600.0;
    pub const DEFAULT_STEP: f64 = 1.0;

    /// Covers `e0 + 600` down to `e0 − xx_binding − 600` at 1 µeV.
    pub fn default_for(params: &DotParameters) -> Self {
        let hi = params.e0() + Self::DEFAULT_MARGIN;
        let lo = params.e0() - params.xx_binding() - Self::DEFAULT_MARGIN;
        GridSpec {
            center: 0.5 * (hi + lo),
            span: hi - lo,
            step: Self::DEFAULT_STEP,
        }
    }

    pub fn points(&self) -> Result<Vec<f64>, SpectrumError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(SpectrumError::InvalidGrid(format!(
                "step must be > 0, got {}",
                self.step
            )));
        }
        if !(self.span > 0.0 && self.span.is_finite() && self.center.is_finite()) {
            return Err(SpectrumError::InvalidGrid(format!(
                "span must be > 0, got {}",
                self.span
            )));
        }
        let n = (self.span / self.step + 1e-9).floor() as usize + 1;
        let start = self.center - 0.5 * self.span;
        Ok((0..n).map(|i| start + self.step * i as f64).collect())
    }
}

/// One polarization channel of a PL spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizedSpectrum {
    pub polarization: Polarization,
    pub grid: Vec<f64>,
    pub intensity: Vec<f64>,
    pub lines: Vec<SpectralLine>,
    pub noise_seed: Option<u64>,
}

impl PolarizedSpectrum {
    pub fn from_lines(
        polarization: Polarization,
        grid: Vec<f64>,
        lines: Vec<SpectralLine>,
    ) -> Self {
        let intensity = clean_profile(&grid, &lines);
        PolarizedSpectrum {
            polarization,
            grid,
            intensity,
            lines,
            noise_seed: None,
        }
    }

    pub fn step(&self) -> f64 {
        match self.grid.as_slice() {
            [a, b, ..] => b - a,
            _ => 0.0,
        }
    }
}

fn clean_profile(grid: &[f64], lines: &[SpectralLine]) -> Vec<f64> {
    grid.iter()
        .map(|&e| lines.iter().map(|l| l.profile(e)).sum())
        .collect()
}

/// Generates the H and V channels at field `b_x` and excitation `power`.
pub fn synthesize(
    params: &DotParameters,
    b_x: f64,
    power: f64,
    grid_spec: &GridSpec,
) -> Result<(PolarizedSpectrum, PolarizedSpectrum), SpectrumError> {
    let grid = grid_spec.points()?;
    let fs = fine_structure(params, b_x)?;
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);

    let mut h_lines = Vec::new();
    let mut v_lines = Vec::new();
    let mut push = |line: SpectralLine| -> Result<(), SpectrumError> {
        if line.height <= 0.0 {
            return Ok(());
        }
        if line.center < lo || line.center > hi {
            return Err(SpectrumError::Coverage {
                origin: line.origin,
                polarization: line.polarization,
                center: line.center,
                lo,
                hi,
            });
        }
        match line.polarization {
            Polarization::H => h_lines.push(line),
            Polarization::V => v_lines.push(line),
        }
        Ok(())
    };

    for st in &fs.states {
        push(SpectralLine {
            center: params.e0() + st.energy,
            fwhm: params.gamma(),
            height: power * st.bright_fraction,
            polarization: st.polarization,
            origin: match st.label {
                Brightness::Brighter => LineOrigin::XBrighter,
                Brightness::Darker => LineOrigin::XDarker,
            },
        })?;
    }
    for st in fs.states.iter().filter(|s| s.label == Brightness::Brighter) {
        push(SpectralLine {
            center: params.e0() - params.xx_binding() - st.energy,
            fwhm: params.gamma(),
            height: power * power * st.bright_fraction,
            polarization: st.polarization,
            origin: match st.polarization {
                Polarization::H => LineOrigin::XxH,
                Polarization::V => LineOrigin::XxV,
            },
        })?;
    }

    let sort = |v: &mut Vec<SpectralLine>| v.sort_by(|a, b| a.center.total_cmp(&b.center));
    sort(&mut h_lines);
    sort(&mut v_lines);
    Ok((
        PolarizedSpectrum::from_lines(Polarization::H, grid.clone(), h_lines),
        PolarizedSpectrum::from_lines(Polarization::V, grid, v_lines),
    ))
}

/// Relative radiative rate of each eigenstate, in the state order of
/// [`FineStructure`](crate::model::FineStructure). The rate is the bright
/// fraction, so dark admixture lengthens the lifetime.
pub fn effective_brightness(params: &DotParameters, b_x: f64) -> Result<[f64; 4], ModelError> {
    fine_structure(params, b_x).map(|fs| fs.states.map(|s| s.bright_fraction))
}

/// Adds zero-mean Gaussian noise with standard deviation
/// `sigma_rel × max(noiseless intensity)`.
///
/// The noiseless profile is rebuilt from `spectrum.lines`. Draws come from a
/// `ChaCha8Rng` seeded with `seed_from_u64(seed)`, one standard normal per
/// grid point in grid order, so the output is bit-identical for identical
/// inputs on every platform.
pub fn add_noise(spectrum: &PolarizedSpectrum, sigma_rel: f64, seed: u64) -> PolarizedSpectrum {
    let mut out = spectrum.clone();
    out.noise_seed = Some(seed);
    if sigma_rel == 0.0 {
        return out;
    }
    let clean = clean_profile(&spectrum.grid, &spectrum.lines);
    let peak = clean.iter().copied().fold(0.0, f64::max);
    let sd = sigma_rel * peak;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for y in out.intensity.iter_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *y += sd * z;
    }
    out
}
