//! Physical description of a single quantum dot.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bohr magneton in µeV per tesla.
pub const MU_B: f64 = 57.8838;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("invalid parameter `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ParamError {
    ParamError::Invalid {
        field,
        reason: reason.into(),
    }
}

/// Linear polarization channel of an exciton line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Polarization::H => f.write_str("H"),
            Polarization::V => f.write_str("V"),
        }
    }
}

/// Exchange and Zeeman parameters of one dot, plus spectral placement.
///
/// Energies are in µeV, `e_c` in meV. Instances can only be obtained through
/// [`DotParameters::new`] or [`DotParametersBuilder`], so every downstream
/// operation may assume the invariants hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DotParameters {
    s0: f64,
    d0: f64,
    sigma0: f64,
    g_e: f64,
    g_h: f64,
    e0: f64,
    gamma: f64,
    xx_binding: f64,
    e_c: Option<f64>,
}

impl DotParameters {
    pub const DEFAULT_GAMMA: f64 = 1.5;
    pub const DEFAULT_XX_BINDING: f64 = 2000.0;
    /// 1.382 eV, the emission energy of a typical GaAs-barrier dot.
    pub const DEFAULT_E0: f64 = 1.382e6;

    /// Fine-structure-only constructor; spectral fields take their defaults.
    pub fn new(s0: f64, d0: f64, g_e: f64, g_h: f64) -> Result<Self, ParamError> {
        Self::builder(s0, d0, g_e, g_h).build()
    }

    pub fn builder(s0: f64, d0: f64, g_e: f64, g_h: f64) -> DotParametersBuilder {
        DotParametersBuilder {
            s0,
            d0,
            sigma0: 0.0,
            g_e,
            g_h,
            e0: Self::DEFAULT_E0,
            gamma: Self::DEFAULT_GAMMA,
            xx_binding: Self::DEFAULT_XX_BINDING,
            e_c: None,
        }
    }

    pub fn to_builder(&self) -> DotParametersBuilder {
        DotParametersBuilder {
            s0: self.s0,
            d0: self.d0,
            sigma0: self.sigma0,
            g_e: self.g_e,
            g_h: self.g_h,
            e0: self.e0,
            gamma: self.gamma,
            xx_binding: self.xx_binding,
            e_c: self.e_c,
        }
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }
    pub fn d0(&self) -> f64 {
        self.d0
    }
    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }
    pub fn g_e(&self) -> f64 {
        self.g_e
    }
    pub fn g_h(&self) -> f64 {
        self.g_h
    }
    pub fn e0(&self) -> f64 {
        self.e0
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn xx_binding(&self) -> f64 {
        self.xx_binding
    }
    pub fn e_c(&self) -> Option<f64> {
        self.e_c
    }

    /// Coupling of the H-polarized bright state to its dark partner.
    pub fn g_hpol(&self) -> f64 {
        self.g_e + self.g_h
    }

    /// Coupling of the V-polarized bright state to its dark partner.
    pub fn g_vpol(&self) -> f64 {
        self.g_e - self.g_h
    }

    /// Signed bright-minus-dark diagonal gap in the H block at zero field.
    pub fn d_h0(&self) -> f64 {
        self.d0 + 0.5 * (self.s0 - self.sigma0)
    }

    /// Signed bright-minus-dark diagonal gap in the V block at zero field.
    pub fn d_v0(&self) -> f64 {
        self.d0 - 0.5 * (self.s0 - self.sigma0)
    }
}

/// Builder for [`DotParameters`]; validation happens in [`build`](Self::build).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DotParametersBuilder {
    pub s0: f64,
    pub d0: f64,
    pub sigma0: f64,
    pub g_e: f64,
    pub g_h: f64,
    pub e0: f64,
    pub gamma: f64,
    pub xx_binding: f64,
    pub e_c: Option<f64>,
}

impl DotParametersBuilder {
    pub fn sigma0(mut self, v: f64) -> Self {
        self.sigma0 = v;
        self
    }
    pub fn e0(mut self, v: f64) -> Self {
        self.e0 = v;
        self
    }
    pub fn gamma(mut self, v: f64) -> Self {
        self.gamma = v;
        self
    }
    pub fn xx_binding(mut self, v: f64) -> Self {
        self.xx_binding = v;
        self
    }
    pub fn e_c(mut self, v: Option<f64>) -> Self {
        self.e_c = v;
        self
    }

    pub fn build(self) -> Result<DotParameters, ParamError> {
        let finite = [
            ("s0", self.s0),
            ("d0", self.d0),
            ("sigma0", self.sigma0),
            ("g_e", self.g_e),
            ("g_h", self.g_h),
            ("e0", self.e0),
            ("gamma", self.gamma),
            ("xx_binding", self.xx_binding),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return Err(invalid(field, format!("must be finite, got {v}")));
            }
        }
        if let Some(ec) = self.e_c {
            if !ec.is_finite() {
                return Err(invalid("e_c", format!("must be finite, got {ec}")));
            }
        }
        if self.d0 <= 0.0 {
            return Err(invalid("d0", format!("must be > 0, got {}", self.d0)));
        }
        if self.s0.abs() >= 2.0 * self.d0 {
            return Err(invalid(
                "s0",
                format!("|s0| must be < 2*d0 = {}, got {}", 2.0 * self.d0, self.s0),
            ));
        }
        if self.sigma0.abs() >= 2.0 * self.d0 {
            return Err(invalid(
                "sigma0",
                format!(
                    "|sigma0| must be < 2*d0 = {}, got {}",
                    2.0 * self.d0,
                    self.sigma0
                ),
            ));
        }
        if self.gamma <= 0.0 {
            return Err(invalid("gamma", format!("must be > 0, got {}", self.gamma)));
        }
        if self.xx_binding <= 0.0 {
            return Err(invalid(
                "xx_binding",
                format!("must be > 0, got {}", self.xx_binding),
            ));
        }
        Ok(DotParameters {
            s0: self.s0,
            d0: self.d0,
            sigma0: self.sigma0,
            g_e: self.g_e,
            g_h: self.g_h,
            e0: self.e0,
            gamma: self.gamma,
            xx_binding: self.xx_binding,
            e_c: self.e_c,
        })
    }
}

impl<'de> Deserialize<'de> for DotParameters {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        DotParametersBuilder::deserialize(de)?
            .build()
            .map_err(serde::de::Error::custom)
    }
}
