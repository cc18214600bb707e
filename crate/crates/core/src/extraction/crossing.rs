//! Field at which the bright splitting passes through zero.

use serde::Serialize;

use super::fit::Eq1Fit;
use super::ExtractionError;
use crate::model::{bright_splitting, ModelError};
use crate::params::DotParameters;

/// Scan resolution, tesla.
pub const SCAN_STEP: f64 = 0.01;
/// Bracket width at which bisection stops, tesla.
pub const BISECTION_TOL: f64 = 1e-10;

/// Anything that yields S(b_x) in µeV.
pub trait SplittingCurve {
    fn splitting(&self, b_x: f64) -> Result<f64, ModelError>;
}

impl SplittingCurve for DotParameters {
    fn splitting(&self, b_x: f64) -> Result<f64, ModelError> {
        bright_splitting(self, b_x)
    }
}

impl SplittingCurve for Eq1Fit {
    fn splitting(&self, b_x: f64) -> Result<f64, ModelError> {
        Ok(self.evaluate(b_x))
    }
}

/// s0 + K b² + K′ b⁴ with explicit coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolynomialSplitting {
    pub s0: f64,
    pub k: f64,
    pub k_prime: f64,
}

impl SplittingCurve for PolynomialSplitting {
    fn splitting(&self, b_x: f64) -> Result<f64, ModelError> {
        let b2 = b_x * b_x;
        Ok(self.s0 + self.k * b2 + self.k_prime * b2 * b2)
    }
}

/// Smallest b in [0, b_max] with S(b) = 0, or `None`.
///
/// S is scanned on a 0.01 T grid; the first sign change is bisected down to
/// [`BISECTION_TOL`]. S(0) = 0 counts as a crossing at zero.
pub fn crossing_field<C: SplittingCurve + ?Sized>(
    curve: &C,
    b_max: f64,
) -> Result<Option<f64>, ExtractionError> {
    if !(b_max > 0.0 && b_max.is_finite()) {
        return Err(ExtractionError::InvalidArgument(format!(
            "b_max must be > 0, got {b_max}"
        )));
    }
    let mut lo = 0.0;
    let mut f_lo = curve.splitting(lo)?;
    if f_lo == 0.0 {
        return Ok(Some(0.0));
    }
    let n = (b_max / SCAN_STEP).ceil() as usize;
    for i in 1..=n {
        let hi = (SCAN_STEP * i as f64).min(b_max);
        let f_hi = curve.splitting(hi)?;
        if f_hi == 0.0 {
            return Ok(Some(hi));
        }
        if f_lo.signum() != f_hi.signum() {
            return bisect(curve, lo, hi, f_lo).map(Some);
        }
        lo = hi;
        f_lo = f_hi;
    }
    Ok(None)
}

fn bisect<C: SplittingCurve + ?Sized>(
    curve: &C,
    mut lo: f64,
    mut hi: f64,
    f_lo: f64,
) -> Result<f64, ExtractionError> {
    let sign_lo = f_lo.signum();
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = curve.splitting(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassificationThresholds {
    pub lower: f64,
    pub upper: f64,
}

impl Default for ClassificationThresholds {
    fn default() -> Self {
        ClassificationThresholds {
            lower: 5.0,
            upper: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    CrossesBelowLower,
    CrossesBelowUpper,
    NoCrossingBelowUpper,
}

impl Classification {
    /// Report label, e.g. `crosses_below_5T`.
    pub fn label(&self, thresholds: &ClassificationThresholds) -> String {
        match self {
            Classification::CrossesBelowLower => format!("crosses_below_{}T", thresholds.lower),
            Classification::CrossesBelowUpper => format!("crosses_below_{}T", thresholds.upper),
            Classification::NoCrossingBelowUpper => {
                format!("no_crossing_below_{}T", thresholds.upper)
            }
        }
    }
}

/// Buckets a dot by the field its bright lines first cross at.
pub fn classify_dot<C: SplittingCurve + ?Sized>(
    curve: &C,
    thresholds: &ClassificationThresholds,
) -> Result<(Classification, Option<f64>), ExtractionError> {
    if !(thresholds.lower > 0.0 && thresholds.upper >= thresholds.lower) {
        return Err(ExtractionError::InvalidArgument(format!(
            "thresholds must satisfy 0 < lower <= upper, got {thresholds:?}"
        )));
    }
    let b_star = crossing_field(curve, thresholds.upper)?;
    let class = match b_star {
        Some(b) if b <= thresholds.lower => Classification::CrossesBelowLower,
        Some(_) => Classification::CrossesBelowUpper,
        None => Classification::NoCrossingBelowUpper,
    };
    Ok((class, b_star))
}
