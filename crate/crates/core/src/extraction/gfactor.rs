//! In-plane electron and hole g-factors from the curvature K.
//!
//! K fixes one quadratic form in (g_e, g_h); a second relation between the
//! two g-factors (their difference, or the difference of their magnitudes)
//! closes the system.

use serde::{Deserialize, Serialize};

use super::ExtractionError;
use crate::model::k_eq2;
use crate::params::{DotParameters, MU_B};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GConvention {
    /// g_e − g_h = g_diff
    SignedDifference,
    /// |g_e| − |g_h| = g_diff
    MagnitudeDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GPair {
    pub g_e: f64,
    pub g_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GFactorSolution {
    pub branches: Vec<GPair>,
    pub convention: GConvention,
    /// Branch with |g_h| < |g_e| (smallest |g_h| if several), as for the
    /// hole g-factor in quantum wells.
    pub heuristic_pick: Option<usize>,
}

/// g_e = g_h = g_H / 2, for dots whose V-polarized darker line barely mixes.
pub fn solve_g_equal_magnitude(g_h_fit: f64) -> (f64, f64) {
    (0.5 * g_h_fit, 0.5 * g_h_fit)
}

/// Real roots of `a x² + b x + c = 0` with `a ≠ 0`, ascending, deduplicated.
fn quadratic_roots(a: f64, b: f64, c: f64) -> (f64, Vec<f64>) {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return (disc, Vec::new());
    }
    if disc == 0.0 {
        return (disc, vec![-b / (2.0 * a)]);
    }
    // Avoids cancellation between −b and √disc.
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut roots = vec![q / a, c / q];
    roots.sort_by(f64::total_cmp);
    (disc, roots)
}

/// Solves K(g_e, g_h; S₀, D₀) = `k` together with the difference constraint.
///
/// Substituting the constraint turns the K relation into a quadratic in g_h.
/// In the magnitude convention both relative sign choices are tried; each
/// branch is reported with g_e ≥ 0, since flipping both signs leaves K
/// unchanged.
pub fn solve_g_eq2(
    k: f64,
    s0: f64,
    d0: f64,
    g_diff: f64,
    convention: GConvention,
) -> Result<GFactorSolution, ExtractionError> {
    if !(d0 > 0.0) || s0.abs() >= 2.0 * d0 {
        return Err(ExtractionError::InvalidArgument(format!(
            "need d0 > 0 and |s0| < 2 d0, got s0 = {s0}, d0 = {d0}"
        )));
    }
    if !(k.is_finite() && g_diff.is_finite()) {
        return Err(ExtractionError::InvalidArgument(
            "K and g_diff must be finite".into(),
        ));
    }
    let prefactor = MU_B * MU_B / (d0 * (1.0 - s0 * s0 / (4.0 * d0 * d0)));
    let target = k / prefactor;
    let q = s0 / (4.0 * d0);
    // |q| < 1/2, so the leading coefficients below never vanish.

    let mut branches: Vec<GPair> = Vec::new();
    let mut best_disc = f64::NEG_INFINITY;
    match convention {
        GConvention::SignedDifference => {
            // (g+δ)g − q((g+δ)² + g²) = t
            let a = 1.0 - 2.0 * q;
            let (disc, roots) = quadratic_roots(a, g_diff * a, -(q * g_diff * g_diff + target));
            best_disc = disc;
            for g_h in roots {
                branches.push(GPair {
                    g_e: g_h + g_diff,
                    g_h,
                });
            }
        }
        GConvention::MagnitudeDifference => {
            // m = |g_h| ≥ 0, |g_e| = m + δ ≥ 0, relative sign p = ±1:
            // p(m+δ)m − q((m+δ)² + m²) = t
            for p in [1.0, -1.0] {
                let a = p - 2.0 * q;
                let (disc, roots) = quadratic_roots(a, g_diff * a, -(q * g_diff * g_diff + target));
                best_disc = best_disc.max(disc);
                for m in roots {
                    if m >= 0.0 && m + g_diff >= 0.0 {
                        branches.push(GPair {
                            g_e: m + g_diff,
                            g_h: p * m,
                        });
                    }
                }
            }
        }
    }
    let mut unique: Vec<GPair> = Vec::with_capacity(branches.len());
    for b in branches {
        if !unique.iter().any(|u| u.g_e == b.g_e && u.g_h == b.g_h) {
            unique.push(b);
        }
    }
    let branches = unique;
    if branches.is_empty() {
        return Err(ExtractionError::Infeasible {
            discriminant: best_disc,
        });
    }
    let heuristic_pick = branches
        .iter()
        .enumerate()
        .filter(|(_, b)| b.g_h.abs() < b.g_e.abs())
        .min_by(|(_, a), (_, b)| a.g_h.abs().total_cmp(&b.g_h.abs()))
        .map(|(i, _)| i);
    Ok(GFactorSolution {
        branches,
        convention,
        heuristic_pick,
    })
}

impl GPair {
    /// K implied by this pair through the forward closed form.
    pub fn forward_k(&self, s0: f64, d0: f64) -> Result<f64, ExtractionError> {
        let params = DotParameters::new(s0, d0, self.g_e, self.g_h)
            .map_err(|e| ExtractionError::InvalidArgument(e.to_string()))?;
        Ok(k_eq2(&params)?)
    }
}
