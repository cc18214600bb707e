//! Linear least-squares fits of splitting series.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::series::{SeriesKind, SplittingSeries};
use super::ExtractionError;
use crate::params::MU_B;

/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-12;

struct LinearSolution {
    coef: Vec<f64>,
    /// Parameter covariance, row-major p×p.
    covariance: Vec<Vec<f64>>,
}

/// Weighted least squares `min Σ w_i (y_i − A_i·c)²` via SVD.
///
/// With weights present the covariance is `(AᵀWA)⁻¹`; without, it is scaled
/// by the residual variance (zero when the fit interpolates).
fn weighted_lstsq(
    design: &[Vec<f64>],
    y: &[f64],
    weights: Option<&[f64]>,
) -> Result<LinearSolution, ExtractionError> {
    let n = y.len();
    let p = design.first().map_or(0, Vec::len);
    if n < p {
        return Err(ExtractionError::Rank(format!(
            "{n} samples for {p} parameters"
        )));
    }
    let sqrt_w: Vec<f64> = match weights {
        Some(w) => w.iter().map(|w| w.sqrt()).collect(),
        None => vec![1.0; n],
    };
    let a = DMatrix::from_fn(n, p, |i, j| design[i][j] * sqrt_w[i]);
    let b = DVector::from_fn(n, |i, _| y[i] * sqrt_w[i]);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || svd.singular_values.iter().any(|&s| s <= RANK_TOL * smax) {
        return Err(ExtractionError::Rank(format!(
            "design matrix is singular (singular values {:?})",
            svd.singular_values.as_slice()
        )));
    }
    let coef = svd
        .solve(&b, 0.0)
        .map_err(|e| ExtractionError::Rank(e.to_string()))?;
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let inv_s2 = svd.singular_values.map(|s| 1.0 / (s * s));
    let mut cov = v_t.transpose() * DMatrix::from_diagonal(&inv_s2) * v_t;
    if weights.is_none() {
        let ssr = (&a * &coef - &b).norm_squared();
        let scale = if n > p { ssr / (n - p) as f64 } else { 0.0 };
        cov *= scale;
    }
    Ok(LinearSolution {
        coef: coef.iter().copied().collect(),
        covariance: (0..p)
            .map(|i| (0..p).map(|j| cov[(i, j)]).collect())
            .collect(),
    })
}

/// Coefficient of determination in percent, clamped to [0, 100].
fn r_percent(y: &[f64], fitted: &[f64], weights: Option<&[f64]>) -> f64 {
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let wsum: f64 = (0..y.len()).map(w).sum();
    let mean = (0..y.len()).map(|i| w(i) * y[i]).sum::<f64>() / wsum;
    let sst: f64 = (0..y.len()).map(|i| w(i) * (y[i] - mean).powi(2)).sum();
    let ssr: f64 = (0..y.len())
        .map(|i| w(i) * (y[i] - fitted[i]).powi(2))
        .sum();
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if sst <= (1e-13 * scale).powi(2) * wsum {
        return if ssr <= (1e-9 * scale).powi(2) * wsum {
            100.0
        } else {
            0.0
        };
    }
    (100.0 * (1.0 - ssr / sst)).clamp(0.0, 100.0)
}

fn inverse_variance(series: &SplittingSeries) -> Option<Vec<f64>> {
    let samples = series.samples();
    if samples.iter().all(|s| s.sigma.is_some()) && !samples.is_empty() {
        Some(samples.iter().map(|s| s.sigma.unwrap().powi(-2)).collect())
    } else {
        None
    }
}

/// Result of fitting S(b) = s0 + K b² (+ K′ b⁴).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eq1Fit {
    pub s0_hat: f64,
    pub k_hat: f64,
    /// Zero when the quartic term is disabled.
    pub k_prime_hat: f64,
    pub r_percent: f64,
    pub residuals: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub include_quartic: bool,
}

impl Eq1Fit {
    pub fn evaluate(&self, b_x: f64) -> f64 {
        let b2 = b_x * b_x;
        self.s0_hat + self.k_hat * b2 + self.k_prime_hat * b2 * b2
    }
}

/// Polynomial fit of the bright splitting in even powers of the field.
pub fn fit_eq1(series: &SplittingSeries, include_quartic: bool) -> Result<Eq1Fit, ExtractionError> {
    if series.kind() != SeriesKind::S {
        return Err(ExtractionError::InvalidSeries(format!(
            "expected an S series, got {:?}",
            series.kind()
        )));
    }
    let samples = series.samples();
    let p = if include_quartic { 3 } else { 2 };
    let design: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| {
            let b2 = s.b_x * s.b_x;
            let mut row = vec![1.0, b2];
            if include_quartic {
                row.push(b2 * b2);
            }
            row
        })
        .collect();
    let y: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let weights = inverse_variance(series);
    let sol = weighted_lstsq(&design, &y, weights.as_deref())?;
    let coef = &sol.coef;
    let fit = Eq1Fit {
        s0_hat: coef[0],
        k_hat: coef[1],
        k_prime_hat: if include_quartic { coef[2] } else { 0.0 },
        r_percent: 0.0,
        residuals: Vec::new(),
        covariance: sol.covariance,
        include_quartic,
    };
    let (residuals, r) = if samples.len() == p {
        (vec![0.0; p], 100.0)
    } else {
        let fitted: Vec<f64> = samples.iter().map(|s| fit.evaluate(s.b_x)).collect();
        let res = y.iter().zip(&fitted).map(|(y, f)| y - f).collect();
        (res, r_percent(&y, &fitted, weights.as_deref()))
    };
    Ok(Eq1Fit {
        residuals,
        r_percent: r,
        ..fit
    })
}

/// Result of fitting D(b) = sqrt(D_x0² + (g µ_B b)²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeemanFit {
    pub d_x0_hat: f64,
    /// |g|
    pub g_hat: f64,
    pub r_percent: f64,
}

impl ZeemanFit {
    pub fn evaluate(&self, b_x: f64) -> f64 {
        self.d_x0_hat.hypot(self.g_hat * MU_B * b_x)
    }
}

/// Fits a brighter–darker separation series by linear least squares on D²
/// against b².
pub fn fit_zeeman(series: &SplittingSeries) -> Result<ZeemanFit, ExtractionError> {
    if series.kind() == SeriesKind::S {
        return Err(ExtractionError::InvalidSeries(
            "expected a D_H or D_V series, got S".into(),
        ));
    }
    let samples = series.samples();
    if samples.len() < 2 || !samples.iter().any(|s| s.b_x > 0.0) {
        return Err(ExtractionError::Rank(format!(
            "Zeeman fit needs >= 2 samples with at least one b_x > 0, got {}",
            samples.len()
        )));
    }
    let design: Vec<Vec<f64>> = samples.iter().map(|s| vec![1.0, s.b_x * s.b_x]).collect();
    let y2: Vec<f64> = samples.iter().map(|s| s.value * s.value).collect();
    // σ(D²) = 2 D σ(D)
    let weights: Option<Vec<f64>> = inverse_variance(series).map(|w| {
        w.iter()
            .zip(samples)
            .map(|(w, s)| w / (4.0 * s.value * s.value).max(f64::MIN_POSITIVE))
            .collect()
    });
    let sol = weighted_lstsq(&design, &y2, weights.as_deref())?;
    let (intercept2, slope) = (sol.coef[0], sol.coef[1]);
    if intercept2 <= 0.0 {
        return Err(ExtractionError::ModelMismatch(format!(
            "fitted zero-field D^2 = {intercept2} is not positive"
        )));
    }
    let fit = ZeemanFit {
        d_x0_hat: intercept2.sqrt(),
        g_hat: slope.max(0.0).sqrt() / MU_B,
        r_percent: 0.0,
    };
    let y: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let fitted: Vec<f64> = samples.iter().map(|s| fit.evaluate(s.b_x)).collect();
    let w_d = inverse_variance(series);
    Ok(ZeemanFit {
        r_percent: r_percent(&y, &fitted, w_d.as_deref()),
        ..fit
    })
}

/// Mean of the H and V zero-field intercepts.
pub fn extrapolate_d0(fit_h: &ZeemanFit, fit_v: &ZeemanFit) -> f64 {
    0.5 * (fit_h.d_x0_hat + fit_v.d_x0_hat)
}

/// Difference of the zero-field intercepts, D_H0 − D_V0 = S₀ − σ₀.
pub fn s0_from_intercepts(fit_h: &ZeemanFit, fit_v: &ZeemanFit) -> f64 {
    fit_h.d_x0_hat - fit_v.d_x0_hat
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearTrend {
    pub slope: f64,
    pub intercept: f64,
    pub r_percent: f64,
}

/// Ordinary least-squares line through `(x, y)` points.
pub fn linear_trend(points: &[(f64, f64)]) -> Result<LinearTrend, ExtractionError> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 2 {
        return Err(ExtractionError::Rank(format!(
            "linear trend needs >= 2 distinct x values, got {}",
            xs.len()
        )));
    }
    let design: Vec<Vec<f64>> = points.iter().map(|p| vec![1.0, p.0]).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let sol = weighted_lstsq(&design, &y, None)?;
    let fitted: Vec<f64> = points
        .iter()
        .map(|p| sol.coef[0] + sol.coef[1] * p.0)
        .collect();
    Ok(LinearTrend {
        intercept: sol.coef[0],
        slope: sol.coef[1],
        r_percent: r_percent(&y, &fitted, None),
    })
}
