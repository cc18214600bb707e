//! Inverse pipeline: from spectra and splitting series back to dot parameters.

mod crossing;
mod fit;
mod gfactor;
mod peaks;
mod series;

pub use crossing::{
    classify_dot, crossing_field, Classification, ClassificationThresholds, PolynomialSplitting,
    SplittingCurve, BISECTION_TOL, SCAN_STEP,
};
pub use fit::{
    extrapolate_d0, fit_eq1, fit_zeeman, linear_trend, s0_from_intercepts, Eq1Fit, LinearTrend,
    ZeemanFit,
};
pub use gfactor::{solve_g_eq2, solve_g_equal_magnitude, GConvention, GFactorSolution, GPair};
pub use peaks::{extract_peaks, find_peaks, Peak};
pub use series::{
    average_x_xx, series_from_spectra, FieldSpectra, Sample, SeriesExtraction, SeriesKind,
    SeriesOptions, SeriesWarning, SplittingSeries,
};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractionError {
    #[error("rank-deficient fit: {0}")]
    Rank(String),
    #[error("model mismatch: {0}")]
    ModelMismatch(String),
    #[error("no real g-factor solution (discriminant {discriminant})")]
    Infeasible { discriminant: f64 },
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("invalid sample {index}: {message}")]
    InvalidSample { index: usize, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
