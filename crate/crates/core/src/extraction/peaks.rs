use serde::Serialize;

use super::ExtractionError;
use crate::spectra::PolarizedSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub center: f64,
    pub height: f64,
}

/// Local maxima above `min_prominence × global max`, refined by a three-point
/// parabola and sorted by energy.
pub fn extract_peaks(
    spectrum: &PolarizedSpectrum,
    min_prominence: f64,
) -> Result<Vec<Peak>, ExtractionError> {
    find_peaks(&spectrum.grid, &spectrum.intensity, min_prominence)
}

/// Slice form of [`extract_peaks`]; `grid` must be uniform.
pub fn find_peaks(
    grid: &[f64],
    intensity: &[f64],
    min_prominence: f64,
) -> Result<Vec<Peak>, ExtractionError> {
    if !(min_prominence > 0.0 && min_prominence < 1.0) {
        return Err(ExtractionError::InvalidArgument(format!(
            "min_prominence must be in (0, 1), got {min_prominence}"
        )));
    }
    if grid.len() != intensity.len() {
        return Err(ExtractionError::InvalidArgument(format!(
            "grid has {} points but intensity has {}",
            grid.len(),
            intensity.len()
        )));
    }
    let n = intensity.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let global = intensity.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(global > 0.0) {
        return Ok(Vec::new());
    }
    let threshold = min_prominence * global;
    let step = if n > 1 { grid[1] - grid[0] } else { 0.0 };

    let mut peaks = Vec::new();
    for i in 0..n {
        let y = intensity[i];
        if y <= threshold {
            continue;
        }
        let left = if i > 0 {
            intensity[i - 1]
        } else {
            f64::NEG_INFINITY
        };
        let right = if i + 1 < n {
            intensity[i + 1]
        } else {
            f64::NEG_INFINITY
        };
        // Strict on the left, non-strict on the right: a flat top yields one peak.
        if !(y > left && y >= right) {
            continue;
        }
        if i == 0 || i + 1 == n {
            peaks.push(Peak {
                center: grid[i],
                height: y,
            });
            continue;
        }
        let curvature = left - 2.0 * y + right;
        if curvature >= 0.0 {
            peaks.push(Peak {
                center: grid[i],
                height: y,
            });
            continue;
        }
        let offset = 0.5 * (left - right) / curvature;
        peaks.push(Peak {
            center: grid[i] + offset * step,
            height: y - 0.25 * (left - right) * offset,
        });
    }
    Ok(peaks)
}
