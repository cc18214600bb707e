use serde::Serialize;

use super::peaks::Peak;
use super::ExtractionError;
use crate::spectra::PolarizedSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeriesKind {
    S,
    #[serde(rename = "D_H")]
    DH,
    #[serde(rename = "D_V")]
    DV,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub b_x: f64,
    pub value: f64,
    pub sigma: Option<f64>,
}

fn invalid_sample(index: usize, message: String) -> ExtractionError {
    ExtractionError::InvalidSample { index, message }
}

/// Splitting values sampled at distinct non-negative fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplittingSeries {
    kind: SeriesKind,
    samples: Vec<Sample>,
}

impl SplittingSeries {
    pub fn new(kind: SeriesKind, samples: Vec<Sample>) -> Result<Self, ExtractionError> {
        for (i, s) in samples.iter().enumerate() {
            if !(s.b_x.is_finite() && s.value.is_finite()) {
                return Err(invalid_sample(i, "non-finite field or value".into()));
            }
            if s.b_x < 0.0 {
                return Err(invalid_sample(i, format!("b_x = {} is negative", s.b_x)));
            }
            if let Some(sig) = s.sigma {
                if !(sig > 0.0 && sig.is_finite()) {
                    return Err(invalid_sample(i, format!("sigma = {sig} must be > 0")));
                }
            }
            if samples[..i].iter().any(|p| p.b_x == s.b_x) {
                return Err(invalid_sample(
                    i,
                    format!("duplicate field b_x = {}", s.b_x),
                ));
            }
        }
        Ok(SplittingSeries { kind, samples })
    }

    /// Unweighted series from `(b_x, value)` pairs.
    pub fn from_pairs(
        kind: SeriesKind,
        pairs: impl IntoIterator<Item = (f64, f64)>,
    ) -> Result<Self, ExtractionError> {
        Self::new(
            kind,
            pairs
                .into_iter()
                .map(|(b_x, value)| Sample {
                    b_x,
                    value,
                    sigma: None,
                })
                .collect(),
        )
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Combines X and XX splittings. The XX doublet is reversed, so a common
/// additive offset from the polarization optics cancels.
pub fn average_x_xx(s_x: f64, s_xx: f64) -> f64 {
    0.5 * (s_x - s_xx)
}

/// H and V channels recorded at one field.
#[derive(Debug, Clone)]
pub struct FieldSpectra {
    pub b_x: f64,
    pub h: PolarizedSpectrum,
    pub v: PolarizedSpectrum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Peak threshold as a fraction of each channel's maximum inside `window`.
    pub min_prominence: f64,
    /// Secondary peaks below this fraction of the dominant one are ignored.
    pub secondary_min_ratio: f64,
    /// Energy window (µeV) holding the exciton lines; `None` uses the whole grid.
    pub window: Option<(f64, f64)>,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            min_prominence: 0.1,
            secondary_min_ratio: 0.01,
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesWarning {
    pub b_x: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesExtraction {
    pub s: SplittingSeries,
    pub d_h: SplittingSeries,
    pub d_v: SplittingSeries,
    pub warnings: Vec<SeriesWarning>,
}

fn channel_peaks(
    spectrum: &PolarizedSpectrum,
    opts: &SeriesOptions,
) -> Result<Vec<Peak>, ExtractionError> {
    let (grid, intensity): (Vec<f64>, Vec<f64>) = match opts.window {
        Some((lo, hi)) => spectrum
            .grid
            .iter()
            .zip(&spectrum.intensity)
            .filter(|(e, _)| **e >= lo && **e <= hi)
            .map(|(e, y)| (*e, *y))
            .unzip(),
        None => (spectrum.grid.clone(), spectrum.intensity.clone()),
    };
    let mut peaks = super::peaks::find_peaks(&grid, &intensity, opts.min_prominence)?;
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height));
    Ok(peaks)
}

/// Reads S, D_H and D_V off a field sweep of H/V spectrum pairs.
///
/// S is the dominant-H minus dominant-V center. D_H and D_V are the
/// dominant-minus-secondary separation within one channel and are only
/// recorded where a secondary line is resolved.
pub fn series_from_spectra(
    sweep: &[FieldSpectra],
    opts: &SeriesOptions,
) -> Result<SeriesExtraction, ExtractionError> {
    let mut s = Vec::new();
    let mut d_h = Vec::new();
    let mut d_v = Vec::new();
    let mut warnings = Vec::new();

    for point in sweep {
        let hp = channel_peaks(&point.h, opts)?;
        let vp = channel_peaks(&point.v, opts)?;
        match (hp.first(), vp.first()) {
            (Some(h), Some(v)) => s.push((point.b_x, h.center - v.center)),
            _ => warnings.push(SeriesWarning {
                b_x: point.b_x,
                message: format!(
                    "no dominant peak in {} channel; field omitted from S",
                    if hp.is_empty() { "H" } else { "V" }
                ),
            }),
        }
        for (peaks, out) in [(&hp, &mut d_h), (&vp, &mut d_v)] {
            if let [dominant, secondary, ..] = peaks.as_slice() {
                if secondary.height >= opts.secondary_min_ratio * dominant.height {
                    out.push((point.b_x, dominant.center - secondary.center));
                }
            }
        }
    }

    Ok(SeriesExtraction {
        s: SplittingSeries::from_pairs(SeriesKind::S, s)?,
        d_h: SplittingSeries::from_pairs(SeriesKind::DH, d_h)?,
        d_v: SplittingSeries::from_pairs(SeriesKind::DV, d_v)?,
        warnings,
    })
}
