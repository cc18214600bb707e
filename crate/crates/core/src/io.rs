//! CSV and JSON file formats.
//!
//! All CSV files are UTF-8 with a mandatory header row and `.` as decimal
//! separator:
//!
//! * splitting series: `b_T,value_ueV[,sigma_ueV]`
//! * spectrum: `energy_ueV,intensity`
//! * sweep table: see [`SWEEP_HEADER`]
//!
//! Numbers are written rounded to 9 significant digits so outputs are stable
//! across platforms. Files are written to a temporary sibling first and then
//! renamed into place.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::extraction::{ExtractionError, Sample, SeriesKind, SplittingSeries};
use crate::model::SweepRow;
use crate::spectra::PolarizedSpectrum;

pub const SERIES_HEADER: [&str; 2] = ["b_T", "value_ueV"];
pub const SERIES_SIGMA_COLUMN: &str = "sigma_ueV";
pub const SPECTRUM_HEADER: [&str; 2] = ["energy_ueV", "intensity"];
pub const SWEEP_HEADER: [&str; 10] = [
    "b_x_T",
    "e_Hbright_ueV",
    "e_Vbright_ueV",
    "e_Hdark_ueV",
    "e_Vdark_ueV",
    "frac_Hbright",
    "frac_Vbright",
    "S_ueV",
    "D_H_ueV",
    "D_V_ueV",
];

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}: {message}")]
    Encode { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Rounds to 9 significant digits; `-0.0` becomes `0.0`.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Number formatting used in every CSV cell.
pub fn fmt_num(x: f64) -> String {
    format!("{}", round_sig(x))
}

/// Writes `bytes` to `path` via a temporary file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(path))?;
        f.write_all(bytes).map_err(io_err(path))?;
        f.sync_all().map_err(io_err(path))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Serializes a JSON value with numbers rounded to 9 significant digits.
pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, serde_json::Error> {
    let mut v = serde_json::to_value(value)?;
    round_json(&mut v);
    let mut out = serde_json::to_vec_pretty(&v)?;
    out.push(b'\n');
    Ok(out)
}

fn round_json(v: &mut serde_json::Value) {
    use serde_json::Value;
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| !n.is_i64() && !n.is_u64()) {
                if let Some(r) = serde_json::Number::from_f64(round_sig(f)) {
                    *n = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let bytes = json_bytes(value).map_err(|e| IoError::Encode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    write_atomic(path, &bytes)
}

pub fn series_csv(series: &SplittingSeries) -> Vec<u8> {
    let with_sigma = !series.is_empty() && series.samples().iter().all(|s| s.sigma.is_some());
    let mut header = SERIES_HEADER.to_vec();
    if with_sigma {
        header.push(SERIES_SIGMA_COLUMN);
    }
    csv_bytes(
        &header,
        series.samples().iter().map(|s| {
            let mut row = vec![fmt_num(s.b_x), fmt_num(s.value)];
            if let (true, Some(sig)) = (with_sigma, s.sigma) {
                row.push(fmt_num(sig));
            }
            row
        }),
    )
}

pub fn write_series(path: &Path, series: &SplittingSeries) -> Result<(), IoError> {
    write_atomic(path, &series_csv(series))
}

/// Parses a splitting-series CSV. `source` names the input in error messages.
pub fn parse_series<R: Read>(
    reader: R,
    kind: SeriesKind,
    source: &Path,
) -> Result<SplittingSeries, IoError> {
    let parse_err = |line: u64, message: String| IoError::Parse {
        path: source.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let cols: Vec<&str> = header.iter().collect();
    let with_sigma = match cols.as_slice() {
        [] | [""] => return Err(parse_err(1, "missing header row".into())),
        [b, v] if [*b, *v] == SERIES_HEADER => false,
        [b, v, s] if [*b, *v] == SERIES_HEADER && *s == SERIES_SIGMA_COLUMN => true,
        _ => {
            return Err(parse_err(
                1,
                format!(
                    "expected header `b_T,value_ueV[,sigma_ueV]`, got `{}`",
                    cols.join(",")
                ),
            ))
        }
    };
    let mut samples = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize, name: &str| -> Result<f64, IoError> {
            let cell = rec.get(i).unwrap_or("");
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("{name}: `{cell}` is not a finite number")))
        };
        let b_x = num(0, "b_T")?;
        let value = num(1, "value_ueV")?;
        let sigma = if with_sigma {
            Some(num(2, SERIES_SIGMA_COLUMN)?)
        } else {
            None
        };
        samples.push((line, Sample { b_x, value, sigma }));
    }
    if samples.is_empty() {
        return Err(parse_err(2, "no data rows".into()));
    }
    let lines: Vec<u64> = samples.iter().map(|(l, _)| *l).collect();
    SplittingSeries::new(kind, samples.into_iter().map(|(_, s)| s).collect()).map_err(|e| {
        let line = match &e {
            ExtractionError::InvalidSample { index, .. } => lines.get(*index).copied().unwrap_or(0),
            _ => 0,
        };
        parse_err(line, e.to_string())
    })
}

pub fn read_series(path: &Path, kind: SeriesKind) -> Result<SplittingSeries, IoError> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    parse_series(f, kind, path)
}

pub fn spectrum_csv(spectrum: &PolarizedSpectrum) -> Vec<u8> {
    csv_bytes(
        &SPECTRUM_HEADER,
        spectrum
            .grid
            .iter()
            .zip(&spectrum.intensity)
            .map(|(e, y)| vec![fmt_num(*e), fmt_num(*y)]),
    )
}

pub fn write_spectrum_csv(path: &Path, spectrum: &PolarizedSpectrum) -> Result<(), IoError> {
    write_atomic(path, &spectrum_csv(spectrum))
}

pub fn write_spectrum_json(path: &Path, spectrum: &PolarizedSpectrum) -> Result<(), IoError> {
    write_json(path, spectrum)
}

/// Reads a spectrum CSV back into `(energy, intensity)` columns.
pub fn read_spectrum_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), IoError> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    let parse_err = |line: u64, message: String| IoError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(f);
    let header = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != SPECTRUM_HEADER {
        return Err(parse_err(
            1,
            "expected header `energy_ueV,intensity`".into(),
        ));
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec =
            rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let get = |i: usize| {
            rec.get(i)
                .and_then(|c| c.parse::<f64>().ok())
                .ok_or_else(|| parse_err(line, format!("column {} is not a number", i + 1)))
        };
        xs.push(get(0)?);
        ys.push(get(1)?);
    }
    Ok((xs, ys))
}

pub fn sweep_csv(rows: &[SweepRow]) -> Vec<u8> {
    use crate::params::Polarization::{H, V};
    csv_bytes(
        &SWEEP_HEADER,
        rows.iter().map(|row| {
            let mut cells = vec![fmt_num(row.b_x)];
            match &row.fine_structure {
                Ok(fs) => cells.extend(
                    [
                        fs.brighter(H).energy,
                        fs.brighter(V).energy,
                        fs.darker(H).energy,
                        fs.darker(V).energy,
                        fs.brighter(H).bright_fraction,
                        fs.brighter(V).bright_fraction,
                        fs.s,
                        fs.d_h,
                        fs.d_v,
                    ]
                    .map(fmt_num),
                ),
                // Failed points keep their row with empty cells.
                Err(_) => cells.extend(std::iter::repeat_n(String::new(), 9)),
            }
            cells
        }),
    )
}

pub fn write_sweep_table(path: &Path, rows: &[SweepRow]) -> Result<(), IoError> {
    write_atomic(path, &sweep_csv(rows))
}
