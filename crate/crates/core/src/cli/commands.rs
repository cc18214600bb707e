use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::config::{DotConfig, FieldConfig, NoiseConfig, RunConfig};
use super::{CliError, CommonArgs, CurveSource, QuarticArgs, ThresholdArgs};
use crate::extraction::{
    classify_dot, crossing_field, extrapolate_d0, fit_eq1, fit_zeeman, s0_from_intercepts,
    series_from_spectra, solve_g_eq2, solve_g_equal_magnitude, ClassificationThresholds, Eq1Fit,
    ExtractionError, FieldSpectra, GConvention, Sample, SeriesKind, SeriesOptions, SplittingCurve,
    SplittingSeries,
};
use crate::io;
use crate::model::{sweep_field, SweepRow};
use crate::params::DotParameters;
use crate::spectra::{add_noise, synthesize, GridSpec};

/// JSON report printed to stdout and, with `--out`, saved next to the data.
pub type Report = Value;

fn out_dir(cfg: &RunConfig, common: &CommonArgs) -> Option<PathBuf> {
    cfg.out_dir(common.out.as_deref())
}

fn require_out(cfg: &RunConfig, common: &CommonArgs, cmd: &str) -> Result<PathBuf, CliError> {
    out_dir(cfg, common).ok_or_else(|| CliError::Input(format!("{cmd} needs --out DIR")))
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    io::write_json(path, value).map_err(CliError::Write)
}

fn save_report(dir: Option<&Path>, name: &str, report: &Value) -> Result<(), CliError> {
    match dir {
        Some(d) => write_json(&d.join(name), report),
        None => Ok(()),
    }
}

fn params_json(p: &DotParameters) -> Value {
    json!({
        "s0": p.s0(),
        "d0": p.d0(),
        "sigma0": p.sigma0(),
        "g_e": p.g_e(),
        "g_h": p.g_h(),
        "e0": p.e0(),
        "gamma": p.gamma(),
        "xx_binding": p.xx_binding(),
        "e_c": p.e_c(),
    })
}

fn fit_json(fit: &Eq1Fit) -> Value {
    json!({
        "s0": fit.s0_hat,
        "K": fit.k_hat,
        "K_prime": fit.k_prime_hat,
        "r_percent": fit.r_percent,
        "include_quartic": fit.include_quartic,
        "n_samples": fit.residuals.len(),
        "residuals": fit.residuals,
        "covariance": fit.covariance,
    })
}

fn read_series(
    path: &Path,
    kind: SeriesKind,
    use_weights: bool,
) -> Result<SplittingSeries, CliError> {
    let series = io::read_series(path, kind).map_err(CliError::Read)?;
    if use_weights {
        return Ok(series);
    }
    let samples = series
        .samples()
        .iter()
        .map(|s| Sample { sigma: None, ..*s })
        .collect();
    Ok(SplittingSeries::new(kind, samples)?)
}

fn use_weights(cfg: &RunConfig, no_weights: bool) -> bool {
    !no_weights && cfg.fit.use_weights.unwrap_or(true)
}

/// Noise seed of one channel, derived from the run seed so that every
/// spectrum gets an independent stream.
fn spectrum_seed(seed: u64, index: usize, channel: u64) -> u64 {
    seed ^ (2 * index as u64 + channel + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn model_series(rows: &[SweepRow]) -> Result<[SplittingSeries; 3], CliError> {
    let mut s = Vec::new();
    let mut d_h = Vec::new();
    let mut d_v = Vec::new();
    for row in rows {
        if let Ok(fs) = &row.fine_structure {
            s.push((row.b_x, fs.s));
            d_h.push((row.b_x, fs.d_h));
            d_v.push((row.b_x, fs.d_v));
        }
    }
    Ok([
        SplittingSeries::from_pairs(SeriesKind::S, s)?,
        SplittingSeries::from_pairs(SeriesKind::DH, d_h)?,
        SplittingSeries::from_pairs(SeriesKind::DV, d_v)?,
    ])
}

fn write_sweep(dir: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    io::write_sweep_table(&dir.join("sweep.csv"), rows).map_err(CliError::Write)
}

fn failed_fields(rows: &[SweepRow]) -> Vec<Value> {
    rows.iter()
        .filter_map(|r| match &r.fine_structure {
            Ok(_) => None,
            Err(e) => Some(json!({ "b_x": r.b_x, "error": e.to_string() })),
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_simulate(
    cfg: &RunConfig,
    common: &CommonArgs,
    dot: &DotConfig,
    field: &FieldConfig,
    noise: &NoiseConfig,
    power: Option<f64>,
    grid_step: Option<f64>,
    json_spectra: bool,
) -> Result<Report, CliError> {
    let params = cfg.dot(dot).build()?;
    let (start, end, steps) = cfg.field_grid(field)?;
    let seed = cfg.seed(common.seed)?;
    let sigma_rel = cfg.sigma_rel(noise.sigma_rel)?;
    let power = power.or(cfg.spectrum.power).unwrap_or(1.0);
    if !(power > 0.0 && power.is_finite()) {
        return Err(CliError::Input(format!("power must be > 0, got {power}")));
    }
    let mut grid = GridSpec::default_for(&params);
    grid.step = grid_step.or(cfg.spectrum.grid_step).unwrap_or(grid.step);
    let dir = require_out(cfg, common, "simulate")?;

    let rows = sweep_field(&params, start, end, steps)?;
    write_sweep(&dir, &rows)?;

    let spectra_dir = dir.join("spectra");
    let mut sweep = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let (mut h, mut v) = synthesize(&params, row.b_x, power, &grid)?;
        if sigma_rel > 0.0 {
            h = add_noise(&h, sigma_rel, spectrum_seed(seed, i, 0));
            v = add_noise(&v, sigma_rel, spectrum_seed(seed, i, 1));
        }
        for spec in [&h, &v] {
            let stem = format!("{}_{i:03}", spec.polarization);
            io::write_spectrum_csv(&spectra_dir.join(format!("{stem}.csv")), spec)
                .map_err(CliError::Write)?;
            if json_spectra {
                io::write_spectrum_json(&spectra_dir.join(format!("{stem}.json")), spec)
                    .map_err(CliError::Write)?;
            }
        }
        sweep.push(FieldSpectra { b_x: row.b_x, h, v });
    }

    let opts = SeriesOptions {
        window: Some((params.e0() - 0.5 * params.xx_binding(), f64::INFINITY)),
        ..SeriesOptions::default()
    };
    let measured = series_from_spectra(&sweep, &opts)?;
    for (name, series) in [
        ("measured_S.csv", &measured.s),
        ("measured_D_H.csv", &measured.d_h),
        ("measured_D_V.csv", &measured.d_v),
    ] {
        io::write_series(&dir.join(name), series).map_err(CliError::Write)?;
    }

    let report = json!({
        "command": "simulate",
        "params": params_json(&params),
        "field": { "start": start, "end": end, "steps": steps },
        "seed": seed,
        "sigma_rel": sigma_rel,
        "power": power,
        "grid": grid,
        "spectra": rows.len(),
        "measured_points": {
            "S": measured.s.len(),
            "D_H": measured.d_h.len(),
            "D_V": measured.d_v.len(),
        },
        "warnings": measured.warnings,
    });
    write_json(&dir.join("simulate_report.json"), &report)?;
    Ok(report)
}

pub fn cmd_sweep(
    cfg: &RunConfig,
    common: &CommonArgs,
    dot: &DotConfig,
    field: &FieldConfig,
) -> Result<Report, CliError> {
    let params = cfg.dot(dot).build()?;
    let (start, end, steps) = cfg.field_grid(field)?;
    let dir = require_out(cfg, common, "sweep")?;
    let rows = sweep_field(&params, start, end, steps)?;
    write_sweep(&dir, &rows)?;
    let [s, d_h, d_v] = model_series(&rows)?;
    for (name, series) in [("S.csv", &s), ("D_H.csv", &d_h), ("D_V.csv", &d_v)] {
        io::write_series(&dir.join(name), series).map_err(CliError::Write)?;
    }
    let report = json!({
        "command": "sweep",
        "params": params_json(&params),
        "field": { "start": start, "end": end, "steps": steps },
        "failed_fields": failed_fields(&rows),
    });
    write_json(&dir.join("sweep_report.json"), &report)?;
    Ok(report)
}

pub fn cmd_fit(
    cfg: &RunConfig,
    common: &CommonArgs,
    input: &Path,
    quartic: QuarticArgs,
    no_weights: bool,
    thresholds: ThresholdArgs,
) -> Result<Report, CliError> {
    let th = cfg.thresholds(thresholds.lower_threshold, thresholds.upper_threshold)?;
    let series = read_series(input, SeriesKind::S, use_weights(cfg, no_weights))?;
    let fit = fit_eq1(&series, quartic.resolve(cfg))?;
    let (class, b_star) = classify_dot(&fit, &th)?;
    let mut report = fit_json(&fit);
    let obj = report.as_object_mut().expect("fit report is an object");
    obj.insert("command".into(), json!("fit"));
    obj.insert("crossing_field_T".into(), json!(b_star));
    obj.insert("classification".into(), json!(class.label(&th)));
    obj.insert("thresholds".into(), json!(th));
    save_report(out_dir(cfg, common).as_deref(), "fit_report.json", &report)?;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_extract_g(
    cfg: &RunConfig,
    common: &CommonArgs,
    dh: &Path,
    dv: &Path,
    s: &Path,
    convention: Option<GConvention>,
    g_diff: Option<f64>,
    quartic: QuarticArgs,
) -> Result<Report, CliError> {
    let weights = use_weights(cfg, false);
    let d_h = read_series(dh, SeriesKind::DH, weights)?;
    let d_v = read_series(dv, SeriesKind::DV, weights)?;
    let s_series = read_series(s, SeriesKind::S, weights)?;

    let fit_h = fit_zeeman(&d_h)?;
    let fit_v = fit_zeeman(&d_v)?;
    let d0 = extrapolate_d0(&fit_h, &fit_v);
    let s0 = s0_from_intercepts(&fit_h, &fit_v);
    let eq1 = fit_eq1(&s_series, quartic.resolve(cfg))?;
    let convention = convention
        .or(cfg.fit.g_convention)
        .unwrap_or(GConvention::MagnitudeDifference);
    let g_diff = g_diff.unwrap_or(fit_v.g_hat);
    let (eq_e, eq_h) = solve_g_equal_magnitude(fit_h.g_hat);

    let mut report = json!({
        "command": "extract-g",
        "d_h0": fit_h.d_x0_hat,
        "d_v0": fit_v.d_x0_hat,
        "g_H": fit_h.g_hat,
        "g_V": fit_v.g_hat,
        "r_percent_H": fit_h.r_percent,
        "r_percent_V": fit_v.r_percent,
        "d0": d0,
        "s0": s0,
        "s0_fit": eq1.s0_hat,
        "K": eq1.k_hat,
        "K_prime": eq1.k_prime_hat,
        "r_percent": eq1.r_percent,
        "include_quartic": eq1.include_quartic,
        "convention": convention,
        "g_diff": g_diff,
        "branches": [],
        "heuristic_pick": null,
        "equal_magnitude": { "g_e": eq_e, "g_h": eq_h },
        "discriminant": null,
    });
    let dir = out_dir(cfg, common);
    match solve_g_eq2(eq1.k_hat, s0, d0, g_diff, convention) {
        Ok(sol) => {
            let branches = sol
                .branches
                .iter()
                .map(|b| {
                    Ok(json!({
                        "g_e": b.g_e,
                        "g_h": b.g_h,
                        "K_forward": b.forward_k(s0, d0)?,
                    }))
                })
                .collect::<Result<Vec<_>, ExtractionError>>()?;
            report["branches"] = json!(branches);
            report["heuristic_pick"] = json!(sol.heuristic_pick);
            save_report(dir.as_deref(), "extract_g_report.json", &report)?;
            Ok(report)
        }
        Err(ExtractionError::Infeasible { discriminant }) => {
            report["discriminant"] = json!(discriminant);
            save_report(dir.as_deref(), "extract_g_report.json", &report)?;
            Err(CliError::Infeasible {
                discriminant,
                report: Box::new(report),
            })
        }
        Err(e) => Err(e.into()),
    }
}

/// Fitted polynomial from `--input`, otherwise the exact model.
enum Curve {
    Fit(Eq1Fit),
    Model(DotParameters),
}

impl Curve {
    fn load(cfg: &RunConfig, source: &CurveSource) -> Result<Curve, CliError> {
        match &source.input {
            Some(path) => {
                let series = read_series(path, SeriesKind::S, use_weights(cfg, source.no_weights))?;
                Ok(Curve::Fit(fit_eq1(&series, source.quartic.resolve(cfg))?))
            }
            None => Ok(Curve::Model(cfg.dot(&source.dot).build()?)),
        }
    }

    fn as_curve(&self) -> &dyn SplittingCurve {
        match self {
            Curve::Fit(f) => f,
            Curve::Model(p) => p,
        }
    }

    fn describe(&self) -> Value {
        match self {
            Curve::Fit(f) => json!({ "source": "fit", "fit": fit_json(f) }),
            Curve::Model(p) => json!({ "source": "model", "params": params_json(p) }),
        }
    }
}

pub fn cmd_crossing(
    cfg: &RunConfig,
    common: &CommonArgs,
    source: &CurveSource,
    b_max: f64,
) -> Result<Report, CliError> {
    let curve = Curve::load(cfg, source)?;
    let b_star = crossing_field(curve.as_curve(), b_max)?;
    let mut report = curve.describe();
    report["command"] = json!("crossing");
    report["b_max"] = json!(b_max);
    report["crossing_field_T"] = json!(b_star);
    save_report(
        out_dir(cfg, common).as_deref(),
        "crossing_report.json",
        &report,
    )?;
    Ok(report)
}

pub fn cmd_classify(
    cfg: &RunConfig,
    common: &CommonArgs,
    source: &CurveSource,
    thresholds: ThresholdArgs,
) -> Result<Report, CliError> {
    let th: ClassificationThresholds =
        cfg.thresholds(thresholds.lower_threshold, thresholds.upper_threshold)?;
    let curve = Curve::load(cfg, source)?;
    let (class, b_star) = classify_dot(curve.as_curve(), &th)?;
    let mut report = curve.describe();
    report["command"] = json!("classify");
    report["thresholds"] = json!(th);
    report["crossing_field_T"] = json!(b_star);
    report["classification"] = json!(class.label(&th));
    save_report(
        out_dir(cfg, common).as_deref(),
        "classify_report.json",
        &report,
    )?;
    Ok(report)
}
