use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn finestruct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finestruct"))
        .args(args)
        .env_remove("FINESTRUCT_SEED")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const DOT_C: [&str; 8] = ["--s0", "-16", "--d0", "215", "--g-e", "0.4", "--g-h", "0.4"];

#[test]
fn fit_reports_dot_c() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    fs::write(&csv, "b_T,value_ueV\n0,-16\n2.7,0\n5,31\n").unwrap();
    let out = finestruct(&["fit", "--input", s(&csv), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    for key in [
        "s0",
        "K",
        "K_prime",
        "r_percent",
        "crossing_field_T",
        "classification",
    ] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert!((r["K"].as_f64().unwrap() - 2.3244).abs() < 1e-3);
    assert!((r["K_prime"].as_f64().unwrap() + 0.017775).abs() < 1e-5);
    assert!((r["crossing_field_T"].as_f64().unwrap() - 2.7).abs() < 1e-3);
    assert_eq!(r["classification"], "crosses_below_5T");
    let saved = fs::read(dir.path().join("o/fit_report.json")).unwrap();
    assert_eq!(saved, out.stdout);
}

#[test]
fn fit_without_crossing_reports_null() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a.csv");
    fs::write(
        &csv,
        "b_T,value_ueV,sigma_ueV\n0,22,0.5\n1,24.3,0.5\n2,31.2,0.5\n3,42.7,0.5\n",
    )
    .unwrap();
    let out = finestruct(&["fit", "--input", s(&csv), "--no-quartic"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(r["crossing_field_T"].is_null());
    assert_eq!(r["classification"], "no_crossing_below_10T");
    assert_eq!(r["K_prime"], 0.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    };
    let header_only = write("h.csv", "b_T,value_ueV\n");
    let out = finestruct(&["fit", "--input", s(&header_only)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("h.csv:2"));

    let bad = write("bad.csv", "b_T,value_ueV\n0,1\n1,x\n");
    let out = finestruct(&["fit", "--input", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.csv:3"));

    let wrong_header = write("w.csv", "field,value\n0,1\n");
    assert_eq!(
        finestruct(&["fit", "--input", s(&wrong_header)])
            .status
            .code(),
        Some(2)
    );

    let one = write("one.csv", "b_T,value_ueV\n0,-16\n");
    assert_eq!(
        finestruct(&["fit", "--input", s(&one)]).status.code(),
        Some(3)
    );

    let missing = dir.path().join("nope.csv");
    assert_eq!(
        finestruct(&["fit", "--input", s(&missing)]).status.code(),
        Some(2)
    );

    let out = finestruct(&["sweep", "--out", s(&dir.path().join("x")), "--d0", "-3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("d0"));

    let out = finestruct(&[
        "sweep",
        "--out",
        s(&dir.path().join("y")),
        "--b-start",
        "0",
        "--b-end",
        "0",
        "--steps",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = finestruct(&["sweep", "--out", s(&blocker.join("sub"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(s(&blocker)));
}

#[test]
fn simulate_sweep_table_changes_sign_once() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sim");
    let args = [
        &["simulate", "--out", s(&out_dir), "--steps", "26"][..],
        &DOT_C,
    ]
    .concat();
    let out = finestruct(&args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        "b_x_T,e_Hbright_ueV,e_Vbright_ueV,e_Hdark_ueV,e_Vdark_ueV,frac_Hbright,frac_Vbright,S_ueV,D_H_ueV,D_V_ueV"
    );
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let c: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (c[0], c[7])
        })
        .collect();
    assert_eq!(rows.len(), 26);
    let flips: Vec<_> = rows
        .windows(2)
        .filter(|w| w[0].1 < 0.0 && w[1].1 > 0.0)
        .collect();
    assert_eq!(flips.len(), 1);
    assert!(flips[0][0].0 < 2.58 && flips[0][1].0 > 2.58);
    assert!(out_dir.join("spectra/H_000.csv").exists());
    assert!(out_dir.join("spectra/V_025.csv").exists());
    assert!(out_dir.join("measured_S.csv").exists());
}

#[test]
fn simulate_brackets_crossing_at_2p5_and_2p6() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sim");
    let args = [
        &["sweep", "--out", s(&out_dir), "--steps", "51"][..],
        &DOT_C,
    ]
    .concat();
    assert_eq!(finestruct(&args).status.code(), Some(0));
    let s_csv = fs::read_to_string(out_dir.join("S.csv")).unwrap();
    let rows: Vec<(f64, f64)> = s_csv
        .lines()
        .skip(1)
        .map(|l| {
            let (b, v) = l.split_once(',').unwrap();
            (b.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    let flip = rows
        .windows(2)
        .find(|w| w[0].1 < 0.0 && w[1].1 > 0.0)
        .unwrap();
    assert_eq!((flip[0].0, flip[1].0), (2.5, 2.6));
}

#[test]
fn seed_sources_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str], env_seed: Option<&str>| {
        let out_dir = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_finestruct"));
        cmd.args([
            "simulate",
            "--out",
            s(&out_dir),
            "--steps",
            "3",
            "--sigma-rel",
            "0.02",
        ])
        .args(extra)
        .env_remove("FINESTRUCT_SEED");
        if let Some(v) = env_seed {
            cmd.env("FINESTRUCT_SEED", v);
        }
        assert!(cmd.output().unwrap().status.success());
        fs::read(out_dir.join("spectra/H_001.csv")).unwrap()
    };
    let a = run("a", &["--seed", "5"], None);
    let b = run("b", &["--seed", "5"], None);
    let c = run("c", &[], Some("5"));
    let d = run("d", &["--seed", "6"], Some("5"));
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_ne!(a, d);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"dot": {"s0": -16, "d0": 215, "g_e": 0.4, "g_h": 0.4}, "thresholds": {"lower": 2}}"#,
    )
    .unwrap();
    let r = json(&finestruct(&["classify", "--config", s(&cfg)]));
    assert_eq!(r["classification"], "crosses_below_10T");
    let r = json(&finestruct(&[
        "classify",
        "--config",
        s(&cfg),
        "--lower-threshold",
        "3",
    ]));
    assert_eq!(r["classification"], "crosses_below_3T");
    assert!((r["crossing_field_T"].as_f64().unwrap() - 2.5798556).abs() < 1e-6);

    fs::write(&cfg, r#"{"dots": {}}"#).unwrap();
    assert_eq!(
        finestruct(&["classify", "--config", s(&cfg)]).status.code(),
        Some(2)
    );
}

#[test]
fn crossing_and_classify_from_model() {
    let args = [&["crossing"][..], &DOT_C].concat();
    let r = json(&finestruct(&args));
    assert_eq!(r["source"], "model");
    assert!((r["crossing_field_T"].as_f64().unwrap() - 2.5798556).abs() < 1e-6);

    let r = json(&finestruct(&[
        "classify", "--s0", "284", "--d0", "473", "--g-e", "1.21", "--g-h", "0.13",
    ]));
    assert_eq!(r["classification"], "no_crossing_below_10T");
    assert!(r["crossing_field_T"].is_null());

    let r = json(&finestruct(&["classify", "--s0", "0"]));
    assert_eq!(r["classification"], "crosses_below_5T");
    assert_eq!(r["crossing_field_T"], 0.0);
}

fn sweep_files(dir: &Path, dot: &[&str]) {
    let args = [&["sweep", "--out", s(dir), "--steps", "11"][..], dot].concat();
    assert_eq!(finestruct(&args).status.code(), Some(0));
}

fn extract(dir: &Path, extra: &[&str]) -> Output {
    let dh = dir.join("D_H.csv");
    let dv = dir.join("D_V.csv");
    let sc = dir.join("S.csv");
    let args = [
        &["extract-g", "--dh", s(&dh), "--dv", s(&dv), "--s", s(&sc)][..],
        extra,
    ]
    .concat();
    finestruct(&args)
}

#[test]
fn extract_g_gaas_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    sweep_files(
        dir.path(),
        &[
            "--s0", "22", "--d0", "215", "--g-e", "0.395", "--g-h", "0.395",
        ],
    );
    let out = extract(dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let rel = |k: &str, t: f64| (r[k].as_f64().unwrap() - t).abs() / t;
    assert!(rel("d0", 215.0) < 1e-6);
    assert!(rel("s0", 22.0) < 1e-6);
    assert!(rel("g_H", 0.79) < 1e-6);
    assert!(r["g_V"].as_f64().unwrap().abs() < 1e-6);
    let eq = &r["equal_magnitude"];
    assert!((eq["g_e"].as_f64().unwrap() - 0.395).abs() < 1e-6);
    assert!((eq["g_h"].as_f64().unwrap() - 0.395).abs() < 1e-6);
    assert!(r["discriminant"].is_null());
    assert!(!r["branches"].as_array().unwrap().is_empty());
}

#[test]
fn extract_g_algaas_heuristic_pick() {
    let dir = tempfile::tempdir().unwrap();
    sweep_files(
        dir.path(),
        &[
            "--s0", "284", "--d0", "473", "--g-e", "1.21", "--g-h", "0.13",
        ],
    );
    let out = extract(
        dir.path(),
        &["--g-diff", "1.08", "--g-convention", "magnitude"],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let pick = r["heuristic_pick"].as_u64().unwrap() as usize;
    let b = &r["branches"][pick];
    // K is fitted over 0-5 T, where the quartic truncation biases it by ~10%.
    assert!((b["g_e"].as_f64().unwrap() - 1.21).abs() < 0.02, "{b}");
    assert!((b["g_h"].as_f64().unwrap() - 0.13).abs() < 0.02, "{b}");
}

#[test]
fn extract_g_infeasible_exits_4_with_report() {
    let dir = tempfile::tempdir().unwrap();
    sweep_files(
        dir.path(),
        &[
            "--s0", "284", "--d0", "473", "--g-e", "1.21", "--g-h", "0.13",
        ],
    );
    let out = extract(dir.path(), &["--g-diff", "0", "--g-convention", "signed"]);
    assert_eq!(out.status.code(), Some(4));
    let r = json(&out);
    assert!(r["discriminant"].as_f64().unwrap() < 0.0);
    assert!(r["branches"].as_array().unwrap().is_empty());
}

#[test]
fn extract_g_empty_dv_is_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    sweep_files(dir.path(), &[]);
    fs::write(dir.path().join("D_V.csv"), "").unwrap();
    assert_eq!(extract(dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn json_spectra_carry_line_lists() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sim");
    let out = finestruct(&[
        "simulate",
        "--out",
        s(&out_dir),
        "--steps",
        "2",
        "--json-spectra",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let spec: Value =
        serde_json::from_slice(&fs::read(out_dir.join("spectra/H_001.json")).unwrap()).unwrap();
    assert_eq!(spec["polarization"], "H");
    let origins: Vec<&str> = spec["lines"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["origin"].as_str().unwrap())
        .collect();
    assert!(origins.contains(&"X-darker") && origins.contains(&"XX-H"));
}
