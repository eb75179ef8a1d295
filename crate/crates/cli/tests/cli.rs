//! End-to-end runs of the resolat binary against the bundled files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_resolat"))
}

fn designs(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../designs").join(name)
}

fn fixtures(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn run_err(args: &[&str], expected_code: i32) -> String {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(expected_code),
        "command {args:?}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn csv_row(path: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let row = text.lines().nth(1).expect("csv has a data row");
    row.split(',')
        .map(|cell| if cell.is_empty() { f64::NAN } else { cell.parse().unwrap() })
        .collect()
}

fn p(path: &Path) -> String {
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_match_metrics_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let resp = dir.path().join("resp.s2p");
    let mcsv = dir.path().join("m.csv");
    run_ok(&[
        "simulate",
        &p(&designs("direct_demo.json")),
        "--out",
        &p(&resp),
        "--metrics",
        &p(&mcsv),
    ]);
    // header: f_c_Hz,il_min_dB,fbw_pct,f_lo_Hz,f_hi_Hz,oob_dB,ripple_dB
    let row = csv_row(&mcsv);
    assert!(row[2] > 25.0, "fbw_pct = {}", row[2]);
    assert!(row[1] < 1.0, "il_min_dB = {}", row[1]);

    let matched = dir.path().join("matched.s2p");
    let report = dir.path().join("match.json");
    let sidecar = dir.path().join("matched_refs.json");
    // The matched sweep carries complex references, so a plain write refuses.
    run_err(&[
        "match",
        &p(&resp),
        "--out",
        &p(&matched),
        "--report",
        &p(&report),
    ], 2);
    run_ok(&[
        "match",
        &p(&resp),
        "--out",
        &p(&matched),
        "--report",
        &p(&report),
        "--sidecar",
        &p(&sidecar),
    ]);
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["feasible"], serde_json::Value::Bool(true));
    assert!(rep["rollett_k"].as_f64().unwrap() > 1.0);
    assert!(rep["z0_match"][0]["re"].as_f64().unwrap() > 0.0);
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sidecar).unwrap()).unwrap();
    assert_eq!(side["renormalized_to_ohm"].as_f64().unwrap(), 50.0);

    // The sidecar file is the 50 ohm view, so its metrics agree with the
    // raw sweep's, and the declared-match metrics above beat both.
    let raw_csv = dir.path().join("raw.csv");
    run_ok(&[
        "metrics",
        &p(&resp),
        "--stopband",
        "23.65e9:24.15e9",
        "--out",
        &p(&raw_csv),
    ]);
    let raw = csv_row(&raw_csv);
    assert!(raw[2] > 20.0 && raw[2] < row[2], "raw fbw {} vs matched {}", raw[2], row[2]);

    let mcsv2 = dir.path().join("m2.csv");
    run_ok(&[
        "metrics",
        &p(&matched),
        "--stopband",
        "23.65e9:24.15e9",
        "--out",
        &p(&mcsv2),
    ]);
    let row2 = csv_row(&mcsv2);
    for (i, (a, b)) in raw.iter().zip(&row2).enumerate() {
        assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "col {i}: {a} vs {b}");
    }
    assert!(row2[5] > 10.0, "oob_dB = {}", row2[5]);
}

#[test]
fn match_of_an_already_matched_network_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.s2p");
    let s11 = 2f64.powi(-44);
    let mut text = String::from("# Hz S RI R 50\n");
    for f in [1.0e9, 2.0e9, 3.0e9] {
        text.push_str(&format!("{f:.12e} {s11:.12e} 0.000000000000e0 5.000000000000e-1 0.000000000000e0 5.000000000000e-1 0.000000000000e0 0.000000000000e0 0.000000000000e0\n"));
    }
    std::fs::write(&input, &text).unwrap();
    let out = dir.path().join("rematched.s2p");
    let report = dir.path().join("report.json");
    let side = dir.path().join("refs.json");
    run_ok(&[
        "match",
        &p(&input),
        "--out",
        &p(&out),
        "--report",
        &p(&report),
        "--sidecar",
        &p(&side),
    ]);
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    for port in 0..2 {
        let g = &rep["gamma_m"][port];
        let mag = (g["re"].as_f64().unwrap().powi(2) + g["im"].as_f64().unwrap().powi(2)).sqrt();
        assert!(mag < 1e-12, "gamma_m[{port}] = {mag}");
    }
    let a = std::fs::read_to_string(&input).unwrap();
    let b = std::fs::read_to_string(&out).unwrap();
    let nums = |t: &str| -> Vec<f64> {
        t.lines()
            .filter(|l| !l.starts_with(['!', '#']))
            .flat_map(|l| l.split_whitespace().map(|w| w.parse::<f64>().unwrap()).collect::<Vec<_>>())
            .collect()
    };
    let (va, vb) = (nums(&a), nums(&b));
    assert_eq!(va.len(), vb.len());
    for (x, y) in va.iter().zip(&vb) {
        assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{x} vs {y}");
    }
}

#[test]
fn infeasible_match_exits_numeric_with_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("series100.s2p");
    // A series 100 ohm resistor between 50 ohm ports sits exactly on K = 1.
    let mut text = String::from("# Hz S RI R 50\n");
    for f in [1.0e9, 2.0e9] {
        text.push_str(&format!("{f:.12e} 0.5 0.0 0.5 0.0 0.5 0.0 0.5 0.0\n"));
    }
    std::fs::write(&input, &text).unwrap();
    let out = dir.path().join("never.s2p");
    let report = dir.path().join("report.json");
    let stderr = run_err(&["match", &p(&input), "--out", &p(&out), "--report", &p(&report)], 3);
    assert!(stderr.contains("boundary") && stderr.contains("(K = 1)"), "{stderr}");
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["feasible"], serde_json::Value::Bool(false));
    assert_eq!(rep["rollett_k"].as_f64().unwrap(), 1.0);
    assert!(rep["detail"].as_str().unwrap().contains("boundary"));
    assert!(!out.exists());
}

#[test]
fn fit_recovers_the_bundled_three_mode_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.json");
    let report = dir.path().join("fit.csv");
    run_ok(&[
        "fit",
        &p(&fixtures("three_mode.s1p")),
        "--branches",
        "3",
        "--out",
        &p(&params),
        "--report",
        &p(&report),
    ]);
    let text = std::fs::read_to_string(&report).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "branch,mode,rm_ohm,lm_h,cm_f,f_s_hz,q,k2");
    let truth_fs = [13.4e9, 18.8e9, 23.9e9];
    for (line, fs_true) in lines.zip(truth_fs) {
        let cells: Vec<&str> = line.split(',').collect();
        let fs: f64 = cells[5].parse().unwrap();
        assert!(
            (fs - fs_true).abs() / fs_true < 1e-3,
            "f_s {fs} vs {fs_true}"
        );
    }
    // The fitted parameters re-seed a follow-up fit.
    let params2 = dir.path().join("params2.json");
    let report2 = dir.path().join("fit2.csv");
    run_ok(&[
        "fit",
        &p(&fixtures("three_mode.s1p")),
        "--branches",
        "3",
        "--seed-from",
        &p(&params),
        "--out",
        &p(&params2),
        "--report",
        &p(&report2),
    ]);
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&params2).unwrap()).unwrap();
    assert!(rep["residual_rms"].as_f64().unwrap() < 1e-3);
}

#[test]
fn optimize_writes_a_reusable_design_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let best = dir.path().join("best.json");
    let hist = dir.path().join("h.csv");
    let stdout = run_ok(&[
        "optimize",
        &p(&designs("compare_lattice.json")),
        &p(&designs("compare_spec_lattice.json")),
        "--budget",
        "40",
        "--seed",
        "1",
        "--out",
        &p(&best),
        "--history",
        &p(&hist),
    ]);
    assert!(stdout.contains("cost ="), "{stdout}");
    let hist_text = std::fs::read_to_string(&hist).unwrap();
    assert!(hist_text.starts_with("evaluation,cost,best\n"));
    assert!(hist_text.lines().count() > 10);
    // The optimized output is itself a valid design file.
    let resp = dir.path().join("best.s2p");
    run_ok(&["simulate", &p(&best), "--out", &p(&resp)]);
}

#[test]
fn compare_tabulates_both_designs() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    run_ok(&[
        "compare",
        &p(&designs("balanced_demo.json")),
        &p(&designs("direct_demo.json")),
        "--out",
        &p(&table),
    ]);
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.starts_with("metric,balanced_demo,direct_demo"));
    let fbw_row = text.lines().find(|l| l.starts_with("fbw_pct,")).unwrap();
    let cells: Vec<&str> = fbw_row.split(',').collect();
    let balanced: f64 = cells[1].parse().unwrap();
    let direct: f64 = cells[2].parse().unwrap();
    assert!(balanced > 35.0 && direct > 25.0, "{balanced} {direct}");
}

#[test]
fn validation_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.s2p");
    let stderr = run_err(&["simulate", "no_such_design.json", "--out", &p(&out)], 2);
    assert!(stderr.contains("no_such_design.json"), "{stderr}");

    let future = dir.path().join("future.json");
    let text = std::fs::read_to_string(designs("direct_demo.json")).unwrap();
    std::fs::write(&future, text.replace("\"schema\": 1", "\"schema\": 3")).unwrap();
    let stderr = run_err(&["simulate", &p(&future), "--out", &p(&out)], 2);
    assert!(stderr.contains("newer"), "{stderr}");

    let bad = dir.path().join("bad.s2p");
    std::fs::write(&bad, "# GHz S RI R 50\n2.0 0 0 0 0 0 0 0 0\n1.0 0 0 0 0 0 0 0 0\n").unwrap();
    let mcsv = dir.path().join("m.csv");
    let stderr = run_err(&["metrics", &p(&bad), "--out", &p(&mcsv)], 2);
    assert!(stderr.contains("increase strictly"), "{stderr}");

    let stderr = run_err(&[
        "metrics",
        &p(&bad),
        "--stopband",
        "oops",
        "--out",
        &p(&mcsv),
    ], 2);
    assert!(stderr.contains("lo:hi"), "{stderr}");
}

#[test]
fn numeric_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // 60 dB flat attenuation leaves nothing to call a passband.
    let stopped = dir.path().join("stopped.s2p");
    let mut text = String::from("# Hz S RI R 50\n");
    for f in [1.0e9, 2.0e9, 3.0e9] {
        text.push_str(&format!("{f:.12e} 0.0 0.0 1.0e-3 0.0 1.0e-3 0.0 0.0 0.0\n"));
    }
    std::fs::write(&stopped, &text).unwrap();
    let mcsv = dir.path().join("m.csv");
    let stderr = run_err(&["metrics", &p(&stopped), "--out", &p(&mcsv)], 3);
    assert!(stderr.contains("insertion loss below"), "{stderr}");
}
