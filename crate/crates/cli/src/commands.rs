//! Implementations of the six subcommands. Exit code 2 marks input or
//! validation problems, 3 marks numeric failures in an otherwise valid run.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use resolat_core::design::{evaluate, optimize, DesignError, MatchPolicy, OptimizeOptions};
use resolat_core::extraction::{fit_mbvd, initial_guess, ExtractionError, FitOptions};
use resolat_core::matching::{apply_match, conjugate_match, match_at_peak, MatchError, MatchSolution};
use resolat_core::metrics::{extract_metrics, FilterMetrics, MetricsError};

use crate::designfile::{
    self, load_design, load_spec, with_updated_resonators, DesignFileError, ResonatorSpec,
    SCHEMA_VERSION,
};
use crate::touchstone::{
    read_touchstone, write_touchstone, write_touchstone_with_sidecar, TouchstoneError, TsFormat,
};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<TouchstoneError> for CliError {
    fn from(e: TouchstoneError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<DesignFileError> for CliError {
    fn from(e: DesignFileError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<DesignError> for CliError {
    fn from(e: DesignError) -> Self {
        match e {
            DesignError::GridTooCoarse { .. }
            | DesignError::InvalidTarget { .. }
            | DesignError::NoFreeParameters
            | DesignError::InvalidFreeParameter { .. }
            | DesignError::InfeasibleBounds { .. }
            | DesignError::Topology(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<MatchError> for CliError {
    fn from(e: MatchError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<ExtractionError> for CliError {
    fn from(e: ExtractionError) -> Self {
        match e {
            ExtractionError::InvalidOption { .. } | ExtractionError::InvalidBranchCount { .. } => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    crate::atomic_write(path, bytes)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn metrics_csv(m: &FilterMetrics) -> String {
    format!("{}\n{}\n", FilterMetrics::csv_header(), m.to_csv_row())
}

pub fn parse_stopband(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || {
        CliError::Validation(format!(
            "stopband '{text}' must be lo:hi in Hz, for example 2.45e10:2.55e10"
        ))
    };
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(bad());
    }
    Ok((lo, hi))
}

pub fn cmd_simulate(
    design_path: &Path,
    out: &Path,
    metrics_out: Option<&Path>,
) -> Result<(), CliError> {
    let loaded = load_design(design_path)?;
    let raw = evaluate(&loaded.design, &loaded.grid, MatchPolicy::None, &loaded.stopbands)?;
    write_touchstone(raw.response(), out, TsFormat::Ri)?;
    let reported = if loaded.policy == MatchPolicy::None {
        raw
    } else {
        evaluate(&loaded.design, &loaded.grid, loaded.policy, &loaded.stopbands)?
    };
    let m = reported.metrics();
    if let Some(path) = metrics_out {
        write_file(path, metrics_csv(m).as_bytes())?;
    }
    println!(
        "wrote {}: f_c = {:.4} GHz, fbw = {:.2}%, il_min = {:.3} dB",
        out.display(),
        m.f_c_hz() / 1e9,
        m.fbw_3db() * 100.0,
        m.il_min_db()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

#[derive(Debug, Serialize)]
struct MatchReport {
    schema: u32,
    feasible: bool,
    f_design_hz: Option<f64>,
    rollett_k: f64,
    delta: Option<ComplexJson>,
    gamma_m: Option<[ComplexJson; 2]>,
    z0_match: Option<[ComplexJson; 2]>,
    b: Option<[f64; 2]>,
    c: Option<[ComplexJson; 2]>,
    detail: Option<String>,
}

fn feasible_report(sol: &MatchSolution) -> MatchReport {
    let g = sol.gamma_m();
    let z = sol.z0_match();
    let c = sol.c();
    MatchReport {
        schema: SCHEMA_VERSION,
        feasible: sol.feasible(),
        f_design_hz: Some(sol.f_design()),
        rollett_k: sol.rollett_k(),
        delta: Some(sol.delta().into()),
        gamma_m: Some([g[0].into(), g[1].into()]),
        z0_match: Some([z[0].into(), z[1].into()]),
        b: Some(sol.b()),
        c: Some([c[0].into(), c[1].into()]),
        detail: None,
    }
}

fn report_json(report: &MatchReport) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text.into_bytes()
}

pub fn cmd_match(
    in_path: &Path,
    at_hz: Option<f64>,
    out: &Path,
    report_path: &Path,
    sidecar: Option<&Path>,
) -> Result<(), CliError> {
    let file = read_touchstone(in_path)?;
    let resp = file.sweep()?;
    let solved = match at_hz {
        None => match_at_peak(&resp),
        Some(f) => {
            let points = resp.grid().points();
            if f < points[0] || f > points[points.len() - 1] {
                return Err(CliError::Validation(format!(
                    "--at-hz {f} lies outside the file's {}..{} Hz grid",
                    points[0],
                    points[points.len() - 1]
                )));
            }
            let idx = points
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    (a.1 - f).abs().partial_cmp(&(b.1 - f).abs()).expect("finite grid")
                })
                .map(|(i, _)| i)
                .expect("non-empty grid");
            conjugate_match(&resp.matrices()[idx], points[idx])
        }
    };
    let infeasible = match &solved {
        Err(MatchError::InfeasibleMatch { rollett_k }) => Some((
            *rollett_k,
            format!("no simultaneous conjugate match exists (K = {rollett_k})"),
        )),
        Err(MatchError::DegenerateDenominator { port, rollett_k }) => Some((
            *rollett_k,
            format!(
                "feasibility boundary: match at port {port} degenerates to an open circuit (K = {rollett_k})"
            ),
        )),
        _ => None,
    };
    if let Some((rollett_k, detail)) = infeasible {
        let report = MatchReport {
            schema: SCHEMA_VERSION,
            feasible: false,
            f_design_hz: at_hz,
            rollett_k,
            delta: None,
            gamma_m: None,
            z0_match: None,
            b: None,
            c: None,
            detail: Some(detail.clone()),
        };
        write_file(report_path, &report_json(&report))?;
        return Err(CliError::Numeric(format!(
            "{detail}; report written to {}",
            report_path.display()
        )));
    }
    let sol = solved.map_err(CliError::from)?;
    let matched = apply_match(&resp, &sol)?;
    match sidecar {
        Some(side) => write_touchstone_with_sidecar(&matched, out, TsFormat::Ri, side)?,
        None => write_touchstone(&matched, out, TsFormat::Ri)?,
    }
    write_file(report_path, &report_json(&feasible_report(&sol)))?;
    println!(
        "matched at {:.6} GHz, K = {:.4}; wrote {} and {}",
        sol.f_design() / 1e9,
        sol.rollett_k(),
        out.display(),
        report_path.display()
    );
    Ok(())
}

pub fn cmd_metrics(
    in_path: &Path,
    stopbands: &[(f64, f64)],
    out: &Path,
) -> Result<(), CliError> {
    let resp = read_touchstone(in_path)?.sweep()?;
    let m = extract_metrics(&resp, stopbands)?;
    write_file(out, metrics_csv(&m).as_bytes())?;
    println!(
        "f_c = {:.4} GHz, fbw = {:.2}%, il_min = {:.3} dB; wrote {}",
        m.f_c_hz() / 1e9,
        m.fbw_3db() * 100.0,
        m.il_min_db(),
        out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitOutput {
    pub schema: u32,
    pub resonator: ResonatorSpec,
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
}

pub fn cmd_fit(
    in_path: &Path,
    branches: usize,
    seed_from: Option<&Path>,
    out: &Path,
    report_path: &Path,
) -> Result<(), CliError> {
    let file = read_touchstone(in_path)?;
    let measured = file.one_port(&in_path.display().to_string())?;
    let init = match seed_from {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            let seed: FitOutput = designfile::parse_wrapped(&text)?;
            let p = seed.resonator.to_params()?;
            if p.branches().len() != branches {
                return Err(CliError::Validation(format!(
                    "--branches {branches} but the seed file has {} branches",
                    p.branches().len()
                )));
            }
            p
        }
        None => initial_guess(&measured, branches)?,
    };
    let options = FitOptions { max_iterations: 4000, restarts: 3, ..FitOptions::default() };
    let fit = fit_mbvd(&measured, &init, &options)?;
    let params = fit.params();

    let output = FitOutput {
        schema: SCHEMA_VERSION,
        resonator: ResonatorSpec::from_params(params),
        residual_rms: fit.residual_rms(),
        converged: fit.converged(),
        iterations: fit.iterations(),
        evaluations: fit.evaluations(),
    };
    let mut text = serde_json::to_string_pretty(&output).expect("fit output serializes");
    text.push('\n');
    write_file(out, text.as_bytes())?;

    let mut csv = String::from("branch,mode,rm_ohm,lm_h,cm_f,f_s_hz,q,k2\n");
    for (i, b) in params.branches().iter().enumerate() {
        let k2 = params.coupling(i).map_err(|e| CliError::Numeric(e.to_string()))?;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            i + 1,
            b.mode(),
            b.rm(),
            b.lm(),
            b.cm(),
            b.series_resonance(),
            b.quality_factor(),
            k2
        ));
    }
    write_file(report_path, csv.as_bytes())?;
    println!(
        "fit {} branches, residual_rms = {:.3e}, converged = {}; wrote {} and {}",
        params.branches().len(),
        fit.residual_rms(),
        fit.converged(),
        out.display(),
        report_path.display()
    );
    Ok(())
}

pub fn cmd_optimize(
    design_path: &Path,
    spec_path: &Path,
    budget: usize,
    seed: u64,
    out: &Path,
    history_path: &Path,
) -> Result<(), CliError> {
    let loaded = load_design(design_path)?;
    let spec = load_spec(spec_path)?;
    let target = spec.to_target()?;
    let free = spec.to_free()?;
    let options = OptimizeOptions {
        budget,
        restarts: spec.restarts.unwrap_or(3),
        seed,
        policy: loaded.policy,
    };
    let outcome = optimize(&loaded.design, &free, &target, &loaded.grid, &options)?;
    let best = with_updated_resonators(&loaded.file, outcome.design().variant())?;
    write_file(out, designfile::to_pretty_json(&best).as_bytes())?;
    write_file(history_path, outcome.history_csv().as_bytes())?;
    println!(
        "cost = {:.6e} after {} evaluations (budget {}{}); wrote {} and {}",
        outcome.cost(),
        outcome.evaluations(),
        budget,
        if outcome.budget_exhausted() { ", exhausted" } else { "" },
        out.display(),
        history_path.display()
    );
    Ok(())
}

fn oob_cell(m: &FilterMetrics) -> String {
    let worst = m.oob_rejection_db().iter().copied().fold(f64::INFINITY, f64::min);
    if worst.is_finite() { format!("{worst}") } else { String::new() }
}

pub fn cmd_compare(a_path: &Path, b_path: &Path, out: &Path) -> Result<(), CliError> {
    let stem = |p: &Path| {
        p.file_stem().and_then(|s| s.to_str()).unwrap_or("design").to_string()
    };
    let (mut name_a, mut name_b) = (stem(a_path), stem(b_path));
    if name_a == name_b {
        name_a.push_str("_a");
        name_b.push_str("_b");
    }
    let la = load_design(a_path)?;
    let lb = load_design(b_path)?;
    let ea = evaluate(&la.design, &la.grid, la.policy, &la.stopbands)?;
    let eb = evaluate(&lb.design, &lb.grid, lb.policy, &lb.stopbands)?;
    let (ma, mb) = (ea.metrics(), eb.metrics());

    let mut csv = format!("metric,{name_a},{name_b}\n");
    let rows: [(&str, String, String); 7] = [
        ("f_c_hz", format!("{}", ma.f_c_hz()), format!("{}", mb.f_c_hz())),
        ("f_lo_hz", format!("{}", ma.f_lo_hz()), format!("{}", mb.f_lo_hz())),
        ("f_hi_hz", format!("{}", ma.f_hi_hz()), format!("{}", mb.f_hi_hz())),
        ("fbw_pct", format!("{}", ma.fbw_3db() * 100.0), format!("{}", mb.fbw_3db() * 100.0)),
        ("il_min_db", format!("{}", ma.il_min_db()), format!("{}", mb.il_min_db())),
        ("ripple_db", format!("{}", ma.ripple_db()), format!("{}", mb.ripple_db())),
        ("oob_min_db", oob_cell(ma), oob_cell(mb)),
    ];
    for (name, a, b) in rows {
        csv.push_str(&format!("{name},{a},{b}\n"));
    }
    write_file(out, csv.as_bytes())?;
    println!(
        "{name_a}: fbw = {:.2}%, il = {:.3} dB | {name_b}: fbw = {:.2}%, il = {:.3} dB; wrote {}",
        ma.fbw_3db() * 100.0,
        ma.il_min_db(),
        mb.fbw_3db() * 100.0,
        mb.il_min_db(),
        out.display()
    );
    Ok(())
}
