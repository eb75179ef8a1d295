//! Release gate: ten numbered checks covering the physics, numerics, and
//! I/O guarantees of the toolkit. Each check prints exactly one verdict
//! line; the process exits nonzero if any check fails.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use resolat_cli::designfile::{load_design, load_spec};
use resolat_cli::touchstone::{
    read_touchstone, write_touchstone, TouchstoneError, TsFormat,
};
use resolat_core::design::{evaluate, optimize, MatchPolicy, OptimizeOptions};
use resolat_core::extraction::{fit_mbvd, initial_guess, FitOptions, MeasuredOnePort};
use resolat_core::matching::{
    apply_match, conjugate_match, maximum_available_gain, rollett_k, MatchError,
};
use resolat_core::metrics::extract_metrics;
use resolat_core::mna::Netlist;
use resolat_core::network::{FrequencyGrid, SweepResponse, TwoPort};
use resolat_core::resonator::{MbvdParams, ModeLabel, MotionalBranch};
use resolat_core::topology::{
    build_canonical_lattice, build_direct_lattice, build_layout_balanced, lattice_closed_form,
    FourthArm, GroundScheme, TopologyVariant,
};

type Check = (&'static str, fn() -> Result<String, String>);

fn main() {
    let checks: [Check; 10] = [
        ("AC-1 lattice closed form vs nodal reduction", ac1),
        ("AC-2 layout-balanced equivalence and split imbalance", ac2),
        ("AC-3 conjugate-match fixed point and boundary", ac3),
        ("AC-4 lossless unitarity and passivity margins", ac4),
        ("AC-5 metric correctness on analytic references", ac5),
        ("AC-6 extraction round trip under noise", ac6),
        ("AC-7 bundled demo performance", ac7),
        ("AC-8 spur impact on stopband rejection", ac8),
        ("AC-9 optimized lattice vs optimized ladder", ac9),
        ("AC-10 Touchstone round trip and rejection", ac10),
    ];
    let mut failures = 0usize;
    for (name, run) in checks {
        match std::panic::catch_unwind(run) {
            Ok(Ok(detail)) => println!("PASS {name} ({detail})"),
            Ok(Err(why)) => {
                println!("FAIL {name} ({why})");
                failures += 1;
            }
            Err(payload) => {
                let why = payload
                    .downcast_ref::<String>()
                    .map(String::as_str)
                    .or_else(|| payload.downcast_ref::<&str>().copied())
                    .unwrap_or("opaque panic");
                println!("FAIL {name} (panicked: {why})");
                failures += 1;
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance check(s) failed");
        std::process::exit(1);
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const Z0: f64 = 50.0;

fn refs50() -> [Complex64; 2] {
    [c(Z0, 0.0); 2]
}

fn designs(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../designs").join(name)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn branch(fs: f64, cm: f64, q: f64, mode: &str) -> MotionalBranch {
    let w = 2.0 * std::f64::consts::PI * fs;
    let lm = 1.0 / (w * w * cm);
    let rm = (lm / cm).sqrt() / q;
    MotionalBranch::new(rm, lm, cm, mode.parse::<ModeLabel>().unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn s21_db_trace(resp: &SweepResponse) -> Vec<f64> {
    resp.matrices().iter().map(|m| 20.0 * m.m()[1][0].norm().log10()).collect()
}

fn ac1() -> Result<String, String> {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for draw in 0..1000 {
        let ya = c(rng.random_range(1e-4..0.05), rng.random_range(-0.05..0.05));
        let yb = c(rng.random_range(1e-4..0.05), rng.random_range(-0.05..0.05));
        let f = rng.random_range(1.0e9..30.0e9);

        let mut net = Netlist::new(5, 0).unwrap();
        net.add_branch(1, 3, "A:1-2", move |_| ya).unwrap();
        net.add_branch(2, 4, "A:1'-2'", move |_| ya).unwrap();
        net.add_branch(1, 4, "B:1-2'", move |_| yb).unwrap();
        net.add_branch(2, 3, "B:1'-2", move |_| yb).unwrap();
        net.add_port(1, 2).unwrap();
        net.add_port(3, 4).unwrap();
        let reduced = net.reduce(f).map_err(|e| format!("draw {draw}: {e}"))?;

        let cf = lattice_closed_form(ya, yb);
        let scale = cf.iter().flatten().map(|z| z.norm()).fold(0.0f64, f64::max);
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((reduced.y[i][j] - cf[i][j]).norm() / scale);
            }
        }
    }
    let dt = t0.elapsed();
    if worst >= 1e-9 {
        return Err(format!("max relative error {worst:.3e} >= 1e-9"));
    }
    if dt >= Duration::from_secs(1) {
        return Err(format!("took {dt:.2?}, limit 1 s"));
    }
    Ok(format!("1000 draws, max relative error {worst:.2e}, {dt:.2?}"))
}

fn ac2() -> Result<String, String> {
    let loaded = load_design(&designs("balanced_demo.json")).map_err(|e| e.to_string())?;
    let (a1, b) = match loaded.design.variant() {
        TopologyVariant::LayoutBalanced { a1, b, .. } => (a1.clone(), b.clone()),
        other => return Err(format!("unexpected demo topology {other:?}")),
    };
    let grid = FrequencyGrid::linear(10.0e9, 30.0e9, 401).unwrap();

    let balanced = build_layout_balanced(&a1, &a1.scale(0.5), &b)
        .map_err(|e| e.to_string())?
        .sweep_s(&grid, refs50())
        .map_err(|e| e.to_string())?;
    let canonical = build_canonical_lattice(&a1, &b)
        .map_err(|e| e.to_string())?
        .sweep_s(&grid, refs50())
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (mb, mc) in balanced.matrices().iter().zip(canonical.matrices()) {
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((mb.m()[i][j] - mc.m()[i][j]).norm());
            }
        }
    }
    if worst >= 1e-9 {
        return Err(format!("balanced vs canonical max |dS| {worst:.3e} >= 1e-9"));
    }

    // Imperfect split: the ground path misses the port-arm admittance by
    // 10%, tilting the bridge and lifting the far-out S21 floor. Judged
    // well past the skirt, where the floor is balance-limited.
    let wide = FrequencyGrid::linear(10.0e9, 40.0e9, 601).unwrap();
    let far_bal = build_layout_balanced(&a1, &a1.scale(0.5), &b)
        .map_err(|e| e.to_string())?
        .sweep_s(&wide, refs50())
        .map_err(|e| e.to_string())?;
    let imbalanced = build_layout_balanced(&a1, &a1.scale(0.55), &b)
        .map_err(|e| e.to_string())?
        .sweep_s(&wide, refs50())
        .map_err(|e| e.to_string())?;
    let rollup = |resp: &SweepResponse| {
        resp.grid()
            .points()
            .iter()
            .zip(s21_db_trace(resp))
            .filter(|(f, _)| **f >= 32.0e9)
            .map(|(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let (r_bal, r_imb) = (rollup(&far_bal), rollup(&imbalanced));
    if !(r_imb > r_bal) {
        return Err(format!(
            "imbalanced roll-up {r_imb:.2} dB not above balanced {r_bal:.2} dB"
        ));
    }
    Ok(format!(
        "max |dS| {worst:.2e}; out-of-band S21 ceiling {r_bal:.1} dB balanced vs {r_imb:.1} dB imbalanced"
    ))
}

fn random_stable_two_port(rng: &mut ChaCha8Rng) -> (TwoPort, f64) {
    loop {
        let f = rng.random_range(0.5e9..5.0e9);
        let r1 = rng.random_range(5.0..100.0);
        let l1 = rng.random_range(0.3e-9..3.0e-9);
        let r2 = rng.random_range(5.0..100.0);
        let c2 = rng.random_range(0.1e-12..2.0e-12);
        let r3 = rng.random_range(5.0..100.0);
        let c3 = rng.random_range(0.1e-12..2.0e-12);

        let mut net = Netlist::new(4, 0).unwrap();
        net.add_branch(1, 2, "series RL", move |f| {
            1.0 / c(r1, 2.0 * std::f64::consts::PI * f * l1)
        })
        .unwrap();
        net.add_branch(2, 0, "shunt RC", move |f| {
            1.0 / c(r2, -1.0 / (2.0 * std::f64::consts::PI * f * c2))
        })
        .unwrap();
        net.add_branch(2, 3, "series RC", move |f| {
            1.0 / c(r3, -1.0 / (2.0 * std::f64::consts::PI * f * c3))
        })
        .unwrap();
        net.add_port(1, 0).unwrap();
        net.add_port(3, 0).unwrap();

        let s = net.reduce_two_port(f).unwrap().to_s(refs50()).unwrap();
        if matches!(rollett_k(&s), Ok(k) if k > 1.0 + 1e-9) {
            return (s, f);
        }
    }
}

fn ac3() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_refl = 0.0f64;
    let mut worst_gain = 0.0f64;
    for case in 0..100 {
        let (s, f) = random_stable_two_port(&mut rng);
        let sol = conjugate_match(&s, f).map_err(|e| format!("case {case}: {e}"))?;
        let grid = FrequencyGrid::linear(0.9 * f, 1.1 * f, 3).unwrap();
        let resp = SweepResponse::new(grid, vec![s.clone(); 3]).unwrap();
        let matched = apply_match(&resp, &sol).map_err(|e| format!("case {case}: {e}"))?;
        let m = matched.matrices()[1].m();
        worst_refl = worst_refl.max(m[0][0].norm()).max(m[1][1].norm());
        let gain = m[1][0].norm_sqr();
        let g_max = maximum_available_gain(&s).map_err(|e| format!("case {case}: {e}"))?;
        worst_gain = worst_gain.max((gain - g_max).abs() / g_max.max(1.0));
    }
    if worst_refl >= 1e-8 {
        return Err(format!("post-match reflection {worst_refl:.3e} >= 1e-8"));
    }
    if worst_gain >= 1e-8 {
        return Err(format!("gain mismatch {worst_gain:.3e} >= 1e-8"));
    }

    // Series 100 ohm between 50 ohm ports: S entries exactly 0.5, K exactly 1.
    let boundary = TwoPort::s_real([[c(0.5, 0.0); 2]; 2], Z0).unwrap();
    match conjugate_match(&boundary, 1.0e9) {
        Err(MatchError::DegenerateDenominator { rollett_k, .. }) if rollett_k == 1.0 => {}
        other => return Err(format!("boundary case came back as {other:?}")),
    }
    let mut net = Netlist::new(3, 0).unwrap();
    net.add_branch(1, 2, "series 100", |_| c(0.01, 0.0)).unwrap();
    net.add_port(1, 0).unwrap();
    net.add_port(2, 0).unwrap();
    let s = net.reduce_two_port(1.0e9).unwrap().to_s(refs50()).unwrap();
    match conjugate_match(&s, 1.0e9) {
        Err(MatchError::DegenerateDenominator { rollett_k, .. })
        | Err(MatchError::InfeasibleMatch { rollett_k })
            if (rollett_k - 1.0).abs() < 1e-12 => {}
        other => return Err(format!("netlist boundary case came back as {other:?}")),
    }
    Ok(format!(
        "100 matches, worst |S11|/|S22| {worst_refl:.2e}, worst gain error {worst_gain:.2e}, K = 1 boundary flagged"
    ))
}

fn lossless_arm(fs: f64, c0: f64) -> MbvdParams {
    let k2 = 0.31;
    let cm = c0 * k2 / (1.0 - k2);
    let w = 2.0 * std::f64::consts::PI * fs;
    let lm = 1.0 / (w * w * cm);
    let b = MotionalBranch::new(0.0, lm, cm, "S2".parse().unwrap()).unwrap();
    MbvdParams::new(c0, 0.0, 0.0, 5.0e-12, vec![b]).unwrap()
}

fn ac4() -> Result<String, String> {
    let grid = FrequencyGrid::linear(10.0e9, 30.0e9, 201).unwrap();
    let a = lossless_arm(19.7e9, 3.5e-13);
    let bl = lossless_arm(19.7e9 * 0.80, 2.45e-13);
    let sweeps = [
        build_canonical_lattice(&a, &bl).map_err(|e| e.to_string())?,
        build_layout_balanced(&a, &a.scale(0.5), &bl).map_err(|e| e.to_string())?,
        build_direct_lattice(&a, &bl, GroundScheme::Separate, FourthArm::Present)
            .map_err(|e| e.to_string())?,
    ];
    let mut worst_unitarity = 0.0f64;
    for net in &sweeps {
        let resp = net.sweep_s(&grid, refs50()).map_err(|e| e.to_string())?;
        for m in resp.matrices() {
            let s = m.m();
            // Frobenius norm of S^H S - I.
            let mut acc = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let mut e = s[0][i].conj() * s[0][j] + s[1][i].conj() * s[1][j];
                    if i == j {
                        e -= 1.0;
                    }
                    acc += e.norm_sqr();
                }
            }
            worst_unitarity = worst_unitarity.max(acc.sqrt());
        }
    }
    if worst_unitarity >= 1e-10 {
        return Err(format!("lossless ||S^H S - I|| {worst_unitarity:.3e} >= 1e-10"));
    }

    let mut worst_margin = f64::INFINITY;
    for name in ["direct_demo.json", "balanced_demo.json", "compare_ladder.json"] {
        let loaded = load_design(&designs(name)).map_err(|e| e.to_string())?;
        let net = loaded.design.build().map_err(|e| e.to_string())?;
        let resp = net
            .sweep_s(&loaded.grid, loaded.design.port_refs())
            .map_err(|e| e.to_string())?;
        let margin = resp.passivity_margin().map_err(|e| e.to_string())?;
        worst_margin = worst_margin.min(margin);
    }
    if worst_margin < -1e-12 {
        return Err(format!("passivity margin {worst_margin:.3e} < -1e-12"));
    }
    Ok(format!(
        "worst ||S^H S - I|| {worst_unitarity:.2e}, worst passivity margin {worst_margin:.2e}"
    ))
}

fn ac5() -> Result<String, String> {
    // Series RLC between the ports: the half-power bandwidth is exactly
    // (R + 2 Z0) / (2 pi L), the loaded f0/Q.
    let (r, l, f0) = (5.0, 6.0e-9, 19.7e9);
    let w0 = 2.0 * std::f64::consts::PI * f0;
    let cap = 1.0 / (w0 * w0 * l);
    let bw_true = (r + 2.0 * Z0) / (2.0 * std::f64::consts::PI * l);

    let mut net = Netlist::new(3, 0).unwrap();
    net.add_branch(1, 2, "series RLC", move |f| {
        let w = 2.0 * std::f64::consts::PI * f;
        1.0 / c(r, w * l - 1.0 / (w * cap))
    })
    .unwrap();
    net.add_port(1, 0).unwrap();
    net.add_port(2, 0).unwrap();
    let grid = FrequencyGrid::linear(f0 - 3.0 * bw_true, f0 + 3.0 * bw_true, 4001).unwrap();
    let resp = net.sweep_s(&grid, refs50()).map_err(|e| e.to_string())?;
    let m = extract_metrics(&resp, &[]).map_err(|e| e.to_string())?;
    let bw_meas = m.f_hi_hz() - m.f_lo_hz();
    let bw_err = rel(bw_meas, bw_true);
    if bw_err >= 1e-6 {
        return Err(format!(
            "RLC bandwidth {bw_meas:.6e} vs analytic {bw_true:.6e}, relative error {bw_err:.3e}"
        ));
    }

    // A band with half-power edges exactly at 17.0 and 22.4 GHz.
    let grid = FrequencyGrid::linear(10.0e9, 30.0e9, 201).unwrap();
    let edge_mag = 0.5f64.sqrt();
    let mats: Vec<TwoPort> = grid
        .points()
        .iter()
        .map(|&f| {
            let mag = if f > 17.0e9 && f < 22.4e9 {
                1.0
            } else {
                let steps = ((17.0e9 - f).max(f - 22.4e9) / 0.1e9).round();
                edge_mag * 0.7f64.powf(steps.max(0.0))
            };
            TwoPort::s_real([[c(0.0, 0.0), c(mag, 0.0)], [c(mag, 0.0), c(0.0, 0.0)]], Z0)
                .unwrap()
        })
        .collect();
    let resp = SweepResponse::new(grid, mats).unwrap();
    let m = extract_metrics(&resp, &[]).map_err(|e| e.to_string())?;
    if rel(m.f_c_hz(), 19.7e9) >= 1e-9 {
        return Err(format!("f_c {} Hz, expected 19.7 GHz", m.f_c_hz()));
    }
    let fbw_true = 5.4e9 / 19.7e9;
    if rel(m.fbw_3db(), fbw_true) >= 1e-9 {
        return Err(format!("fbw {} vs {fbw_true}", m.fbw_3db()));
    }
    if (m.fbw_3db() * 100.0 - 27.4).abs() >= 0.05 {
        return Err(format!("fbw {:.3}% not 27.4%", m.fbw_3db() * 100.0));
    }
    Ok(format!(
        "RLC bandwidth error {bw_err:.2e}; 17.0-22.4 GHz band gives f_c {:.4} GHz, fbw {:.2}%",
        m.f_c_hz() / 1e9,
        m.fbw_3db() * 100.0
    ))
}

fn ac6() -> Result<String, String> {
    let t0 = Instant::now();

    let truth = MbvdParams::new(
        4.0e-13,
        0.5,
        0.4,
        2.0e-11,
        vec![branch(18.8e9, 1.556e-13, 300.0, "S2")],
    )
    .unwrap();
    let grid = FrequencyGrid::linear(12.0e9, 26.0e9, 1401).unwrap();
    let m = MeasuredOnePort::from_model(&truth, grid, "synthetic single");
    let init = initial_guess(&m, 1).map_err(|e| e.to_string())?;
    let options = FitOptions { max_iterations: 4000, restarts: 4, ..Default::default() };
    let fit = fit_mbvd(&m, &init, &options).map_err(|e| e.to_string())?;
    let p = fit.params();
    let tb = &truth.branches()[0];
    let fb = &p.branches()[0];
    let single_errs = [
        ("c0", rel(p.c0(), truth.c0())),
        ("r0", rel(p.r0(), truth.r0())),
        ("rs", rel(p.rs(), truth.rs())),
        ("ls", rel(p.ls(), truth.ls())),
        ("rm", rel(fb.rm(), tb.rm())),
        ("lm", rel(fb.lm(), tb.lm())),
        ("cm", rel(fb.cm(), tb.cm())),
    ];
    for (name, err) in single_errs {
        if err >= 0.01 {
            return Err(format!("noiseless single-branch {name} off by {err:.3}"));
        }
    }

    let truth3 = MbvdParams::new(
        4.0e-13,
        0.5,
        0.3,
        5.0e-13,
        vec![
            branch(13.4e9, 2.5e-14, 150.0, "A1"),
            branch(18.8e9, 1.45e-13, 300.0, "S2"),
            branch(23.9e9, 2.0e-14, 150.0, "A3"),
        ],
    )
    .unwrap();
    let grid = FrequencyGrid::linear(8.0e9, 27.0e9, 1401).unwrap();
    let clean = MeasuredOnePort::from_model(&truth3, grid.clone(), "synthetic three-mode");
    let truth_fs: Vec<f64> =
        truth3.branches().iter().map(|b| b.series_resonance()).collect();
    let truth_k2: Vec<f64> =
        (0..3).map(|i| truth3.coupling(i).unwrap()).collect();

    let mut worst_fs = 0.0f64;
    let mut worst_k2 = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy: Vec<Complex64> = clean
            .admittance()
            .iter()
            .map(|y| {
                y * c(1.0 + 0.01 * gaussian(&mut rng), 0.01 * gaussian(&mut rng))
            })
            .collect();
        let m = MeasuredOnePort::new(grid.clone(), noisy, format!("seed {seed}"))
            .map_err(|e| e.to_string())?;
        let init = initial_guess(&m, 3).map_err(|e| format!("seed {seed}: {e}"))?;
        let options = FitOptions {
            max_iterations: 4000,
            restarts: 3,
            seed,
            peak_upweight: true,
            ..Default::default()
        };
        let fit = fit_mbvd(&m, &init, &options).map_err(|e| format!("seed {seed}: {e}"))?;
        let mut order: Vec<usize> = (0..3).collect();
        let fitted = fit.params();
        order.sort_by(|&i, &j| {
            fitted.branches()[i]
                .series_resonance()
                .total_cmp(&fitted.branches()[j].series_resonance())
        });
        for (slot, &i) in order.iter().enumerate() {
            let fs_err = rel(fitted.branches()[i].series_resonance(), truth_fs[slot]);
            let k2_err = rel(fitted.coupling(i).unwrap(), truth_k2[slot]);
            if fs_err >= 1e-3 {
                return Err(format!("seed {seed} branch {slot}: f_s off by {fs_err:.2e}"));
            }
            if k2_err >= 0.05 {
                return Err(format!("seed {seed} branch {slot}: k2 off by {k2_err:.3}"));
            }
            worst_fs = worst_fs.max(fs_err);
            worst_k2 = worst_k2.max(k2_err);
        }
    }
    let dt = t0.elapsed();
    if dt >= Duration::from_secs(60) {
        return Err(format!("took {dt:.1?}, limit 60 s"));
    }
    Ok(format!(
        "single-branch within 1%; 20 noise seeds worst f_s error {worst_fs:.1e}, worst k2 error {worst_k2:.1e}, {dt:.1?}"
    ))
}

fn ac7() -> Result<String, String> {
    let t0 = Instant::now();
    let direct = load_design(&designs("direct_demo.json")).map_err(|e| e.to_string())?;
    let ev = evaluate(&direct.design, &direct.grid, direct.policy, &direct.stopbands)
        .map_err(|e| e.to_string())?;
    let md = ev.metrics().clone();
    if let TopologyVariant::DirectLattice { a, b, .. } = direct.design.variant() {
        for (label, p) in [("a", a), ("b", b)] {
            let k2 = p.coupling(0).map_err(|e| e.to_string())?;
            if !(0.25..=0.35).contains(&k2) {
                return Err(format!("arm {label} coupling {k2:.3} outside 25-35%"));
            }
        }
    } else {
        return Err("direct demo is not a direct lattice".into());
    }
    if md.fbw_3db() < 0.25 {
        return Err(format!("direct demo fbw {:.3} < 0.25", md.fbw_3db()));
    }
    if md.il_min_db() > 1.0 {
        return Err(format!("direct demo il {:.3} dB > 1.0", md.il_min_db()));
    }
    if rel(md.f_c_hz(), 19.7e9) > 0.03 {
        return Err(format!("direct demo f_c {:.3} GHz not near 19.7", md.f_c_hz() / 1e9));
    }

    let balanced = load_design(&designs("balanced_demo.json")).map_err(|e| e.to_string())?;
    let ev = evaluate(&balanced.design, &balanced.grid, balanced.policy, &balanced.stopbands)
        .map_err(|e| e.to_string())?;
    let mb = ev.metrics().clone();
    if mb.fbw_3db() < 0.35 {
        return Err(format!("balanced demo fbw {:.3} < 0.35", mb.fbw_3db()));
    }
    if mb.il_min_db() > 1.2 {
        return Err(format!("balanced demo il {:.3} dB > 1.2", mb.il_min_db()));
    }
    let dt = t0.elapsed();
    if dt >= Duration::from_secs(10) {
        return Err(format!("took {dt:.1?}, limit 10 s"));
    }
    Ok(format!(
        "direct fbw {:.1}% il {:.2} dB at {:.2} GHz; balanced fbw {:.1}% il {:.2} dB; {dt:.2?}",
        md.fbw_3db() * 100.0,
        md.il_min_db(),
        md.f_c_hz() / 1e9,
        mb.fbw_3db() * 100.0,
        mb.il_min_db()
    ))
}

fn ac8() -> Result<String, String> {
    let clean = load_design(&designs("direct_demo.json")).map_err(|e| e.to_string())?;
    let spurred =
        load_design(&designs("direct_demo_spurred.json")).map_err(|e| e.to_string())?;
    if clean.stopbands != spurred.stopbands || clean.stopbands.len() != 2 {
        return Err("demo stopband declarations diverged".into());
    }
    let ev_c = evaluate(&clean.design, &clean.grid, clean.policy, &clean.stopbands)
        .map_err(|e| e.to_string())?;
    let ev_s = evaluate(&spurred.design, &spurred.grid, spurred.policy, &spurred.stopbands)
        .map_err(|e| e.to_string())?;
    let (mc, ms) = (ev_c.metrics(), ev_s.metrics());
    let drop_a3 = mc.oob_rejection_db()[0] - ms.oob_rejection_db()[0];
    let drop_a1 = mc.oob_rejection_db()[1] - ms.oob_rejection_db()[1];
    let il_shift = (mc.il_min_db() - ms.il_min_db()).abs();
    if drop_a3 < 10.0 {
        return Err(format!("A3-window rejection dropped only {drop_a3:.1} dB"));
    }
    if drop_a1 <= 0.0 {
        return Err(format!("A1-window rejection did not degrade ({drop_a1:.2} dB)"));
    }
    if il_shift >= 0.5 {
        return Err(format!("passband il moved {il_shift:.2} dB"));
    }
    Ok(format!(
        "rejection drop {drop_a3:.1} dB near the A3 spur, {drop_a1:.1} dB near the A1 spur, il shift {il_shift:.3} dB"
    ))
}

fn ac9() -> Result<String, String> {
    let lat = load_design(&designs("compare_lattice.json")).map_err(|e| e.to_string())?;
    let lad = load_design(&designs("compare_ladder.json")).map_err(|e| e.to_string())?;
    let spec_lat =
        load_spec(&designs("compare_spec_lattice.json")).map_err(|e| e.to_string())?;
    let spec_lad =
        load_spec(&designs("compare_spec_ladder.json")).map_err(|e| e.to_string())?;
    let target_lat = spec_lat.to_target().map_err(|e| e.to_string())?;
    let target_lad = spec_lad.to_target().map_err(|e| e.to_string())?;
    if target_lat != target_lad {
        return Err("compare specs do not share one target".into());
    }

    let run = |loaded: &resolat_cli::designfile::LoadedDesign,
               spec: &resolat_cli::designfile::SpecFile|
     -> Result<(f64, f64), String> {
        let free = spec.to_free().map_err(|e| e.to_string())?;
        let target = spec.to_target().map_err(|e| e.to_string())?;
        let options = OptimizeOptions {
            budget: 2000,
            restarts: spec.restarts.unwrap_or(3),
            seed: 42,
            policy: loaded.policy,
        };
        let outcome = optimize(&loaded.design, &free, &target, &loaded.grid, &options)
            .map_err(|e| e.to_string())?;
        let ev = evaluate(outcome.design(), &loaded.grid, loaded.policy, &loaded.stopbands)
            .map_err(|e| e.to_string())?;
        Ok((ev.metrics().fbw_3db(), outcome.cost()))
    };
    let (fbw_lat, cost_lat) = run(&lat, &spec_lat)?;
    let (fbw_lad, cost_lad) = run(&lad, &spec_lad)?;
    if !(fbw_lat > fbw_lad) {
        return Err(format!(
            "lattice fbw {fbw_lat:.4} not strictly above ladder fbw {fbw_lad:.4}"
        ));
    }
    Ok(format!(
        "lattice fbw {:.2}% (cost {cost_lat:.2e}) vs ladder fbw {:.2}% (cost {cost_lad:.2e})",
        fbw_lat * 100.0,
        fbw_lad * 100.0
    ))
}

fn ac10() -> Result<String, String> {
    let loaded = load_design(&designs("direct_demo.json")).map_err(|e| e.to_string())?;
    let ev = evaluate(&loaded.design, &loaded.grid, MatchPolicy::None, &[])
        .map_err(|e| e.to_string())?;
    let resp = ev.response();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for format in [TsFormat::Ri, TsFormat::Ma, TsFormat::Db] {
        let path = dir.path().join(format!("round_{format:?}.s2p"));
        write_touchstone(resp, &path, format).map_err(|e| e.to_string())?;
        let back = read_touchstone(&path).map_err(|e| e.to_string())?;
        let sweep = back.sweep().map_err(|e| e.to_string())?;
        for ((fa, ma), (fb, mb)) in resp
            .grid()
            .points()
            .iter()
            .zip(resp.matrices())
            .zip(sweep.grid().points().iter().zip(sweep.matrices()))
        {
            worst = worst.max(rel(*fb, *fa));
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((ma.m()[i][j] - mb.m()[i][j]).norm());
                }
            }
        }
    }
    if worst >= 1e-9 {
        return Err(format!("round-trip error {worst:.3e} >= 1e-9"));
    }

    let bad_option = dir.path().join("bad_option.s2p");
    std::fs::write(&bad_option, "# GHz S XX R 50\n1.0 0 0 0 0 0 0 0 0\n")
        .map_err(|e| e.to_string())?;
    match read_touchstone(&bad_option) {
        Err(TouchstoneError::MalformedOptionLine { .. }) => {}
        other => return Err(format!("bad option line came back as {other:?}")),
    }
    let bad_param = dir.path().join("bad_param.s2p");
    std::fs::write(&bad_param, "# GHz Y RI R 50\n1.0 0 0 0 0 0 0 0 0\n")
        .map_err(|e| e.to_string())?;
    match read_touchstone(&bad_param) {
        Err(TouchstoneError::UnsupportedParameter { letter: 'Y' }) => {}
        other => return Err(format!("unsupported parameter came back as {other:?}")),
    }
    let doubled = dir.path().join("doubled.s2p");
    std::fs::write(&doubled, "# GHz S RI R 50\n# Hz S MA R 50\n1.0 0 0 0 0 0 0 0 0\n")
        .map_err(|e| e.to_string())?;
    match read_touchstone(&doubled) {
        Err(TouchstoneError::MalformedOptionLine { .. }) => {}
        other => return Err(format!("duplicate option line came back as {other:?}")),
    }
    let backwards = dir.path().join("backwards.s2p");
    std::fs::write(
        &backwards,
        "# GHz S RI R 50\n2.0 0 0 0 0 0 0 0 0\n1.0 0 0 0 0 0 0 0 0\n",
    )
    .map_err(|e| e.to_string())?;
    match read_touchstone(&backwards) {
        Err(TouchstoneError::NonMonotoneFrequency { index: 1 }) => {}
        other => return Err(format!("non-monotone file came back as {other:?}")),
    }
    Ok(format!("3-format round trip error {worst:.2e}; malformed inputs rejected by class"))
}
