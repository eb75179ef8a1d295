//! Regenerates the bundled design files under designs/ and the synthetic
//! measurement under fixtures/. Run from anywhere:
//!
//!     cargo run -p resolat-cli --example gen_fixtures
//!
//! Every file is rebuilt from the constants below, then re-parsed and
//! evaluated as a self-check, so a regeneration that would break the bundled
//! artifacts fails loudly here instead.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use resolat_cli::designfile::{
    to_pretty_json, BranchSpec, DesignFile, FreeSpec, MatchSpec, ResonatorSpec, SpacingKind,
    SpecFile, SweepSpec, TopologyKind, WeightsSpec,
};
use resolat_cli::touchstone::{write_touchstone_one_port, TsFormat};
use resolat_core::design::evaluate;
use resolat_core::network::FrequencyGrid;
use resolat_core::resonator::{MbvdParams, MotionalBranch};

const K2: f64 = 0.31;
const Q: f64 = 400.0;
const RS: f64 = 0.8;
const R0: f64 = 0.5;
const LS: f64 = 5.0e-12;

fn branch(fs: f64, cm: f64, q: f64, mode: &str) -> MotionalBranch {
    let w = 2.0 * std::f64::consts::PI * fs;
    let lm = 1.0 / (w * w * cm);
    let rm = (lm / cm).sqrt() / q;
    MotionalBranch::new(rm, lm, cm, mode.parse().unwrap()).unwrap()
}

fn arm(fs: f64, c0: f64) -> MbvdParams {
    let cm = c0 * K2 / (1.0 - K2);
    MbvdParams::new(c0, R0, RS, LS, vec![branch(fs, cm, Q, "S2")]).unwrap()
}

fn spec_of(p: &MbvdParams) -> ResonatorSpec {
    ResonatorSpec::from_params(p)
}

fn demo_sweep() -> SweepSpec {
    SweepSpec {
        f_start_hz: 10.0e9,
        f_stop_hz: 30.0e9,
        n_points: 801,
        spacing: SpacingKind::Linear,
    }
}

fn direct_demo() -> DesignFile {
    let mut resonators = BTreeMap::new();
    resonators.insert("a".to_string(), spec_of(&arm(19.7e9, 3.5e-13)));
    resonators.insert("b".to_string(), spec_of(&arm(19.7e9 * 0.80, 0.7 * 3.5e-13)));
    DesignFile {
        schema: 1,
        topology: TopologyKind::DirectLattice,
        grounds: None,
        fourth_arm: None,
        resonators,
        geometry: None,
        sweep: demo_sweep(),
        match_policy: MatchSpec::Keyword("auto".to_string()),
        stopbands_hz: vec![[23.65e9, 24.15e9], [10.78e9, 11.28e9]],
        spurs: None,
    }
}

fn direct_demo_spurred() -> DesignFile {
    let mut file = direct_demo();
    let spur = |fs: f64, cm: f64, mode: &str| BranchSpec::from_branch(&branch(fs, cm, 150.0, mode));
    let mut spurs = BTreeMap::new();
    spurs.insert(
        "a".to_string(),
        vec![
            spur(0.70 * 19.7e9, 0.05 * 3.5e-13, "A1"),
            spur(1.213 * 19.7e9, 0.06 * 3.5e-13, "A3"),
        ],
    );
    spurs.insert(
        "b".to_string(),
        vec![spur(0.70 * 19.7e9 * 0.80, 0.05 * 2.45e-13, "A1")],
    );
    file.spurs = Some(spurs);
    file
}

fn balanced_arms() -> (MbvdParams, MbvdParams) {
    let gamma = (1.0 / (1.0 - K2)).sqrt();
    (arm(15.0e9, 4.0e-13), arm(15.0e9 * gamma * 1.07, 4.0e-13))
}

fn balanced_demo() -> DesignFile {
    let (a1, b) = balanced_arms();
    let mut resonators = BTreeMap::new();
    resonators.insert("a2".to_string(), spec_of(&a1.scale(0.5)));
    resonators.insert("a1".to_string(), spec_of(&a1));
    resonators.insert("b".to_string(), spec_of(&b));
    DesignFile {
        schema: 1,
        topology: TopologyKind::LayoutBalanced,
        grounds: None,
        fourth_arm: None,
        resonators,
        geometry: None,
        sweep: demo_sweep(),
        match_policy: MatchSpec::Keyword("auto".to_string()),
        stopbands_hz: vec![],
        spurs: None,
    }
}

const COMPARE_STOPBANDS: [[f64; 2]; 2] = [[10.5e9, 14.5e9], [26.0e9, 29.5e9]];

fn compare_lattice() -> DesignFile {
    let mut file = balanced_demo();
    file.stopbands_hz = COMPARE_STOPBANDS.to_vec();
    file
}

fn compare_ladder() -> DesignFile {
    let gamma = (1.0 / (1.0 - K2)).sqrt();
    let ser = arm(19.7e9, 3.0e-13);
    let shn = arm(19.7e9 / gamma, 5.0e-13);
    let mut resonators = BTreeMap::new();
    resonators.insert("series1".to_string(), spec_of(&ser));
    resonators.insert("series2".to_string(), spec_of(&ser));
    resonators.insert("shunt1".to_string(), spec_of(&shn));
    DesignFile {
        schema: 1,
        topology: TopologyKind::Ladder,
        grounds: None,
        fourth_arm: None,
        resonators,
        geometry: None,
        sweep: demo_sweep(),
        match_policy: MatchSpec::Keyword("auto".to_string()),
        stopbands_hz: COMPARE_STOPBANDS.to_vec(),
        spurs: None,
    }
}

fn compare_spec(roles: &[&str]) -> SpecFile {
    let mut free = Vec::new();
    for role in roles {
        free.push(FreeSpec {
            role: role.to_string(),
            field: "fs_scale".to_string(),
            lo: 0.85,
            hi: 1.15,
        });
    }
    for role in roles {
        free.push(FreeSpec {
            role: role.to_string(),
            field: "y_scale".to_string(),
            lo: 0.3,
            hi: 3.0,
        });
    }
    SpecFile {
        schema: 1,
        f_c_hz: 19.7e9,
        f_c_tolerance: Some(0.02),
        fbw_min: 0.32,
        il_max_db: 0.8,
        oob_min_db: Some(15.0),
        stopbands_hz: COMPARE_STOPBANDS.to_vec(),
        weights: Some(WeightsSpec { f_c: 10.0, fbw: 25.0, il: 10.0, oob: 0.2 }),
        free,
        restarts: Some(3),
    }
}

fn three_mode_truth() -> MbvdParams {
    MbvdParams::new(
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
    .unwrap()
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    println!("wrote {}", path.display());
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let designs = root.join("designs");
    let fixtures = root.join("fixtures");
    std::fs::create_dir_all(&designs).unwrap();
    std::fs::create_dir_all(&fixtures).unwrap();

    let files = [
        ("direct_demo.json", direct_demo()),
        ("direct_demo_spurred.json", direct_demo_spurred()),
        ("balanced_demo.json", balanced_demo()),
        ("compare_lattice.json", compare_lattice()),
        ("compare_ladder.json", compare_ladder()),
    ];
    for (name, file) in &files {
        write(&designs.join(name), &to_pretty_json(file));
    }
    for (name, roles) in [
        ("compare_spec_lattice.json", vec!["a1", "a2", "b"]),
        ("compare_spec_ladder.json", vec!["series1", "series2", "shunt1"]),
    ] {
        let spec = compare_spec(&roles);
        let mut text = serde_json::to_string_pretty(&spec).unwrap();
        text.push('\n');
        write(&designs.join(name), &text);
    }

    let truth = three_mode_truth();
    let grid = FrequencyGrid::linear(8.0e9, 27.0e9, 1901).unwrap();
    let z0 = 50.0;
    let s11: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|&f| {
            let y = truth.admittance(f);
            (Complex64::new(1.0, 0.0) - z0 * y) / (Complex64::new(1.0, 0.0) + z0 * y)
        })
        .collect();
    let s1p = fixtures.join("three_mode.s1p");
    write_touchstone_one_port(&grid, &s11, z0, &s1p, TsFormat::Ri).unwrap();
    println!("wrote {}", s1p.display());

    for (name, _) in &files {
        let loaded = resolat_cli::designfile::load_design(&designs.join(name)).unwrap();
        let ev =
            evaluate(&loaded.design, &loaded.grid, loaded.policy, &loaded.stopbands).unwrap();
        let m = ev.metrics();
        println!(
            "check {name}: f_c = {:.4} GHz, fbw = {:.2}%, il = {:.3} dB",
            m.f_c_hz() / 1e9,
            m.fbw_3db() * 100.0,
            m.il_min_db()
        );
    }
    let check = resolat_cli::touchstone::read_touchstone(&s1p).unwrap();
    let measured = check.one_port("three_mode.s1p").unwrap();
    println!("check three_mode.s1p: {} samples", measured.admittance().len());
}
