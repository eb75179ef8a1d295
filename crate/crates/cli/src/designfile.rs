//! Strict JSON schemas for design and optimization-spec files.
//!
//! Unknown keys are rejected everywhere, and every file names its schema
//! version; version 1 is the only one understood. Resonators are keyed by
//! role: `a`/`b` for the lattice topologies, `a1`/`a2`/`b` for the
//! layout-balanced form, and `series1..N`/`shunt1..M` for ladders.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use resolat_core::design::{ArmRole, FreeParam, MatchPolicy, ParamField, SpecWeights, TargetSpec};
use resolat_core::network::{FrequencyGrid, GridSpacing};
use resolat_core::resonator::{MbvdParams, MotionalBranch, ResonatorGeometry};
use resolat_core::topology::{FilterDesign, FourthArm, GroundScheme, TopologyVariant};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum DesignFileError {
    Io { path: String, detail: String },
    Json { detail: String },
    Schema { found: u64 },
    MissingResonator { name: String },
    UnknownResonator { name: String },
    BadValue { detail: String },
    Core { detail: String },
}

impl fmt::Display for DesignFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignFileError::Io { path, detail } => write!(f, "{path}: {detail}"),
            DesignFileError::Json { detail } => write!(f, "invalid JSON: {detail}"),
            DesignFileError::Schema { found } => {
                if *found > SCHEMA_VERSION as u64 {
                    write!(
                        f,
                        "schema version {found} is newer than this tool understands (max {SCHEMA_VERSION}); upgrade the tool"
                    )
                } else {
                    write!(f, "unsupported schema version {found}; expected {SCHEMA_VERSION}")
                }
            }
            DesignFileError::MissingResonator { name } => {
                write!(f, "topology requires a resonator named '{name}'")
            }
            DesignFileError::UnknownResonator { name } => {
                write!(f, "resonator '{name}' does not belong to this topology")
            }
            DesignFileError::BadValue { detail } => write!(f, "{detail}"),
            DesignFileError::Core { detail } => write!(f, "{detail}"),
        }
    }
}

impl std::error::Error for DesignFileError {}

fn core_err(e: impl fmt::Display) -> DesignFileError {
    DesignFileError::Core { detail: e.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Ladder,
    DirectLattice,
    LayoutBalanced,
    CanonicalLattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundsKind {
    Tied,
    Separate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FourthArmKind {
    Present,
    Dangling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpec {
    pub rm: f64,
    pub lm: f64,
    pub cm: f64,
    pub mode: String,
}

impl BranchSpec {
    pub fn to_branch(&self) -> Result<MotionalBranch, DesignFileError> {
        let mode = self.mode.parse().map_err(core_err)?;
        MotionalBranch::new(self.rm, self.lm, self.cm, mode).map_err(core_err)
    }

    pub fn from_branch(b: &MotionalBranch) -> BranchSpec {
        BranchSpec { rm: b.rm(), lm: b.lm(), cm: b.cm(), mode: b.mode().to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorSpec {
    pub c0: f64,
    pub r0: f64,
    pub rs: f64,
    pub ls: f64,
    pub branches: Vec<BranchSpec>,
}

impl ResonatorSpec {
    pub fn to_params(&self) -> Result<MbvdParams, DesignFileError> {
        let branches = self
            .branches
            .iter()
            .map(|b| b.to_branch())
            .collect::<Result<Vec<_>, _>>()?;
        MbvdParams::new(self.c0, self.r0, self.rs, self.ls, branches).map_err(core_err)
    }

    pub fn from_params(p: &MbvdParams) -> ResonatorSpec {
        ResonatorSpec {
            c0: p.c0(),
            r0: p.r0(),
            rs: p.rs(),
            ls: p.ls(),
            branches: p.branches().iter().map(BranchSpec::from_branch).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub n_e: u32,
    pub l_e: f64,
    pub w_e: f64,
    pub w_g: f64,
    pub t1: f64,
    pub t2: f64,
}

impl GeometrySpec {
    fn to_geometry(self) -> Result<ResonatorGeometry, DesignFileError> {
        ResonatorGeometry::new(self.n_e, self.l_e, self.w_e, self.w_g, self.t1, self.t2)
            .map_err(core_err)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacingKind {
    Linear,
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub f_start_hz: f64,
    pub f_stop_hz: f64,
    pub n_points: usize,
    pub spacing: SpacingKind,
}

impl SweepSpec {
    pub fn to_grid(&self) -> Result<FrequencyGrid, DesignFileError> {
        match self.spacing {
            SpacingKind::Linear => {
                FrequencyGrid::linear(self.f_start_hz, self.f_stop_hz, self.n_points)
            }
            SpacingKind::Logarithmic => {
                FrequencyGrid::logarithmic(self.f_start_hz, self.f_stop_hz, self.n_points)
            }
        }
        .map_err(core_err)
    }

    pub fn from_grid(grid: &FrequencyGrid) -> Result<SweepSpec, DesignFileError> {
        let spacing = match grid.spacing() {
            GridSpacing::Linear => SpacingKind::Linear,
            GridSpacing::Logarithmic => SpacingKind::Logarithmic,
            GridSpacing::Irregular => {
                return Err(DesignFileError::BadValue {
                    detail: "irregular grids cannot be stored in a design file".to_string(),
                })
            }
        };
        let p = grid.points();
        Ok(SweepSpec {
            f_start_hz: p[0],
            f_stop_hz: p[p.len() - 1],
            n_points: p.len(),
            spacing,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedMatchSpec {
    pub z01_re: f64,
    pub z01_im: f64,
    pub z02_re: f64,
    pub z02_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatchSpec {
    Keyword(String),
    Fixed(FixedMatchSpec),
}

impl MatchSpec {
    pub fn to_policy(&self) -> Result<MatchPolicy, DesignFileError> {
        match self {
            MatchSpec::Keyword(w) if w == "auto" => Ok(MatchPolicy::Auto),
            MatchSpec::Keyword(w) if w == "none" => Ok(MatchPolicy::None),
            MatchSpec::Keyword(w) => Err(DesignFileError::BadValue {
                detail: format!("match must be \"auto\", \"none\", or an impedance object; got \"{w}\""),
            }),
            MatchSpec::Fixed(z) => Ok(MatchPolicy::Fixed([
                Complex64::new(z.z01_re, z.z01_im),
                Complex64::new(z.z02_re, z.z02_im),
            ])),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub schema: u32,
    pub topology: TopologyKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grounds: Option<GroundsKind>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fourth_arm: Option<FourthArmKind>,
    pub resonators: BTreeMap<String, ResonatorSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub geometry: Option<GeometrySpec>,
    pub sweep: SweepSpec,
    #[serde(rename = "match")]
    pub match_policy: MatchSpec,
    pub stopbands_hz: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spurs: Option<BTreeMap<String, Vec<BranchSpec>>>,
}

/// A design file resolved into simulator types.
#[derive(Debug, Clone)]
pub struct LoadedDesign {
    pub design: FilterDesign,
    pub grid: FrequencyGrid,
    pub policy: MatchPolicy,
    pub stopbands: Vec<(f64, f64)>,
    pub file: DesignFile,
}

fn schema_check(value: &serde_json::Value) -> Result<(), DesignFileError> {
    let found = value
        .get("schema")
        .and_then(|v| v.as_u64())
        .ok_or(DesignFileError::Json { detail: "missing numeric \"schema\" field".to_string() })?;
    if found != SCHEMA_VERSION as u64 {
        return Err(DesignFileError::Schema { found });
    }
    Ok(())
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, DesignFileError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| DesignFileError::Json { detail: e.to_string() })?;
    schema_check(&value)?;
    serde_json::from_value(value).map_err(|e| DesignFileError::Json { detail: e.to_string() })
}

/// Parses any schema-versioned JSON document of this tool.
pub fn parse_wrapped<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, DesignFileError> {
    from_json(text)
}

pub fn parse_design(text: &str) -> Result<LoadedDesign, DesignFileError> {
    let file: DesignFile = from_json(text)?;
    build(file)
}

pub fn load_design(path: &Path) -> Result<LoadedDesign, DesignFileError> {
    let text = fs::read_to_string(path).map_err(|e| DesignFileError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    parse_design(&text)
}

/// Role names the topology expects, in emission order.
pub fn role_names(file: &DesignFile) -> Vec<String> {
    match file.topology {
        TopologyKind::DirectLattice | TopologyKind::CanonicalLattice => {
            vec!["a".to_string(), "b".to_string()]
        }
        TopologyKind::LayoutBalanced => {
            vec!["a1".to_string(), "a2".to_string(), "b".to_string()]
        }
        TopologyKind::Ladder => {
            let count = |prefix: &str| {
                (1..)
                    .take_while(|i| file.resonators.contains_key(&format!("{prefix}{i}")))
                    .count()
            };
            let mut names = Vec::new();
            for i in 1..=count("series") {
                names.push(format!("series{i}"));
            }
            for i in 1..=count("shunt") {
                names.push(format!("shunt{i}"));
            }
            names
        }
    }
}

fn build(file: DesignFile) -> Result<LoadedDesign, DesignFileError> {
    if file.topology != TopologyKind::DirectLattice
        && (file.grounds.is_some() || file.fourth_arm.is_some())
    {
        return Err(DesignFileError::BadValue {
            detail: "\"grounds\" and \"fourth_arm\" apply only to the direct_lattice topology"
                .to_string(),
        });
    }
    for [lo, hi] in &file.stopbands_hz {
        if !(lo.is_finite() && hi.is_finite() && *lo > 0.0 && hi > lo) {
            return Err(DesignFileError::BadValue {
                detail: format!("stopband [{lo}, {hi}] must satisfy 0 < lo < hi"),
            });
        }
    }

    let names = role_names(&file);
    for name in file.resonators.keys() {
        if !names.contains(name) {
            return Err(DesignFileError::UnknownResonator { name: name.clone() });
        }
    }
    if let Some(spurs) = &file.spurs {
        for name in spurs.keys() {
            if !names.contains(name) {
                return Err(DesignFileError::UnknownResonator { name: name.clone() });
            }
        }
    }
    let geometry = file.geometry.map(GeometrySpec::to_geometry).transpose()?;
    let mut params = BTreeMap::new();
    for name in &names {
        let spec = file
            .resonators
            .get(name)
            .ok_or_else(|| DesignFileError::MissingResonator { name: name.clone() })?;
        let mut p = spec.to_params()?;
        if let Some(g) = geometry {
            p = p.with_geometry(g);
        }
        if let Some(list) = file.spurs.as_ref().and_then(|s| s.get(name)) {
            for b in list {
                p = p.add_spur(b.to_branch()?).map_err(core_err)?;
            }
        }
        params.insert(name.clone(), p);
    }
    let mut take = |name: &str| params.remove(name).unwrap();

    let variant = match file.topology {
        TopologyKind::DirectLattice => TopologyVariant::DirectLattice {
            a: take("a"),
            b: take("b"),
            grounds: match file.grounds.unwrap_or(GroundsKind::Separate) {
                GroundsKind::Tied => GroundScheme::Tied,
                GroundsKind::Separate => GroundScheme::Separate,
            },
            fourth_arm: match file.fourth_arm.unwrap_or(FourthArmKind::Present) {
                FourthArmKind::Present => FourthArm::Present,
                FourthArmKind::Dangling => FourthArm::Dangling,
            },
        },
        TopologyKind::CanonicalLattice => {
            TopologyVariant::CanonicalLattice { a: take("a"), b: take("b") }
        }
        TopologyKind::LayoutBalanced => TopologyVariant::LayoutBalanced {
            a1: take("a1"),
            a2: take("a2"),
            b: take("b"),
        },
        TopologyKind::Ladder => {
            let series: Vec<_> = names
                .iter()
                .filter(|n| n.starts_with("series"))
                .map(|n| params.remove(n).unwrap())
                .collect();
            let shunt: Vec<_> = names
                .iter()
                .filter(|n| n.starts_with("shunt"))
                .map(|n| params.remove(n).unwrap())
                .collect();
            if series.is_empty() && shunt.is_empty() {
                return Err(DesignFileError::MissingResonator { name: "series1".to_string() });
            }
            TopologyVariant::Ladder { series, shunt }
        }
    };

    let design = FilterDesign::new(variant).map_err(core_err)?;
    let grid = file.sweep.to_grid()?;
    let policy = file.match_policy.to_policy()?;
    let stopbands = file.stopbands_hz.iter().map(|[lo, hi]| (*lo, *hi)).collect();
    Ok(LoadedDesign { design, grid, policy, stopbands, file })
}

/// Re-emits `file` with its resonators replaced by the values in `variant`,
/// folding any spur branches into the resonator entries.
pub fn with_updated_resonators(
    file: &DesignFile,
    variant: &TopologyVariant,
) -> Result<DesignFile, DesignFileError> {
    let mut out = file.clone();
    out.spurs = None;
    let mut set = |name: &str, p: &MbvdParams| {
        out.resonators.insert(name.to_string(), ResonatorSpec::from_params(p));
    };
    match variant {
        TopologyVariant::DirectLattice { a, b, .. }
        | TopologyVariant::CanonicalLattice { a, b } => {
            set("a", a);
            set("b", b);
        }
        TopologyVariant::LayoutBalanced { a1, a2, b } => {
            set("a1", a1);
            set("a2", a2);
            set("b", b);
        }
        TopologyVariant::Ladder { series, shunt } => {
            for (i, p) in series.iter().enumerate() {
                set(&format!("series{}", i + 1), p);
            }
            for (i, p) in shunt.iter().enumerate() {
                set(&format!("shunt{}", i + 1), p);
            }
        }
    }
    Ok(out)
}

pub fn to_pretty_json(file: &DesignFile) -> String {
    let mut text = serde_json::to_string_pretty(file).expect("design files always serialize");
    text.push('\n');
    text
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSpec {
    pub f_c: f64,
    pub fbw: f64,
    pub il: f64,
    pub oob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeSpec {
    pub role: String,
    pub field: String,
    pub lo: f64,
    pub hi: f64,
}

/// Optimization goal plus the parameters the optimizer may move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub schema: u32,
    pub f_c_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f_c_tolerance: Option<f64>,
    pub fbw_min: f64,
    pub il_max_db: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oob_min_db: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub stopbands_hz: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weights: Option<WeightsSpec>,
    pub free: Vec<FreeSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub restarts: Option<usize>,
}

pub fn parse_role(name: &str) -> Result<ArmRole, DesignFileError> {
    let indexed = |prefix: &str| -> Option<usize> {
        name.strip_prefix(prefix)?.parse::<usize>().ok().filter(|i| *i >= 1)
    };
    match name {
        "a" => Ok(ArmRole::LatticeA),
        "b" => Ok(ArmRole::LatticeB),
        "a1" => Ok(ArmRole::LatticeA1),
        "a2" => Ok(ArmRole::LatticeA2),
        _ => {
            if let Some(i) = indexed("series") {
                Ok(ArmRole::Series(i - 1))
            } else if let Some(i) = indexed("shunt") {
                Ok(ArmRole::Shunt(i - 1))
            } else {
                Err(DesignFileError::BadValue { detail: format!("unknown role '{name}'") })
            }
        }
    }
}

pub fn parse_field(name: &str) -> Result<ParamField, DesignFileError> {
    let indexed = |prefix: &str| -> Option<usize> {
        name.strip_prefix(prefix)?.parse::<usize>().ok().filter(|i| *i >= 1)
    };
    match name {
        "c0" => Ok(ParamField::C0),
        "r0" => Ok(ParamField::R0),
        "rs" => Ok(ParamField::Rs),
        "ls" => Ok(ParamField::Ls),
        "fs_scale" => Ok(ParamField::FsScale),
        "y_scale" => Ok(ParamField::YScale),
        _ => {
            if let Some(i) = indexed("rm") {
                Ok(ParamField::BranchRm(i - 1))
            } else if let Some(i) = indexed("lm") {
                Ok(ParamField::BranchLm(i - 1))
            } else if let Some(i) = indexed("cm") {
                Ok(ParamField::BranchCm(i - 1))
            } else {
                Err(DesignFileError::BadValue { detail: format!("unknown field '{name}'") })
            }
        }
    }
}

impl SpecFile {
    pub fn to_target(&self) -> Result<TargetSpec, DesignFileError> {
        let mut spec =
            TargetSpec::new(self.f_c_hz, self.fbw_min, self.il_max_db).map_err(core_err)?;
        if let Some(tol) = self.f_c_tolerance {
            spec = spec.with_f_c_tolerance(tol).map_err(core_err)?;
        }
        if let Some(oob) = self.oob_min_db {
            let bands = self.stopbands_hz.iter().map(|[lo, hi]| (*lo, *hi)).collect();
            spec = spec.with_oob(oob, bands).map_err(core_err)?;
        } else if !self.stopbands_hz.is_empty() {
            return Err(DesignFileError::BadValue {
                detail: "stopbands_hz requires oob_min_db".to_string(),
            });
        }
        if let Some(w) = self.weights {
            spec = spec
                .with_weights(SpecWeights { f_c: w.f_c, fbw: w.fbw, il: w.il, oob: w.oob })
                .map_err(core_err)?;
        }
        Ok(spec)
    }

    pub fn to_free(&self) -> Result<Vec<FreeParam>, DesignFileError> {
        self.free
            .iter()
            .map(|f| {
                Ok(FreeParam {
                    role: parse_role(&f.role)?,
                    field: parse_field(&f.field)?,
                    lo: f.lo,
                    hi: f.hi,
                })
            })
            .collect()
    }
}

pub fn parse_spec(text: &str) -> Result<SpecFile, DesignFileError> {
    from_json(text)
}

pub fn load_spec(path: &Path) -> Result<SpecFile, DesignFileError> {
    let text = fs::read_to_string(path).map_err(|e| DesignFileError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    parse_spec(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_json() -> String {
        r#"{
            "schema": 1,
            "topology": "canonical_lattice",
            "resonators": {
                "a": {"c0": 4e-13, "r0": 0.5, "rs": 0.8, "ls": 5e-12,
                      "branches": [{"rm": 1.2, "lm": 3.0e-9, "cm": 1.8e-13, "mode": "S2"}]},
                "b": {"c0": 4e-13, "r0": 0.5, "rs": 0.8, "ls": 5e-12,
                      "branches": [{"rm": 1.0, "lm": 2.0e-9, "cm": 1.8e-13, "mode": "S2"}]}
            },
            "sweep": {"f_start_hz": 1.0e10, "f_stop_hz": 3.0e10, "n_points": 501, "spacing": "linear"},
            "match": "auto",
            "stopbands_hz": [[1.05e10, 1.45e10]]
        }"#
        .to_string()
    }

    #[test]
    fn demo_design_round_trips() {
        let loaded = parse_design(&demo_json()).unwrap();
        assert_eq!(loaded.grid.len(), 501);
        assert_eq!(loaded.policy, MatchPolicy::Auto);
        assert_eq!(loaded.stopbands, vec![(1.05e10, 1.45e10)]);
        let text = to_pretty_json(&loaded.file);
        let again = parse_design(&text).unwrap();
        assert_eq!(again.file, loaded.file);
        assert_eq!(again.design, loaded.design);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = demo_json().replace("\"match\": \"auto\"", "\"match\": \"auto\", \"extra\": 1");
        let err = parse_design(&text).unwrap_err();
        assert!(matches!(err, DesignFileError::Json { .. }), "{err:?}");
        assert!(err.to_string().contains("extra"), "{err}");
    }

    #[test]
    fn future_schema_versions_are_refused() {
        let text = demo_json().replace("\"schema\": 1", "\"schema\": 2");
        let err = parse_design(&text).unwrap_err();
        assert_eq!(err, DesignFileError::Schema { found: 2 });
        assert!(err.to_string().contains("newer"));
    }

    #[test]
    fn match_keywords_are_validated() {
        let text = demo_json().replace("\"auto\"", "\"maybe\"");
        let err = parse_design(&text).unwrap_err();
        assert!(matches!(err, DesignFileError::BadValue { .. }));
        let text = demo_json().replace(
            "\"auto\"",
            "{\"z01_re\": 30.0, \"z01_im\": 5.0, \"z02_re\": 40.0, \"z02_im\": -2.0}",
        );
        let loaded = parse_design(&text).unwrap();
        assert!(matches!(loaded.policy, MatchPolicy::Fixed(_)));
    }

    #[test]
    fn missing_and_mislabeled_resonators_are_caught() {
        let text = demo_json().replace("\"b\":", "\"c\":");
        let err = parse_design(&text).unwrap_err();
        assert_eq!(err, DesignFileError::UnknownResonator { name: "c".to_string() });
        let loaded: DesignFile = from_json(&demo_json()).unwrap();
        let mut trimmed = loaded;
        trimmed.resonators.remove("b");
        let err = build(trimmed).unwrap_err();
        assert_eq!(err, DesignFileError::MissingResonator { name: "b".to_string() });
    }

    #[test]
    fn spurs_fold_into_the_named_resonator() {
        let text = demo_json().replace(
            "\"stopbands_hz\": [[1.05e10, 1.45e10]]",
            "\"stopbands_hz\": [],\n\"spurs\": {\"a\": [{\"rm\": 30.0, \"lm\": 8.0e-9, \"cm\": 1.0e-14, \"mode\": \"A1\"}]}",
        );
        let loaded = parse_design(&text).unwrap();
        match loaded.design.variant() {
            TopologyVariant::CanonicalLattice { a, b } => {
                assert_eq!(a.branches().len(), 2);
                assert_eq!(b.branches().len(), 1);
            }
            _ => panic!("wrong topology"),
        }
    }

    #[test]
    fn ladder_roles_parse_in_order() {
        let text = r#"{
            "schema": 1,
            "topology": "ladder",
            "resonators": {
                "series1": {"c0": 3e-13, "r0": 0.5, "rs": 0.8, "ls": 5e-12,
                            "branches": [{"rm": 1.2, "lm": 3.0e-9, "cm": 1.3e-13, "mode": "S2"}]},
                "series2": {"c0": 3e-13, "r0": 0.5, "rs": 0.8, "ls": 5e-12,
                            "branches": [{"rm": 1.2, "lm": 3.1e-9, "cm": 1.3e-13, "mode": "S2"}]},
                "shunt1": {"c0": 5e-13, "r0": 0.5, "rs": 0.8, "ls": 5e-12,
                           "branches": [{"rm": 1.0, "lm": 4.0e-9, "cm": 2.2e-13, "mode": "S2"}]}
            },
            "sweep": {"f_start_hz": 1.0e10, "f_stop_hz": 3.0e10, "n_points": 401, "spacing": "linear"},
            "match": "none",
            "stopbands_hz": []
        }"#;
        let loaded = parse_design(text).unwrap();
        match loaded.design.variant() {
            TopologyVariant::Ladder { series, shunt } => {
                assert_eq!(series.len(), 2);
                assert_eq!(shunt.len(), 1);
                assert!(series[1].branches()[0].lm() > series[0].branches()[0].lm());
            }
            _ => panic!("wrong topology"),
        }
    }

    #[test]
    fn grounds_keys_belong_to_direct_lattices_only() {
        let text = demo_json().replace(
            "\"topology\": \"canonical_lattice\"",
            "\"topology\": \"canonical_lattice\", \"grounds\": \"separate\"",
        );
        let err = parse_design(&text).unwrap_err();
        assert!(matches!(err, DesignFileError::BadValue { .. }));
        let text = demo_json().replace(
            "\"topology\": \"canonical_lattice\"",
            "\"topology\": \"direct_lattice\", \"grounds\": \"separate\", \"fourth_arm\": \"present\"",
        );
        assert!(parse_design(&text).is_ok());
    }

    #[test]
    fn spec_files_resolve_roles_and_fields() {
        let text = r#"{
            "schema": 1,
            "f_c_hz": 1.97e10,
            "f_c_tolerance": 0.02,
            "fbw_min": 0.32,
            "il_max_db": 0.8,
            "oob_min_db": 15.0,
            "stopbands_hz": [[1.05e10, 1.45e10], [2.6e10, 2.95e10]],
            "weights": {"f_c": 10.0, "fbw": 25.0, "il": 10.0, "oob": 0.2},
            "free": [
                {"role": "a1", "field": "fs_scale", "lo": 0.85, "hi": 1.15},
                {"role": "series2", "field": "y_scale", "lo": 0.3, "hi": 3.0},
                {"role": "b", "field": "cm1", "lo": 1e-14, "hi": 1e-12}
            ],
            "restarts": 3
        }"#;
        let spec = parse_spec(text).unwrap();
        let target = spec.to_target().unwrap();
        assert_eq!(target.stopbands_hz(), &[(1.05e10, 1.45e10), (2.6e10, 2.95e10)]);
        let free = spec.to_free().unwrap();
        assert_eq!(free[0].role, ArmRole::LatticeA1);
        assert_eq!(free[0].field, ParamField::FsScale);
        assert_eq!(free[1].role, ArmRole::Series(1));
        assert_eq!(free[2].field, ParamField::BranchCm(0));
        let err = parse_spec(&text.replace("\"a1\"", "\"arm9\"")).unwrap();
        assert!(err.to_free().is_err());
    }

    #[test]
    fn updated_resonators_replace_values_and_drop_spurs() {
        let loaded = parse_design(&demo_json()).unwrap();
        let scaled = match loaded.design.variant() {
            TopologyVariant::CanonicalLattice { a, b } => TopologyVariant::CanonicalLattice {
                a: a.scale(2.0),
                b: b.clone(),
            },
            _ => unreachable!(),
        };
        let out = with_updated_resonators(&loaded.file, &scaled).unwrap();
        assert!((out.resonators["a"].c0 - 8e-13).abs() < 1e-25);
        assert_eq!(out.resonators["b"], loaded.file.resonators["b"]);
        assert!(out.spurs.is_none());
    }
}
