//! End-to-end design evaluation (netlist, sweep, optional matching, band
//! metrics) and goal-driven tuning of resonator element values.

use std::fmt;

use num_complex::Complex64;

use crate::matching::{self, MatchError, MatchSolution};
use crate::metrics::{extract_metrics, FilterMetrics, MetricsError};
use crate::mna::MnaError;
use crate::network::{FrequencyGrid, NetworkError, SweepResponse};
use crate::optim::{self, HistoryPoint, NelderMeadOptions, OptimError};
use crate::resonator::{MbvdParams, MotionalBranch, ResonatorError};
use crate::topology::{FilterDesign, TopologyError, TopologyVariant};

/// Sweeps coarser than this cannot be trusted to resolve band edges.
pub const MIN_SWEEP_POINTS: usize = 401;

/// Substitute cost for candidate designs whose evaluation fails outright
/// (no passband, infeasible match, invalid element combination).
const FAILED_EVAL_COST: f64 = 1e9;

#[derive(Debug, Clone, PartialEq)]
pub enum DesignError {
    GridTooCoarse { points: usize },
    InvalidTarget { field: &'static str, value: f64 },
    NoFreeParameters,
    InvalidFreeParameter { index: usize, reason: &'static str },
    InfeasibleBounds { index: usize, lo: f64, hi: f64 },
    Topology(TopologyError),
    Mna(MnaError),
    Network(NetworkError),
    Matching(MatchError),
    Metrics(MetricsError),
    Resonator(ResonatorError),
    Optim(OptimError),
}

impl fmt::Display for DesignError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignError::GridTooCoarse { points } => {
                write!(f, "sweep has {points} points, need at least {MIN_SWEEP_POINTS}")
            }
            DesignError::InvalidTarget { field, value } => {
                write!(f, "target field {field} = {value} is out of range")
            }
            DesignError::NoFreeParameters => write!(f, "no free parameters to optimize"),
            DesignError::InvalidFreeParameter { index, reason } => {
                write!(f, "free parameter {index}: {reason}")
            }
            DesignError::InfeasibleBounds { index, lo, hi } => {
                write!(f, "free parameter {index} has bounds [{lo}, {hi}]")
            }
            DesignError::Topology(e) => write!(f, "{e}"),
            DesignError::Mna(e) => write!(f, "{e}"),
            DesignError::Network(e) => write!(f, "{e}"),
            DesignError::Matching(e) => write!(f, "{e}"),
            DesignError::Metrics(e) => write!(f, "{e}"),
            DesignError::Resonator(e) => write!(f, "{e}"),
            DesignError::Optim(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DesignError {}

impl From<TopologyError> for DesignError {
    fn from(e: TopologyError) -> Self {
        DesignError::Topology(e)
    }
}

impl From<MnaError> for DesignError {
    fn from(e: MnaError) -> Self {
        DesignError::Mna(e)
    }
}

impl From<NetworkError> for DesignError {
    fn from(e: NetworkError) -> Self {
        DesignError::Network(e)
    }
}

impl From<MatchError> for DesignError {
    fn from(e: MatchError) -> Self {
        DesignError::Matching(e)
    }
}

impl From<MetricsError> for DesignError {
    fn from(e: MetricsError) -> Self {
        DesignError::Metrics(e)
    }
}

impl From<ResonatorError> for DesignError {
    fn from(e: ResonatorError) -> Self {
        DesignError::Resonator(e)
    }
}

impl From<OptimError> for DesignError {
    fn from(e: OptimError) -> Self {
        DesignError::Optim(e)
    }
}

/// Port termination handling during evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatchPolicy {
    /// Metrics on the raw sweep at the design's own references.
    None,
    /// Conjugate match at the transmission peak, metrics after
    /// renormalization.
    Auto,
    /// Renormalize to the given references.
    Fixed([Complex64; 2]),
}

/// Everything one evaluation produces.
#[derive(Debug, Clone)]
pub struct Evaluation {
    response: SweepResponse,
    metrics: FilterMetrics,
    match_solution: Option<MatchSolution>,
}

impl Evaluation {
    pub fn response(&self) -> &SweepResponse {
        &self.response
    }

    pub fn metrics(&self) -> &FilterMetrics {
        &self.metrics
    }

    pub fn match_solution(&self) -> Option<&MatchSolution> {
        self.match_solution.as_ref()
    }
}

/// Builds the netlist, sweeps it, applies the match policy, and extracts
/// band metrics. Deterministic for fixed inputs.
pub fn evaluate(
    design: &FilterDesign,
    grid: &FrequencyGrid,
    policy: MatchPolicy,
    stopbands: &[(f64, f64)],
) -> Result<Evaluation, DesignError> {
    if grid.points().len() < MIN_SWEEP_POINTS {
        return Err(DesignError::GridTooCoarse { points: grid.points().len() });
    }
    let net = design.build()?;
    let raw = net.sweep_s(grid, design.port_refs())?;
    let (response, match_solution) = match policy {
        MatchPolicy::None => (raw, None),
        MatchPolicy::Fixed(refs) => (raw.renormalized(refs)?, None),
        MatchPolicy::Auto => {
            let sol = matching::match_at_peak(&raw)?;
            let matched = matching::apply_match(&raw, &sol)?;
            (matched, Some(sol))
        }
    };
    let metrics = extract_metrics(&response, stopbands)?;
    Ok(Evaluation { response, metrics, match_solution })
}

/// Relative weight of each goal term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecWeights {
    pub f_c: f64,
    pub fbw: f64,
    pub il: f64,
    pub oob: f64,
}

impl Default for SpecWeights {
    fn default() -> Self {
        SpecWeights { f_c: 1.0, fbw: 1.0, il: 1.0, oob: 1.0 }
    }
}

/// Optimization goal for [`optimize`]: center frequency with a relative
/// tolerance band, minimum fractional bandwidth, insertion-loss ceiling,
/// and optional stopband rejection floors.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    f_c_hz: f64,
    f_c_tolerance: f64,
    fbw_min: f64,
    il_max_db: f64,
    oob_min_db: f64,
    stopbands_hz: Vec<(f64, f64)>,
    weights: SpecWeights,
}

impl TargetSpec {
    pub fn new(f_c_hz: f64, fbw_min: f64, il_max_db: f64) -> Result<Self, DesignError> {
        if !(f_c_hz > 0.0 && f_c_hz.is_finite()) {
            return Err(DesignError::InvalidTarget { field: "f_c_hz", value: f_c_hz });
        }
        if !(fbw_min > 0.0 && fbw_min < 1.0) {
            return Err(DesignError::InvalidTarget { field: "fbw_min", value: fbw_min });
        }
        if !(il_max_db > 0.0 && il_max_db.is_finite()) {
            return Err(DesignError::InvalidTarget { field: "il_max_db", value: il_max_db });
        }
        Ok(TargetSpec {
            f_c_hz,
            f_c_tolerance: 0.0,
            fbw_min,
            il_max_db,
            oob_min_db: 0.0,
            stopbands_hz: Vec::new(),
            weights: SpecWeights::default(),
        })
    }

    /// Widens the center-frequency goal to a relative dead band.
    pub fn with_f_c_tolerance(mut self, tol: f64) -> Result<Self, DesignError> {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(DesignError::InvalidTarget { field: "f_c_tolerance", value: tol });
        }
        self.f_c_tolerance = tol;
        Ok(self)
    }

    pub fn with_oob(
        mut self,
        oob_min_db: f64,
        stopbands_hz: Vec<(f64, f64)>,
    ) -> Result<Self, DesignError> {
        if !(oob_min_db >= 0.0 && oob_min_db.is_finite()) {
            return Err(DesignError::InvalidTarget { field: "oob_min_db", value: oob_min_db });
        }
        for &(lo, hi) in &stopbands_hz {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(DesignError::InvalidTarget { field: "stopbands_hz", value: lo });
            }
        }
        self.oob_min_db = oob_min_db;
        self.stopbands_hz = stopbands_hz;
        Ok(self)
    }

    pub fn with_weights(mut self, weights: SpecWeights) -> Result<Self, DesignError> {
        for (field, value) in [
            ("weights.f_c", weights.f_c),
            ("weights.fbw", weights.fbw),
            ("weights.il", weights.il),
            ("weights.oob", weights.oob),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(DesignError::InvalidTarget { field, value });
            }
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn f_c_hz(&self) -> f64 {
        self.f_c_hz
    }

    pub fn fbw_min(&self) -> f64 {
        self.fbw_min
    }

    pub fn il_max_db(&self) -> f64 {
        self.il_max_db
    }

    pub fn stopbands_hz(&self) -> &[(f64, f64)] {
        &self.stopbands_hz
    }
}

/// Hinge-squared goal cost of a metric set: zero when every goal is met,
/// otherwise the weighted sum of squared violations.
pub fn target_cost(m: &FilterMetrics, spec: &TargetSpec) -> f64 {
    let w = &spec.weights;
    let mut cost = 0.0;
    let v = (m.il_min_db() - spec.il_max_db).max(0.0);
    cost += w.il * v * v;
    let v = (spec.fbw_min - m.fbw_3db()).max(0.0);
    cost += w.fbw * v * v;
    let off = (m.f_c_hz() - spec.f_c_hz).abs() / spec.f_c_hz;
    let v = (off - spec.f_c_tolerance).max(0.0);
    cost += w.f_c * v * v;
    for &r in m.oob_rejection_db() {
        let v = (spec.oob_min_db - r).max(0.0);
        cost += w.oob * v * v;
    }
    cost
}

/// Which resonator of the topology a free parameter addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArmRole {
    LatticeA,
    LatticeB,
    LatticeA1,
    LatticeA2,
    Series(usize),
    Shunt(usize),
}

/// Which quantity of that resonator it moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamField {
    C0,
    R0,
    Rs,
    Ls,
    BranchRm(usize),
    BranchLm(usize),
    BranchCm(usize),
    /// Multiplies every branch series resonance, preserving cm and Q.
    FsScale,
    /// Scales the whole one-port admittance (area scaling).
    YScale,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParam {
    pub role: ArmRole,
    pub field: ParamField,
    pub lo: f64,
    pub hi: f64,
}

fn rebuild(p: &MbvdParams, field: ParamField, theta: f64) -> Result<MbvdParams, ResonatorError> {
    let branches = |edit: &dyn Fn(usize, &MotionalBranch) -> Result<MotionalBranch, ResonatorError>| {
        p.branches()
            .iter()
            .enumerate()
            .map(|(i, b)| edit(i, b))
            .collect::<Result<Vec<_>, _>>()
    };
    let keep = |_: usize, b: &MotionalBranch| {
        MotionalBranch::new(b.rm(), b.lm(), b.cm(), b.mode())
    };
    let rebuilt = match field {
        ParamField::C0 => MbvdParams::new(theta, p.r0(), p.rs(), p.ls(), branches(&keep)?),
        ParamField::R0 => MbvdParams::new(p.c0(), theta, p.rs(), p.ls(), branches(&keep)?),
        ParamField::Rs => MbvdParams::new(p.c0(), p.r0(), theta, p.ls(), branches(&keep)?),
        ParamField::Ls => MbvdParams::new(p.c0(), p.r0(), p.rs(), theta, branches(&keep)?),
        ParamField::BranchRm(k) => {
            let bs = branches(&|i, b| {
                let rm = if i == k { theta } else { b.rm() };
                MotionalBranch::new(rm, b.lm(), b.cm(), b.mode())
            })?;
            MbvdParams::new(p.c0(), p.r0(), p.rs(), p.ls(), bs)
        }
        ParamField::BranchLm(k) => {
            let bs = branches(&|i, b| {
                let lm = if i == k { theta } else { b.lm() };
                MotionalBranch::new(b.rm(), lm, b.cm(), b.mode())
            })?;
            MbvdParams::new(p.c0(), p.r0(), p.rs(), p.ls(), bs)
        }
        ParamField::BranchCm(k) => {
            let bs = branches(&|i, b| {
                let cm = if i == k { theta } else { b.cm() };
                MotionalBranch::new(b.rm(), b.lm(), cm, b.mode())
            })?;
            MbvdParams::new(p.c0(), p.r0(), p.rs(), p.ls(), bs)
        }
        ParamField::FsScale => {
            let bs = branches(&|_, b| {
                MotionalBranch::new(b.rm() / theta, b.lm() / (theta * theta), b.cm(), b.mode())
            })?;
            MbvdParams::new(p.c0(), p.r0(), p.rs(), p.ls(), bs)
        }
        ParamField::YScale => return Ok(p.scale(theta)),
    }?;
    Ok(match p.geometry() {
        Some(g) => rebuilt.with_geometry(*g),
        None => rebuilt,
    })
}

fn resolve<'a>(
    variant: &'a mut TopologyVariant,
    role: ArmRole,
) -> Option<&'a mut MbvdParams> {
    match (variant, role) {
        (TopologyVariant::Ladder { series, .. }, ArmRole::Series(i)) => series.get_mut(i),
        (TopologyVariant::Ladder { shunt, .. }, ArmRole::Shunt(i)) => shunt.get_mut(i),
        (TopologyVariant::DirectLattice { a, .. }, ArmRole::LatticeA) => Some(a),
        (TopologyVariant::DirectLattice { b, .. }, ArmRole::LatticeB) => Some(b),
        (TopologyVariant::CanonicalLattice { a, .. }, ArmRole::LatticeA) => Some(a),
        (TopologyVariant::CanonicalLattice { b, .. }, ArmRole::LatticeB) => Some(b),
        (TopologyVariant::LayoutBalanced { a1, .. }, ArmRole::LatticeA1) => Some(a1),
        (TopologyVariant::LayoutBalanced { a2, .. }, ArmRole::LatticeA2) => Some(a2),
        (TopologyVariant::LayoutBalanced { b, .. }, ArmRole::LatticeB) => Some(b),
        _ => None,
    }
}

/// Applies free-parameter values to a copy of the template.
pub fn apply_free(
    template: &FilterDesign,
    free: &[FreeParam],
    values: &[f64],
) -> Result<FilterDesign, DesignError> {
    let mut variant = template.variant().clone();
    for (index, (fp, &theta)) in free.iter().zip(values).enumerate() {
        let target = resolve(&mut variant, fp.role).ok_or(
            DesignError::InvalidFreeParameter {
                index,
                reason: "role does not exist in this topology",
            },
        )?;
        *target = rebuild(target, fp.field, theta)?;
    }
    Ok(FilterDesign::new(variant)?.with_port_refs(template.port_refs())?)
}

fn current_value(p: &MbvdParams, field: ParamField) -> Option<f64> {
    Some(match field {
        ParamField::C0 => p.c0(),
        ParamField::R0 => p.r0(),
        ParamField::Rs => p.rs(),
        ParamField::Ls => p.ls(),
        ParamField::BranchRm(k) => p.branches().get(k)?.rm(),
        ParamField::BranchLm(k) => p.branches().get(k)?.lm(),
        ParamField::BranchCm(k) => p.branches().get(k)?.cm(),
        ParamField::FsScale | ParamField::YScale => 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    /// Total evaluation budget.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Match policy used inside every candidate evaluation.
    pub policy: MatchPolicy,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            budget: 5000,
            restarts: 8,
            seed: 0,
            policy: MatchPolicy::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    design: FilterDesign,
    values: Vec<f64>,
    cost: f64,
    evaluations: usize,
    budget_exhausted: bool,
    history: Vec<HistoryPoint>,
}

impl OptimizeOutcome {
    pub fn design(&self) -> &FilterDesign {
        &self.design
    }

    /// Free-parameter values of the returned design, in declaration order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// True when the search ran out of budget before stalling.
    pub fn budget_exhausted(&self) -> bool {
        self.budget_exhausted
    }

    pub fn history(&self) -> &[HistoryPoint] {
        &self.history
    }

    /// History as CSV with an `evaluation,cost,best` header.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("evaluation,cost,best\n");
        for h in &self.history {
            out.push_str(&format!("{},{},{}\n", h.evaluation, h.cost, h.best));
        }
        out
    }
}

/// Tunes the free parameters of `template` against `spec` by bounded
/// multi-start simplex search over the hinge-squared goal cost.
/// Candidates whose evaluation fails score a large flat penalty; the
/// search is deterministic for a fixed seed, and the returned design
/// always satisfies the declared bounds.
pub fn optimize(
    template: &FilterDesign,
    free: &[FreeParam],
    spec: &TargetSpec,
    grid: &FrequencyGrid,
    options: &OptimizeOptions,
) -> Result<OptimizeOutcome, DesignError> {
    if free.is_empty() {
        return Err(DesignError::NoFreeParameters);
    }
    if grid.points().len() < MIN_SWEEP_POINTS {
        return Err(DesignError::GridTooCoarse { points: grid.points().len() });
    }

    let mut x0 = Vec::with_capacity(free.len());
    let mut bounds = Vec::with_capacity(free.len());
    let mut probe = template.variant().clone();
    for (index, fp) in free.iter().enumerate() {
        if !(fp.lo.is_finite() && fp.hi.is_finite() && fp.lo < fp.hi) {
            return Err(DesignError::InfeasibleBounds { index, lo: fp.lo, hi: fp.hi });
        }
        let target = resolve(&mut probe, fp.role).ok_or(
            DesignError::InvalidFreeParameter {
                index,
                reason: "role does not exist in this topology",
            },
        )?;
        let value = current_value(target, fp.field).ok_or(
            DesignError::InvalidFreeParameter { index, reason: "branch index out of range" },
        )?;
        x0.push(value.clamp(fp.lo, fp.hi));
        bounds.push((fp.lo, fp.hi));
    }

    let objective = |x: &[f64]| {
        let candidate = match apply_free(template, free, x) {
            Ok(d) => d,
            Err(_) => return FAILED_EVAL_COST,
        };
        match evaluate(&candidate, grid, options.policy, &spec.stopbands_hz) {
            Ok(ev) => target_cost(ev.metrics(), spec),
            Err(_) => FAILED_EVAL_COST,
        }
    };

    let nm = NelderMeadOptions {
        max_evals: options.budget,
        restarts: options.restarts,
        seed: options.seed,
        ..Default::default()
    };
    let result = optim::minimize(objective, &x0, &bounds, &nm)?;
    let design = apply_free(template, free, &result.x)?;
    let budget_exhausted = !result.converged && result.evaluations >= options.budget;
    Ok(OptimizeOutcome {
        design,
        values: result.x,
        cost: result.cost,
        evaluations: result.evaluations,
        budget_exhausted,
        history: result.history,
    })
}
