//! Multi-branch mBVD parameter extraction from one-port admittance data:
//! peak-based seeding followed by bounded derivative-free refinement.

use std::fmt;

use num_complex::Complex64;

use crate::network::FrequencyGrid;
use crate::optim::{self, NelderMeadOptions, OptimError};
use crate::resonator::{MbvdParams, ModeFamily, ModeLabel, MotionalBranch, ResonatorError};

/// Standing caveat attached to every fit report: series and static loss
/// values come out of curve fitting alone and need not correspond to
/// physically separable loss mechanisms.
pub const FIT_NOTE: &str = "series and static loss values are curve-fit \
constructs and need not map onto distinct physical loss mechanisms";

#[derive(Debug, Clone, PartialEq)]
pub enum ExtractionError {
    LengthMismatch { points: usize, samples: usize },
    NonFiniteSample { index: usize },
    /// S11 = −1 has no admittance.
    SingularReflection { index: usize },
    InvalidReference { z0: f64 },
    InvalidBranchCount { n: usize },
    InsufficientPeaks { found: usize, needed: usize },
    /// The fitted model reflects more power than it accepts.
    PassivityViolation { margin: f64 },
    InvalidOption { name: &'static str, value: f64 },
    Resonator(ResonatorError),
    Optim(OptimError),
}

impl fmt::Display for ExtractionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractionError::LengthMismatch { points, samples } => {
                write!(f, "{points} grid points but {samples} admittance samples")
            }
            ExtractionError::NonFiniteSample { index } => {
                write!(f, "admittance sample {index} is not finite")
            }
            ExtractionError::SingularReflection { index } => {
                write!(f, "sample {index} has S11 = -1, admittance undefined")
            }
            ExtractionError::InvalidReference { z0 } => {
                write!(f, "reference resistance {z0} must be positive and finite")
            }
            ExtractionError::InvalidBranchCount { n } => {
                write!(f, "cannot seed {n} motional branches")
            }
            ExtractionError::InsufficientPeaks { found, needed } => {
                write!(f, "found {found} usable admittance peaks, need {needed}")
            }
            ExtractionError::PassivityViolation { margin } => {
                write!(f, "fitted model is non-passive (margin {margin:e})")
            }
            ExtractionError::InvalidOption { name, value } => {
                write!(f, "fit option {name} = {value} is out of range")
            }
            ExtractionError::Resonator(e) => write!(f, "{e}"),
            ExtractionError::Optim(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ExtractionError {}

impl From<ResonatorError> for ExtractionError {
    fn from(e: ResonatorError) -> Self {
        ExtractionError::Resonator(e)
    }
}

impl From<OptimError> for ExtractionError {
    fn from(e: OptimError) -> Self {
        ExtractionError::Optim(e)
    }
}

/// One-port admittance samples on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredOnePort {
    grid: FrequencyGrid,
    admittance: Vec<Complex64>,
    source: String,
}

impl MeasuredOnePort {
    pub fn new(
        grid: FrequencyGrid,
        admittance: Vec<Complex64>,
        source: impl Into<String>,
    ) -> Result<Self, ExtractionError> {
        if grid.points().len() != admittance.len() {
            return Err(ExtractionError::LengthMismatch {
                points: grid.points().len(),
                samples: admittance.len(),
            });
        }
        for (index, y) in admittance.iter().enumerate() {
            if !(y.re.is_finite() && y.im.is_finite()) {
                return Err(ExtractionError::NonFiniteSample { index });
            }
        }
        Ok(MeasuredOnePort { grid, admittance, source: source.into() })
    }

    /// Converts reflection data to admittance, Y = (1 − S11)/(Z0·(1 + S11)).
    pub fn from_reflection(
        grid: FrequencyGrid,
        s11: &[Complex64],
        z0: f64,
        source: impl Into<String>,
    ) -> Result<Self, ExtractionError> {
        if !(z0 > 0.0 && z0.is_finite()) {
            return Err(ExtractionError::InvalidReference { z0 });
        }
        let one = Complex64::new(1.0, 0.0);
        let mut admittance = Vec::with_capacity(s11.len());
        for (index, s) in s11.iter().enumerate() {
            let den = one + s;
            if den.norm() == 0.0 {
                return Err(ExtractionError::SingularReflection { index });
            }
            admittance.push((one - s) / (z0 * den));
        }
        MeasuredOnePort::new(grid, admittance, source)
    }

    /// Synthesizes samples from a model, tagging the source accordingly.
    pub fn from_model(params: &MbvdParams, grid: FrequencyGrid, source: impl Into<String>) -> Self {
        let admittance = grid.points().iter().map(|&f| params.admittance(f)).collect();
        MeasuredOnePort { grid, admittance, source: source.into() }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn admittance(&self) -> &[Complex64] {
        &self.admittance
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// Outcome of [`fit_mbvd`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    params: MbvdParams,
    residual_rms: f64,
    branch_f_shifts: Vec<f64>,
    converged: bool,
    iterations: usize,
    evaluations: usize,
}

impl FitResult {
    pub fn params(&self) -> &MbvdParams {
        &self.params
    }

    /// RMS of the weighted log-magnitude and phase residual components.
    pub fn residual_rms(&self) -> f64 {
        self.residual_rms
    }

    /// Relative shift of each branch series resonance away from its seed.
    pub fn branch_f_shifts(&self) -> &[f64] {
        &self.branch_f_shifts
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn note(&self) -> &'static str {
        FIT_NOTE
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Evaluation budget per restart.
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Capacitances may move this factor away from their seeds (both ways).
    pub c_bound_factor: f64,
    /// Weight the magnitude residual 10x within ±2% of each seeded f_s.
    pub peak_upweight: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 2000,
            restarts: 8,
            seed: 0,
            c_bound_factor: 100.0,
            peak_upweight: false,
        }
    }
}

fn local_maxima(v: &[f64]) -> Vec<usize> {
    let n = v.len();
    let mut out = Vec::new();
    let mut k = 1;
    while k + 1 < n {
        if v[k] > v[k - 1] {
            let mut j = k;
            while j + 1 < n && v[j + 1] == v[k] {
                j += 1;
            }
            if j + 1 < n && v[j + 1] < v[k] {
                out.push(k);
            }
            k = j + 1;
        } else {
            k += 1;
        }
    }
    out
}

/// Sub-bin peak position from a parabola through the three points around
/// `p` in log magnitude. Falls back to the grid point on flat or edge data.
fn refine_peak(f: &[f64], logm: &[f64], p: usize) -> f64 {
    if p == 0 || p + 1 >= logm.len() {
        return f[p];
    }
    let (a, b, c) = (logm[p - 1], logm[p], logm[p + 1]);
    let den = a - 2.0 * b + c;
    if !(den < 0.0) {
        return f[p];
    }
    let delta = (0.5 * (a - c) / den).clamp(-1.0, 1.0);
    f[p] + delta * 0.5 * (f[p + 1] - f[p - 1])
}

/// Height of `p` above the higher of its two key saddles.
fn prominence(v: &[f64], p: usize) -> f64 {
    let h = v[p];
    let mut left_min = h;
    let mut i = p;
    while i > 0 {
        i -= 1;
        if v[i] > h {
            break;
        }
        left_min = left_min.min(v[i]);
    }
    let mut right_min = h;
    let mut i = p;
    while i + 1 < v.len() {
        i += 1;
        if v[i] > h {
            break;
        }
        right_min = right_min.min(v[i]);
    }
    h - left_min.max(right_min)
}

/// Seeds an `n_branches`-branch model from the data: branch resonances at
/// the highest-prominence |Y| maxima, the static capacitance from a
/// least-squares slope of Im{Y} below the first resonance, and motional
/// capacitances from the antiresonance notch above each peak (falling back
/// to an even split of a fifth of the total when no notch is visible).
/// Losses seed at Rm = 1/|Y|_peak with zero parasitics; branch labels are
/// placeholders S1, S2, … in ascending frequency.
pub fn initial_guess(
    m: &MeasuredOnePort,
    n_branches: usize,
) -> Result<MbvdParams, ExtractionError> {
    if n_branches == 0 {
        return Err(ExtractionError::InvalidBranchCount { n: 0 });
    }
    let f = m.grid.points();
    let mag: Vec<f64> = m.admittance.iter().map(|y| y.norm()).collect();
    let logm: Vec<f64> = mag.iter().map(|v| v.max(1e-300).log10()).collect();

    let mut ranked: Vec<(usize, f64)> = local_maxima(&logm)
        .into_iter()
        .map(|p| (p, prominence(&logm, p)))
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));

    let mut peaks: Vec<usize> = Vec::new();
    for (p, _) in ranked {
        if peaks.iter().all(|&q| (f[p] - f[q]).abs() > 5e-3 * f[p].max(f[q])) {
            peaks.push(p);
        }
        if peaks.len() == n_branches {
            break;
        }
    }
    if peaks.len() < n_branches {
        return Err(ExtractionError::InsufficientPeaks {
            found: peaks.len(),
            needed: n_branches,
        });
    }
    peaks.sort_unstable();

    // Low-frequency slope of Im{Y} gives the total capacitance.
    let f_limit = (10.0 * f[0]).min(0.9 * f[peaks[0]]);
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for k in 0..f.len() {
        if f[k] > f_limit {
            break;
        }
        let w = 2.0 * std::f64::consts::PI * f[k];
        num += w * m.admittance[k].im;
        den += w * w;
    }
    let w0 = 2.0 * std::f64::consts::PI * f[0];
    let mut c_total = if den > 0.0 { num / den } else { m.admittance[0].im / w0 };
    if !(c_total > 0.0) || !c_total.is_finite() {
        c_total = mag[0] / w0;
    }

    // Capacitance ratio of each branch from its antiresonance notch.
    let mut rho = vec![0.2 / n_branches as f64; n_branches];
    for (i, &p) in peaks.iter().enumerate() {
        let window_end = if i + 1 < peaks.len() { peaks[i + 1] } else { mag.len() };
        if window_end <= p + 2 {
            continue;
        }
        let mut q = p + 1;
        for k in p + 1..window_end {
            if mag[k] < mag[q] {
                q = k;
            }
        }
        if q + 1 < window_end && f[q] > f[p] {
            let r = (f[q] / f[p]).powi(2) - 1.0;
            if (1e-4..2.0).contains(&r) {
                rho[i] = r;
            }
        }
    }

    let sum_rho: f64 = rho.iter().sum();
    let c0 = (c_total / (1.0 + sum_rho)).max(1e-21);
    let mut branches = Vec::with_capacity(n_branches);
    for (i, &p) in peaks.iter().enumerate() {
        let fs = refine_peak(f, &logm, p);
        let cm = rho[i] * c0;
        let w_s = 2.0 * std::f64::consts::PI * fs;
        let lm = 1.0 / (w_s * w_s * cm);
        let rm = 1.0 / mag[p];
        let label = ModeLabel::new(ModeFamily::Symmetric, (i + 1) as u32)?;
        branches.push(MotionalBranch::new(rm, lm, cm, label)?);
    }
    MbvdParams::new(c0, 0.0, 0.0, 0.0, branches).map_err(Into::into)
}

/// Fit coordinates: [ln c0, r0, rs, ls, (ln f_s, ln cm, ln q) per branch].
/// Resonance and quality factor replace lm and rm so that each coordinate
/// moves one physically meaningful scale.
fn encode(p: &MbvdParams) -> Vec<f64> {
    let mut x = vec![p.c0().ln(), p.r0(), p.rs(), p.ls()];
    for b in p.branches() {
        x.push(b.series_resonance().ln());
        x.push(b.cm().ln());
        x.push(b.quality_factor().ln());
    }
    x
}

fn decode(x: &[f64], labels: &[ModeLabel]) -> Result<MbvdParams, ResonatorError> {
    let c0 = x[0].exp();
    let (r0, rs, ls) = (x[1], x[2], x[3]);
    let mut branches = Vec::with_capacity(labels.len());
    for (i, &label) in labels.iter().enumerate() {
        let fs = x[4 + 3 * i].exp();
        let cm = x[5 + 3 * i].exp();
        let q = x[6 + 3 * i].exp();
        let w_s = 2.0 * std::f64::consts::PI * fs;
        let lm = 1.0 / (w_s * w_s * cm);
        let rm = (lm / cm).sqrt() / q;
        branches.push(MotionalBranch::new(rm, lm, cm, label)?);
    }
    MbvdParams::new(c0, r0, rs, ls, branches)
}

fn wrap_angle(d: f64) -> f64 {
    let mut d = d % (2.0 * std::f64::consts::PI);
    if d > std::f64::consts::PI {
        d -= 2.0 * std::f64::consts::PI;
    } else if d < -std::f64::consts::PI {
        d += 2.0 * std::f64::consts::PI;
    }
    d
}

/// Smallest value of 1 − |Γ|² over the grid against a 50 Ω reference; a
/// passive one-port keeps this nonnegative.
pub fn one_port_passivity_margin(params: &MbvdParams, grid: &FrequencyGrid) -> f64 {
    let y0 = Complex64::new(1.0 / 50.0, 0.0);
    grid.points()
        .iter()
        .map(|&f| {
            let y = params.admittance(f);
            let gamma = (y0 - y) / (y0 + y);
            1.0 - gamma.norm_sqr()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Refines `init` against the data by minimizing
/// Σ_f w(f)·(ln|Y_model| − ln|Y_data|)² + (arg Y_model − arg Y_data)²
/// with a bounded multi-start simplex search. Branch resonances may move
/// ±5% from their seeds, capacitances by `c_bound_factor` either way, and
/// the parasitics between zero and data-derived caps. Returns best-of-
/// restarts; a budget-limited run comes back with `converged = false`
/// rather than an error.
pub fn fit_mbvd(
    m: &MeasuredOnePort,
    init: &MbvdParams,
    options: &FitOptions,
) -> Result<FitResult, ExtractionError> {
    if options.max_iterations == 0 {
        return Err(ExtractionError::InvalidOption { name: "max_iterations", value: 0.0 });
    }
    if options.restarts == 0 {
        return Err(ExtractionError::InvalidOption { name: "restarts", value: 0.0 });
    }
    if !(options.c_bound_factor > 1.0) || !options.c_bound_factor.is_finite() {
        return Err(ExtractionError::InvalidOption {
            name: "c_bound_factor",
            value: options.c_bound_factor,
        });
    }

    let labels: Vec<ModeLabel> = init.branches().iter().map(|b| b.mode()).collect();
    let x0 = encode(init);

    let mag_max = m.admittance.iter().map(|y| y.norm()).fold(0.0f64, f64::max);
    let r_cap = (10.0 / mag_max).max(1e-12);
    let lm_min = init
        .branches()
        .iter()
        .map(|b| b.lm())
        .fold(f64::INFINITY, f64::min);
    let ls_cap = 0.2 * lm_min;
    let ln_factor = options.c_bound_factor.ln();
    let ln_fs_window = 1.05f64.ln();

    let mut bounds = vec![
        (x0[0] - ln_factor, x0[0] + ln_factor),
        (0.0, r_cap),
        (0.0, r_cap),
        (0.0, ls_cap),
    ];
    for i in 0..labels.len() {
        let ln_fs = x0[4 + 3 * i];
        let ln_cm = x0[5 + 3 * i];
        bounds.push((ln_fs - ln_fs_window, ln_fs + ln_fs_window));
        bounds.push((ln_cm - ln_factor, ln_cm + ln_factor));
        bounds.push((0.5f64.ln(), 1e7f64.ln()));
    }

    let seeds_fs: Vec<f64> = init.branches().iter().map(|b| b.series_resonance()).collect();
    let f = m.grid.points();
    let weights: Vec<f64> = f
        .iter()
        .map(|&fk| {
            if options.peak_upweight
                && seeds_fs.iter().any(|&fs| (fk / fs - 1.0).abs() <= 0.02)
            {
                10.0
            } else {
                1.0
            }
        })
        .collect();
    let data: Vec<(f64, f64)> = m
        .admittance
        .iter()
        .map(|y| (y.norm().max(1e-300).ln(), y.arg()))
        .collect();

    let objective = |x: &[f64]| {
        let params = match decode(x, &labels) {
            Ok(p) => p,
            Err(_) => return f64::INFINITY,
        };
        let mut cost = 0.0;
        for (k, &fk) in f.iter().enumerate() {
            let y = params.admittance(fk);
            let dm = y.norm().max(1e-300).ln() - data[k].0;
            let dp = wrap_angle(y.arg() - data[k].1);
            cost += weights[k] * dm * dm + dp * dp;
        }
        cost
    };

    let nm = NelderMeadOptions {
        max_evals: options.max_iterations * options.restarts,
        restarts: options.restarts,
        seed: options.seed,
        uniform_restarts: false,
        restart_spread: 0.1,
        ..Default::default()
    };
    let result = optim::minimize(objective, &x0, &bounds, &nm)?;

    let params = decode(&result.x, &labels)?;
    let margin = one_port_passivity_margin(&params, &m.grid);
    if margin < -1e-9 {
        return Err(ExtractionError::PassivityViolation { margin });
    }

    let branch_f_shifts = params
        .branches()
        .iter()
        .zip(&seeds_fs)
        .map(|(b, &fs)| (b.series_resonance() - fs).abs() / fs)
        .collect();
    let residual_rms = (result.cost / (2.0 * f.len() as f64)).sqrt();
    Ok(FitResult {
        params,
        residual_rms,
        branch_f_shifts,
        converged: result.converged,
        iterations: result.iterations,
        evaluations: result.evaluations,
    })
}
