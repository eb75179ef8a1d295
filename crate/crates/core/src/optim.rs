//! Bounded derivative-free minimization: Nelder-Mead simplex search with
//! deterministic multi-start, shared by the fitting and design modules.

use std::fmt;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimError {
    /// The search space is empty.
    NoParameters,
    /// Start point and bounds disagree in length.
    DimensionMismatch { point: usize, bounds: usize },
    /// A bound pair is not a finite increasing interval.
    InvalidBound { index: usize, lo: f64, hi: f64 },
}

impl fmt::Display for OptimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimError::NoParameters => write!(f, "nothing to optimize"),
            OptimError::DimensionMismatch { point, bounds } => {
                write!(f, "start point has {point} coordinates but {bounds} bounds")
            }
            OptimError::InvalidBound { index, lo, hi } => {
                write!(f, "bound {index} is [{lo}, {hi}], not a finite increasing interval")
            }
        }
    }
}

impl std::error::Error for OptimError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Total objective-evaluation budget across all restarts.
    pub max_evals: usize,
    /// Number of simplex runs; the first starts at the given point.
    pub restarts: usize,
    pub seed: u64,
    /// First-simplex edge length as a fraction of each bound span.
    pub initial_step: f64,
    /// Perturbation radius of restart points, as a fraction of bound span.
    pub restart_spread: f64,
    /// Let every second restart sample the bounds uniformly instead of
    /// perturbing the start point, trading locality for basin coverage.
    pub uniform_restarts: bool,
    /// A restart counts as converged once the best cost improves by less
    /// than this over `stall_window` consecutive iterations.
    pub ftol: f64,
    pub stall_window: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_evals: 5000,
            restarts: 8,
            seed: 0,
            initial_step: 0.1,
            restart_spread: 0.25,
            uniform_restarts: true,
            ftol: 1e-12,
            stall_window: 50,
        }
    }
}

/// One objective evaluation in issue order, with the running best.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryPoint {
    pub evaluation: usize,
    pub cost: f64,
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub cost: f64,
    pub evaluations: usize,
    /// Simplex iterations of the restart that produced the winner.
    pub iterations: usize,
    /// Whether the winning restart stalled out rather than hitting budget.
    pub converged: bool,
    pub history: Vec<HistoryPoint>,
}

fn clamp(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

struct Tracker<'a, F> {
    f: F,
    used: usize,
    history: Vec<HistoryPoint>,
    best_cost: f64,
    best_x: Vec<f64>,
    bounds: &'a [(f64, f64)],
}

impl<F: FnMut(&[f64]) -> f64> Tracker<'_, F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        let raw = (self.f)(x);
        let cost = if raw.is_nan() { f64::INFINITY } else { raw };
        self.used += 1;
        if cost < self.best_cost {
            self.best_cost = cost;
            self.best_x = x.to_vec();
        }
        self.history.push(HistoryPoint {
            evaluation: self.used,
            cost,
            best: self.best_cost,
        });
        cost
    }
}

/// Minimizes `f` over the box `bounds`, starting at `x0`.
///
/// Every candidate is projected into the box before evaluation, so the
/// result never violates the bounds. Identical inputs and seed give an
/// identical result and history. NaN objective values are treated as +∞.
pub fn minimize<F>(
    mut f: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    opts: &NelderMeadOptions,
) -> Result<OptimResult, OptimError>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(OptimError::NoParameters);
    }
    if bounds.len() != n {
        return Err(OptimError::DimensionMismatch { point: n, bounds: bounds.len() });
    }
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(OptimError::InvalidBound { index: i, lo, hi });
        }
    }

    let mut start = x0.to_vec();
    clamp(&mut start, bounds);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let restarts = opts.restarts.max(1);

    let mut tracker = Tracker {
        f: &mut f,
        used: 0,
        history: Vec::new(),
        best_cost: f64::INFINITY,
        best_x: start.clone(),
        bounds,
    };
    let mut winner_iterations = 0;
    let mut winner_converged = false;

    for k in 0..restarts {
        if tracker.used >= opts.max_evals {
            break;
        }
        let cap = tracker.used + (opts.max_evals - tracker.used) / (restarts - k).max(1);
        let cap = cap.max(tracker.used + n + 1).min(opts.max_evals);

        let mut seed_point = start.clone();
        if k > 0 {
            for (i, v) in seed_point.iter_mut().enumerate() {
                let (lo, hi) = bounds[i];
                let u: f64 = rng.random();
                if opts.uniform_restarts && k % 2 == 0 {
                    *v = lo + u * (hi - lo);
                } else {
                    *v += opts.restart_spread * (hi - lo) * (2.0 * u - 1.0);
                }
            }
            clamp(&mut seed_point, bounds);
        }

        let before_best = tracker.best_cost;
        let (iterations, converged) = simplex_run(&mut tracker, &seed_point, cap, opts);
        if tracker.best_cost < before_best || k == 0 {
            winner_iterations = iterations;
            winner_converged = converged;
        }
    }

    Ok(OptimResult {
        x: tracker.best_x,
        cost: tracker.best_cost,
        evaluations: tracker.used,
        iterations: winner_iterations,
        converged: winner_converged,
        history: tracker.history,
    })
}

fn simplex_run<F: FnMut(&[f64]) -> f64>(
    t: &mut Tracker<'_, F>,
    seed: &[f64],
    eval_cap: usize,
    opts: &NelderMeadOptions,
) -> (usize, bool) {
    let n = seed.len();
    let bounds = t.bounds;

    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    xs.push(seed.to_vec());
    for i in 0..n {
        let (lo, hi) = bounds[i];
        let step = opts.initial_step * (hi - lo);
        let mut v = seed.to_vec();
        v[i] = if v[i] + step <= hi { v[i] + step } else { v[i] - step };
        xs.push(v);
    }
    let mut fs: Vec<f64> = Vec::with_capacity(n + 1);
    for v in &xs {
        if t.used >= eval_cap {
            return (0, false);
        }
        fs.push(t.eval(v));
    }

    let mut order: Vec<usize> = (0..=n).collect();
    let sort = |order: &mut Vec<usize>, fs: &[f64]| {
        order.sort_by(|&a, &b| fs[a].partial_cmp(&fs[b]).unwrap());
    };
    sort(&mut order, &fs);

    let mut iterations = 0usize;
    let mut stall: Vec<f64> = vec![fs[order[0]]];

    while t.used < eval_cap {
        iterations += 1;
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let mut centroid = vec![0.0; n];
        for &i in order.iter().take(n) {
            for (c, v) in centroid.iter_mut().zip(&xs[i]) {
                *c += v / n as f64;
            }
        }

        let project = |alpha: f64| {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&xs[worst])
                .map(|(c, w)| c + alpha * (c - w))
                .collect();
            clamp(&mut p, bounds);
            p
        };

        let xr = project(1.0);
        let fr = t.eval(&xr);
        if fr < fs[best] {
            if t.used < eval_cap {
                let xe = project(2.0);
                let fe = t.eval(&xe);
                if fe < fr {
                    xs[worst] = xe;
                    fs[worst] = fe;
                } else {
                    xs[worst] = xr;
                    fs[worst] = fr;
                }
            } else {
                xs[worst] = xr;
                fs[worst] = fr;
            }
        } else if fr < fs[second_worst] {
            xs[worst] = xr;
            fs[worst] = fr;
        } else if t.used < eval_cap {
            let xc = if fr < fs[worst] { project(0.5) } else { project(-0.5) };
            let fc = t.eval(&xc);
            if fc < fs[worst].min(fr) {
                xs[worst] = xc;
                fs[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                let xb = xs[best].clone();
                for &i in order.iter().skip(1) {
                    for (v, b) in xs[i].iter_mut().zip(&xb) {
                        *v = b + 0.5 * (*v - b);
                    }
                    if t.used >= eval_cap {
                        return (iterations, false);
                    }
                    fs[i] = t.eval(&xs[i]);
                }
            }
        } else {
            return (iterations, false);
        }

        sort(&mut order, &fs);
        stall.push(fs[order[0]]);
        if stall.len() > opts.stall_window {
            let ago = stall[stall.len() - 1 - opts.stall_window];
            if ago - fs[order[0]] < opts.ftol {
                return (iterations, true);
            }
        }
        let spread = xs
            .iter()
            .flat_map(|v| v.iter().zip(&xs[order[0]]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let scale = xs[order[0]].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if spread < 1e-14 * (1.0 + scale) {
            return (iterations, true);
        }
    }
    (iterations, false)
}
