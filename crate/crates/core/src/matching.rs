//! Simultaneous conjugate matching of a two-port: the optimal reflection
//! coefficients and reference impedances, Rollett stability, maximum
//! available gain, and application of a match over a sweep.

use std::fmt;

use num_complex::Complex64;

use crate::network::{NetworkError, SweepResponse, TwoPort, TwoPortKind};

/// |C| below this is treated as an already-matched port, giving Γ = 0.
const MATCHED_C_EPS: f64 = 1e-15;

/// |1 − Γ| below this makes the matched reference impedance blow up.
const DENOMINATOR_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum MatchError {
    /// Input must be an S matrix.
    NotScattering { found: TwoPortKind },
    /// Both ports must share one real reference impedance.
    UnequalReferences { z1: Complex64, z2: Complex64 },
    /// The radicand B² − 4|C|² is negative: no simultaneous conjugate match
    /// exists.
    InfeasibleMatch { rollett_k: f64 },
    /// Γ lands on the unit circle at +1, so the matched reference
    /// degenerates to an open circuit; the boundary of feasibility.
    DegenerateDenominator { port: usize, rollett_k: f64 },
    /// A matched reference impedance came out without positive resistance.
    NonPositiveMatchResistance { port: usize, z: Complex64 },
    /// S12·S21 = 0: stability and simultaneous matching are undefined.
    UnilateralNetwork,
    Network(NetworkError),
}

impl fmt::Display for MatchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchError::NotScattering { found } => {
                write!(f, "conjugate match needs an S matrix, got {found}")
            }
            MatchError::UnequalReferences { z1, z2 } => {
                write!(f, "ports need one shared real reference, got {z1} and {z2}")
            }
            MatchError::InfeasibleMatch { rollett_k } => {
                write!(f, "no simultaneous conjugate match (K = {rollett_k})")
            }
            MatchError::DegenerateDenominator { port, rollett_k } => {
                write!(
                    f,
                    "match at port {port} degenerates to an open circuit (K = {rollett_k})"
                )
            }
            MatchError::NonPositiveMatchResistance { port, z } => {
                write!(f, "matched reference at port {port} is {z}, not a positive resistance")
            }
            MatchError::UnilateralNetwork => write!(f, "S12*S21 = 0, network is unilateral"),
            MatchError::Network(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for MatchError {}

impl From<NetworkError> for MatchError {
    fn from(e: NetworkError) -> Self {
        MatchError::Network(e)
    }
}

/// Simultaneous conjugate match of one S matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchSolution {
    f_design: f64,
    gamma_m: [Complex64; 2],
    z0_match: [Complex64; 2],
    b: [f64; 2],
    c: [Complex64; 2],
    delta: Complex64,
    rollett_k: f64,
    feasible: bool,
}

impl MatchSolution {
    pub fn f_design(&self) -> f64 {
        self.f_design
    }

    pub fn gamma_m(&self) -> [Complex64; 2] {
        self.gamma_m
    }

    pub fn z0_match(&self) -> [Complex64; 2] {
        self.z0_match
    }

    pub fn b(&self) -> [f64; 2] {
        self.b
    }

    pub fn c(&self) -> [Complex64; 2] {
        self.c
    }

    pub fn delta(&self) -> Complex64 {
        self.delta
    }

    pub fn rollett_k(&self) -> f64 {
        self.rollett_k
    }

    pub fn feasible(&self) -> bool {
        self.feasible
    }
}

fn common_real_reference(s: &TwoPort) -> Result<f64, MatchError> {
    if s.kind() != TwoPortKind::S {
        return Err(MatchError::NotScattering { found: s.kind() });
    }
    let refs = s.refs().expect("S matrices always carry references");
    if refs[0] != refs[1] || refs[0].im != 0.0 {
        return Err(MatchError::UnequalReferences { z1: refs[0], z2: refs[1] });
    }
    Ok(refs[0].re)
}

/// Rollett stability factor K = (1 − |S11|² − |S22|² + |Δ|²)/(2|S12·S21|).
pub fn rollett_k(s: &TwoPort) -> Result<f64, MatchError> {
    common_real_reference(s)?;
    let m = s.m();
    let delta = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let cross = (m[0][1] * m[1][0]).norm();
    if cross == 0.0 {
        return Err(MatchError::UnilateralNetwork);
    }
    Ok((1.0 - m[0][0].norm_sqr() - m[1][1].norm_sqr() + delta.norm_sqr()) / (2.0 * cross))
}

/// Maximum available gain |S21/S12|·(K − √(K² − 1)), defined for K ≥ 1.
pub fn maximum_available_gain(s: &TwoPort) -> Result<f64, MatchError> {
    let k = rollett_k(s)?;
    if k < 1.0 {
        return Err(MatchError::InfeasibleMatch { rollett_k: k });
    }
    let m = s.m();
    Ok((m[1][0] / m[0][1]).norm() * (k - (k * k - 1.0).sqrt()))
}

/// Simultaneous conjugate match of `s`, labeled with the design frequency.
///
/// Γ_m,i is the root of C_i Γ² − B_i Γ + C_i* = 0 with |Γ| ≤ 1, evaluated in
/// the cancellation-free form 2C_i*/(B_i ± √(B_i² − 4|C_i|²)); the matched
/// references are Z_{0,i} = Z0 (1 + Γ)/(1 − Γ).
pub fn conjugate_match(s: &TwoPort, f_design: f64) -> Result<MatchSolution, MatchError> {
    let z0 = common_real_reference(s)?;
    let m = s.m();
    let delta = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let k = rollett_k(s)?;

    let mut b = [0.0f64; 2];
    let mut c = [Complex64::new(0.0, 0.0); 2];
    let mut disc = [0.0f64; 2];
    for i in 0..2 {
        let j = 1 - i;
        b[i] = 1.0 + m[i][i].norm_sqr() - m[j][j].norm_sqr() - delta.norm_sqr();
        c[i] = m[i][i] - delta * m[j][j].conj();
        disc[i] = b[i] * b[i] - 4.0 * c[i].norm_sqr();
        if disc[i] < 0.0 {
            return Err(MatchError::InfeasibleMatch { rollett_k: k });
        }
    }

    let mut gamma_m = [Complex64::new(0.0, 0.0); 2];
    let mut z0_match = [Complex64::new(z0, 0.0); 2];
    for i in 0..2 {
        if c[i].norm() < MATCHED_C_EPS {
            continue;
        }
        let root = disc[i].sqrt();
        let denom = if b[i] >= 0.0 { b[i] + root } else { b[i] - root };
        gamma_m[i] = 2.0 * c[i].conj() / denom;
        let one = Complex64::new(1.0, 0.0);
        if (one - gamma_m[i]).norm() < DENOMINATOR_EPS {
            return Err(MatchError::DegenerateDenominator { port: i + 1, rollett_k: k });
        }
        z0_match[i] = z0 * (one + gamma_m[i]) / (one - gamma_m[i]);
    }

    Ok(MatchSolution {
        f_design,
        gamma_m,
        z0_match,
        b,
        c,
        delta,
        rollett_k: k,
        feasible: true,
    })
}

/// Grid index and frequency of maximum |S21|, the default match frequency.
pub fn peak_transmission(resp: &SweepResponse) -> Result<(usize, f64), MatchError> {
    let s = resp.to_s(default_refs(resp))?;
    let mut best = (0usize, f64::NEG_INFINITY);
    for (k, tp) in s.matrices().iter().enumerate() {
        let mag = tp.m()[1][0].norm();
        if mag > best.1 {
            best = (k, mag);
        }
    }
    Ok((best.0, s.grid().points()[best.0]))
}

fn default_refs(resp: &SweepResponse) -> [Complex64; 2] {
    resp.refs()
        .unwrap_or([Complex64::new(crate::network::Z0_DEFAULT, 0.0); 2])
}

/// Conjugate match of a sweep at its transmission peak.
pub fn match_at_peak(resp: &SweepResponse) -> Result<MatchSolution, MatchError> {
    let (index, f) = peak_transmission(resp)?;
    let s = resp.to_s(default_refs(resp))?;
    conjugate_match(&s.matrices()[index], f)
}

/// Renormalizes the sweep to the matched reference impedances.
pub fn apply_match(resp: &SweepResponse, sol: &MatchSolution) -> Result<SweepResponse, MatchError> {
    for (i, z) in sol.z0_match.iter().enumerate() {
        if !(z.re > 0.0) {
            return Err(MatchError::NonPositiveMatchResistance { port: i + 1, z: *z });
        }
    }
    let s = resp.to_s(default_refs(resp))?;
    Ok(s.renormalized(sol.z0_match)?)
}

/// One reactive element of a lossless L-section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reactive {
    SeriesInductor(f64),
    SeriesCapacitor(f64),
    ShuntInductor(f64),
    ShuntCapacitor(f64),
}

/// Lossless two-element section transforming a load to a real source
/// resistance, listed from the source side toward the load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LSection {
    pub source_side: Reactive,
    pub load_side: Reactive,
}

impl Reactive {
    /// ABCD matrix of the element at `f_hz`.
    pub fn two_port(&self, f_hz: f64) -> TwoPort {
        let w = 2.0 * std::f64::consts::PI * f_hz;
        match *self {
            Reactive::SeriesInductor(l) => {
                TwoPort::series_impedance(Complex64::new(0.0, w * l))
            }
            Reactive::SeriesCapacitor(cap) => {
                TwoPort::series_impedance(Complex64::new(0.0, -1.0 / (w * cap)))
            }
            Reactive::ShuntInductor(l) => {
                TwoPort::shunt_admittance(Complex64::new(0.0, -1.0 / (w * l)))
            }
            Reactive::ShuntCapacitor(cap) => {
                TwoPort::shunt_admittance(Complex64::new(0.0, w * cap))
            }
        }
    }
}

fn series_element(x: f64, w: f64) -> Reactive {
    if x >= 0.0 {
        Reactive::SeriesInductor(x / w)
    } else {
        Reactive::SeriesCapacitor(-1.0 / (w * x))
    }
}

fn shunt_element(b: f64, w: f64) -> Reactive {
    if b >= 0.0 {
        Reactive::ShuntCapacitor(b / w)
    } else {
        Reactive::ShuntInductor(-1.0 / (w * b))
    }
}

/// Lossless L-section presenting `r_source` at its input when terminated in
/// `z_load` at `f_hz`. Convenience only; matching in this crate is applied
/// as renormalization.
pub fn l_section(r_source: f64, z_load: Complex64, f_hz: f64) -> Result<LSection, MatchError> {
    if !(r_source > 0.0 && r_source.is_finite()) {
        return Err(MatchError::NonPositiveMatchResistance {
            port: 1,
            z: Complex64::new(r_source, 0.0),
        });
    }
    if !(z_load.re > 0.0) || !z_load.re.is_finite() || !z_load.im.is_finite() {
        return Err(MatchError::NonPositiveMatchResistance { port: 2, z: z_load });
    }
    let w = 2.0 * std::f64::consts::PI * f_hz;
    let (r, x) = (z_load.re, z_load.im);
    if r <= r_source {
        // Series reactance lifts the load onto the r_source conductance
        // circle, then a shunt element at the source cancels what remains.
        let xs = (r * (r_source - r)).sqrt() - x;
        let xt = x + xs;
        let y = 1.0 / Complex64::new(r, xt);
        Ok(LSection {
            source_side: shunt_element(-y.im, w),
            load_side: series_element(xs, w),
        })
    } else {
        // Shunt element at the load pulls it onto the r_source resistance
        // circle, then a series element cancels the leftover reactance.
        let g = r / (r * r + x * x);
        let bl = x / (r * r + x * x);
        let b_add = (g / r_source - g * g).sqrt() - (-bl);
        let y = Complex64::new(g, -bl + b_add);
        let z = 1.0 / y;
        Ok(LSection {
            source_side: series_element(-z.im, w),
            load_side: shunt_element(b_add, w),
        })
    }
}
