//! Multi-branch mBVD resonator model: admittance evaluation, derived
//! quantities (series resonance, antiresonance, coupling, quality factor),
//! and exact admittance scaling.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

/// Magnitude cap applied when a division would overflow, so a lossless
/// branch driven exactly at series resonance reports a large finite
/// admittance instead of infinity.
const ADMITTANCE_CLAMP: f64 = 1e30;

/// Relative series-resonance separation below which two motional branches
/// are treated as the same resonance and rejected.
pub const MIN_RESONANCE_SEPARATION: f64 = 1e-3;

/// Relative tolerance of the antiresonance root refinement.
const ANTIRESONANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ResonatorError {
    /// A scalar parameter is out of range (wrong sign or non-finite).
    InvalidParameter { field: &'static str, value: f64 },
    /// A model needs at least one motional branch.
    EmptyModel,
    /// Two branches resonate within 0.1% of each other.
    DuplicateResonance { f_a_hz: f64, f_b_hz: f64 },
    /// Branch index past the end of the branch list.
    BranchOutOfRange { index: usize, len: usize },
    /// No Im{Y} sign change near the antiresonance seed; the resonance is
    /// too heavily damped to place a model-level antiresonance.
    RootNotBracketed { seed_hz: f64 },
    /// Mode label text did not parse as a family letter plus an order.
    InvalidModeLabel(String),
}

impl fmt::Display for ResonatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResonatorError::InvalidParameter { field, value } => {
                write!(f, "invalid resonator parameter {field} = {value}")
            }
            ResonatorError::EmptyModel => {
                write!(f, "resonator model needs at least one motional branch")
            }
            ResonatorError::DuplicateResonance { f_a_hz, f_b_hz } => {
                write!(
                    f,
                    "branch resonances {f_a_hz} Hz and {f_b_hz} Hz are closer than 0.1%"
                )
            }
            ResonatorError::BranchOutOfRange { index, len } => {
                write!(f, "branch index {index} out of range for {len} branches")
            }
            ResonatorError::RootNotBracketed { seed_hz } => {
                write!(f, "no antiresonance bracket within 10% of {seed_hz} Hz")
            }
            ResonatorError::InvalidModeLabel(text) => {
                write!(f, "cannot parse mode label {text:?}")
            }
        }
    }
}

impl std::error::Error for ResonatorError {}

/// Lamb-mode family of a motional branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeFamily {
    Symmetric,
    Antisymmetric,
}

/// Mode identity such as S2 or A1: family plus order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeLabel {
    family: ModeFamily,
    order: u32,
}

impl ModeLabel {
    pub fn new(family: ModeFamily, order: u32) -> Result<Self, ResonatorError> {
        if order == 0 {
            return Err(ResonatorError::InvalidParameter { field: "order", value: 0.0 });
        }
        Ok(ModeLabel { family, order })
    }

    pub fn family(&self) -> ModeFamily {
        self.family
    }

    pub fn order(&self) -> u32 {
        self.order
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match self.family {
            ModeFamily::Symmetric => 'S',
            ModeFamily::Antisymmetric => 'A',
        };
        write!(f, "{letter}{}", self.order)
    }
}

impl FromStr for ModeLabel {
    type Err = ResonatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ResonatorError::InvalidModeLabel(s.to_string());
        let mut chars = s.chars();
        let family = match chars.next() {
            Some('S') | Some('s') => ModeFamily::Symmetric,
            Some('A') | Some('a') => ModeFamily::Antisymmetric,
            _ => return Err(bad()),
        };
        let rest = chars.as_str();
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let order: u32 = rest.parse().map_err(|_| bad())?;
        ModeLabel::new(family, order).map_err(|_| bad())
    }
}

/// One motional branch: rm in series with lm and cm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionalBranch {
    rm: f64,
    lm: f64,
    cm: f64,
    mode: ModeLabel,
}

impl MotionalBranch {
    /// A branch with cm = 0 is inert (infinite series impedance); it is
    /// accepted here so null spurs can be expressed, but a model rejects it.
    pub fn new(rm: f64, lm: f64, cm: f64, mode: ModeLabel) -> Result<Self, ResonatorError> {
        let check = |field, value: f64, strict: bool| {
            if value.is_finite() && (value > 0.0 || (!strict && value == 0.0)) {
                Ok(())
            } else {
                Err(ResonatorError::InvalidParameter { field, value })
            }
        };
        check("rm", rm, false)?;
        check("lm", lm, true)?;
        check("cm", cm, false)?;
        Ok(MotionalBranch { rm, lm, cm, mode })
    }

    pub fn rm(&self) -> f64 {
        self.rm
    }

    pub fn lm(&self) -> f64 {
        self.lm
    }

    pub fn cm(&self) -> f64 {
        self.cm
    }

    pub fn mode(&self) -> ModeLabel {
        self.mode
    }

    /// Series-resonance frequency 1/(2π√(lm·cm)).
    pub fn series_resonance(&self) -> f64 {
        1.0 / (2.0 * PI * (self.lm * self.cm).sqrt())
    }

    /// Branch quality factor (1/rm)·√(lm/cm); infinite for a lossless branch.
    pub fn quality_factor(&self) -> f64 {
        (self.lm / self.cm).sqrt() / self.rm
    }
}

/// Electrode and layer geometry carried as metadata alongside a resonator.
/// It does not enter the circuit equations; its one quantitative use is
/// expressing admittance scaling as an electrode-count ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorGeometry {
    n_e: u32,
    l_e: f64,
    w_e: f64,
    w_g: f64,
    t1: f64,
    t2: f64,
}

impl ResonatorGeometry {
    pub fn new(
        n_e: u32,
        l_e: f64,
        w_e: f64,
        w_g: f64,
        t1: f64,
        t2: f64,
    ) -> Result<Self, ResonatorError> {
        if n_e == 0 {
            return Err(ResonatorError::InvalidParameter { field: "n_e", value: 0.0 });
        }
        for (field, value) in [("l_e", l_e), ("w_e", w_e), ("w_g", w_g), ("t1", t1), ("t2", t2)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ResonatorError::InvalidParameter { field, value });
            }
        }
        Ok(ResonatorGeometry { n_e, l_e, w_e, w_g, t1, t2 })
    }

    pub fn electrode_count(&self) -> u32 {
        self.n_e
    }

    pub fn electrode_length(&self) -> f64 {
        self.l_e
    }

    pub fn electrode_width(&self) -> f64 {
        self.w_e
    }

    pub fn gap_width(&self) -> f64 {
        self.w_g
    }

    pub fn pitch(&self) -> f64 {
        self.w_e + self.w_g
    }

    pub fn layer_thicknesses(&self) -> (f64, f64) {
        (self.t1, self.t2)
    }

    /// Admittance scale factor for changing the electrode count to `n_e`,
    /// suitable as the α argument of `MbvdParams::scale`.
    pub fn electrode_scale(&self, n_e: u32) -> f64 {
        f64::from(n_e) / f64::from(self.n_e)
    }
}

/// Full mBVD parameter set: series parasitics rs and ls feeding the
/// parallel combination of the static branch (r0, c0) with every motional
/// branch.
#[derive(Debug, Clone, PartialEq)]
pub struct MbvdParams {
    c0: f64,
    r0: f64,
    rs: f64,
    ls: f64,
    branches: Vec<MotionalBranch>,
    geometry: Option<ResonatorGeometry>,
}

impl MbvdParams {
    pub fn new(
        c0: f64,
        r0: f64,
        rs: f64,
        ls: f64,
        branches: Vec<MotionalBranch>,
    ) -> Result<Self, ResonatorError> {
        if !(c0.is_finite() && c0 > 0.0) {
            return Err(ResonatorError::InvalidParameter { field: "c0", value: c0 });
        }
        for (field, value) in [("r0", r0), ("rs", rs), ("ls", ls)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ResonatorError::InvalidParameter { field, value });
            }
        }
        if branches.is_empty() {
            return Err(ResonatorError::EmptyModel);
        }
        for b in &branches {
            if b.cm == 0.0 {
                return Err(ResonatorError::InvalidParameter { field: "cm", value: 0.0 });
            }
        }
        for i in 0..branches.len() {
            for j in i + 1..branches.len() {
                let f_a = branches[i].series_resonance();
                let f_b = branches[j].series_resonance();
                if !resonances_distinct(f_a, f_b) {
                    return Err(ResonatorError::DuplicateResonance { f_a_hz: f_a, f_b_hz: f_b });
                }
            }
        }
        Ok(MbvdParams { c0, r0, rs, ls, branches, geometry: None })
    }

    pub fn with_geometry(mut self, geometry: ResonatorGeometry) -> Self {
        self.geometry = Some(geometry);
        self
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn rs(&self) -> f64 {
        self.rs
    }

    pub fn ls(&self) -> f64 {
        self.ls
    }

    pub fn branches(&self) -> &[MotionalBranch] {
        &self.branches
    }

    pub fn geometry(&self) -> Option<&ResonatorGeometry> {
        self.geometry.as_ref()
    }

    /// Sum of the static and motional capacitances, the low-frequency
    /// capacitive limit of the model.
    pub fn total_capacitance(&self) -> f64 {
        self.c0 + self.branches.iter().map(|b| b.cm).sum::<f64>()
    }

    /// One-port admittance at `f_hz`.
    pub fn admittance(&self, f_hz: f64) -> Complex64 {
        assert!(f_hz > 0.0, "frequency must be positive");
        let w = 2.0 * PI * f_hz;
        let z_static = Complex64::new(self.r0, -1.0 / (w * self.c0));
        let mut y_core = inv_clamped(z_static);
        for b in &self.branches {
            // Branch admittance in rational form jωcm / (1 - ω²lmcm + jωrmcm);
            // finite at cm = 0 and clamped at an exact lossless resonance.
            let num = Complex64::new(0.0, w * b.cm);
            let den = Complex64::new(1.0 - w * w * b.lm * b.cm, w * b.rm * b.cm);
            y_core += div_clamped(num, den);
        }
        let z_series = Complex64::new(self.rs, w * self.ls);
        inv_clamped(z_series + inv_clamped(y_core))
    }

    /// Model-level antiresonance of one branch: the closed form
    /// f_s·√(1 + cm/c0) when the model is a single lossless branch,
    /// otherwise the zero of Im{Y} nearest that seed, refined to 1e-10
    /// relative by bisection inside a ±10% window.
    pub fn antiresonance(&self, index: usize) -> Result<f64, ResonatorError> {
        let len = self.branches.len();
        let b = self
            .branches
            .get(index)
            .ok_or(ResonatorError::BranchOutOfRange { index, len })?;
        let f_s = b.series_resonance();
        let seed = f_s * (1.0 + b.cm / self.c0).sqrt();
        let lossless = self.r0 == 0.0
            && self.rs == 0.0
            && self.ls == 0.0
            && self.branches.iter().all(|b| b.rm == 0.0);
        if lossless && len == 1 {
            return Ok(seed);
        }

        let lo = seed * 0.9;
        let hi = seed * 1.1;
        const SCAN: usize = 4000;
        let step = (hi - lo) / SCAN as f64;
        let poles: Vec<f64> = if lossless {
            self.branches.iter().map(|b| b.series_resonance()).collect()
        } else {
            Vec::new()
        };

        let im_at = |f: f64| self.admittance(f).im;
        let mut best: Option<(f64, f64)> = None;
        let mut prev_f = lo;
        let mut prev_im = im_at(lo);
        for k in 1..=SCAN {
            let f = lo + step * k as f64;
            let im = im_at(f);
            let crosses = prev_im == 0.0 || im == 0.0 || (prev_im < 0.0) != (im < 0.0);
            // In the lossless case Im{Y} also flips sign across each series
            // resonance pole; those intervals are not antiresonances.
            let at_pole = poles.iter().any(|&p| p > prev_f && p <= f);
            if crosses && !at_pole {
                let mid = 0.5 * (prev_f + f);
                if best.is_none_or(|(_, d)| (mid - seed).abs() < d) {
                    best = Some((prev_f, (mid - seed).abs()));
                }
            }
            prev_f = f;
            prev_im = im;
        }
        let (mut a, _) = best.ok_or(ResonatorError::RootNotBracketed { seed_hz: seed })?;
        let mut c = a + step;
        let mut im_a = im_at(a);
        while c - a > ANTIRESONANCE_TOL * seed {
            let m = 0.5 * (a + c);
            let im_m = im_at(m);
            if im_m == 0.0 {
                return Ok(m);
            }
            if (im_a < 0.0) != (im_m < 0.0) {
                c = m;
            } else {
                a = m;
                im_a = im_m;
            }
        }
        Ok(0.5 * (a + c))
    }

    /// Electromechanical coupling of one branch, k² = (f_p² − f_s²)/f_p².
    pub fn coupling(&self, index: usize) -> Result<f64, ResonatorError> {
        let f_p = self.antiresonance(index)?;
        let f_s = self.branches[index].series_resonance();
        Ok((f_p * f_p - f_s * f_s) / (f_p * f_p))
    }

    /// Parameters whose admittance is exactly α·Y(f) at every frequency.
    pub fn scale(&self, alpha: f64) -> MbvdParams {
        assert!(alpha > 0.0 && alpha.is_finite(), "scale factor must be positive");
        MbvdParams {
            c0: self.c0 * alpha,
            r0: self.r0 / alpha,
            rs: self.rs / alpha,
            ls: self.ls / alpha,
            branches: self
                .branches
                .iter()
                .map(|b| MotionalBranch {
                    rm: b.rm / alpha,
                    lm: b.lm / alpha,
                    cm: b.cm * alpha,
                    mode: b.mode,
                })
                .collect(),
            geometry: self.geometry,
        }
    }

    /// Appends a parasitic motional branch. A null spur (cm = 0) leaves the
    /// model unchanged; a spur resonating within 0.1% of an existing branch
    /// is rejected.
    pub fn add_spur(&self, spur: MotionalBranch) -> Result<MbvdParams, ResonatorError> {
        if spur.cm == 0.0 {
            return Ok(self.clone());
        }
        let f_new = spur.series_resonance();
        for b in &self.branches {
            let f_old = b.series_resonance();
            if !resonances_distinct(f_new, f_old) {
                return Err(ResonatorError::DuplicateResonance { f_a_hz: f_old, f_b_hz: f_new });
            }
        }
        let mut out = self.clone();
        out.branches.push(spur);
        Ok(out)
    }
}

fn resonances_distinct(f_a: f64, f_b: f64) -> bool {
    (f_a - f_b).abs() > MIN_RESONANCE_SEPARATION * f_a.max(f_b)
}

fn inv_clamped(z: Complex64) -> Complex64 {
    div_clamped(Complex64::new(1.0, 0.0), z)
}

fn div_clamped(num: Complex64, den: Complex64) -> Complex64 {
    let q = num / den;
    let n = q.norm();
    if n.is_finite() && n <= ADMITTANCE_CLAMP {
        return q;
    }
    if num.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(ADMITTANCE_CLAMP, num.arg() - den.arg())
}
