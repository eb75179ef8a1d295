//! Two-port network algebra over a frequency sweep.
//!
//! All matrices are dense 2x2 complex. S-parameters follow the power-wave
//! convention of Kurokawa, so reference impedances may be complex (Re > 0)
//! and, at a conjugately matched port, the reflection coefficient is exactly
//! zero. Conversions between representations are direct closed forms; no
//! chain through an intermediate representation is taken, which keeps
//! networks such as an ideal through line (no Z or Y description)
//! convertible.

use num_complex::Complex64;
use std::fmt;

/// Relative threshold below which a conversion denominator counts as singular.
const SINGULAR_EPS: f64 = 1e-15;

/// Default reference impedance used when converting into S without an
/// explicit reference.
pub const Z0_DEFAULT: f64 = 50.0;

pub type Mat2 = [[Complex64; 2]; 2];

/// Errors raised by grid construction, conversions and sweep assembly.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkError {
    /// A matrix entry or reference impedance is NaN or infinite.
    NonFiniteEntry,
    /// S-parameter reference impedances must have strictly positive real part.
    NonPositiveReference,
    /// The conversion denominator vanished relative to the matrix scale.
    SingularConversion { from: TwoPortKind, to: TwoPortKind },
    /// An operation received a matrix kind it cannot act on.
    KindMismatch { expected: TwoPortKind, found: TwoPortKind },
    /// Frequency grid violates monotonicity, positivity or length rules.
    GridInvalid(&'static str),
    /// Sweep assembly rules violated (length, uniform kind, uniform refs).
    SweepInvalid(&'static str),
}

impl fmt::Display for NetworkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkError::NonFiniteEntry => write!(f, "matrix entry is not finite"),
            NetworkError::NonPositiveReference => {
                write!(f, "reference impedance must have Re > 0")
            }
            NetworkError::SingularConversion { from, to } => {
                write!(f, "singular conversion {from} -> {to}")
            }
            NetworkError::KindMismatch { expected, found } => {
                write!(f, "expected {expected} matrix, found {found}")
            }
            NetworkError::GridInvalid(why) => write!(f, "invalid frequency grid: {why}"),
            NetworkError::SweepInvalid(why) => write!(f, "invalid sweep: {why}"),
        }
    }
}

impl std::error::Error for NetworkError {}

/// Spacing marker carried by a frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpacing {
    Linear,
    Logarithmic,
    /// Measured or externally supplied grids with no spacing law.
    Irregular,
}

/// Strictly increasing, positive frequency axis in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    points: Vec<f64>,
    spacing: GridSpacing,
}

impl FrequencyGrid {
    /// Uniform grid of `n` points on `[start, stop]`.
    pub fn linear(start_hz: f64, stop_hz: f64, n: usize) -> Result<Self, NetworkError> {
        if n < 2 {
            return Err(NetworkError::GridInvalid("need at least 2 points"));
        }
        let step = (stop_hz - start_hz) / (n - 1) as f64;
        let points = (0..n).map(|k| start_hz + step * k as f64).collect();
        Self::from_points(points, GridSpacing::Linear)
    }

    /// Log-spaced grid of `n` points on `[start, stop]`.
    pub fn logarithmic(start_hz: f64, stop_hz: f64, n: usize) -> Result<Self, NetworkError> {
        if n < 2 {
            return Err(NetworkError::GridInvalid("need at least 2 points"));
        }
        if start_hz <= 0.0 {
            return Err(NetworkError::GridInvalid("frequencies must be positive"));
        }
        let (la, lb) = (start_hz.ln(), stop_hz.ln());
        let step = (lb - la) / (n - 1) as f64;
        let points = (0..n).map(|k| (la + step * k as f64).exp()).collect();
        Self::from_points(points, GridSpacing::Logarithmic)
    }

    /// Wraps an explicit list of points, validating the spacing claim.
    pub fn from_points(points: Vec<f64>, spacing: GridSpacing) -> Result<Self, NetworkError> {
        if points.len() < 2 {
            return Err(NetworkError::GridInvalid("need at least 2 points"));
        }
        if points.iter().any(|f| !f.is_finite() || *f <= 0.0) {
            return Err(NetworkError::GridInvalid("frequencies must be positive"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NetworkError::GridInvalid("frequencies must strictly increase"));
        }
        let consistent = match spacing {
            GridSpacing::Linear => {
                let step = (points[points.len() - 1] - points[0]) / (points.len() - 1) as f64;
                points.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs())
            }
            GridSpacing::Logarithmic => {
                let step =
                    (points[points.len() - 1] / points[0]).ln() / (points.len() - 1) as f64;
                points
                    .windows(2)
                    .all(|w| ((w[1] / w[0]).ln() - step).abs() <= 1e-9 * step.abs())
            }
            GridSpacing::Irregular => true,
        };
        if !consistent {
            return Err(NetworkError::GridInvalid("points do not match spacing marker"));
        }
        Ok(FrequencyGrid { points, spacing })
    }

    #[must_use]
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    #[must_use]
    pub fn spacing(&self) -> GridSpacing {
        self.spacing
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Representation tag of a [`TwoPort`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoPortKind {
    S,
    Y,
    Z,
    Abcd,
}

impl fmt::Display for TwoPortKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TwoPortKind::S => "S",
            TwoPortKind::Y => "Y",
            TwoPortKind::Z => "Z",
            TwoPortKind::Abcd => "ABCD",
        };
        write!(f, "{s}")
    }
}

/// One 2x2 network matrix at a single frequency.
///
/// S matrices carry their per-port reference impedances; the other kinds do
/// not need any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPort {
    kind: TwoPortKind,
    m: Mat2,
    refs: Option<[Complex64; 2]>,
}

fn check_finite(m: &Mat2) -> Result<(), NetworkError> {
    for row in m {
        for e in row {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(NetworkError::NonFiniteEntry);
            }
        }
    }
    Ok(())
}

fn check_ref(z: Complex64) -> Result<(), NetworkError> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(NetworkError::NonFiniteEntry);
    }
    if z.re <= 0.0 {
        return Err(NetworkError::NonPositiveReference);
    }
    Ok(())
}

impl TwoPort {
    /// S matrix with per-port reference impedances (Re > 0).
    pub fn s(m: Mat2, refs: [Complex64; 2]) -> Result<Self, NetworkError> {
        check_finite(&m)?;
        check_ref(refs[0])?;
        check_ref(refs[1])?;
        Ok(TwoPort { kind: TwoPortKind::S, m, refs: Some(refs) })
    }

    /// S matrix referenced to the same real impedance at both ports.
    pub fn s_real(m: Mat2, z0: f64) -> Result<Self, NetworkError> {
        let z = Complex64::new(z0, 0.0);
        Self::s(m, [z, z])
    }

    pub fn y(m: Mat2) -> Result<Self, NetworkError> {
        check_finite(&m)?;
        Ok(TwoPort { kind: TwoPortKind::Y, m, refs: None })
    }

    pub fn z(m: Mat2) -> Result<Self, NetworkError> {
        check_finite(&m)?;
        Ok(TwoPort { kind: TwoPortKind::Z, m, refs: None })
    }

    pub fn abcd(m: Mat2) -> Result<Self, NetworkError> {
        check_finite(&m)?;
        Ok(TwoPort { kind: TwoPortKind::Abcd, m, refs: None })
    }

    /// ABCD identity (ideal through connection).
    #[must_use]
    pub fn identity_abcd() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        TwoPort { kind: TwoPortKind::Abcd, m: [[one, zero], [zero, one]], refs: None }
    }

    /// ABCD of a series impedance `z`.
    #[must_use]
    pub fn series_impedance(z: Complex64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        TwoPort { kind: TwoPortKind::Abcd, m: [[one, z], [zero, one]], refs: None }
    }

    /// ABCD of a shunt admittance `y`.
    #[must_use]
    pub fn shunt_admittance(y: Complex64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        TwoPort { kind: TwoPortKind::Abcd, m: [[one, zero], [y, one]], refs: None }
    }

    #[must_use]
    pub fn kind(&self) -> TwoPortKind {
        self.kind
    }

    #[must_use]
    pub fn m(&self) -> &Mat2 {
        &self.m
    }

    /// Reference impedances; `None` unless this is an S matrix.
    #[must_use]
    pub fn refs(&self) -> Option<[Complex64; 2]> {
        self.refs
    }

    /// Converts into `target`. Converting a non-S matrix to S uses
    /// [`Z0_DEFAULT`] at both ports; use [`TwoPort::to_s`] for explicit
    /// references.
    pub fn convert(&self, target: TwoPortKind) -> Result<TwoPort, NetworkError> {
        if target == TwoPortKind::S {
            return match self.refs {
                Some(r) => self.to_s(r),
                None => self.to_s([Complex64::new(Z0_DEFAULT, 0.0); 2]),
            };
        }
        if self.kind == target {
            return Ok(*self);
        }
        let m = match (self.kind, target) {
            (TwoPortKind::Y, TwoPortKind::Z) | (TwoPortKind::Z, TwoPortKind::Y) => {
                inv2(&self.m).ok_or(self.singular(target))?
            }
            (TwoPortKind::Z, TwoPortKind::Abcd) => z_to_abcd(&self.m).ok_or(self.singular(target))?,
            (TwoPortKind::Abcd, TwoPortKind::Z) => abcd_to_z(&self.m).ok_or(self.singular(target))?,
            (TwoPortKind::Y, TwoPortKind::Abcd) => y_to_abcd(&self.m).ok_or(self.singular(target))?,
            (TwoPortKind::Abcd, TwoPortKind::Y) => abcd_to_y(&self.m).ok_or(self.singular(target))?,
            (TwoPortKind::S, _) => {
                let refs = self.refs.expect("S matrix always carries refs");
                match target {
                    TwoPortKind::Z => s_to_z(&self.m, refs).ok_or(self.singular(target))?,
                    TwoPortKind::Y => s_to_y(&self.m, refs).ok_or(self.singular(target))?,
                    TwoPortKind::Abcd => s_to_abcd(&self.m, refs).ok_or(self.singular(target))?,
                    TwoPortKind::S => unreachable!(),
                }
            }
            _ => unreachable!("all kind pairs covered"),
        };
        match target {
            TwoPortKind::Y => TwoPort::y(m),
            TwoPortKind::Z => TwoPort::z(m),
            TwoPortKind::Abcd => TwoPort::abcd(m),
            TwoPortKind::S => unreachable!(),
        }
    }

    /// Converts into S with explicit reference impedances.
    pub fn to_s(&self, refs: [Complex64; 2]) -> Result<TwoPort, NetworkError> {
        check_ref(refs[0])?;
        check_ref(refs[1])?;
        let m = match self.kind {
            TwoPortKind::S => {
                let cur = self.refs.expect("S matrix always carries refs");
                renorm_s(&self.m, cur, refs).ok_or(self.singular(TwoPortKind::S))?
            }
            TwoPortKind::Z => z_to_s(&self.m, refs),
            TwoPortKind::Y => y_to_s(&self.m, refs).ok_or(self.singular(TwoPortKind::S))?,
            TwoPortKind::Abcd => abcd_to_s(&self.m, refs).ok_or(self.singular(TwoPortKind::S))?,
        };
        TwoPort::s(m, refs)
    }

    /// ABCD chain product `self * rhs` (self at port 1 side).
    pub fn cascade(&self, rhs: &TwoPort) -> Result<TwoPort, NetworkError> {
        for p in [self, rhs] {
            if p.kind != TwoPortKind::Abcd {
                return Err(NetworkError::KindMismatch {
                    expected: TwoPortKind::Abcd,
                    found: p.kind,
                });
            }
        }
        TwoPort::abcd(mul2(&self.m, &rhs.m))
    }

    /// Smallest eigenvalue of `I - S^H S`; negative means non-passive.
    pub fn passivity_eigenvalue(&self) -> Result<f64, NetworkError> {
        if self.kind != TwoPortKind::S {
            return Err(NetworkError::KindMismatch {
                expected: TwoPortKind::S,
                found: self.kind,
            });
        }
        let s = &self.m;
        // H = I - S^H S is Hermitian; closed-form smallest eigenvalue.
        let mut h = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    acc += s[k][i].conj() * s[k][j];
                }
                h[i][j] = -acc;
            }
            h[i][i] += 1.0;
        }
        let tr = h[0][0].re + h[1][1].re;
        let det = h[0][0].re * h[1][1].re - h[0][1].norm_sqr();
        let disc = (tr * tr - 4.0 * det).max(0.0);
        Ok(0.5 * (tr - disc.sqrt()))
    }

    fn singular(&self, to: TwoPortKind) -> NetworkError {
        NetworkError::SingularConversion { from: self.kind, to }
    }
}

fn det2(m: &Mat2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn norm_inf(m: &Mat2) -> f64 {
    let mut n = 0.0f64;
    for row in m {
        for e in row {
            n = n.max(e.norm());
        }
    }
    n
}

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// 2x2 inverse; `None` when the determinant is negligible against the scale.
fn inv2(m: &Mat2) -> Option<Mat2> {
    let d = det2(m);
    let n = norm_inf(m);
    if d.norm() < SINGULAR_EPS * n * n || d.norm() == 0.0 {
        return None;
    }
    Some([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
}

fn z_to_abcd(z: &Mat2) -> Option<Mat2> {
    let z21 = z[1][0];
    if z21.norm() < SINGULAR_EPS * norm_inf(z) || z21.norm() == 0.0 {
        return None;
    }
    let d = det2(z);
    Some([[z[0][0] / z21, d / z21], [Complex64::new(1.0, 0.0) / z21, z[1][1] / z21]])
}

fn abcd_to_z(m: &Mat2) -> Option<Mat2> {
    let c = m[1][0];
    if c.norm() < SINGULAR_EPS * norm_inf(m) || c.norm() == 0.0 {
        return None;
    }
    let d = det2(m);
    Some([[m[0][0] / c, d / c], [Complex64::new(1.0, 0.0) / c, m[1][1] / c]])
}

fn y_to_abcd(y: &Mat2) -> Option<Mat2> {
    let y21 = y[1][0];
    if y21.norm() < SINGULAR_EPS * norm_inf(y) || y21.norm() == 0.0 {
        return None;
    }
    let d = det2(y);
    Some([
        [-y[1][1] / y21, -Complex64::new(1.0, 0.0) / y21],
        [-d / y21, -y[0][0] / y21],
    ])
}

fn abcd_to_y(m: &Mat2) -> Option<Mat2> {
    let b = m[0][1];
    if b.norm() < SINGULAR_EPS * norm_inf(m) || b.norm() == 0.0 {
        return None;
    }
    let d = det2(m);
    Some([
        [m[1][1] / b, -d / b],
        [-Complex64::new(1.0, 0.0) / b, m[0][0] / b],
    ])
}

/// Power-wave S from Z: `S = F (Z - G*) (Z + G)^-1 F^-1` with diagonal
/// `G = diag(z_ref)` and `F = diag(1 / 2 sqrt(Re z_ref))`.
fn z_to_s(z: &Mat2, refs: [Complex64; 2]) -> Mat2 {
    let g = refs;
    let mut num = *z;
    let mut den = *z;
    for i in 0..2 {
        num[i][i] -= g[i].conj();
        den[i][i] += g[i];
    }
    // (Z + G) is singular only for pathological (non-passive) Z; fall back to
    // pseudo-large entries rather than failing, since Z itself was finite.
    let deninv = match inv2(&den) {
        Some(v) => v,
        None => {
            let eps = 1e-12 * (norm_inf(&den) + 1.0);
            let mut d2 = den;
            d2[0][0] += eps;
            d2[1][1] += eps;
            inv2(&d2).expect("perturbed matrix invertible")
        }
    };
    let core = mul2(&num, &deninv);
    sandwich(core, refs)
}

/// Applies `F M F^-1` for `F = diag(1 / 2 sqrt(Re z_ref))`.
fn sandwich(m: Mat2, refs: [Complex64; 2]) -> Mat2 {
    let r = [refs[0].re.sqrt(), refs[1].re.sqrt()];
    let mut out = m;
    out[0][1] *= r[1] / r[0];
    out[1][0] *= r[0] / r[1];
    out
}

/// Inverse sandwich `F^-1 M F`.
fn unsandwich(m: Mat2, refs: [Complex64; 2]) -> Mat2 {
    let r = [refs[0].re.sqrt(), refs[1].re.sqrt()];
    let mut out = m;
    out[0][1] *= r[0] / r[1];
    out[1][0] *= r[1] / r[0];
    out
}

/// Z from power-wave S: `Z = (I - T)^-1 (T G + G*)` with `T = F^-1 S F`.
fn s_to_z(s: &Mat2, refs: [Complex64; 2]) -> Option<Mat2> {
    let t = unsandwich(*s, refs);
    let mut imt = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            imt[i][j] = -t[i][j];
        }
        imt[i][i] += 1.0;
    }
    let inv = inv2(&imt)?;
    let mut rhs = t;
    for i in 0..2 {
        for j in 0..2 {
            rhs[i][j] *= refs[j];
        }
        rhs[i][i] += refs[i].conj();
    }
    Some(mul2(&inv, &rhs))
}

/// Power-wave S from Y: `S = F (I - G* Y)(I + G Y)^-1 F^-1`.
fn y_to_s(y: &Mat2, refs: [Complex64; 2]) -> Option<Mat2> {
    let mut num = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut den = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            num[i][j] = -refs[i].conj() * y[i][j];
            den[i][j] = refs[i] * y[i][j];
        }
        num[i][i] += 1.0;
        den[i][i] += 1.0;
    }
    let deninv = inv2(&den)?;
    Some(sandwich(mul2(&num, &deninv), refs))
}

/// Y from power-wave S: `Y = (T G + G*)^-1 (I - T)`.
fn s_to_y(s: &Mat2, refs: [Complex64; 2]) -> Option<Mat2> {
    let t = unsandwich(*s, refs);
    let mut lhs = t;
    for i in 0..2 {
        for j in 0..2 {
            lhs[i][j] *= refs[j];
        }
        lhs[i][i] += refs[i].conj();
    }
    let inv = inv2(&lhs)?;
    let mut imt = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            imt[i][j] = -t[i][j];
        }
        imt[i][i] += 1.0;
    }
    Some(mul2(&inv, &imt))
}

/// ABCD from power-wave S (direct form, valid for complex references).
fn s_to_abcd(s: &Mat2, refs: [Complex64; 2]) -> Option<Mat2> {
    let (s11, s12, s21, s22) = (s[0][0], s[0][1], s[1][0], s[1][1]);
    let (z1, z2) = (refs[0], refs[1]);
    let scale = 2.0 * (z1.re * z2.re).sqrt();
    let den = s21 * scale;
    if den.norm() < SINGULAR_EPS * (norm_inf(s) + 1.0) {
        return None;
    }
    let p1 = z1.conj() + s11 * z1;
    let p2 = z2.conj() + s22 * z2;
    let q1 = Complex64::new(1.0, 0.0) - s11;
    let q2 = Complex64::new(1.0, 0.0) - s22;
    let a = (p1 * q2 + s12 * s21 * z1) / den;
    let b = (p1 * p2 - s12 * s21 * z1 * z2) / den;
    let c = (q1 * q2 - s12 * s21) / den;
    let d = (q1 * p2 + s12 * s21 * z2) / den;
    Some([[a, b], [c, d]])
}

/// Power-wave S from ABCD (direct form, valid for complex references).
fn abcd_to_s(m: &Mat2, refs: [Complex64; 2]) -> Option<Mat2> {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let (z1, z2) = (refs[0], refs[1]);
    let den = a * z2 + b + c * z1 * z2 + d * z1;
    let scale = norm_inf(m) * (z1.norm() + z2.norm()).max(1.0);
    if den.norm() < SINGULAR_EPS * scale || den.norm() == 0.0 {
        return None;
    }
    let root = 2.0 * (z1.re * z2.re).sqrt();
    let s11 = (a * z2 + b - c * z1.conj() * z2 - d * z1.conj()) / den;
    let s12 = det2(m) * root / den;
    let s21 = Complex64::new(root, 0.0) / den;
    let s22 = (-a * z2.conj() + b - c * z1 * z2.conj() + d * z1) / den;
    Some([[s11, s12], [s21, s22]])
}

/// Power-wave renormalization from `old` to `new` references.
///
/// With per-port `A_i = (z'_i + z_i*) / 2 sqrt(Re z_i Re z'_i)` and
/// `B_i = (z'_i - z_i) / 2 sqrt(Re z_i Re z'_i)`, the new waves are
/// `a' = A a - B b`, `b' = -B* a + A* b`, hence
/// `S' = (A* S - B*)(A - B S)^-1`. This direct form needs no intermediate
/// Z or Y description.
fn renorm_s(s: &Mat2, old: [Complex64; 2], new: [Complex64; 2]) -> Option<Mat2> {
    let mut av = [Complex64::new(0.0, 0.0); 2];
    let mut bv = [Complex64::new(0.0, 0.0); 2];
    for i in 0..2 {
        let denom = 2.0 * (old[i].re * new[i].re).sqrt();
        av[i] = (new[i] + old[i].conj()) / denom;
        bv[i] = (new[i] - old[i]) / denom;
    }
    let mut num = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut den = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            num[i][j] = av[i].conj() * s[i][j];
            den[i][j] = -bv[i] * s[i][j];
        }
        num[i][i] -= bv[i].conj();
        den[i][i] += av[i];
    }
    let deninv = inv2(&den)?;
    Some(mul2(&num, &deninv))
}

/// A two-port response sampled over a frequency grid.
///
/// All matrices share one representation kind and, for S data, one pair of
/// reference impedances.
#[derive(Debug, Clone)]
pub struct SweepResponse {
    grid: FrequencyGrid,
    matrices: Vec<TwoPort>,
}

impl SweepResponse {
    pub fn new(grid: FrequencyGrid, matrices: Vec<TwoPort>) -> Result<Self, NetworkError> {
        if matrices.len() != grid.len() {
            return Err(NetworkError::SweepInvalid("matrix count != grid length"));
        }
        if matrices.is_empty() {
            return Err(NetworkError::SweepInvalid("empty sweep"));
        }
        let kind = matrices[0].kind();
        if matrices.iter().any(|m| m.kind() != kind) {
            return Err(NetworkError::SweepInvalid("mixed matrix kinds"));
        }
        if kind == TwoPortKind::S {
            let refs = matrices[0].refs();
            if matrices.iter().any(|m| m.refs() != refs) {
                return Err(NetworkError::SweepInvalid("mixed reference impedances"));
            }
        }
        Ok(SweepResponse { grid, matrices })
    }

    #[must_use]
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    #[must_use]
    pub fn matrices(&self) -> &[TwoPort] {
        &self.matrices
    }

    #[must_use]
    pub fn kind(&self) -> TwoPortKind {
        self.matrices[0].kind()
    }

    /// Reference impedances shared by all points (S sweeps only).
    #[must_use]
    pub fn refs(&self) -> Option<[Complex64; 2]> {
        self.matrices[0].refs()
    }

    /// Pointwise conversion into `target` (non-S) or S at default references.
    pub fn converted(&self, target: TwoPortKind) -> Result<SweepResponse, NetworkError> {
        let ms = self
            .matrices
            .iter()
            .map(|m| m.convert(target))
            .collect::<Result<Vec<_>, _>>()?;
        SweepResponse::new(self.grid.clone(), ms)
    }

    /// Pointwise conversion into S at the given references.
    pub fn to_s(&self, refs: [Complex64; 2]) -> Result<SweepResponse, NetworkError> {
        let ms = self
            .matrices
            .iter()
            .map(|m| m.to_s(refs))
            .collect::<Result<Vec<_>, _>>()?;
        SweepResponse::new(self.grid.clone(), ms)
    }

    /// Renormalizes an S sweep to new reference impedances.
    pub fn renormalized(&self, refs: [Complex64; 2]) -> Result<SweepResponse, NetworkError> {
        if self.kind() != TwoPortKind::S {
            return Err(NetworkError::KindMismatch {
                expected: TwoPortKind::S,
                found: self.kind(),
            });
        }
        self.to_s(refs)
    }

    /// Minimum over frequency of the smallest eigenvalue of `I - S^H S`.
    pub fn passivity_margin(&self) -> Result<f64, NetworkError> {
        let mut margin = f64::INFINITY;
        for m in &self.matrices {
            margin = margin.min(m.passivity_eigenvalue()?);
        }
        Ok(margin)
    }
}
