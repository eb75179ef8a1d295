//! Passband figure extraction from swept S-parameters: insertion loss,
//! 3-dB band edges, center frequency, fractional bandwidth, out-of-band
//! rejection over declared stopbands, and in-band ripple.

use std::fmt;

use crate::network::{SweepResponse, TwoPortKind};

/// Insertion loss reported for a transmission zero, standing in for +∞ dB.
pub const IL_SENTINEL_DB: f64 = 400.0;

/// Offset above the loss minimum that defines the band edges: 10·log10 2,
/// the half-power level. The colloquial "3-dB points" are the half-power
/// points; carrying the exact ratio keeps extracted bandwidths of analytic
/// prototypes equal to f_c/Q instead of 0.24% narrow.
pub const BAND_EDGE_OFFSET_DB: f64 = 3.0102999566398120;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandEdge {
    Lower,
    Upper,
}

impl fmt::Display for BandEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandEdge::Lower => write!(f, "lower"),
            BandEdge::Upper => write!(f, "upper"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    /// No sweep point dips below the configured loss floor.
    NoPassband { il_floor_db: f64 },
    /// The band reaches the end of the grid before crossing the edge
    /// threshold; the sweep does not span the filter.
    BandTouchesSweepEdge { edge: BandEdge },
    /// A declared stopband is not an increasing interval.
    InvalidStopband { f_lo_hz: f64, f_hi_hz: f64 },
    /// A declared stopband contains no sweep point.
    EmptyStopband { f_lo_hz: f64, f_hi_hz: f64 },
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::NoPassband { il_floor_db } => {
                write!(f, "no sweep point has insertion loss below {il_floor_db} dB")
            }
            MetricsError::BandTouchesSweepEdge { edge } => {
                write!(f, "passband runs into the {edge} end of the sweep")
            }
            MetricsError::InvalidStopband { f_lo_hz, f_hi_hz } => {
                write!(f, "stopband [{f_lo_hz}, {f_hi_hz}] Hz is not an increasing interval")
            }
            MetricsError::EmptyStopband { f_lo_hz, f_hi_hz } => {
                write!(f, "stopband [{f_lo_hz}, {f_hi_hz}] Hz contains no sweep point")
            }
        }
    }
}

impl std::error::Error for MetricsError {}

/// Extraction knobs; the defaults cover ordinary bandpass work.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsConfig {
    /// A passband exists only if some point has IL below this.
    pub il_floor_db: f64,
    /// Report f_c as √(f_lo·f_hi) instead of the arithmetic mean.
    pub geometric_center: bool,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { il_floor_db: 40.0, geometric_center: false }
    }
}

/// Band figures of one swept response.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterMetrics {
    f_lo_hz: f64,
    f_hi_hz: f64,
    f_c_hz: f64,
    il_min_db: f64,
    fbw_3db: f64,
    oob_rejection_db: Vec<f64>,
    ripple_db: f64,
}

impl FilterMetrics {
    pub fn f_lo_hz(&self) -> f64 {
        self.f_lo_hz
    }

    pub fn f_hi_hz(&self) -> f64 {
        self.f_hi_hz
    }

    pub fn f_c_hz(&self) -> f64 {
        self.f_c_hz
    }

    pub fn il_min_db(&self) -> f64 {
        self.il_min_db
    }

    pub fn fbw_3db(&self) -> f64 {
        self.fbw_3db
    }

    /// Minimum insertion loss inside each declared stopband, in declaration
    /// order.
    pub fn oob_rejection_db(&self) -> &[f64] {
        &self.oob_rejection_db
    }

    pub fn ripple_db(&self) -> f64 {
        self.ripple_db
    }

    pub fn csv_header() -> &'static str {
        "f_c_Hz,il_min_dB,fbw_pct,f_lo_Hz,f_hi_Hz,oob_dB,ripple_dB"
    }

    /// One CSV row matching [`FilterMetrics::csv_header`]. The oob column
    /// is the worst (smallest) rejection across the declared stopbands and
    /// stays empty when none were declared.
    pub fn to_csv_row(&self) -> String {
        let oob = self
            .oob_rejection_db
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let oob = if oob.is_finite() { format!("{oob}") } else { String::new() };
        format!(
            "{},{},{},{},{},{},{}",
            self.f_c_hz,
            self.il_min_db,
            self.fbw_3db * 100.0,
            self.f_lo_hz,
            self.f_hi_hz,
            oob,
            self.ripple_db
        )
    }
}

/// Insertion loss −20·log10|S21| in dB at every sweep point. Transmission
/// zeros report [`IL_SENTINEL_DB`].
///
/// Panics if the response is not S-kind.
pub fn insertion_loss_trace(r: &SweepResponse) -> Vec<f64> {
    assert_eq!(r.kind(), TwoPortKind::S, "insertion loss needs S-parameters");
    r.matrices()
        .iter()
        .map(|tp| {
            let il = -20.0 * tp.m()[1][0].norm().log10();
            if il.is_finite() { il } else { IL_SENTINEL_DB }
        })
        .collect()
}

/// Band figures with default configuration; see [`extract_metrics_with`].
pub fn extract_metrics(
    r: &SweepResponse,
    stopbands: &[(f64, f64)],
) -> Result<FilterMetrics, MetricsError> {
    extract_metrics_with(r, stopbands, &MetricsConfig::default())
}

/// Extracts the band figures of an S-parameter sweep.
///
/// The passband is the contiguous run of points around the global loss
/// minimum staying within [`BAND_EDGE_OFFSET_DB`] of it; the edges are
/// placed by linear interpolation against the neighboring points outside
/// the run. Multi-lobe responses therefore report the lobe containing the
/// minimum, never a union across spur notches.
///
/// Panics if the response is not S-kind.
pub fn extract_metrics_with(
    r: &SweepResponse,
    stopbands: &[(f64, f64)],
    cfg: &MetricsConfig,
) -> Result<FilterMetrics, MetricsError> {
    let il = insertion_loss_trace(r);
    let f = r.grid().points();
    let n = il.len();

    let mut k_min = 0;
    for k in 1..n {
        if il[k] < il[k_min] {
            k_min = k;
        }
    }
    let il_min_db = il[k_min];
    if !(il_min_db < cfg.il_floor_db) {
        return Err(MetricsError::NoPassband { il_floor_db: cfg.il_floor_db });
    }
    let thr = il_min_db + BAND_EDGE_OFFSET_DB;

    let mut lo = k_min;
    while lo > 0 && il[lo - 1] <= thr {
        lo -= 1;
    }
    if lo == 0 {
        return Err(MetricsError::BandTouchesSweepEdge { edge: BandEdge::Lower });
    }
    let mut hi = k_min;
    while hi + 1 < n && il[hi + 1] <= thr {
        hi += 1;
    }
    if hi == n - 1 {
        return Err(MetricsError::BandTouchesSweepEdge { edge: BandEdge::Upper });
    }

    let cross = |a: usize, b: usize| {
        let t = (thr - il[a]) / (il[b] - il[a]);
        f[a] + t * (f[b] - f[a])
    };
    let f_lo_hz = cross(lo - 1, lo);
    let f_hi_hz = cross(hi + 1, hi);

    let f_c_hz = if cfg.geometric_center {
        (f_lo_hz * f_hi_hz).sqrt()
    } else {
        0.5 * (f_lo_hz + f_hi_hz)
    };
    let fbw_3db = (f_hi_hz - f_lo_hz) / f_c_hz;

    let ripple_db = il[lo..=hi]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
        - il_min_db;

    let mut oob_rejection_db = Vec::with_capacity(stopbands.len());
    for &(s_lo, s_hi) in stopbands {
        if !(s_lo < s_hi) || !s_lo.is_finite() || !s_hi.is_finite() {
            return Err(MetricsError::InvalidStopband { f_lo_hz: s_lo, f_hi_hz: s_hi });
        }
        let worst = f
            .iter()
            .zip(&il)
            .filter(|(fk, _)| **fk >= s_lo && **fk <= s_hi)
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min);
        if !worst.is_finite() {
            return Err(MetricsError::EmptyStopband { f_lo_hz: s_lo, f_hi_hz: s_hi });
        }
        oob_rejection_db.push(worst);
    }

    debug_assert!(f_lo_hz <= f_c_hz && f_c_hz <= f_hi_hz);
    Ok(FilterMetrics {
        f_lo_hz,
        f_hi_hz,
        f_c_hz,
        il_min_db,
        fbw_3db,
        oob_rejection_db,
        ripple_db,
    })
}
