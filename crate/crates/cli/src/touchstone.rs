//! Touchstone v1 reader and writer for .s1p and .s2p files.
//!
//! Supported option lines declare frequency unit (Hz/kHz/MHz/GHz), parameter
//! S, data format RI/MA/DB, and a real reference resistance. Two-port data
//! follows the v1 column order S11 S21 S12 S22. Writes are atomic and
//! bit-stable for a fixed input.

use std::fmt;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use resolat_core::extraction::MeasuredOnePort;
use resolat_core::network::{FrequencyGrid, GridSpacing, Mat2, SweepResponse, TwoPort};

pub const WRITER_TAG: &str = concat!("resolat ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub enum TouchstoneError {
    Io { path: String, detail: String },
    UnsupportedExtension { path: String },
    MalformedOptionLine { line: String },
    UnsupportedParameter { letter: char },
    MalformedDataLine { line_no: usize },
    NonMonotoneFrequency { index: usize },
    EmptySweep,
    ComplexReferenceUnsupported,
    Invalid { detail: String },
}

impl fmt::Display for TouchstoneError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TouchstoneError::Io { path, detail } => write!(f, "{path}: {detail}"),
            TouchstoneError::UnsupportedExtension { path } => {
                write!(f, "{path}: expected a .s1p or .s2p extension")
            }
            TouchstoneError::MalformedOptionLine { line } => {
                write!(f, "malformed option line: {line}")
            }
            TouchstoneError::UnsupportedParameter { letter } => {
                write!(f, "parameter type '{letter}' is not supported; only S-parameter files are accepted")
            }
            TouchstoneError::MalformedDataLine { line_no } => {
                write!(f, "malformed data on line {line_no}")
            }
            TouchstoneError::NonMonotoneFrequency { index } => {
                write!(f, "frequencies must increase strictly; violation at sample {index}")
            }
            TouchstoneError::EmptySweep => write!(f, "no data points"),
            TouchstoneError::ComplexReferenceUnsupported => write!(
                f,
                "Touchstone v1 cannot express complex or per-port references; renormalize or request a sidecar"
            ),
            TouchstoneError::Invalid { detail } => write!(f, "{detail}"),
        }
    }
}

impl std::error::Error for TouchstoneError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsFormat {
    Ri,
    Ma,
    Db,
}

impl TsFormat {
    fn token(self) -> &'static str {
        match self {
            TsFormat::Ri => "RI",
            TsFormat::Ma => "MA",
            TsFormat::Db => "DB",
        }
    }

    fn decode(self, a: f64, b: f64) -> Complex64 {
        match self {
            TsFormat::Ri => Complex64::new(a, b),
            TsFormat::Ma => Complex64::from_polar(a, b.to_radians()),
            TsFormat::Db => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }

    fn encode(self, s: Complex64) -> (f64, f64) {
        match self {
            TsFormat::Ri => (s.re, s.im),
            TsFormat::Ma => (s.norm(), s.arg().to_degrees()),
            TsFormat::Db => {
                let mag = s.norm().max(1e-300);
                (20.0 * mag.log10(), s.arg().to_degrees())
            }
        }
    }
}

impl fmt::Display for TsFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for TsFormat {
    type Err = TouchstoneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "RI" => Ok(TsFormat::Ri),
            "MA" => Ok(TsFormat::Ma),
            "DB" => Ok(TsFormat::Db),
            _ => Err(TouchstoneError::Invalid { detail: format!("unknown format '{s}'") }),
        }
    }
}

/// Parsed file: frequencies in Hz plus one row of S-entries per point.
/// Two-port rows are stored in file order S11, S21, S12, S22.
#[derive(Debug, Clone)]
pub struct TouchstoneFile {
    ports: usize,
    z0: f64,
    format: TsFormat,
    comments: Vec<String>,
    freqs: Vec<f64>,
    rows: Vec<Vec<Complex64>>,
}

impl TouchstoneFile {
    pub fn ports(&self) -> usize {
        self.ports
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn format(&self) -> TsFormat {
        self.format
    }

    /// Full-line `!` comments in file order, marker stripped.
    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    pub fn frequencies_hz(&self) -> &[f64] {
        &self.freqs
    }

    fn grid(&self) -> Result<FrequencyGrid, TouchstoneError> {
        FrequencyGrid::from_points(self.freqs.clone(), GridSpacing::Irregular)
            .map_err(|e| TouchstoneError::Invalid { detail: e.to_string() })
    }

    pub fn s11(&self) -> Vec<Complex64> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    /// One-port data as admittance samples, provenance recording the source
    /// path and any comment lines.
    pub fn one_port(&self, origin: &str) -> Result<MeasuredOnePort, TouchstoneError> {
        if self.ports != 1 {
            return Err(TouchstoneError::Invalid {
                detail: format!("expected one-port data, file has {} ports", self.ports),
            });
        }
        let source = if self.comments.is_empty() {
            origin.to_string()
        } else {
            format!("{origin}: {}", self.comments.join(" | "))
        };
        MeasuredOnePort::from_reflection(self.grid()?, &self.s11(), self.z0, source)
            .map_err(|e| TouchstoneError::Invalid { detail: e.to_string() })
    }

    /// Two-port data as a sweep with the file's real reference on both ports.
    pub fn sweep(&self) -> Result<SweepResponse, TouchstoneError> {
        if self.ports != 2 {
            return Err(TouchstoneError::Invalid {
                detail: format!("expected two-port data, file has {} ports", self.ports),
            });
        }
        let matrices = self
            .rows
            .iter()
            .map(|r| {
                let m: Mat2 = [[r[0], r[2]], [r[1], r[3]]];
                TwoPort::s_real(m, self.z0)
                    .map_err(|e| TouchstoneError::Invalid { detail: e.to_string() })
            })
            .collect::<Result<Vec<_>, _>>()?;
        SweepResponse::new(self.grid()?, matrices)
            .map_err(|e| TouchstoneError::Invalid { detail: e.to_string() })
    }
}

fn port_count(path: &Path) -> Result<usize, TouchstoneError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    match ext.as_str() {
        "s1p" => Ok(1),
        "s2p" => Ok(2),
        _ => Err(TouchstoneError::UnsupportedExtension { path: path.display().to_string() }),
    }
}

struct OptionLine {
    unit_hz: f64,
    format: TsFormat,
    z0: f64,
}

impl Default for OptionLine {
    fn default() -> Self {
        OptionLine { unit_hz: 1.0e9, format: TsFormat::Ma, z0: 50.0 }
    }
}

fn parse_option_line(line: &str) -> Result<OptionLine, TouchstoneError> {
    let bad = || TouchstoneError::MalformedOptionLine { line: line.trim().to_string() };
    let mut opt = OptionLine::default();
    let mut tokens = line.trim_start_matches('#').split_whitespace().peekable();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opt.unit_hz = 1.0,
            "KHZ" => opt.unit_hz = 1.0e3,
            "MHZ" => opt.unit_hz = 1.0e6,
            "GHZ" => opt.unit_hz = 1.0e9,
            "S" => {}
            "Y" | "Z" | "H" | "G" => {
                return Err(TouchstoneError::UnsupportedParameter {
                    letter: tok.chars().next().unwrap().to_ascii_uppercase(),
                })
            }
            "RI" | "MA" | "DB" => opt.format = tok.parse().map_err(|_| bad())?,
            "R" => {
                let value = tokens.next().ok_or_else(bad)?;
                let z0: f64 = value.parse().map_err(|_| bad())?;
                if !(z0.is_finite() && z0 > 0.0) {
                    return Err(bad());
                }
                opt.z0 = z0;
            }
            _ => return Err(bad()),
        }
    }
    Ok(opt)
}

pub fn read_touchstone(path: &Path) -> Result<TouchstoneFile, TouchstoneError> {
    let ports = port_count(path)?;
    let text = fs::read_to_string(path).map_err(|e| TouchstoneError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    parse_touchstone(&text, ports)
}

/// Parses file text that has already been read; `ports` is 1 or 2.
pub fn parse_touchstone(text: &str, ports: usize) -> Result<TouchstoneFile, TouchstoneError> {
    assert!(ports == 1 || ports == 2);
    let mut comments = Vec::new();
    let mut option: Option<OptionLine> = None;
    let mut tokens: Vec<(f64, usize)> = Vec::new();

    for (line_idx, raw) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = match raw.find('!') {
            Some(0) => {
                comments.push(raw[1..].trim().to_string());
                continue;
            }
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if option.is_some() || !tokens.is_empty() {
                return Err(TouchstoneError::MalformedOptionLine { line: line.to_string() });
            }
            option = Some(parse_option_line(line)?);
            continue;
        }
        for tok in line.split_whitespace() {
            let value: f64 = tok
                .parse()
                .map_err(|_| TouchstoneError::MalformedDataLine { line_no })?;
            tokens.push((value, line_no));
        }
    }

    let opt = option.unwrap_or_default();
    let width = 1 + 2 * ports * ports;
    if tokens.is_empty() {
        return Err(TouchstoneError::EmptySweep);
    }
    if tokens.len() % width != 0 {
        let line_no = tokens[tokens.len() - tokens.len() % width].1;
        return Err(TouchstoneError::MalformedDataLine { line_no });
    }

    let mut freqs = Vec::with_capacity(tokens.len() / width);
    let mut rows = Vec::with_capacity(tokens.len() / width);
    for chunk in tokens.chunks(width) {
        let f_hz = chunk[0].0 * opt.unit_hz;
        freqs.push(f_hz);
        let mut row = Vec::with_capacity(ports * ports);
        for pair in chunk[1..].chunks(2) {
            row.push(opt.format.decode(pair[0].0, pair[1].0));
        }
        rows.push(row);
    }
    for i in 1..freqs.len() {
        if freqs[i] <= freqs[i - 1] {
            return Err(TouchstoneError::NonMonotoneFrequency { index: i });
        }
    }

    Ok(TouchstoneFile { ports, z0: opt.z0, format: opt.format, comments, freqs, rows })
}

/// Real reference shared by both ports, if the sweep has one.
pub fn uniform_real_ref(resp: &SweepResponse) -> Option<f64> {
    let refs = resp.refs()?;
    let z = refs[0];
    if z.im == 0.0 && refs[1].im == 0.0 && z.re > 0.0 && refs[1].re == z.re {
        Some(z.re)
    } else {
        None
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), TouchstoneError> {
    crate::atomic_write(path, bytes).map_err(|e| TouchstoneError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

fn format_header(out: &mut String, format: TsFormat, z0: f64, comments: &[String]) {
    out.push_str(&format!("! {WRITER_TAG}\n"));
    for c in comments {
        out.push_str(&format!("! {c}\n"));
    }
    out.push_str(&format!("# Hz S {} R {z0}\n", format.token()));
}

fn push_pair(out: &mut String, s: Complex64, format: TsFormat) {
    let (a, b) = format.encode(s);
    out.push_str(&format!(" {a:.12e} {b:.12e}"));
}

/// Writes a two-port sweep. The sweep must carry a uniform real reference;
/// renormalize first or use [`write_touchstone_with_sidecar`] otherwise.
pub fn write_touchstone(
    resp: &SweepResponse,
    path: &Path,
    format: TsFormat,
) -> Result<(), TouchstoneError> {
    write_with_comments(resp, path, format, &[])
}

/// Writes a complex-referenced sweep by renormalizing to 50 ohm and recording
/// the original references in a JSON sidecar next to the data file.
pub fn write_touchstone_with_sidecar(
    resp: &SweepResponse,
    path: &Path,
    format: TsFormat,
    sidecar: &Path,
) -> Result<(), TouchstoneError> {
    let refs = resp.refs().ok_or(TouchstoneError::Invalid {
        detail: "sweep is not in S-parameter form".to_string(),
    })?;
    let renorm = resp
        .renormalized([Complex64::new(50.0, 0.0); 2])
        .map_err(|e| TouchstoneError::Invalid { detail: e.to_string() })?;
    let note = serde_json::json!({
        "schema": 1,
        "renormalized_to_ohm": 50.0,
        "original_refs": [
            {"re": refs[0].re, "im": refs[0].im},
            {"re": refs[1].re, "im": refs[1].im},
        ],
        "data_file": path.file_name().and_then(|n| n.to_str()).unwrap_or(""),
    });
    let comment = format!(
        "renormalized from per-port references; original values in {}",
        sidecar.file_name().and_then(|n| n.to_str()).unwrap_or("sidecar")
    );
    write_with_comments(&renorm, path, format, &[comment])?;
    atomic_write(sidecar, format!("{:#}\n", note).as_bytes())
}

fn write_with_comments(
    resp: &SweepResponse,
    path: &Path,
    format: TsFormat,
    comments: &[String],
) -> Result<(), TouchstoneError> {
    if port_count(path)? != 2 {
        return Err(TouchstoneError::UnsupportedExtension { path: path.display().to_string() });
    }
    if resp.grid().is_empty() {
        return Err(TouchstoneError::EmptySweep);
    }
    let z0 = uniform_real_ref(resp).ok_or(TouchstoneError::ComplexReferenceUnsupported)?;
    let mut out = String::new();
    format_header(&mut out, format, z0, comments);
    for (f, tp) in resp.grid().points().iter().zip(resp.matrices()) {
        let m = tp.m();
        out.push_str(&format!("{f:.12e}"));
        for s in [m[0][0], m[1][0], m[0][1], m[1][1]] {
            push_pair(&mut out, s, format);
        }
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Writes one-port reflection data against a real reference.
pub fn write_touchstone_one_port(
    grid: &FrequencyGrid,
    s11: &[Complex64],
    z0: f64,
    path: &Path,
    format: TsFormat,
) -> Result<(), TouchstoneError> {
    if port_count(path)? != 1 {
        return Err(TouchstoneError::UnsupportedExtension { path: path.display().to_string() });
    }
    if grid.is_empty() || s11.is_empty() {
        return Err(TouchstoneError::EmptySweep);
    }
    if grid.points().len() != s11.len() {
        return Err(TouchstoneError::Invalid {
            detail: format!("{} grid points but {} samples", grid.points().len(), s11.len()),
        });
    }
    if !(z0.is_finite() && z0 > 0.0) {
        return Err(TouchstoneError::ComplexReferenceUnsupported);
    }
    let mut out = String::new();
    format_header(&mut out, format, z0, &[]);
    for (f, s) in grid.points().iter().zip(s11) {
        out.push_str(&format!("{f:.12e}"));
        push_pair(&mut out, *s, format);
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse1(text: &str) -> Result<TouchstoneFile, TouchstoneError> {
        parse_touchstone(text, 1)
    }

    #[test]
    fn minimal_ri_one_port() {
        let f = parse1("# GHz S RI R 50\n1.0 0.0 0.0\n").unwrap();
        assert_eq!(f.frequencies_hz(), &[1.0e9]);
        assert_eq!(f.s11(), vec![Complex64::new(0.0, 0.0)]);
        assert_eq!(f.z0(), 50.0);
    }

    #[test]
    fn db_format_converts_magnitude() {
        let f = parse1("# Hz S DB R 50\n1.0e9 -3.0 0.0\n").unwrap();
        assert!((f.s11()[0].norm() - 0.70795).abs() < 1e-5);
        let f = parse1("# Hz S DB R 50\n1.0e9 -3.0103 0.0\n").unwrap();
        assert!((f.s11()[0].norm() - 0.5f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn units_scale_frequencies() {
        for (unit, mult) in [("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)] {
            let f = parse1(&format!("# {unit} S RI R 50\n2.0 0.1 0.0\n")).unwrap();
            assert_eq!(f.frequencies_hz()[0], 2.0 * mult);
        }
    }

    #[test]
    fn option_line_defaults_are_ghz_ma_50() {
        let f = parse1("# \n1.0 0.5 90.0\n").unwrap();
        assert_eq!(f.frequencies_hz()[0], 1.0e9);
        assert_eq!(f.z0(), 50.0);
        assert!((f.s11()[0] - Complex64::new(0.0, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_s_parameters() {
        for letter in ['Y', 'Z', 'H', 'G'] {
            let err = parse1(&format!("# GHz {letter} RI R 50\n1.0 0.0 0.0\n")).unwrap_err();
            assert_eq!(err, TouchstoneError::UnsupportedParameter { letter });
        }
    }

    #[test]
    fn rejects_malformed_option_lines() {
        let err = parse1("# GHz S XY R 50\n1.0 0.0 0.0\n").unwrap_err();
        assert!(matches!(err, TouchstoneError::MalformedOptionLine { .. }));
        let err = parse1("# GHz S RI R\n1.0 0.0 0.0\n").unwrap_err();
        assert!(matches!(err, TouchstoneError::MalformedOptionLine { .. }));
        let err = parse1("# GHz S RI R -50\n1.0 0.0 0.0\n").unwrap_err();
        assert!(matches!(err, TouchstoneError::MalformedOptionLine { .. }));
    }

    #[test]
    fn rejects_non_monotone_frequencies() {
        let err = parse1("# GHz S RI R 50\n1.0 0.0 0.0\n1.0 0.1 0.0\n").unwrap_err();
        assert_eq!(err, TouchstoneError::NonMonotoneFrequency { index: 1 });
        let err = parse1("# GHz S RI R 50\n2.0 0.0 0.0\n1.0 0.1 0.0\n").unwrap_err();
        assert_eq!(err, TouchstoneError::NonMonotoneFrequency { index: 1 });
    }

    #[test]
    fn rejects_unparseable_and_ragged_data() {
        let err = parse1("# GHz S RI R 50\n1.0 abc 0.0\n").unwrap_err();
        assert_eq!(err, TouchstoneError::MalformedDataLine { line_no: 2 });
        let err = parse1("# GHz S RI R 50\n1.0 0.0 0.0\n2.0 0.1\n").unwrap_err();
        assert_eq!(err, TouchstoneError::MalformedDataLine { line_no: 3 });
    }

    #[test]
    fn comments_survive_into_provenance() {
        let f =
            parse1("! measured die 7\n# GHz S RI R 50\n! post-cal\n1.0 0.1 0.0\n2.0 0.2 0.0\n")
                .unwrap();
        assert_eq!(f.comments(), ["measured die 7", "post-cal"]);
        let m = f.one_port("die7.s1p").unwrap();
        assert!(m.source().contains("die7.s1p"));
        assert!(m.source().contains("measured die 7"));
    }

    #[test]
    fn empty_file_is_an_empty_sweep() {
        assert_eq!(parse1("# GHz S RI R 50\n").unwrap_err(), TouchstoneError::EmptySweep);
    }

    #[test]
    fn two_port_column_order_is_s11_s21_s12_s22() {
        let text =
            "# Hz S RI R 50\n1.0e9 0.1 0.0 0.2 0.0 0.3 0.0 0.4 0.0\n2.0e9 0.1 0.0 0.2 0.0 0.3 0.0 0.4 0.0\n";
        let f = parse_touchstone(text, 2).unwrap();
        let resp = f.sweep().unwrap();
        let m = resp.matrices()[0].m();
        assert_eq!(m[0][0].re, 0.1);
        assert_eq!(m[1][0].re, 0.2);
        assert_eq!(m[0][1].re, 0.3);
        assert_eq!(m[1][1].re, 0.4);
    }

    #[test]
    fn wrapped_two_port_lines_parse() {
        let text = "# Hz S RI R 50\n1.0e9 0.1 0.0 0.2 0.0\n0.3 0.0 0.4 0.0\n";
        let f = parse_touchstone(text, 2).unwrap();
        assert_eq!(f.frequencies_hz().len(), 1);
    }
}
