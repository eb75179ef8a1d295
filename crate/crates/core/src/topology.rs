//! Filter topology builders: the canonical four-arm lattice, its two planar
//! single-ended realizations, and the ladder reference, plus the closed-form
//! lattice response they are all checked against.

use std::fmt;

use num_complex::Complex64;

use crate::mna::{MnaError, Netlist};
use crate::network::{Mat2, Z0_DEFAULT};
use crate::resonator::MbvdParams;

#[derive(Debug, Clone, PartialEq)]
pub enum TopologyError {
    /// A builder was handed no elements at all.
    EmptyDesign,
    /// A design must carry at least two resonators.
    TooFewElements { count: usize },
    /// Series and shunt stage counts cannot interleave into an alternating
    /// chain.
    LadderStageMismatch { series: usize, shunt: usize },
    /// Port reference impedances need a positive real part.
    InvalidPortReference { value: Complex64 },
    Netlist(MnaError),
}

impl fmt::Display for TopologyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyError::EmptyDesign => write!(f, "design contains no elements"),
            TopologyError::TooFewElements { count } => {
                write!(f, "design needs at least two resonators, got {count}")
            }
            TopologyError::LadderStageMismatch { series, shunt } => {
                write!(
                    f,
                    "{series} series and {shunt} shunt stages cannot alternate"
                )
            }
            TopologyError::InvalidPortReference { value } => {
                write!(f, "port reference {value} needs a positive real part")
            }
            TopologyError::Netlist(e) => write!(f, "netlist assembly failed: {e}"),
        }
    }
}

impl std::error::Error for TopologyError {}

impl From<MnaError> for TopologyError {
    fn from(e: MnaError) -> Self {
        TopologyError::Netlist(e)
    }
}

/// Whether the two ground pads of a single-ended lattice layout are merged
/// with the global reference or left as distinct nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundScheme {
    Tied,
    Separate,
}

/// Disposition of the second port-connected arm in the direct layout: fully
/// wired between the ground pads, or attached at one terminal with its far
/// node left dangling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourthArm {
    Present,
    Dangling,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TopologyVariant {
    Ladder { series: Vec<MbvdParams>, shunt: Vec<MbvdParams> },
    DirectLattice { a: MbvdParams, b: MbvdParams, grounds: GroundScheme, fourth_arm: FourthArm },
    LayoutBalanced { a1: MbvdParams, a2: MbvdParams, b: MbvdParams },
    CanonicalLattice { a: MbvdParams, b: MbvdParams },
}

/// A filter topology together with its port reference plan.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterDesign {
    variant: TopologyVariant,
    port_refs: [Complex64; 2],
}

impl FilterDesign {
    pub fn new(variant: TopologyVariant) -> Result<Self, TopologyError> {
        if let TopologyVariant::Ladder { series, shunt } = &variant {
            let count = series.len() + shunt.len();
            if count == 0 {
                return Err(TopologyError::EmptyDesign);
            }
            if count < 2 {
                return Err(TopologyError::TooFewElements { count });
            }
            check_ladder_stages(series.len(), shunt.len())?;
        }
        let z0 = Complex64::new(Z0_DEFAULT, 0.0);
        Ok(FilterDesign { variant, port_refs: [z0, z0] })
    }

    pub fn with_port_refs(mut self, refs: [Complex64; 2]) -> Result<Self, TopologyError> {
        for r in refs {
            if !(r.re.is_finite() && r.im.is_finite() && r.re > 0.0) {
                return Err(TopologyError::InvalidPortReference { value: r });
            }
        }
        self.port_refs = refs;
        Ok(self)
    }

    pub fn variant(&self) -> &TopologyVariant {
        &self.variant
    }

    pub fn port_refs(&self) -> [Complex64; 2] {
        self.port_refs
    }

    pub fn build(&self) -> Result<Netlist, TopologyError> {
        match &self.variant {
            TopologyVariant::Ladder { series, shunt } => build_ladder(series, shunt),
            TopologyVariant::DirectLattice { a, b, grounds, fourth_arm } => {
                build_direct_lattice(a, b, *grounds, *fourth_arm)
            }
            TopologyVariant::LayoutBalanced { a1, a2, b } => build_layout_balanced(a1, a2, b),
            TopologyVariant::CanonicalLattice { a, b } => build_canonical_lattice(a, b),
        }
    }
}

/// Closed-form Y matrix of the symmetric lattice with arm admittances yA
/// (port-connected) and yB (cross-connected).
pub fn lattice_closed_form(ya: Complex64, yb: Complex64) -> Mat2 {
    let half = Complex64::new(0.5, 0.0);
    [[(ya + yb) * half, (yb - ya) * half], [(yb - ya) * half, (ya + yb) * half]]
}

fn arm(net: &mut Netlist, a: usize, b: usize, label: &str, p: &MbvdParams) -> Result<(), MnaError> {
    let model = p.clone();
    net.add_branch(a, b, label, move |f| model.admittance(f))
}

/// Four-arm lattice with differential ports (1,1') and (2,2').
pub fn build_canonical_lattice(a: &MbvdParams, b: &MbvdParams) -> Result<Netlist, TopologyError> {
    // Node 0 is the (unconnected) reference; 1 = corner 1, 2 = corner 1',
    // 3 = corner 2, 4 = corner 2'.
    let mut net = Netlist::new(5, 0)?;
    arm(&mut net, 1, 3, "A:1-2", a)?;
    arm(&mut net, 2, 4, "A:1'-2'", a)?;
    arm(&mut net, 1, 4, "B:1-2'", b)?;
    arm(&mut net, 2, 3, "B:1'-2", b)?;
    net.add_port(1, 2)?;
    net.add_port(3, 4)?;
    Ok(net)
}

/// Single-ended direct layout measured against the common probe ground.
/// One lattice ground corner is the probed ground pad (merged with the
/// global reference); the other is a pad node that either stays separate or
/// is tied to the reference. The second A arm runs between the ground
/// corners when present; when dangling it hangs off the pad with its far
/// node floating, kept in the netlist for bookkeeping.
pub fn build_direct_lattice(
    a: &MbvdParams,
    b: &MbvdParams,
    grounds: GroundScheme,
    fourth_arm: FourthArm,
) -> Result<Netlist, TopologyError> {
    let mut net = Netlist::new(3, 0)?;
    let (s1, s2) = (1, 2);
    let pad = match grounds {
        GroundScheme::Tied => 0,
        GroundScheme::Separate => net.push_node(),
    };
    arm(&mut net, s1, s2, "A:S1-S2", a)?;
    arm(&mut net, s1, pad, "B:S1-G2", b)?;
    arm(&mut net, 0, s2, "B:G1-S2", b)?;
    match fourth_arm {
        FourthArm::Present => {
            // With tied grounds both ends of this arm sit on the reference,
            // so the shorted element is omitted from the netlist.
            if pad != 0 {
                arm(&mut net, 0, pad, "A:G1-G2", a)?;
            }
        }
        FourthArm::Dangling => {
            let d = net.push_node();
            arm(&mut net, pad, d, "A:G2-dangling", a)?;
        }
    }
    net.add_port(s1, 0)?;
    net.add_port(s2, 0)?;
    Ok(net)
}

/// Balanced layout: hot-to-hot arm A1, cross arms B, and the split ground
/// path made of two A2 sections in parallel between the ground pads, so the
/// total ground-to-ground admittance is twice the section admittance.
/// Ports are (S1,G1) and (S2,G2).
pub fn build_layout_balanced(
    a1: &MbvdParams,
    a2: &MbvdParams,
    b: &MbvdParams,
) -> Result<Netlist, TopologyError> {
    // 0 = unconnected reference; 1 = S1, 2 = G1, 3 = S2, 4 = G2.
    let mut net = Netlist::new(5, 0)?;
    arm(&mut net, 1, 3, "A1:S1-S2", a1)?;
    arm(&mut net, 1, 4, "B:S1-G2", b)?;
    arm(&mut net, 2, 3, "B:G1-S2", b)?;
    arm(&mut net, 2, 4, "A2:G1-G2 upper", a2)?;
    arm(&mut net, 2, 4, "A2:G1-G2 lower", a2)?;
    net.add_port(1, 2)?;
    net.add_port(3, 4)?;
    Ok(net)
}

/// Total admittance of the split-section ground path in the balanced
/// layout: the two A2 sections in parallel.
pub fn layout_balanced_ground_admittance(a2: &MbvdParams, f_hz: f64) -> Complex64 {
    2.0 * a2.admittance(f_hz)
}

fn check_ladder_stages(series: usize, shunt: usize) -> Result<(), TopologyError> {
    if series.abs_diff(shunt) > 1 {
        return Err(TopologyError::LadderStageMismatch { series, shunt });
    }
    Ok(())
}

/// Alternating series/shunt chain between single-ended ports. The longer
/// list starts the chain; on equal counts the chain starts with a series
/// element. A ladder with no series element keeps its through path as an
/// ideal tie.
pub fn build_ladder(
    series: &[MbvdParams],
    shunt: &[MbvdParams],
) -> Result<Netlist, TopologyError> {
    if series.is_empty() && shunt.is_empty() {
        return Err(TopologyError::EmptyDesign);
    }
    check_ladder_stages(series.len(), shunt.len())?;

    let mut net = Netlist::new(3, 0)?;
    let (s1, s2) = (1, 2);
    let shunt_first = shunt.len() > series.len();
    let mut cursor = s1;
    let mut next_series = 0;
    let mut next_shunt = 0;
    for k in 0..series.len() + shunt.len() {
        let take_shunt = if shunt_first { k % 2 == 0 } else { k % 2 == 1 };
        if take_shunt {
            next_shunt += 1;
            arm(&mut net, cursor, 0, &format!("shunt{next_shunt}"), &shunt[next_shunt - 1])?;
        } else {
            next_series += 1;
            let target = if next_series == series.len() { s2 } else { net.push_node() };
            arm(&mut net, cursor, target, &format!("series{next_series}"), &series[next_series - 1])?;
            cursor = target;
        }
    }
    if cursor != s2 {
        net.add_short(s1, s2, "through")?;
    }
    net.add_port(s1, 0)?;
    net.add_port(s2, 0)?;
    Ok(net)
}
