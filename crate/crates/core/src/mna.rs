//! Nodal analysis of two-terminal admittance netlists.
//!
//! A [`Netlist`] holds frequency-dependent admittance branches between node
//! ids plus an ordered list of ports, each a `(hot, reference)` node pair.
//! [`Netlist::reduce`] stamps the nodal matrix at one frequency, deletes the
//! ground row and column, eliminates every non-port node by Schur
//! complement, and solves for the exact port-level Y matrix.
//!
//! Port references do not have to be ground, so fully floating networks
//! (balanced lattices driven differentially) reduce correctly: each
//! connected component with no galvanic path to ground gets one node pinned
//! as its voltage gauge, which is exact because the discarded KCL row is
//! linearly dependent inside a floating component.

use crate::network::{FrequencyGrid, NetworkError, SweepResponse, TwoPort};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// Conductance used to model an ideal tie between two nodes.
pub const STIFF_SHORT_SIEMENS: f64 = 1e12;

/// Magnitude at which a branch is collapsed into an exact node tie during
/// reduction. Stamping conductances this large next to mS-scale branches
/// would shred them in f64 (ulp(1e12) is about 2.4e-4 S), so shorts are
/// taken out of the arithmetic instead of into it.
const COLLAPSE_SIEMENS: f64 = 1e11;

/// Pivot threshold, relative to the largest stamped entry.
const PIVOT_EPS: f64 = 1e-15;

pub type AdmittanceFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Two-terminal branch described by its admittance at any frequency.
#[derive(Clone)]
pub struct Branch {
    pub a: usize,
    pub b: usize,
    pub label: String,
    eval: AdmittanceFn,
}

impl Branch {
    pub fn admittance(&self, f_hz: f64) -> Complex64 {
        (self.eval)(f_hz)
    }
}

impl fmt::Debug for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Branch")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("label", &self.label)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MnaError {
    NodeOutOfRange { node: usize },
    SelfLoop { node: usize },
    PortOnSingleNode { node: usize },
    NoPorts,
    /// An internal node has no usable coupling; its elimination pivot
    /// vanished at the given frequency.
    FloatingNode { node: usize, f_hz: f64 },
    NonFiniteAdmittance { label: String, f_hz: f64 },
    SingularSystem { f_hz: f64 },
    Network(NetworkError),
}

impl fmt::Display for MnaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MnaError::NodeOutOfRange { node } => write!(f, "node {node} out of range"),
            MnaError::SelfLoop { node } => write!(f, "branch connects node {node} to itself"),
            MnaError::PortOnSingleNode { node } => {
                write!(f, "port hot and reference are both node {node}")
            }
            MnaError::NoPorts => write!(f, "netlist declares no ports"),
            MnaError::FloatingNode { node, f_hz } => {
                write!(f, "internal node {node} is floating at {f_hz} Hz")
            }
            MnaError::NonFiniteAdmittance { label, f_hz } => {
                write!(f, "branch '{label}' evaluated non-finite at {f_hz} Hz")
            }
            MnaError::SingularSystem { f_hz } => {
                write!(f, "port system is singular at {f_hz} Hz")
            }
            MnaError::Network(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for MnaError {}

impl From<NetworkError> for MnaError {
    fn from(e: NetworkError) -> Self {
        MnaError::Network(e)
    }
}

/// Port-level admittance matrix at a single frequency.
#[derive(Debug, Clone)]
pub struct ReducedYMatrix {
    pub f_hz: f64,
    pub y: Vec<Vec<Complex64>>,
}

/// Admittance netlist with numbered nodes `0..node_count`.
#[derive(Clone, Debug)]
pub struct Netlist {
    node_count: usize,
    ground: usize,
    branches: Vec<Branch>,
    ports: Vec<(usize, usize)>,
}

impl Netlist {
    pub fn new(node_count: usize, ground: usize) -> Result<Self, MnaError> {
        if ground >= node_count {
            return Err(MnaError::NodeOutOfRange { node: ground });
        }
        Ok(Netlist { node_count, ground, branches: Vec::new(), ports: Vec::new() })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn ports(&self) -> &[(usize, usize)] {
        &self.ports
    }

    /// Appends a fresh node and returns its id.
    pub fn push_node(&mut self) -> usize {
        self.node_count += 1;
        self.node_count - 1
    }

    pub fn add_branch<F>(&mut self, a: usize, b: usize, label: &str, eval: F) -> Result<(), MnaError>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        for n in [a, b] {
            if n >= self.node_count {
                return Err(MnaError::NodeOutOfRange { node: n });
            }
        }
        if a == b {
            return Err(MnaError::SelfLoop { node: a });
        }
        self.branches.push(Branch { a, b, label: label.to_string(), eval: Arc::new(eval) });
        Ok(())
    }

    /// Adds a branch from a prebuilt admittance closure.
    pub fn add_branch_arc(
        &mut self,
        a: usize,
        b: usize,
        label: &str,
        eval: AdmittanceFn,
    ) -> Result<(), MnaError> {
        for n in [a, b] {
            if n >= self.node_count {
                return Err(MnaError::NodeOutOfRange { node: n });
            }
        }
        if a == b {
            return Err(MnaError::SelfLoop { node: a });
        }
        self.branches.push(Branch { a, b, label: label.to_string(), eval });
        Ok(())
    }

    /// Ideal tie between two nodes, modeled as a stiff short.
    pub fn add_short(&mut self, a: usize, b: usize, label: &str) -> Result<(), MnaError> {
        self.add_branch(a, b, label, |_| Complex64::new(STIFF_SHORT_SIEMENS, 0.0))
    }

    pub fn add_port(&mut self, hot: usize, reference: usize) -> Result<(), MnaError> {
        for n in [hot, reference] {
            if n >= self.node_count {
                return Err(MnaError::NodeOutOfRange { node: n });
            }
        }
        if hot == reference {
            return Err(MnaError::PortOnSingleNode { node: hot });
        }
        self.ports.push((hot, reference));
        Ok(())
    }

    /// Exact port-level Y matrix at one frequency.
    pub fn reduce(&self, f_hz: f64) -> Result<ReducedYMatrix, MnaError> {
        let y = self.reduce_ports(f_hz, &self.ports)?;
        Ok(ReducedYMatrix { f_hz, y })
    }

    /// Two-port description at one frequency. Usually the reduced Y matrix;
    /// when both ports collapse onto the same node pair (a through
    /// connection, whose Y matrix does not exist) the network is returned as
    /// the shunt ABCD form instead.
    pub fn reduce_two_port(&self, f_hz: f64) -> Result<TwoPort, MnaError> {
        if self.ports.len() != 2 {
            return Err(MnaError::Network(NetworkError::SweepInvalid(
                "two-port reduction needs exactly two ports",
            )));
        }
        let rep = self.stiff_rep(f_hz)?;
        let p0 = (rep[self.ports[0].0], rep[self.ports[0].1]);
        let p1 = (rep[self.ports[1].0], rep[self.ports[1].1]);
        if p0 == p1 {
            let y = self.reduce_ports(f_hz, &self.ports[..1])?;
            return Ok(TwoPort::shunt_admittance(y[0][0]));
        }
        if p0 == (p1.1, p1.0) {
            // Ports tied onto the same rails with reversed orientation: a
            // polarity-flipping through around the residual shunt.
            let y = self.reduce_ports(f_hz, &self.ports[..1])?;
            let one = Complex64::new(1.0, 0.0);
            return TwoPort::abcd([
                [-one, Complex64::new(0.0, 0.0)],
                [-y[0][0], -one],
            ])
            .map_err(MnaError::from);
        }
        let y = self.reduce_ports(f_hz, &self.ports)?;
        TwoPort::y([[y[0][0], y[0][1]], [y[1][0], y[1][1]]]).map_err(MnaError::from)
    }

    /// Supernode representative of each node after stiff-branch collapse.
    fn stiff_rep(&self, f_hz: f64) -> Result<Vec<usize>, MnaError> {
        let mut ties = UnionFind::new(self.node_count);
        for br in &self.branches {
            let y = br.admittance(f_hz);
            if !y.re.is_finite() || !y.im.is_finite() {
                return Err(MnaError::NonFiniteAdmittance { label: br.label.clone(), f_hz });
            }
            if y.norm() >= COLLAPSE_SIEMENS {
                ties.union(br.a, br.b);
            }
        }
        Ok((0..self.node_count).map(|n| ties.find(n)).collect())
    }

    fn reduce_ports(
        &self,
        f_hz: f64,
        ports_in: &[(usize, usize)],
    ) -> Result<Vec<Vec<Complex64>>, MnaError> {
        if ports_in.is_empty() {
            return Err(MnaError::NoPorts);
        }
        let n = self.node_count;

        let mut admittances = Vec::with_capacity(self.branches.len());
        for br in &self.branches {
            let y = br.admittance(f_hz);
            if !y.re.is_finite() || !y.im.is_finite() {
                return Err(MnaError::NonFiniteAdmittance { label: br.label.clone(), f_hz });
            }
            admittances.push(y);
        }

        // Collapse stiff branches into exact ties; the survivors are stamped
        // onto the merged "supernodes".
        let mut ties = UnionFind::new(n);
        for (br, y) in self.branches.iter().zip(&admittances) {
            if y.norm() >= COLLAPSE_SIEMENS {
                ties.union(br.a, br.b);
            }
        }
        let mut rep = vec![usize::MAX; n];
        let mut members: Vec<usize> = Vec::new();
        for node in 0..n {
            let root = ties.find(node);
            if rep[root] == usize::MAX {
                rep[root] = members.len();
                members.push(node);
            }
            rep[node] = rep[root];
        }
        let ns = members.len();
        let g = rep[self.ground];

        // Stamp the supernode matrix, then delete the ground row/column.
        let mut full = vec![vec![Complex64::new(0.0, 0.0); ns]; ns];
        for (br, &y) in self.branches.iter().zip(&admittances) {
            if y.norm() >= COLLAPSE_SIEMENS {
                continue;
            }
            let (a, b) = (rep[br.a], rep[br.b]);
            if a == b {
                continue;
            }
            full[a][a] += y;
            full[b][b] += y;
            full[a][b] -= y;
            full[b][a] -= y;
        }

        let ports: Vec<(usize, usize)> = ports_in
            .iter()
            .map(|&(hot, reference)| (rep[hot], rep[reference]))
            .collect();
        if ports.iter().any(|&(hot, reference)| hot == reference) {
            return Err(MnaError::SingularSystem { f_hz });
        }

        let mut row_of = vec![usize::MAX; ns];
        let mut snodes = Vec::with_capacity(ns - 1);
        for s in 0..ns {
            if s != g {
                row_of[s] = snodes.len();
                snodes.push(s);
            }
        }
        let m = snodes.len();
        let mut y = vec![vec![Complex64::new(0.0, 0.0); m]; m];
        for (i, &si) in snodes.iter().enumerate() {
            for (j, &sj) in snodes.iter().enumerate() {
                y[i][j] = full[si][sj];
            }
        }

        let mut scale = 0.0f64;
        for row in &y {
            for e in row {
                scale = scale.max(e.norm());
            }
        }

        // Port supernodes survive; everything else is eliminated by Schur
        // complement steps.
        let mut is_port_node = vec![false; ns];
        for &(hot, reference) in &ports {
            is_port_node[hot] = true;
            is_port_node[reference] = true;
        }

        let mut active = vec![true; m];
        for (i, &snode) in snodes.iter().enumerate() {
            if is_port_node[snode] {
                continue;
            }
            let pivot = y[i][i];
            if pivot.norm() <= PIVOT_EPS * scale {
                return Err(MnaError::FloatingNode { node: members[snode], f_hz });
            }
            for r in 0..m {
                if r == i || !active[r] || y[r][i].norm() == 0.0 {
                    continue;
                }
                let factor = y[r][i] / pivot;
                for cidx in 0..m {
                    if cidx == i || !active[cidx] {
                        continue;
                    }
                    let upd = factor * y[i][cidx];
                    y[r][cidx] -= upd;
                }
                y[r][i] = Complex64::new(0.0, 0.0);
            }
            active[i] = false;
        }

        let kept: Vec<usize> = snodes
            .iter()
            .enumerate()
            .filter(|(i, _)| active[*i])
            .map(|(_, &s)| s)
            .collect();
        let mut kept_row = vec![usize::MAX; ns];
        for (k, &s) in kept.iter().enumerate() {
            kept_row[s] = k;
        }
        let nk = kept.len();
        let np = ports.len();

        // Voltage gauges: one per connected component with no path to ground.
        // Ports tie their two nodes for this purpose, since a port fixes only
        // the voltage difference.
        let mut uf = UnionFind::new(ns);
        for (br, &yv) in self.branches.iter().zip(&admittances) {
            if yv.norm() < COLLAPSE_SIEMENS {
                uf.union(rep[br.a], rep[br.b]);
            }
        }
        for &(hot, reference) in &ports {
            uf.union(hot, reference);
        }
        let ground_root = uf.find(g);
        let mut gauge_claimed: Vec<bool> = vec![false; ns];
        let mut is_gauge = vec![false; nk];
        for &s in &kept {
            let root = uf.find(s);
            if root == ground_root {
                continue;
            }
            if !gauge_claimed[root] {
                gauge_claimed[root] = true;
                is_gauge[kept_row[s]] = true;
            }
        }

        // Assemble [KCL/gauge | port-constraint] system over kept voltages
        // and port currents, then solve one right-hand side per port.
        let dim = nk + np;
        let mut sys = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for (k, &s) in kept.iter().enumerate() {
            if is_gauge[k] {
                sys[k][k] = Complex64::new(1.0, 0.0);
                continue;
            }
            let i = row_of[s];
            for (k2, &s2) in kept.iter().enumerate() {
                sys[k][k2] = y[i][row_of[s2]];
            }
            for (p, &(hot, reference)) in ports.iter().enumerate() {
                if hot == s {
                    sys[k][nk + p] -= 1.0;
                }
                if reference == s {
                    sys[k][nk + p] += 1.0;
                }
            }
        }
        for (p, &(hot, reference)) in ports.iter().enumerate() {
            if hot != g {
                sys[nk + p][kept_row[hot]] = Complex64::new(1.0, 0.0);
            }
            if reference != g {
                sys[nk + p][kept_row[reference]] = Complex64::new(-1.0, 0.0);
            }
        }

        let mut rhs = vec![vec![Complex64::new(0.0, 0.0); np]; dim];
        for p in 0..np {
            rhs[nk + p][p] = Complex64::new(1.0, 0.0);
        }
        solve_multi(&mut sys, &mut rhs).ok_or(MnaError::SingularSystem { f_hz })?;

        let mut out = vec![vec![Complex64::new(0.0, 0.0); np]; np];
        for col in 0..np {
            for row in 0..np {
                out[row][col] = rhs[nk + row][col];
            }
        }
        Ok(out)
    }

    /// Reduces at every grid point.
    pub fn sweep_reduce(&self, grid: &FrequencyGrid) -> Result<Vec<ReducedYMatrix>, MnaError> {
        grid.points().iter().map(|&f| self.reduce(f)).collect()
    }

    /// Reduces a two-port netlist into a Y-kind sweep response.
    pub fn sweep_two_port(&self, grid: &FrequencyGrid) -> Result<SweepResponse, MnaError> {
        if self.ports.len() != 2 {
            return Err(MnaError::Network(NetworkError::SweepInvalid(
                "two-port sweep needs exactly two ports",
            )));
        }
        let mats = grid
            .points()
            .iter()
            .map(|&f| {
                let r = self.reduce(f)?;
                TwoPort::y([[r.y[0][0], r.y[0][1]], [r.y[1][0], r.y[1][1]]]).map_err(MnaError::from)
            })
            .collect::<Result<Vec<_>, _>>()?;
        SweepResponse::new(grid.clone(), mats).map_err(MnaError::from)
    }

    /// Sweeps the netlist into an S-kind response against the given port
    /// references, tolerating through-degenerate two-ports.
    pub fn sweep_s(
        &self,
        grid: &FrequencyGrid,
        refs: [Complex64; 2],
    ) -> Result<SweepResponse, MnaError> {
        let mats = grid
            .points()
            .iter()
            .map(|&f| {
                let tp = self.reduce_two_port(f)?;
                tp.to_s(refs).map_err(MnaError::from)
            })
            .collect::<Result<Vec<_>, _>>()?;
        SweepResponse::new(grid.clone(), mats).map_err(MnaError::from)
    }
}

/// Gaussian elimination with partial pivoting over multiple right-hand sides.
/// Returns `None` when a pivot degenerates.
fn solve_multi(a: &mut [Vec<Complex64>], rhs: &mut [Vec<Complex64>]) -> Option<()> {
    let n = a.len();
    let nrhs = if n == 0 { 0 } else { rhs[0].len() };
    let mut scale = 0.0f64;
    for row in a.iter() {
        for e in row {
            scale = scale.max(e.norm());
        }
    }
    for k in 0..n {
        let mut best = k;
        let mut best_mag = a[k][k].norm();
        for r in k + 1..n {
            let mag = a[r][k].norm();
            if mag > best_mag {
                best = r;
                best_mag = mag;
            }
        }
        if best_mag <= PIVOT_EPS * scale {
            return None;
        }
        if best != k {
            a.swap(k, best);
            rhs.swap(k, best);
        }
        let pivot = a[k][k];
        for r in k + 1..n {
            if a[r][k].norm() == 0.0 {
                continue;
            }
            let factor = a[r][k] / pivot;
            for cidx in k..n {
                let upd = factor * a[k][cidx];
                a[r][cidx] -= upd;
            }
            for j in 0..nrhs {
                let upd = factor * rhs[k][j];
                rhs[r][j] -= upd;
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..nrhs {
            let mut acc = rhs[k][j];
            for cidx in k + 1..n {
                acc -= a[k][cidx] * rhs[cidx][j];
            }
            rhs[k][j] = acc / a[k][k];
        }
    }
    Some(())
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb] = ra;
        }
    }
}
