//! Modeling and design library for acoustic-resonator bandpass filters.
//!
//! The crate is organized bottom-up:
//!
//! - [`network`]: frequency grids, 2x2 network matrices (S/Y/Z/ABCD) with
//!   power-wave reference handling, cascading, renormalization, passivity.
//! - [`mna`]: nodal analysis of small admittance netlists reduced to port
//!   Y-matrices, including floating (transformerless differential) networks.
//! - [`resonator`]: multi-branch Butterworth-Van Dyke resonator model with
//!   series parasitics, spur injection and area scaling.
//! - [`topology`]: filter netlist builders (ladder, lattice variants) and the
//!   lattice closed form.
//! - [`matching`]: simultaneous conjugate matching and stability figures.
//! - [`metrics`]: passband metric extraction from swept S-parameters.
//! - [`extraction`]: mBVD parameter fitting from one-port measurements.
//! - [`design`]: target-driven evaluation and derivative-free optimization.

pub mod design;
pub mod extraction;
pub mod matching;
pub mod metrics;
pub mod mna;
pub mod network;
pub mod optim;
pub mod resonator;
pub mod topology;

pub use network::{FrequencyGrid, GridSpacing, NetworkError, SweepResponse, TwoPort, TwoPortKind};
