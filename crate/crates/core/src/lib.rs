//! Desk-scale simulation of cluster-state generation with Rydberg phase gates
//! in double-well optical superlattices.
//!
//! Modules follow the physics pipeline:
//!
//! - [`numerics`]: Hermitian eigendecomposition and fixed-step RK4 propagation.
//! - [`lattice`]: superlattice band structure, Wannier functions, minima and vector shift.
//! - [`ramps`]: ground-band retention through merge and stretch manipulations.
//! - [`gate_noblockade`] and [`gate_blockade`]: exact two-atom gate dynamics.
//! - [`budget`]: analytic error terms, Table-style presets and timing.
//! - [`cluster`]: entangling schedules, statevector protocol and stabilizers.
//!
//! Units: lattice energies in recoil units `E_R`, lengths in `1/k`; gate
//! frequencies are ordinary frequencies (MHz) multiplied by 2π for evolution,
//! times in μs, decay rates in 1/s.

// Range checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod cluster;
pub mod error;
pub mod gate;
pub mod gate_blockade;
pub mod gate_noblockade;
pub mod lattice;
pub mod numerics;
pub mod ramps;

pub use error::{Error, Result};
pub use gate::{BranchOutcome, GateOutcome, InteractionParams, PulseParams};
pub use lattice::LatticeParams;
pub use num_complex::Complex64;
