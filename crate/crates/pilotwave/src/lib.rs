//! A relativistic pilot-wave laboratory in 1+1 dimensions.
//!
//! The crate evolves Dirac and Klein-Gordon wavefunctions on a periodic
//! lattice, extracts the probability current and its flow velocity, and
//! integrates particle worldlines either riding that flow (the guidance
//! condition) or under the general coupled equation of motion. Around this
//! core sit the energy-momentum bookkeeping, particle-sourced field
//! evolution, classical testbeds, and ensemble-level statistics that check
//! the trajectories against quantum predictions.
//!
//! Modules follow the physics:
//!
//! - [`geometry`]: Minkowski vectors, signature (+, -).
//! - [`grid`]: the periodic lattice and its FFT machinery.
//! - [`fields`]: wavefunction slices, exact spectral steppers, the
//!   regularized particle density, source terms.
//! - [`currents`]: j, rest density, flow velocity, and their flags.
//! - [`dynamics`]: guidance and general equations of motion, classical
//!   backgrounds.
//! - [`stress_energy`]: the three-part energy-momentum tensor and its
//!   conservation checks.
//! - [`ensemble`]: position sampling, propagation, equivariance statistics.
//! - [`io`]: deterministic CSV and binary exports.

// Negated float comparisons like !(x > 0.0) are deliberate: they reject NaN
// along with the out-of-range values. Indexed loops mirror the lattice math.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod currents;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod io;
pub mod grid;
pub mod stress_energy;

pub use error::{Error, Result};
