//! Vorticity-form α-Euler and second-grade fluids on an annulus or a disk.
//!
//! The state is a scalar potential vorticity `q` plus one circulation per inner
//! boundary circle. Velocities come from a filtered elliptic inversion with no-slip
//! conditions; `q` is transported by a semi-Lagrangian scheme.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod grid;
pub mod oracles;
pub mod probe;
pub mod spectral;

pub use diagnostics::{
    convergence_table, energy_h1_alpha, h1_norm, l2_norm, l2_velocity_error, lp_norm, ConvergenceRow, DiagnosticRecord,
};
pub use dynamics::{
    advect, diffuse, run, second_grade_relaxation, InitialCondition, ModelConfig, ModelKind, NullRecorder, Recorder,
    SimState, Simulation,
};
pub use elliptic::{curl, harmonic_field, perp_grad, vector_laplacian, EllipticWorkspace};
pub use error::{Error, Result};
pub use field::{ScalarField, VectorField};
pub use grid::{Parity, PolarGrid, RadialSpacing};
pub use probe::{probe_operator_bound, Band, ProbeReport};
