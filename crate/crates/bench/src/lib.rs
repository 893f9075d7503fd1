//! Shared fixtures for the benchmarks: the reference 64×128 annulus and a
//! perturbed vortex ring on it.

use std::sync::Arc;

use alphaflow_core::{InitialCondition, ModelConfig, ModelKind, PolarGrid, Simulation};

pub const PERTURBED_RING: InitialCondition = InitialCondition::PerturbedRing {
    r_c: 1.5,
    sigma: 0.15,
    amplitude: 1.0,
    a: 0.1,
    m: 3,
};

pub fn annulus(n_radial: usize, n_angular: usize) -> Arc<PolarGrid> {
    Arc::new(PolarGrid::annulus(1.0, 2.0, n_radial, n_angular).expect("valid annulus"))
}

/// An α-Euler simulation of the perturbed ring with `γ₁ = 1`.
pub fn alpha_euler(n_radial: usize, n_angular: usize, alpha: f64) -> Simulation {
    let mut cfg = ModelConfig::new(ModelKind::AlphaEuler, alpha, 1.0, PERTURBED_RING);
    cfg.gamma = vec![1.0];
    Simulation::new(annulus(n_radial, n_angular), cfg).expect("valid config")
}
