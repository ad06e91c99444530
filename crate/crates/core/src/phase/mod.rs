//! Complex geometric phases: closed-form monopole phases, discretized loop
//! integrals of the biorthogonal connection `A = i⟨ũ|d u⟩`, curvature, and
//! the effective two-level reduction near a degeneracy.
//!
//! Hamiltonian families are plain closures from a parameter point (complex
//! coordinates) to a square matrix of dimension at most
//! [`linalg::MAX_DIM`](crate::linalg::MAX_DIM). They are evaluated from
//! several threads and must therefore be `Sync`.

mod analytic;
mod curvature;
mod path;
mod reduction;
mod wilson;

use serde::{Deserialize, Serialize};

pub use analytic::{
    monopole_phase, monopole_phase_with, phase_limits_im, phase_limits_re, Level, ZSign, DEFAULT_MONOPOLE_CHARGE,
};
pub use curvature::{curvature_fd, curvature_tensor, spherical_cap, surface_flux, DEFAULT_FD_STEP};
pub use path::LoopPath;
pub use reduction::{effective_two_level, reduce_along_loop, EffectiveTwoLevel, ReducedPhase};
pub use wilson::{determinant_line_phase, ground_phase_sum, wilson_loop_phase, wilson_loop_phase_with, WilsonOptions};

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseMethod {
    Analytic,
    WilsonLoop,
    Adiabatic,
    Curvature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    /// Complex phase in radians, not reduced modulo 2π.
    pub gamma: Complex64,
    pub method: PhaseMethod,
    /// Segments, time steps or surface cells used; 0 for closed forms.
    pub resolution: usize,
    pub error_estimate: f64,
}

impl PhaseResult {
    pub fn analytic(gamma: Complex64) -> Self {
        Self {
            gamma,
            method: PhaseMethod::Analytic,
            resolution: 0,
            error_estimate: 0.0,
        }
    }
}
