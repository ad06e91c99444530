//! Complex geometric phases of non-Hermitian quantum systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`twolevel`]: generic two-level Hamiltonians `λ0·1 + R·σ`, complex radius,
//!   complex spherical angles, biorthogonal eigensystems and degeneracy
//!   classification.
//! * [`phase`]: closed-form monopole phases, discretized Wilson loops of the
//!   biorthogonal connection, curvature and the effective two-level reduction.
//! * [`adiabatic`]: integration of the Schrödinger equation and its adjoint
//!   around slow loops, with dynamical extraction of the geometric phase.
//! * [`specfun`]: complete elliptic integrals of complex modulus.
//! * [`ising`]: the dissipative transverse-field Ising chain.
//! * [`scan`]: parameter scans and their CSV/JSON output.

pub mod adiabatic;
pub mod error;
pub mod ising;
pub mod linalg;
mod ode;
pub mod phase;
pub mod quad;
pub mod scan;
pub mod specfun;
pub mod twolevel;

pub use error::{Error, Result};
pub use nalgebra;
pub use num_complex::Complex64;
pub use phase::{LoopPath, PhaseMethod, PhaseResult};
pub use twolevel::{
    BiorthogonalEigensystem, ComplexAngles, ComplexVec3, DegeneracyClass, DegeneracyKind, TwoLevelHamiltonian,
};
