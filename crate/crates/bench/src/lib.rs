//! Parameter families shared by the benchmarks.

use cgphase::linalg::MAX_DIM;
use cgphase::nalgebra::DMatrix;
use cgphase::{ComplexVec3, TwoLevelHamiltonian};
use num_complex::Complex64;

/// Traceless two-level family `R·σ` over three complex coordinates.
pub fn field_map(p: &[Complex64]) -> DMatrix<Complex64> {
    TwoLevelHamiltonian::traceless(ComplexVec3::new(p[0], p[1], p[2])).to_dmatrix()
}

/// A field block next to a rigid ladder, padded to `dim` levels.
pub fn padded_map(dim: usize) -> impl Fn(&[Complex64]) -> DMatrix<Complex64> + Sync {
    assert!((2..=MAX_DIM).contains(&dim));
    move |p| {
        let mut m = DMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (2, 2)).copy_from(&field_map(p));
        for k in 2..dim {
            m[(k, k)] = Complex64::new(3.0 * k as f64, -0.1);
            m[(k, k - 1)] = p[0] * 0.1;
            m[(k - 1, k)] = p[1] * 0.1;
        }
        m
    }
}
