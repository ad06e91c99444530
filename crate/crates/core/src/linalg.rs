//! Dense biorthogonal eigensystems for small (N ≤ 8) diagonalizable matrices.
//!
//! Eigenvalues come from a complex Schur decomposition; right eigenvectors are
//! the smallest right singular vectors of `A − λ·1`; left eigenvectors are the
//! rows of the inverse of the right-eigenvector matrix, so `⟨ũ_m|u_n⟩ = δ_mn`
//! holds to roundoff. Levels are ordered by real part, then imaginary part.

use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::twolevel::{DegeneracyClass, DegeneracyKind};

pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone)]
pub struct DenseEigen {
    pub values: Vec<Complex64>,
    /// Right eigenvectors `|u_n⟩`, unit 2-norm.
    pub right: Vec<DVector<Complex64>>,
    /// Left eigenvectors `⟨ũ_n|` (bilinear pairing, no conjugation).
    pub left: Vec<DVector<Complex64>>,
}

impl DenseEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Smallest distance from level `n` to any other level.
    pub fn gap(&self, n: usize) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != n)
            .map(|(_, e)| (e - self.values[n]).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Bilinear pairing `Σ a_k b_k`.
pub fn pair(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn matrix_scale(a: &DMatrix<Complex64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn biorthogonal_eig(a: &DMatrix<Complex64>, tol: f64) -> Result<DenseEigen> {
    let n = a.nrows();
    if n == 0 || n != a.ncols() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "dimension {n} exceeds the dense-solver limit {MAX_DIM}"
        )));
    }
    if a.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    if n == 1 {
        return Ok(DenseEigen {
            values: vec![a[(0, 0)]],
            right: vec![DVector::from_element(1, one)],
            left: vec![DVector::from_element(1, one)],
        });
    }

    let scale = matrix_scale(a).max(f64::MIN_POSITIVE);
    let schur = Schur::try_new(a.clone(), 1e-15 * scale, 10_000)
        .ok_or_else(|| Error::NonConvergence("Schur iteration".into()))?;
    let mut values: Vec<Complex64> = schur
        .eigenvalues()
        .ok_or_else(|| Error::NonConvergence("Schur form is not triangular".into()))?
        .iter()
        .copied()
        .collect();
    values.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));

    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol * scale {
                return Err(Error::Degeneracy(classify_pair(a, values[i], tol, scale)));
            }
        }
    }

    let mut vmat = DMatrix::<Complex64>::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        let shifted = a - DMatrix::identity(n, n) * lambda;
        let svd = SVD::new_unordered(shifted, false, true);
        let v_t = svd.v_t.ok_or_else(|| Error::NonConvergence("SVD".into()))?;
        let imin = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let v: DVector<Complex64> = v_t.row(imin).transpose().map(|z| z.conj());
        let v = &v / Complex64::from(v.norm());
        vmat.set_column(k, &v);
    }

    // merged eigenvectors: the eigenvalue split of a Jordan block is only
    // O(sqrt(eps)), so the test has to look at the eigenvector matrix
    let sigma_min = SVD::new_unordered(vmat.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let exceptional = Error::Degeneracy(DegeneracyClass {
        kind: DegeneracyKind::ExceptionalPoint,
        residual: sigma_min,
    });
    if sigma_min <= tol.sqrt() {
        return Err(exceptional);
    }
    let inv = vmat.clone().try_inverse().ok_or(exceptional)?;

    let right: Vec<DVector<Complex64>> = (0..n).map(|k| vmat.column(k).into_owned()).collect();
    let left: Vec<DVector<Complex64>> = (0..n).map(|k| inv.row(k).transpose()).collect();
    let values = (0..n).map(|k| pair(&left[k], &(a * &right[k]))).collect();

    Ok(DenseEigen { values, right, left })
}

/// A repeated eigenvalue is diabolic when its eigenspace is two-dimensional
/// and exceptional when the eigenvectors have merged.
fn classify_pair(a: &DMatrix<Complex64>, lambda: Complex64, tol: f64, scale: f64) -> DegeneracyClass {
    let n = a.nrows();
    let shifted = a - DMatrix::identity(n, n) * lambda;
    let mut sv: Vec<f64> = SVD::new_unordered(shifted, false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(f64::total_cmp);
    let second = sv.get(1).copied().unwrap_or(0.0) / scale;
    let kind = if second <= tol.sqrt() {
        DegeneracyKind::DiabolicPoint
    } else {
        DegeneracyKind::ExceptionalPoint
    };
    DegeneracyClass { kind, residual: second }
}
