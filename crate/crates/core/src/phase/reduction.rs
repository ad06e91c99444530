//! Reduction of a pair of neighbouring levels to an effective two-level
//! Hamiltonian `λ0·1 + r·σ`.
//!
//! The pair spans an invariant subspace with spectral projector
//! `P = |u_n⟩⟨ũ_n| + |u_{n+1}⟩⟨ũ_{n+1}|`. In the basis `B = P[e_a e_b]`
//! (two coordinate vectors projected into the subspace) the restriction of
//! `H` is `M⁻¹ Eᵀ P H B` with `M = Eᵀ P E`. The coordinate pair `(a, b)` is
//! the one with the best-conditioned `M` and is kept fixed along a loop so the
//! effective family stays smooth.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{determinant_line_phase, LoopPath, PhaseResult, WilsonOptions};
use crate::error::{Error, Result};
use crate::linalg::{biorthogonal_eig, DenseEigen};
use crate::twolevel::TwoLevelHamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveTwoLevel {
    pub hamiltonian: TwoLevelHamiltonian,
    /// Coordinate indices `(a, b)` spanning the reduced basis.
    pub basis: (usize, usize),
    /// `|E_{n+1} − E_n|`.
    pub pair_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedPhase {
    /// Phase of the lower level of the effective two-level family.
    pub effective: PhaseResult,
    /// Summed phases of all levels outside the pair.
    pub residual: PhaseResult,
}

fn check_pair(eig: &DenseEigen, n: usize) -> Result<f64> {
    let dim = eig.dim();
    if n + 1 >= dim {
        return Err(Error::InvalidInput(format!(
            "pair ({n}, {}) out of range for dimension {dim}",
            n + 1
        )));
    }
    let (lo, hi) = (eig.values[n], eig.values[n + 1]);
    let pair_gap = (hi - lo).norm();
    for m in (0..dim).filter(|&m| m != n && m != n + 1) {
        let d = (eig.values[m] - lo).norm().min((eig.values[m] - hi).norm());
        if d < pair_gap {
            return Err(Error::AmbiguousPair { n, other: m });
        }
    }
    Ok(pair_gap)
}

fn projector(eig: &DenseEigen, n: usize) -> DMatrix<Complex64> {
    &eig.right[n] * eig.left[n].transpose() + &eig.right[n + 1] * eig.left[n + 1].transpose()
}

fn restrict(h: &DMatrix<Complex64>, p: &DMatrix<Complex64>, (a, b): (usize, usize)) -> Result<TwoLevelHamiltonian> {
    let dim = h.nrows();
    let mut basis = DMatrix::zeros(dim, 2);
    basis.set_column(0, &p.column(a));
    basis.set_column(1, &p.column(b));
    let mut rows = DMatrix::zeros(2, dim);
    rows.set_row(0, &p.row(a));
    rows.set_row(1, &p.row(b));
    let m = Matrix2::new(p[(a, a)], p[(a, b)], p[(b, a)], p[(b, b)]);
    let inv = m
        .try_inverse()
        .ok_or_else(|| Error::NonConvergence("reduced basis is singular".into()))?;
    let x = rows * h * basis;
    let heff = inv * Matrix2::new(x[(0, 0)], x[(0, 1)], x[(1, 0)], x[(1, 1)]);
    Ok(TwoLevelHamiltonian::from_matrix([
        [heff[(0, 0)], heff[(0, 1)]],
        [heff[(1, 0)], heff[(1, 1)]],
    ]))
}

fn best_basis(p: &DMatrix<Complex64>) -> (usize, usize) {
    let dim = p.nrows();
    let mut best = (0, 1);
    let mut best_det = f64::NEG_INFINITY;
    for a in 0..dim {
        for b in a + 1..dim {
            let det = (p[(a, a)] * p[(b, b)] - p[(a, b)] * p[(b, a)]).norm();
            if det > best_det {
                best_det = det;
                best = (a, b);
            }
        }
    }
    best
}

fn reduce_with(h: &DMatrix<Complex64>, n: usize, basis: Option<(usize, usize)>) -> Result<EffectiveTwoLevel> {
    let eig = biorthogonal_eig(h, 1e-10)?;
    let pair_gap = check_pair(&eig, n)?;
    let p = projector(&eig, n);
    let basis = basis.unwrap_or_else(|| best_basis(&p));
    Ok(EffectiveTwoLevel {
        hamiltonian: restrict(h, &p, basis)?,
        basis,
        pair_gap,
    })
}

/// Effective two-level Hamiltonian of levels `n`, `n + 1` at `point`.
pub fn effective_two_level<F>(map: &F, point: &[Complex64], n: usize) -> Result<EffectiveTwoLevel>
where
    F: Fn(&[Complex64]) -> DMatrix<Complex64>,
{
    reduce_with(&map(point), n, None)
}

/// Loop phase of the effective family next to the phases it leaves out.
pub fn reduce_along_loop<F>(map: &F, path: &LoopPath, n: usize, opts: &WilsonOptions) -> Result<ReducedPhase>
where
    F: Fn(&[Complex64]) -> DMatrix<Complex64> + Sync,
{
    let start = effective_two_level(map, &path.sample(0.0), n)?;
    for p in path.points() {
        reduce_with(&map(&p), n, Some(start.basis))?;
    }
    let reduced = |p: &[Complex64]| match reduce_with(&map(p), n, Some(start.basis)) {
        Ok(e) => e.hamiltonian.to_dmatrix(),
        Err(_) => DMatrix::from_element(2, 2, Complex64::new(f64::NAN, 0.0)),
    };
    let effective = determinant_line_phase(&reduced, path, &[0], opts)?;

    let dim = map(&path.sample(0.0)).nrows();
    let others: Vec<usize> = (0..dim).filter(|&m| m != n && m != n + 1).collect();
    let residual = if others.is_empty() {
        PhaseResult {
            gamma: Complex64::new(0.0, 0.0),
            ..effective
        }
    } else {
        super::ground_phase_sum(map, path, &others, opts)?
    };
    Ok(ReducedPhase {
        effective,
        residual: PhaseResult {
            error_estimate: if others.is_empty() {
                0.0
            } else {
                residual.error_estimate
            },
            ..residual
        },
    })
}
