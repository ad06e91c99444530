//! Discretized loop integrals of the biorthogonal connection.
//!
//! For a tracked set of levels `S` and loop points `λ_0 … λ_n = λ_0` every
//! link contributes
//!
//! ```text
//! ½ [ log det ⟨ũ_a(λ_j)|u_b(λ_{j+1})⟩ − log det ⟨ũ_a(λ_{j+1})|u_b(λ_j)⟩ ],   a, b ∈ S
//! ```
//!
//! and `γ = i Σ_j (link)`. The symmetric link is gauge invariant under any
//! (non-unitary) change of basis within `S`, and its error expansion contains
//! only even powers of the spacing, so two Richardson steps over the
//! resolutions `n`, `n/2`, `n/4` give the returned value and error estimate.
//!
//! The branch of the complex logarithm is fixed per link (principal value),
//! which makes the total well defined (not only mod 2π) as long as the
//! eigenvectors are kept in a gauge that is smooth along the loop. We use the
//! anchor gauge: each right eigenvector is divided by a fixed component (the
//! last one that stays away from zero on the whole loop), reproducing the
//! spherical gauge `|u₋⟩ = (−e^{−iφ} sin θ/2, cos θ/2)ᵀ` of the two-level
//! problem up to a loop-independent factor.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{LoopPath, PhaseMethod, PhaseResult};
use crate::error::{Error, Result};
use crate::linalg::{biorthogonal_eig, pair, DenseEigen};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilsonOptions {
    /// Degeneracy tolerance handed to the dense eigensolver.
    pub eig_tol: f64,
    /// Minimal gap between the tracked level and any other, relative to the
    /// largest matrix entry.
    pub gap_tol: f64,
    /// Maximal change of the extrapolated phase between resolutions `n` and
    /// `n/2` before `NonConvergence` is raised.
    pub tol: f64,
    /// Components whose relative size drops below this anywhere on the loop
    /// are not used as the gauge anchor.
    pub anchor_floor: f64,
}

impl Default for WilsonOptions {
    fn default() -> Self {
        Self {
            eig_tol: 1e-10,
            gap_tol: 1e-8,
            tol: 1e-6,
            anchor_floor: 1e-6,
        }
    }
}

struct Tracked {
    /// `right[level][j]`, `left[level][j]` for `j = 0..=n`.
    right: Vec<Vec<DVector<Complex64>>>,
    left: Vec<Vec<DVector<Complex64>>>,
}

fn matrix_scale(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn overlap_measure(left: &DVector<Complex64>, right: &DVector<Complex64>) -> f64 {
    pair(left, right).norm() / (left.norm() * right.norm())
}

fn follow(prev_left: &DVector<Complex64>, prev_energy: Complex64, eig: &DenseEigen) -> usize {
    let scores: Vec<f64> = eig.right.iter().map(|u| overlap_measure(prev_left, u)).collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..eig.dim())
        .filter(|&m| scores[m] >= best * (1.0 - 1e-12))
        .min_by(|&a, &b| {
            (eig.values[a] - prev_energy)
                .norm()
                .total_cmp(&(eig.values[b] - prev_energy).norm())
        })
        .unwrap_or(0)
}

fn anchor_component(right: &[DVector<Complex64>], floor: f64) -> usize {
    let dim = right[0].len();
    let min_weight: Vec<f64> = (0..dim)
        .map(|k| {
            right
                .iter()
                .map(|u| u[k].norm() / u.norm())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    (0..dim).rev().find(|&k| min_weight[k] > floor).unwrap_or_else(|| {
        (0..dim)
            .max_by(|&a, &b| min_weight[a].total_cmp(&min_weight[b]))
            .unwrap_or(0)
    })
}

fn track<F>(map: &F, path: &LoopPath, levels: &[usize], n: usize, opts: &WilsonOptions) -> Result<Tracked>
where
    F: Fn(&[Complex64]) -> DMatrix<Complex64> + Sync,
{
    let points = path.points_at(n);
    let matrices: Vec<DMatrix<Complex64>> = points.par_iter().map(|p| map(p)).collect();
    let eigs: Vec<DenseEigen> = matrices
        .par_iter()
        .map(|m| biorthogonal_eig(m, opts.eig_tol))
        .collect::<Result<_>>()?;

    let dim = eigs[0].dim();
    if eigs.iter().any(|e| e.dim() != dim) {
        return Err(Error::InvalidInput("matrix dimension changes along the loop".into()));
    }
    if let Some(&bad) = levels.iter().find(|&&l| l >= dim) {
        return Err(Error::InvalidInput(format!(
            "level {bad} out of range for dimension {dim}"
        )));
    }

    let mut right = Vec::with_capacity(levels.len());
    let mut left = Vec::with_capacity(levels.len());
    for &level in levels {
        let mut idx = level;
        let mut us = Vec::with_capacity(n + 1);
        let mut ls = Vec::with_capacity(n + 1);
        for (j, eig) in eigs.iter().enumerate() {
            if j > 0 {
                idx = follow(&ls[j - 1], eigs[j - 1].values[idx], eig);
            }
            let gap = eig.gap(idx);
            if gap <= opts.gap_tol * matrix_scale(&matrices[j]) {
                return Err(Error::LevelCrossing {
                    level,
                    s: j as f64 / n as f64,
                    gap,
                });
            }
            us.push(eig.right[idx].clone());
            ls.push(eig.left[idx].clone());
        }
        if idx != level {
            return Err(Error::NonConvergence(format!(
                "level {level} returns as level {idx}: the loop encircles an exceptional point"
            )));
        }
        let k = anchor_component(&us, opts.anchor_floor);
        for (u, l) in us.iter_mut().zip(ls.iter_mut()) {
            let a = u[k];
            *u /= a;
            *l *= a;
        }
        right.push(us);
        left.push(ls);
    }
    Ok(Tracked { right, left })
}

fn link_det(tr: &Tracked, from: usize, to: usize) -> Complex64 {
    let k = tr.right.len();
    if k == 1 {
        return pair(&tr.left[0][from], &tr.right[0][to]);
    }
    let m = DMatrix::from_fn(k, k, |a, b| pair(&tr.left[a][from], &tr.right[b][to]));
    m.determinant()
}

/// `γ` from every `stride`-th point of a tracked loop with `n` segments.
fn strided_phase(tr: &Tracked, n: usize, stride: usize) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut j = 0;
    while j < n {
        let next = j + stride;
        let fwd = link_det(tr, j, next).ln();
        let bwd = link_det(tr, next, j).ln();
        if fwd.im.abs() > FRAC_PI_2 || bwd.im.abs() > FRAC_PI_2 || !fwd.is_finite() {
            return Err(Error::NonConvergence(format!(
                "segment phase {:.3} exceeds pi/2 at {} segments",
                fwd.im.abs().max(bwd.im.abs()),
                n / stride
            )));
        }
        acc += (fwd - bwd) * 0.5;
        j = next;
    }
    Ok(I * acc)
}

fn richardson(fine: Complex64, n_fine: usize, coarse: Complex64, n_coarse: usize) -> Complex64 {
    let (a, b) = ((n_fine * n_fine) as f64, (n_coarse * n_coarse) as f64);
    (fine * a - coarse * b) / (a - b)
}

/// Phase of the determinant line of the `occupied` levels.
pub fn determinant_line_phase<F>(
    map: &F,
    path: &LoopPath,
    occupied: &[usize],
    opts: &WilsonOptions,
) -> Result<PhaseResult>
where
    F: Fn(&[Complex64]) -> DMatrix<Complex64> + Sync,
{
    if occupied.is_empty() {
        return Err(Error::InvalidInput("no levels selected".into()));
    }
    let n = path.n_segments();
    let fine = track(map, path, occupied, n, opts)?;
    let g1 = strided_phase(&fine, n, 1)?;

    let coarse = |m: usize| -> Result<(Complex64, usize)> {
        if n.is_multiple_of(m) {
            Ok((strided_phase(&fine, n, n / m)?, m))
        } else {
            let tr = track(map, path, occupied, m, opts)?;
            Ok((strided_phase(&tr, m, 1)?, m))
        }
    };
    let (n2, n4) = (n / 2, n / 4);
    let (gamma, error_estimate) = match (coarse(n2), coarse(n4)) {
        (Ok((g2, m2)), Ok((g4, m4))) if m4 >= 2 => {
            let r1 = richardson(g1, n, g2, m2);
            let r2 = richardson(g2, m2, g4, m4);
            (r1, (r1 - r2).norm())
        }
        _ => (g1, f64::INFINITY),
    };
    if error_estimate > opts.tol {
        return Err(Error::NonConvergence(format!(
            "loop phase changed by {error_estimate:e} between {n} and {n2} segments"
        )));
    }
    Ok(PhaseResult {
        gamma,
        method: PhaseMethod::WilsonLoop,
        resolution: n,
        error_estimate,
    })
}

/// Geometric phase of one level, counted from the lowest real part at `s = 0`.
pub fn wilson_loop_phase<F>(map: &F, path: &LoopPath, level: usize) -> Result<PhaseResult>
where
    F: Fn(&[Complex64]) -> DMatrix<Complex64> + Sync,
{
    wilson_loop_phase_with(map, path, level, &WilsonOptions::default())
}

pub fn wilson_loop_phase_with<F>(map: &F, path: &LoopPath, level: usize, opts: &WilsonOptions) -> Result<PhaseResult>
where
    F: Fn(&[Complex64]) -> DMatrix<Complex64> + Sync,
{
    determinant_line_phase(map, path, &[level], opts)
}

/// `γ = Σ_i γ_i` over the occupied levels of a product ground state.
pub fn ground_phase_sum<F>(map: &F, path: &LoopPath, occupied: &[usize], opts: &WilsonOptions) -> Result<PhaseResult>
where
    F: Fn(&[Complex64]) -> DMatrix<Complex64> + Sync,
{
    let mut gamma = Complex64::new(0.0, 0.0);
    let mut error_estimate = 0.0;
    for &level in occupied {
        let r = wilson_loop_phase_with(map, path, level, opts)?;
        gamma += r.gamma;
        error_estimate += r.error_estimate;
    }
    Ok(PhaseResult {
        gamma,
        method: PhaseMethod::WilsonLoop,
        resolution: path.n_segments(),
        error_estimate,
    })
}
