//! Biorthogonal curvature from perturbation theory and its surface flux.
//!
//! ```text
//! F_ab = i Σ_{m≠n} [⟨ũ_n|∂_a H|u_m⟩⟨ũ_m|∂_b H|u_n⟩ − (a↔b)] / (E_m − E_n)²
//! ```
//!
//! `∂H` is taken by central differences along the real coordinate directions,
//! so for complex coordinates the map is assumed holomorphic.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{PhaseMethod, PhaseResult};
use crate::error::{Error, Result};
use crate::linalg::{biorthogonal_eig, pair};

/// Relative central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn point_scale(point: &[Complex64]) -> f64 {
    point.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

fn derivative<F>(map: &F, point: &[Complex64], axis: usize, h: f64) -> DMatrix<Complex64>
where
    F: Fn(&[Complex64]) -> DMatrix<Complex64>,
{
    let mut plus = point.to_vec();
    let mut minus = point.to_vec();
    plus[axis] += h;
    minus[axis] -= h;
    (map(&plus) - map(&minus)) / Complex64::from(2.0 * h)
}

/// Every component `F_ab` at `point` for `level`.
pub fn curvature_tensor<F>(map: &F, point: &[Complex64], level: usize, step: f64) -> Result<DMatrix<Complex64>>
where
    F: Fn(&[Complex64]) -> DMatrix<Complex64>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("step must be positive, got {step}")));
    }
    let eig = biorthogonal_eig(&map(point), 1e-10)?;
    let dim = eig.dim();
    if level >= dim {
        return Err(Error::InvalidInput(format!(
            "level {level} out of range for dimension {dim}"
        )));
    }
    let d = point.len();
    let h = step * point_scale(point);
    // v[a][m] = ⟨ũ_n|∂_a H|u_m⟩, w[a][m] = ⟨ũ_m|∂_a H|u_n⟩
    let mut v = vec![vec![Complex64::new(0.0, 0.0); dim]; d];
    let mut w = v.clone();
    for a in 0..d {
        let dh = derivative(map, point, a, h);
        let dh_un = &dh * &eig.right[level];
        let un_dh = dh.transpose() * &eig.left[level];
        for m in 0..dim {
            v[a][m] = pair(&un_dh, &eig.right[m]);
            w[a][m] = pair(&eig.left[m], &dh_un);
        }
    }
    let mut f = DMatrix::zeros(d, d);
    for a in 0..d {
        for b in a + 1..d {
            let mut s = Complex64::new(0.0, 0.0);
            for m in (0..dim).filter(|&m| m != level) {
                let de = eig.values[m] - eig.values[level];
                s += (v[a][m] * w[b][m] - v[b][m] * w[a][m]) / (de * de);
            }
            f[(a, b)] = I * s;
            f[(b, a)] = -I * s;
        }
    }
    Ok(f)
}

/// Single component `F_ab` with `plane = (a, b)`.
pub fn curvature_fd<F>(
    map: &F,
    point: &[Complex64],
    level: usize,
    plane: (usize, usize),
    step: f64,
) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> DMatrix<Complex64>,
{
    let (a, b) = plane;
    if a >= point.len() || b >= point.len() {
        return Err(Error::InvalidInput(format!(
            "plane ({a}, {b}) outside a {}-dimensional parameter space",
            point.len()
        )));
    }
    Ok(curvature_tensor(map, point, level, step)?[(a, b)])
}

fn flux_at<F, S>(map: &F, surface: &S, level: usize, cells: usize, step: f64) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> DMatrix<Complex64> + Sync,
    S: Fn(f64, f64) -> Vec<Complex64> + Sync,
{
    let du = 1.0 / cells as f64;
    let contributions: Vec<Complex64> = (0..cells * cells)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / cells, idx % cells);
            let (u0, v0) = (i as f64 * du, j as f64 * du);
            let p00 = surface(u0, v0);
            let p10 = surface(u0 + du, v0);
            let p11 = surface(u0 + du, v0 + du);
            let p01 = surface(u0, v0 + du);
            let mut acc = Complex64::new(0.0, 0.0);
            for (p1, p2) in [(&p10, &p11), (&p11, &p01)] {
                let centroid: Vec<Complex64> = (0..p00.len()).map(|k| (p00[k] + p1[k] + p2[k]) / 3.0).collect();
                let f = curvature_tensor(map, &centroid, level, step)?;
                for a in 0..p00.len() {
                    for b in a + 1..p00.len() {
                        let (e1a, e1b) = (p1[a] - p00[a], p1[b] - p00[b]);
                        let (e2a, e2b) = (p2[a] - p00[a], p2[b] - p00[b]);
                        acc += f[(a, b)] * (e1a * e2b - e1b * e2a) * 0.5;
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(contributions.iter().sum())
}

/// Flux of the curvature of `level` through `surface(u, v)`, `(u, v) ∈ [0,1]²`,
/// on `cells × cells` squares split into two triangles each. The boundary
/// `u = 1, v: 0 → 1` is traversed in the positive sense.
pub fn surface_flux<F, S>(map: &F, surface: &S, level: usize, cells: usize, step: f64) -> Result<PhaseResult>
where
    F: Fn(&[Complex64]) -> DMatrix<Complex64> + Sync,
    S: Fn(f64, f64) -> Vec<Complex64> + Sync,
{
    if cells < 4 {
        return Err(Error::InvalidInput(format!(
            "need at least 4 cells per side, got {cells}"
        )));
    }
    let fine = flux_at(map, surface, level, cells, step)?;
    let coarse = flux_at(map, surface, level, cells / 2, step)?;
    let (a, b) = ((cells * cells) as f64, ((cells / 2) * (cells / 2)) as f64);
    let gamma = (fine * a - coarse * b) / (a - b);
    Ok(PhaseResult {
        gamma,
        method: PhaseMethod::Curvature,
        resolution: cells,
        error_estimate: (gamma - fine).norm(),
    })
}

/// Cap of the sphere `|ρ| = radius` around the north pole down to polar angle
/// `theta_max`, shifted to `ρ − iε ẑ`. `u` runs over the polar angle and `v`
/// over the azimuth, so the boundary is [`LoopPath::azimuthal`](super::LoopPath::azimuthal)
/// at `r = radius·sin θ_max`, `z = radius·cos θ_max`.
pub fn spherical_cap(radius: f64, theta_max: f64, eps: f64) -> impl Fn(f64, f64) -> Vec<Complex64> + Sync {
    move |u, v| {
        let theta = u * theta_max;
        let phi = std::f64::consts::TAU * v;
        vec![
            Complex64::new(radius * theta.sin() * phi.cos(), 0.0),
            Complex64::new(radius * theta.sin() * phi.sin(), 0.0),
            Complex64::new(radius * theta.cos(), -eps),
        ]
    }
}
