//! Adiabatic transport of a biorthogonal pair around a slow loop.
//!
//! The right state obeys `i d|ψ⟩/dt = H|ψ⟩` and the left state its adjoint
//! `−i d⟨ψ̃|/dt = ⟨ψ̃|H`, which keeps `⟨ψ̃|ψ⟩` constant. Both are integrated
//! in the frame co-moving with the instantaneous ground energy: the stored
//! states are `e^{iΦ(t)}|ψ(t)⟩` and `e^{−iΦ(t)}⟨ψ̃(t)|` with
//! `Φ(t) = ∫₀ᵗ E₋ dt'`. This removes the fast dynamical rotation from the
//! integrator without changing the physics.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{dopri_step, State};
use crate::phase::{monopole_phase, LoopPath, PhaseMethod, PhaseResult};
use crate::twolevel::{complex_radius, dot, eigensystem, ComplexVec3, TwoLevelHamiltonian};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_TOTAL_TIME: f64 = 1e3;
/// Field magnitude of the benchmark loops.
pub const BENCH_FIELD: f64 = 10.0;
/// Stored trajectory points per run (plus the end point).
pub const DEFAULT_RECORD_POINTS: usize = 8192;

const I: Complex64 = Complex64::new(0.0, 1.0);
const MAX_STEPS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ramp {
    /// `s = t / T`.
    Linear,
}

#[derive(Debug, Clone)]
pub struct Schedule {
    pub path: LoopPath,
    pub total_time: f64,
    pub ramp: Ramp,
    /// Minimal time between stored trajectory points.
    pub record_interval: f64,
}

impl Schedule {
    pub fn new(path: LoopPath, total_time: f64) -> Result<Self> {
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "total time must be positive, got {total_time}"
            )));
        }
        Ok(Self {
            path,
            total_time,
            ramp: Ramp::Linear,
            record_interval: total_time / DEFAULT_RECORD_POINTS as f64,
        })
    }

    pub fn loop_parameter(&self, t: f64) -> f64 {
        match self.ramp {
            Ramp::Linear => (t / self.total_time).clamp(0.0, 1.0),
        }
    }

    /// `H(t) = λ0 + R(s(t))·σ` for a loop through field space.
    pub fn field_hamiltonian(&self, lambda0: Complex64) -> Result<impl Fn(f64) -> TwoLevelHamiltonian + '_> {
        if self.path.dimension() != 3 {
            return Err(Error::InvalidInput(format!(
                "field loops need 3 coordinates, got {}",
                self.path.dimension()
            )));
        }
        Ok(move |t: f64| {
            let p = self.path.sample(self.loop_parameter(t));
            TwoLevelHamiltonian::new(lambda0, ComplexVec3::new(p[0], p[1], p[2]))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Right state in the co-moving frame, `e^{iΦ}|ψ⟩`.
    pub psi: Vec<[Complex64; 2]>,
    /// Left state in the co-moving frame, `e^{−iΦ}⟨ψ̃|`.
    pub psi_tilde: Vec<[Complex64; 2]>,
    /// `Φ(t) = ∫ E₋ dt`, Simpson rule on every accepted step.
    pub frame_phase: Vec<Complex64>,
    /// `log(⟨ψ̃(T)|ψ(T)⟩ / ⟨ψ̃(0)|ψ(0)⟩)`, zero for exact integration.
    pub overlap_log: Complex64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    /// Laboratory-frame right state at the stored index `j`.
    pub fn lab_psi(&self, j: usize) -> [Complex64; 2] {
        let f = (-I * self.frame_phase[j]).exp();
        [self.psi[j][0] * f, self.psi[j][1] * f]
    }

    /// CSV dump: `t`, the laboratory-frame right state and `Φ`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,re_psi0,im_psi0,re_psi1,im_psi1,re_phase,im_phase")?;
        for (j, t) in self.times.iter().enumerate() {
            let p = self.lab_psi(j);
            let ph = self.frame_phase[j];
            writeln!(
                out,
                "{t:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                p[0].re, p[0].im, p[1].re, p[1].im, ph.re, ph.im
            )?;
        }
        Ok(())
    }
}

fn ground_energy(h: &TwoLevelHamiltonian) -> Complex64 {
    h.lambda0 - complex_radius(&h.r_vec)
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Evolve the ground biorthogonal pair of `h_of_t(0)` over `[0, T]`.
///
/// The local error estimate of every accepted step is at most `tol·h`
/// relative to the current state norm, separately for `ψ` and `ψ̃`.
pub fn evolve_pair<H>(h_of_t: &H, schedule: &Schedule, tol: f64) -> Result<Trajectory>
where
    H: Fn(f64) -> TwoLevelHamiltonian,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let total = schedule.total_time;
    let h0 = h_of_t(0.0);
    let eig = eigensystem(&h0)?;

    let rhs = |t: f64, y: &State<4>| -> State<4> {
        let h = h_of_t(t);
        let e = ground_energy(&h);
        let hp = h.apply([y[0], y[1]]);
        let hl = h.apply_left([y[2], y[3]]);
        [
            -I * (hp[0] - e * y[0]),
            -I * (hp[1] - e * y[1]),
            I * (hl[0] - e * y[2]),
            I * (hl[1] - e * y[3]),
        ]
    };

    let mut y: State<4> = [eig.u_minus[0], eig.u_minus[1], eig.ut_minus[0], eig.ut_minus[1]];
    let overlap0 = dot(eig.ut_minus, eig.u_minus);
    let mut t = 0.0;
    let mut phase = Complex64::new(0.0, 0.0);
    let mut f0 = rhs(t, &y);
    let mut traj = Trajectory {
        times: vec![0.0],
        psi: vec![[y[0], y[1]]],
        psi_tilde: vec![[y[2], y[3]]],
        frame_phase: vec![phase],
        overlap_log: Complex64::new(0.0, 0.0),
        accepted_steps: 0,
        rejected_steps: 0,
    };

    let scale = h0.norm().max(f64::MIN_POSITIVE);
    let h_min = 1e-13 * total.max(1.0 / scale);
    let mut h = (0.01 / scale).min(total);
    let mut last_record = 0.0;
    while t < total {
        if traj.accepted_steps + traj.rejected_steps >= MAX_STEPS {
            return Err(Error::Stiffness { t, h });
        }
        let last = t + h >= total;
        if last {
            h = total - t;
        }
        let step = dopri_step(&rhs, t, &y, &f0, h);
        let err = (norm2(&step.err[..2]) / norm2(&y[..2]).max(f64::MIN_POSITIVE))
            .max(norm2(&step.err[2..]) / norm2(&y[2..]).max(f64::MIN_POSITIVE));
        let target = tol * h;
        if !err.is_finite() || err > target {
            traj.rejected_steps += 1;
            let factor = if err.is_finite() {
                (0.9 * (target / err).powf(0.25)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            h *= factor;
            if h < h_min {
                return Err(Error::Stiffness { t, h });
            }
            continue;
        }
        let e_mid = ground_energy(&h_of_t(t + 0.5 * h));
        let e0 = ground_energy(&h_of_t(t));
        let e1 = ground_energy(&h_of_t(t + h));
        phase += (e0 + 4.0 * e_mid + e1) * (h / 6.0);
        t = if last { total } else { t + h };
        y = step.y;
        f0 = step.f_end;
        traj.accepted_steps += 1;

        if last || t - last_record >= schedule.record_interval {
            last_record = t;
            traj.times.push(t);
            traj.psi.push([y[0], y[1]]);
            traj.psi_tilde.push([y[2], y[3]]);
            traj.frame_phase.push(phase);
        }
        let factor = if err > 0.0 {
            (0.9 * (target / err).powf(0.25)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }

    let overlap = y[2] * y[0] + y[3] * y[1];
    traj.overlap_log = (overlap / overlap0).ln();
    let drift = (overlap - overlap0).norm() / overlap0.norm().max(norm2(&y[..2]) * norm2(&y[2..]));
    let bound = 10.0 * tol;
    if drift > bound {
        return Err(Error::Tolerance { drift, bound });
    }
    Ok(traj)
}

/// `γ = −i log⟨ũ|ψ(T)⟩ + ∫ E dt` for the level continuously connected to the
/// initial ground level, unwrapped at every stored point.
///
/// `error_estimate` reflects integration error only; the non-adiabatic
/// deviation of order `1/T` is part of the returned value.
pub fn extract_geometric_phase<H>(traj: &Trajectory, h_of_t: &H) -> Result<PhaseResult>
where
    H: Fn(f64) -> TwoLevelHamiltonian,
{
    if traj.times.len() < 2 {
        return Err(Error::InvalidInput("trajectory has fewer than two points".into()));
    }
    let mut level_energy = Complex64::new(0.0, 0.0);
    let mut prev_z = Complex64::new(0.0, 0.0);
    let mut gamma = Complex64::new(0.0, 0.0);
    for (j, &t) in traj.times.iter().enumerate() {
        let eig = eigensystem(&h_of_t(t))?;
        let psi = traj.psi[j];
        let c_minus = dot(eig.ut_minus, psi);
        let c_plus = dot(eig.ut_plus, psi);
        let (ut, e) = if c_minus.norm() * norm2(&eig.u_minus) >= c_plus.norm() * norm2(&eig.u_plus) {
            (eig.ut_minus, eig.e_minus)
        } else {
            (eig.ut_plus, eig.e_plus)
        };
        if j > 0 {
            let (t0, h) = (traj.times[j - 1], t - traj.times[j - 1]);
            let level_at = |s: f64| {
                let eig = eigensystem(&h_of_t(s))?;
                // same branch as the end points
                Ok::<_, Error>(if (eig.e_minus - e).norm() <= (eig.e_plus - e).norm() {
                    eig.e_minus
                } else {
                    eig.e_plus
                })
            };
            let e0 = level_at(t0)?;
            let em = level_at(t0 + 0.5 * h)?;
            level_energy += (e0 + 4.0 * em + e) * (h / 6.0);
        }
        // z = ⟨ũ|ψ_lab⟩ e^{i∫E}
        let z = dot(ut, psi) * (I * (level_energy - traj.frame_phase[j])).exp();
        if j > 0 {
            let inc = (z / prev_z).ln();
            if inc.im.abs() > FRAC_PI_2 || !inc.is_finite() {
                return Err(Error::Unwrap { t, increment: inc.im });
            }
            gamma += -I * inc;
        } else {
            gamma = -I * z.ln();
        }
        prev_z = z;
    }
    Ok(PhaseResult {
        gamma,
        method: PhaseMethod::Adiabatic,
        resolution: traj.accepted_steps,
        error_estimate: traj.overlap_log.norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub total_time: f64,
    pub gamma: Complex64,
    pub reference: Complex64,
    pub error: f64,
    pub steps: usize,
}

/// Slow loop at constant polar angle `theta` of a field of magnitude `field`
/// shifted by `−iε ẑ`, compared with the closed-form monopole phase.
pub fn cone_benchmark(field: f64, theta: f64, eps: f64, total_time: f64, tol: f64) -> Result<BenchmarkRow> {
    let (r, z) = (field * theta.sin(), field * theta.cos());
    let path = LoopPath::azimuthal(r, z, eps, 1024)?;
    let schedule = Schedule::new(path, total_time)?;
    let h = schedule.field_hamiltonian(Complex64::new(0.0, 0.0))?;
    let traj = evolve_pair(&h, &schedule, tol)?;
    let gamma = extract_geometric_phase(&traj, &h)?.gamma;
    let reference = monopole_phase(&ComplexVec3::from_rho_eps([r, 0.0, z], eps))?.gamma;
    Ok(BenchmarkRow {
        total_time,
        gamma,
        reference,
        error: (gamma - reference).norm(),
        steps: traj.accepted_steps,
    })
}

/// Hermitian equator loop, reference phase `π`.
pub fn equator_benchmark(field: f64, total_time: f64, tol: f64) -> Result<BenchmarkRow> {
    cone_benchmark(field, FRAC_PI_2, 0.0, total_time, tol)
}
