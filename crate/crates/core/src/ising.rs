//! The dissipative transverse-field Ising chain in its quasiparticle form.
//!
//! Each positive quasimomentum `k` carries the mode Hamiltonian
//! `H(k) = −iJδ·1 + R(k)·σ`, `R(k) = 2J(sin ka cos φ, sin ka sin φ, g − cos ka)`
//! with `g = h − iδ`. The ground state is the product of the lower mode
//! levels, so its geometric phase is `Σ_k π(1 − cos θ_k)`.
//!
//! The mode energy is continued analytically in `k` from the zone boundary:
//!
//! ```text
//! ε(k)/2J = (1 + g) √(1 − m² cos²(ka/2)),   m² = 4g / (1 + g)²
//! ```
//!
//! with a principal inner root. This is the branch on which the momentum
//! integral equals the elliptic closed form. Wherever `h < 1` and
//! `h² + δ² > 1` it is the negative of the principal radius used by
//! [`twolevel`](crate::twolevel), so `cos θ_k` there belongs to the upper
//! level of the mode Hamiltonian; [`ModeSpectrum::branch_flipped`] records
//! this per mode.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::specfun::complete_ke_split;
use crate::twolevel::{
    classify_degeneracy, complex_radius, ComplexVec3, DegeneracyKind, TwoLevelHamiltonian, DEFAULT_TOL_DEGENERACY,
};

pub const DEFAULT_N_SITES: usize = 1024;
/// Width of the band around `h² + δ² = 1` where quadrature is relaxed.
pub const CIRCLE_BAND: f64 = 1e-3;
/// Distance from the circle treated as on it.
pub const CIRCLE_TOL: f64 = 1e-12;
/// Below this `|g|` the closed form switches to its power series.
pub const SERIES_RADIUS: f64 = 0.05;
/// Offsets used to extrapolate the jump across the exceptional circle.
pub const JUMP_OFFSETS: (f64, f64) = (1e-6, 2e-6);

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub j_coupling: f64,
    pub h_field: f64,
    pub delta: f64,
    pub phi: f64,
    pub n_sites: usize,
    pub lattice_a: f64,
}

impl Default for IsingParams {
    fn default() -> Self {
        Self {
            j_coupling: 1.0,
            h_field: 0.0,
            delta: 0.0,
            phi: 0.0,
            n_sites: DEFAULT_N_SITES,
            lattice_a: 1.0,
        }
    }
}

impl IsingParams {
    pub fn new(h_field: f64, delta: f64) -> Self {
        Self {
            h_field,
            delta,
            ..Self::default()
        }
    }

    pub fn with_sites(self, n_sites: usize) -> Self {
        Self { n_sites, ..self }
    }

    /// `g = h − iδ`.
    pub fn g(&self) -> Complex64 {
        Complex64::new(self.h_field, -self.delta)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.j_coupling > 0.0
            && self.h_field >= 0.0
            && self.delta >= 0.0
            && (0.0..std::f64::consts::TAU).contains(&self.phi)
            && self.lattice_a > 0.0
            && self.h_field.is_finite()
            && self.delta.is_finite()
            && self.j_coupling.is_finite()
            && self.lattice_a.is_finite();
        if !ok {
            return Err(Error::InvalidInput(format!("invalid chain parameters {self:?}")));
        }
        if self.n_sites < 2 || !self.n_sites.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "number of sites must be even and positive, got {}",
                self.n_sites
            )));
        }
        Ok(())
    }

    /// `k_j = (2j − 1)π / (N a)` for `j = 1..N/2`.
    pub fn momenta(&self) -> Vec<f64> {
        let n = self.n_sites as f64;
        (1..=self.n_sites / 2)
            .map(|j| (2 * j - 1) as f64 * PI / (n * self.lattice_a))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub momenta: Vec<f64>,
    /// `ε(k)` on the analytically continued branch.
    pub energies: Vec<Complex64>,
    pub cos_theta: Vec<Complex64>,
    /// `ε₀ = −iJδ`.
    pub epsilon0: Complex64,
    /// True where `ε(k)/2J` is minus the principal radius of the mode.
    pub branch_flipped: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QptOrder {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QptDiagnosis {
    pub delta: f64,
    pub h_c: f64,
    pub k_c: f64,
    pub order: QptOrder,
    /// `γ_g(h_c⁺) − γ_g(h_c⁻)`, zero for a second-order transition.
    pub jump: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoPhase {
    pub value: Complex64,
    pub error: f64,
    /// Inside the relaxed band around the exceptional circle.
    pub near_circle: bool,
}

pub fn mode_hamiltonian(p: &IsingParams, k: f64) -> TwoLevelHamiltonian {
    let j2 = 2.0 * p.j_coupling;
    let ka = k * p.lattice_a;
    let s = ka.sin();
    TwoLevelHamiltonian::new(
        Complex64::new(0.0, -p.j_coupling * p.delta),
        ComplexVec3::new(
            (j2 * s * p.phi.cos()).into(),
            (j2 * s * p.phi.sin()).into(),
            (p.g() - ka.cos()) * j2,
        ),
    )
}

/// `ε(k)/2J` on the continued branch, with `x = ka`.
pub fn reduced_mode_energy(g: Complex64, x: f64) -> Complex64 {
    let c = (0.5 * x).cos();
    let one_g = 1.0 + g;
    let m2 = 4.0 * g / (one_g * one_g);
    one_g * (1.0 - m2 * c * c).sqrt()
}

fn check_mode(p: &IsingParams, k: f64) -> Result<TwoLevelHamiltonian> {
    let h = mode_hamiltonian(p, k);
    let class = classify_degeneracy(&h.r_vec, DEFAULT_TOL_DEGENERACY);
    if class.kind != DegeneracyKind::NonDegenerate {
        return Err(Error::DegenerateMode { k, class });
    }
    Ok(h)
}

/// `cos θ_k = (g − cos ka) / (ε(k)/2J)`.
pub fn bogoliubov_angle(p: &IsingParams, k: f64) -> Result<Complex64> {
    check_mode(p, k)?;
    let x = k * p.lattice_a;
    Ok((p.g() - x.cos()) / reduced_mode_energy(p.g(), x))
}

pub fn mode_spectrum(p: &IsingParams) -> Result<ModeSpectrum> {
    p.validate()?;
    let g = p.g();
    let momenta = p.momenta();
    let mut energies = Vec::with_capacity(momenta.len());
    let mut cos_theta = Vec::with_capacity(momenta.len());
    let mut branch_flipped = Vec::with_capacity(momenta.len());
    for &k in &momenta {
        let h = check_mode(p, k)?;
        let x = k * p.lattice_a;
        let e = reduced_mode_energy(g, x);
        let principal = complex_radius(&h.r_vec) / (2.0 * p.j_coupling);
        energies.push(e * 2.0 * p.j_coupling);
        cos_theta.push((g - x.cos()) / e);
        branch_flipped.push((e - principal).norm() > (e + principal).norm());
    }
    Ok(ModeSpectrum {
        momenta,
        energies,
        cos_theta,
        epsilon0: Complex64::new(0.0, -p.j_coupling * p.delta),
        branch_flipped,
    })
}

/// `Σ_{k>0} π(1 − cos θ_k)`.
pub fn ground_phase_finite(p: &IsingParams) -> Result<Complex64> {
    let s = mode_spectrum(p)?;
    Ok(s.cos_theta.iter().map(|c| PI * (1.0 - c)).sum())
}

/// `γ_g = (2π/N) Σ_{k>0} (1 − cos θ_k)`.
pub fn overall_phase_finite(p: &IsingParams) -> Result<Complex64> {
    Ok(ground_phase_finite(p)? * (2.0 / p.n_sites as f64))
}

fn circle_distance(g: Complex64) -> f64 {
    (g.norm_sqr() - 1.0).abs()
}

fn check_circle(g: Complex64) -> Result<()> {
    if g.im != 0.0 && circle_distance(g) <= CIRCLE_TOL {
        return Err(Error::ExceptionalCircle { h: g.re, delta: -g.im });
    }
    Ok(())
}

/// `γ_g = ∫₀^π (1 − cos θ(x)) dx` by adaptive quadrature.
pub fn overall_phase_thermo(g: Complex64) -> Result<Complex64> {
    overall_phase_thermo_detailed(g).map(|r| r.value)
}

pub fn overall_phase_thermo_detailed(g: Complex64) -> Result<ThermoPhase> {
    if !g.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite g = {g}")));
    }
    check_circle(g)?;
    if (1.0 + g).norm() == 0.0 {
        return Err(Error::SingularArgument("g = -1".into()));
    }
    let near_circle = g.im != 0.0 && circle_distance(g) < CIRCLE_BAND;
    let mut points = vec![0.0];
    if g.norm() > 0.0 {
        let c = ((g * g + 1.0) / (2.0 * g)).re;
        if c > -1.0 && c < 1.0 {
            points.push(c.acos());
        }
    }
    points.push(PI);
    let opts = if near_circle {
        QuadOptions {
            abs_tol: 1e-6,
            rel_tol: 1e-6,
            max_intervals: 20_000,
        }
    } else {
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-13,
            max_intervals: 20_000,
        }
    };
    let r = integrate_with_breaks(|x| 1.0 - (g - x.cos()) / reduced_mode_energy(g, x), &points, opts);
    if !r.converged {
        return Err(Error::NonConvergence(format!(
            "momentum integral at g = {g} (error {:e})",
            r.error
        )));
    }
    Ok(ThermoPhase {
        value: r.value,
        error: r.error,
        near_circle,
    })
}

fn series_phase(g: Complex64) -> Complex64 {
    // π − π Σ_{n≥1} 2n C(1/2, n)² g^{2n−1}
    let mut binom = 1.0;
    let mut power = g;
    let g2 = g * g;
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 1..60 {
        binom *= (1.5 - n as f64) / n as f64;
        let term = power * (2.0 * n as f64 * binom * binom);
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
        power *= g2;
    }
    PI - PI * sum
}

/// `(k², k'²)` for the modulus `m = 2√g/(1 + g)`, formed without cancellation.
fn modulus_parts(g: Complex64) -> Result<(Complex64, Complex64)> {
    let one_g = 1.0 + g;
    if one_g.norm() == 0.0 {
        return Err(Error::SingularArgument("g = -1".into()));
    }
    let q = (1.0 - g) / one_g;
    Ok((4.0 * g / (one_g * one_g), q * q))
}

/// `γ_g = π + ((1 − g)/g) K(m) − ((1 + g)/g) E(m)`, `m = 2√g/(1 + g)`.
pub fn overall_phase_closed(g: Complex64) -> Result<Complex64> {
    if !g.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite g = {g}")));
    }
    if g.norm() < SERIES_RADIUS {
        return Ok(series_phase(g));
    }
    if g == Complex64::new(1.0, 0.0) {
        // (1 − g) K → 0 and E(1) = 1
        return Ok(Complex64::new(PI - 2.0, 0.0));
    }
    let (k2, kp2) = modulus_parts(g)?;
    let (kk, ee) = complete_ke_split(k2, kp2).map_err(|e| match e {
        Error::BranchCut(_) => Error::SingularArgument(format!("g = {g} lies on the exceptional circle")),
        other => other,
    })?;
    Ok(PI + (1.0 - g) / g * kk - (1.0 + g) / g * ee)
}

/// `E_g = −iJδ − (2J/π)(1 + g) E(m)`.
pub fn ground_energy(g: Complex64, delta: f64, j: f64) -> Result<Complex64> {
    if !g.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite g = {g}")));
    }
    let (k2, kp2) = modulus_parts(g)?;
    let ee = if kp2.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        complete_ke_split(k2, kp2)
            .map_err(|e| match e {
                Error::BranchCut(_) => Error::SingularArgument(format!("g = {g} lies on the exceptional circle")),
                other => other,
            })?
            .1
    };
    Ok(-I * j * delta - 2.0 * j / PI * (1.0 + g) * ee)
}

/// Central difference of the closed form in `h` at fixed `δ`.
pub fn phase_derivative(g: Complex64, step: f64) -> Result<Complex64> {
    let plus = overall_phase_closed(g + step)?;
    let minus = overall_phase_closed(g - step)?;
    Ok((plus - minus) / (2.0 * step))
}

/// Second central difference of the closed form in `h`.
pub fn phase_second_derivative(g: Complex64, step: f64) -> Result<Complex64> {
    let plus = overall_phase_closed(g + step)?;
    let mid = overall_phase_closed(g)?;
    let minus = overall_phase_closed(g - step)?;
    Ok((plus - 2.0 * mid + minus) / (step * step))
}

/// `⟨σᶻ⟩ = γ_g/π − 1`.
pub fn magnetization_from_phase(g: Complex64) -> Result<Complex64> {
    Ok(overall_phase_closed(g)? / PI - 1.0)
}

pub fn exceptional_point(delta: f64, a: f64) -> Result<QptDiagnosis> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Domain(format!("delta = {delta} outside [0, 1]")));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidInput(format!(
            "lattice spacing must be positive, got {a}"
        )));
    }
    // cos(arcsin δ) rather than √(1 − δ²): the two can differ by an ulp, and
    // the mode radius at (h_c, k_c) is the square root of that mismatch
    let x_c = delta.asin();
    let h_c = x_c.cos();
    let k_c = x_c / a;
    let (order, jump) = if delta > 0.0 {
        let side = |eta: f64| -> Result<Complex64> {
            let above = overall_phase_thermo(Complex64::new(h_c + eta, -delta))?;
            let below = overall_phase_thermo(Complex64::new(h_c - eta, -delta))?;
            Ok(above - below)
        };
        let (e1, e2) = JUMP_OFFSETS;
        let (j1, j2) = (side(e1)?, side(e2)?);
        // linear extrapolation to zero offset
        (QptOrder::First, (j1 * e2 - j2 * e1) / (e2 - e1))
    } else {
        (QptOrder::Second, Complex64::new(0.0, 0.0))
    };
    Ok(QptDiagnosis {
        delta,
        h_c,
        k_c,
        order,
        jump,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twolevel::{spherical_angles, DegeneracyKind};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mode_hamiltonian_examples() {
        let p = IsingParams::new(0.0, 0.0);
        let h = mode_hamiltonian(&p, PI / 2.0);
        assert!((h.r_vec.x - 2.0).norm() < 1e-15);
        assert!(h.r_vec.y.norm() < 1e-15 && h.r_vec.z.norm() < 1e-15);

        let p = IsingParams::new(1.0, 0.0);
        let h = mode_hamiltonian(&p, 1e-9);
        assert!(h.r_vec.scale() < 1e-8);

        let d: f64 = 0.5;
        let p = IsingParams::new((1.0 - d * d).sqrt(), d);
        let h = mode_hamiltonian(&p, d.asin());
        assert!(complex_radius(&h.r_vec).norm() < 1e-12);
        assert_eq!(
            classify_degeneracy(&h.r_vec, DEFAULT_TOL_DEGENERACY).kind,
            DegeneracyKind::ExceptionalPoint
        );
    }

    #[test]
    fn angle_limits() {
        let p = IsingParams::new(0.0, 0.0);
        for k in [0.3, 1.0, 2.5] {
            assert!((bogoliubov_angle(&p, k).unwrap() + k.cos()).norm() < 1e-15);
        }
        let p = IsingParams::new(1e6, 0.0);
        assert!((bogoliubov_angle(&p, 1.0).unwrap() - 1.0).norm() < 1e-6);
    }

    #[test]
    fn angle_matches_mode_eigensystem() {
        for (h, d, k) in [(0.5, 0.5, PI / 3.0), (1.5, 0.2, 0.7), (0.2, 0.1, 2.0), (0.3, 0.99, 0.4)] {
            let p = IsingParams::new(h, d);
            let ham = mode_hamiltonian(&p, k);
            let cos_core = spherical_angles(&ham.r_vec).unwrap().theta.cos();
            let ct = bogoliubov_angle(&p, k).unwrap();
            let e = reduced_mode_energy(p.g(), k);
            let principal = complex_radius(&ham.r_vec) / 2.0;
            let sign = if (e - principal).norm() < 1e-12 { 1.0 } else { -1.0 };
            assert!((ct - sign * cos_core).norm() < 1e-12, "{h} {d} {k}");
        }
    }

    #[test]
    fn flipped_sector() {
        // h < 1 < h² + δ²
        let p = IsingParams::new(0.3, 0.99).with_sites(8);
        let s = mode_spectrum(&p).unwrap();
        assert!(s.branch_flipped.iter().any(|&f| f));
        let p = IsingParams::new(0.5, 0.1).with_sites(8);
        assert!(mode_spectrum(&p).unwrap().branch_flipped.iter().all(|&f| !f));
    }

    #[test]
    fn phi_does_not_enter_the_angle() {
        let mut p = IsingParams::new(0.7, 0.3).with_sites(16);
        let a = mode_spectrum(&p).unwrap();
        p.phi = 1.2;
        let b = mode_spectrum(&p).unwrap();
        assert_eq!(a.cos_theta, b.cos_theta);
    }

    #[test]
    fn finite_sums() {
        let p = IsingParams::new(0.0, 0.0).with_sites(4);
        assert!((ground_phase_finite(&p).unwrap() - 2.0 * PI).norm() < 1e-14);
        for n in [2, 6, 10, 64] {
            let p = IsingParams::new(0.0, 0.0).with_sites(n);
            assert!((overall_phase_finite(&p).unwrap() - PI).norm() < 1e-13);
        }
        let p = IsingParams::new(1e4, 0.0).with_sites(64);
        assert!(ground_phase_finite(&p).unwrap().norm() < 1e-5);
    }

    #[test]
    fn thermo_and_closed_agree() {
        for g in [
            c(0.5, 0.0),
            c(0.7, -0.2),
            c(1.5, -0.3),
            c(0.3, -0.99),
            c(0.04, -0.01),
            c(2.0, 0.0),
        ] {
            let a = overall_phase_thermo(g).unwrap();
            let b = overall_phase_closed(g).unwrap();
            assert!((a - b).norm() < 1e-10, "{g}: {a} vs {b}");
        }
        assert!((overall_phase_thermo(c(0.0, 0.0)).unwrap() - PI).norm() < 1e-12);
        assert_eq!(overall_phase_closed(c(0.0, 0.0)).unwrap(), c(PI, 0.0));
        assert!(overall_phase_closed(c(1e4, 0.0)).unwrap().norm() < 1e-7);
    }

    #[test]
    fn closed_form_near_the_hermitian_critical_point() {
        let at = overall_phase_closed(c(1.0, 0.0)).unwrap();
        assert!((at - (PI - 2.0)).norm() < 1e-15);
        for eps in [1e-4, 1e-7, 1e-10] {
            let near = overall_phase_closed(c(1.0 + eps, 0.0)).unwrap();
            assert!((near - at).norm() < 1e-2, "{eps}: {near}");
        }
    }

    #[test]
    fn energy_examples() {
        assert!((ground_energy(c(0.0, 0.0), 0.0, 1.0).unwrap() + 1.0).norm() < 1e-15);
        let g = c(0.5, 0.0);
        let s = 1e-5;
        let de = (ground_energy(g + s, 0.0, 1.0).unwrap() - ground_energy(g - s, 0.0, 1.0).unwrap()) / (2.0 * s);
        let gamma = overall_phase_closed(g).unwrap();
        assert!((gamma / PI - 1.0 - de).norm() < 1e-6);
        assert!((magnetization_from_phase(g).unwrap() - de).norm() < 1e-6);
        assert!(magnetization_from_phase(c(0.0, 0.0)).unwrap().norm() < 1e-15);
        assert!((magnetization_from_phase(c(1e4, 0.0)).unwrap() + 1.0).norm() < 1e-7);
    }

    #[test]
    fn exceptional_points() {
        let d = exceptional_point(0.0, 1.0).unwrap();
        assert_eq!(
            (d.h_c, d.k_c, d.order, d.jump),
            (1.0, 0.0, QptOrder::Second, c(0.0, 0.0))
        );
        let d = exceptional_point(1.0, 1.0).unwrap();
        assert!(d.h_c.abs() < 1e-15 && (d.k_c - PI / 2.0).abs() < 1e-15);
        let d = exceptional_point(0.6, 1.0).unwrap();
        assert!((d.h_c - 0.8).abs() < 1e-15);
        assert_eq!(d.order, QptOrder::First);
        let d = exceptional_point(0.5, 1.0).unwrap();
        assert!(d.jump.re.abs() > 0.1, "{}", d.jump);
        assert!(matches!(exceptional_point(1.2, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn circle_errors() {
        let d: f64 = 0.5;
        let g = c((1.0 - d * d).sqrt(), -d);
        assert!(matches!(overall_phase_thermo(g), Err(Error::ExceptionalCircle { .. })));
        assert!(overall_phase_thermo(c(1.0, 0.0)).is_ok());
        let near = overall_phase_thermo_detailed(g + 2e-4).unwrap();
        assert!(near.near_circle);
        let p = IsingParams::new(g.re, d);
        assert!(bogoliubov_angle(&p, d.asin()).is_err());
    }

    #[test]
    fn invalid_params() {
        assert!(IsingParams::new(0.5, 0.1).with_sites(7).validate().is_err());
        assert!(IsingParams::new(-0.5, 0.1).validate().is_err());
        assert!(IsingParams::new(0.5, 0.1).validate().is_ok());
    }
}
