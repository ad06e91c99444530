//! Generic two-level non-Hermitian Hamiltonians `H = λ0·1 + R·σ` with a
//! complex field `R = (X, Y, Z)`.
//!
//! The complex radius `R = (X² + Y² + Z²)^{1/2}` is taken on the branch with
//! `Re R ≥ 0` (ties broken towards `Im R ≥ 0`), so `E₋ = λ0 − R` is always the
//! level with the lower real part. Eigenvectors follow the spherical gauge
//!
//! ```text
//! |u₋⟩ = (−e^{−iφ} sin θ/2, cos θ/2)ᵀ     ⟨ũ₋| = (−e^{iφ} sin θ/2, cos θ/2)
//! |u₊⟩ = ( e^{−iφ} cos θ/2, sin θ/2)ᵀ     ⟨ũ₊| = ( e^{iφ} cos θ/2, sin θ/2)
//! ```
//!
//! with complex angles `cos θ = Z/R`, `e^{iφ} = (X + iY)/(R sin θ)`. Note that
//! the left vectors are not complex conjugates of the right ones; the pairing
//! is the bilinear one, `⟨ũ_m|u_n⟩ = δ_mn`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOL_DEGENERACY: f64 = 1e-10;
pub const DEFAULT_TOL_STRING: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex field `R = (X, Y, Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexVec3 {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
}

impl ComplexVec3 {
    pub const fn new(x: Complex64, y: Complex64, z: Complex64) -> Self {
        Self { x, y, z }
    }

    pub fn real(x: f64, y: f64, z: f64) -> Self {
        Self::new(x.into(), y.into(), z.into())
    }

    /// `R = ρ − iε` with real `ρ = (x, y, z)` and `ε` along the z axis.
    pub fn from_rho_eps(rho: [f64; 3], eps: f64) -> Self {
        Self::new(rho[0].into(), rho[1].into(), Complex64::new(rho[2], -eps))
    }

    pub fn components(&self) -> [Complex64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }

    /// Largest component magnitude; the reference scale for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.components().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self::new(self.x * factor, self.y * factor, self.z * factor)
    }

    fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("non-finite field {self:?}")))
        }
    }
}

/// `H = λ0·1 + X σx + Y σy + Z σz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelHamiltonian {
    pub lambda0: Complex64,
    pub r_vec: ComplexVec3,
}

impl TwoLevelHamiltonian {
    pub const fn new(lambda0: Complex64, r_vec: ComplexVec3) -> Self {
        Self { lambda0, r_vec }
    }

    pub fn traceless(r_vec: ComplexVec3) -> Self {
        Self::new(Complex64::new(0.0, 0.0), r_vec)
    }

    /// Row-major 2×2 matrix.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let ComplexVec3 { x, y, z } = self.r_vec;
        [[self.lambda0 + z, x - I * y], [x + I * y, self.lambda0 - z]]
    }

    pub fn to_dmatrix(&self) -> nalgebra::DMatrix<Complex64> {
        let m = self.matrix();
        nalgebra::DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
    }

    /// Decompose an arbitrary 2×2 matrix into `λ0·1 + R·σ`.
    pub fn from_matrix(m: [[Complex64; 2]; 2]) -> Self {
        let lambda0 = (m[0][0] + m[1][1]) * 0.5;
        let z = (m[0][0] - m[1][1]) * 0.5;
        let x = (m[0][1] + m[1][0]) * 0.5;
        let y = I * (m[0][1] - m[1][0]) * 0.5;
        Self::new(lambda0, ComplexVec3::new(x, y, z))
    }

    /// Frobenius norm of the matrix.
    pub fn norm(&self) -> f64 {
        self.matrix().iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = self.matrix();
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Row vector times matrix.
    pub fn apply_left(&self, w: [Complex64; 2]) -> [Complex64; 2] {
        let m = self.matrix();
        [w[0] * m[0][0] + w[1] * m[1][0], w[0] * m[0][1] + w[1] * m[1][1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexAngles {
    pub theta: Complex64,
    pub phi: Complex64,
}

impl ComplexAngles {
    /// `(R sinθ cosφ, R sinθ sinφ, R cosθ)`.
    pub fn reconstruct(&self, radius: Complex64) -> ComplexVec3 {
        let st = self.theta.sin();
        ComplexVec3::new(
            radius * st * self.phi.cos(),
            radius * st * self.phi.sin(),
            radius * self.theta.cos(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegeneracyKind {
    NonDegenerate,
    DiabolicPoint,
    ExceptionalPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyClass {
    pub kind: DegeneracyKind,
    /// `|R| / scale`, or `|R|` when the field vanishes identically.
    pub residual: f64,
}

/// Right eigenvectors are columns, left eigenvectors rows; both stored as
/// plain pairs of components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiorthogonalEigensystem {
    pub e_minus: Complex64,
    pub e_plus: Complex64,
    pub u_minus: [Complex64; 2],
    pub u_plus: [Complex64; 2],
    pub ut_minus: [Complex64; 2],
    pub ut_plus: [Complex64; 2],
    pub radius: Complex64,
    pub angles: ComplexAngles,
}

impl BiorthogonalEigensystem {
    pub fn ground(&self) -> ([Complex64; 2], [Complex64; 2], Complex64) {
        (self.u_minus, self.ut_minus, self.e_minus)
    }

    pub fn excited(&self) -> ([Complex64; 2], [Complex64; 2], Complex64) {
        (self.u_plus, self.ut_plus, self.e_plus)
    }
}

pub fn dot(a: [Complex64; 2], b: [Complex64; 2]) -> Complex64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Square root of `X² + Y² + Z²` on the `Re ≥ 0` branch, `Im ≥ 0` on ties.
pub fn complex_radius(v: &ComplexVec3) -> Complex64 {
    let r = (v.x * v.x + v.y * v.y + v.z * v.z).sqrt();
    if r.re == 0.0 && r.im < 0.0 {
        -r
    } else {
        r
    }
}

pub fn classify_degeneracy(v: &ComplexVec3, tol: f64) -> DegeneracyClass {
    let scale = v.scale();
    let radius = complex_radius(v).norm();
    let residual = if scale > 0.0 { radius / scale } else { radius };
    let kind = if radius > tol * scale {
        DegeneracyKind::NonDegenerate
    } else if scale <= tol {
        DegeneracyKind::DiabolicPoint
    } else {
        DegeneracyKind::ExceptionalPoint
    };
    DegeneracyClass { kind, residual }
}

/// Half-angle data shared by the angle and eigenvector constructions.
struct HalfAngles {
    radius: Complex64,
    cos_theta: Complex64,
    half_cos: Complex64,
    half_sin: Complex64,
    /// `X + iY` and `X − iY`.
    p: Complex64,
    q: Complex64,
}

fn half_angles(v: &ComplexVec3, tol_degeneracy: f64, tol_string: f64) -> Result<HalfAngles> {
    v.ensure_finite()?;
    let class = classify_degeneracy(v, tol_degeneracy);
    if class.kind != DegeneracyKind::NonDegenerate {
        return Err(Error::Degeneracy(class));
    }
    let radius = complex_radius(v);
    let cos_theta = v.z / radius;
    let one_plus = (radius + v.z) / radius;
    if one_plus.norm() <= tol_string {
        return Err(Error::StringProximity {
            distance: one_plus.norm(),
        });
    }
    let p = v.x + I * v.y;
    let q = v.x - I * v.y;
    // 1 − cosθ = (X² + Y²) / (R (R + Z)), exact near the north pole
    let one_minus = p * q / (radius * (radius + v.z));
    Ok(HalfAngles {
        radius,
        cos_theta,
        half_cos: (one_plus * 0.5).sqrt(),
        half_sin: (one_minus * 0.5).sqrt(),
        p,
        q,
    })
}

pub fn spherical_angles(v: &ComplexVec3) -> Result<ComplexAngles> {
    spherical_angles_with(v, DEFAULT_TOL_DEGENERACY, DEFAULT_TOL_STRING)
}

pub fn spherical_angles_with(v: &ComplexVec3, tol_degeneracy: f64, tol_string: f64) -> Result<ComplexAngles> {
    let ha = half_angles(v, tol_degeneracy, tol_string)?;
    let theta = ha.cos_theta.acos();
    let rho = ha.radius * ha.half_sin * ha.half_cos * 2.0;
    // φ = 0 at the poles by convention
    let phi = if ha.half_sin == Complex64::new(0.0, 0.0) || rho.norm() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        -I * (ha.p / rho).ln()
    };
    Ok(ComplexAngles { theta, phi })
}

pub fn eigensystem(h: &TwoLevelHamiltonian) -> Result<BiorthogonalEigensystem> {
    eigensystem_with(h, DEFAULT_TOL_DEGENERACY, DEFAULT_TOL_STRING)
}

pub fn eigensystem_with(
    h: &TwoLevelHamiltonian,
    tol_degeneracy: f64,
    tol_string: f64,
) -> Result<BiorthogonalEigensystem> {
    let v = &h.r_vec;
    let ha = half_angles(v, tol_degeneracy, tol_string)?;
    let angles = spherical_angles_with(v, tol_degeneracy, tol_string)?;
    let (r, c, s) = (ha.radius, ha.half_cos, ha.half_sin);

    // e^{∓iφ} sin(θ/2) = (X ∓ iY) / (2 R cos(θ/2))
    let u_minus = [-ha.q / (2.0 * r * c), c];
    let ut_minus = [-ha.p / (2.0 * r * c), c];
    let (u_plus, ut_plus) = if s == Complex64::new(0.0, 0.0) {
        if ha.p.norm() + ha.q.norm() > tol_degeneracy * v.scale() {
            return Err(Error::InvalidInput(
                "azimuth undefined: isotropic transverse field at the pole".into(),
            ));
        }
        ([c, s], [c, s])
    } else {
        // e^{∓iφ} cos(θ/2) = (X ∓ iY) / (2 R sin(θ/2))
        ([ha.q / (2.0 * r * s), s], [ha.p / (2.0 * r * s), s])
    };
    let all = u_minus.iter().chain(&ut_minus).chain(&u_plus).chain(&ut_plus);
    if !all.clone().all(|z| z.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "eigenvectors not representable in the spherical gauge at {v:?}"
        )));
    }

    Ok(BiorthogonalEigensystem {
        e_minus: h.lambda0 - r,
        e_plus: h.lambda0 + r,
        u_minus,
        u_plus,
        ut_minus,
        ut_plus,
        radius: r,
        angles,
    })
}
