//! Complete elliptic integrals of complex modulus via Carlson's symmetric
//! forms `R_F` and `R_D` (duplication algorithm with a fifth-order Taylor
//! tail).
//!
//! `K` and `E` take the MODULUS `k`, i.e.
//!
//! ```text
//! K(k) = ∫₀^{π/2} dθ / √(1 − k² sin²θ)  = R_F(0, 1 − k², 1)
//! E(k) = ∫₀^{π/2} √(1 − k² sin²θ) dθ    = R_F(0, 1 − k², 1) − (k²/3) R_D(0, 1 − k², 1)
//! ```
//!
//! with principal square roots, which is continuous in `k` everywhere except
//! where `1 − k²` is real and non-positive.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 64;
/// Relative truncation target of the Taylor tail.
pub const TOLERANCE: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticResult {
    pub value: Complex64,
    pub iterations: usize,
    pub converged: bool,
}

fn check_cut(args: &[Complex64]) -> Result<()> {
    for z in args {
        if !z.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite argument {z}")));
        }
        if z.im == 0.0 && z.re < 0.0 {
            return Err(Error::BranchCut(format!("{z}")));
        }
    }
    Ok(())
}

fn lambda(x: Complex64, y: Complex64, z: Complex64) -> Complex64 {
    let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
    sx * sy + sx * sz + sy * sz
}

fn max_dev(a: Complex64, args: &[Complex64]) -> f64 {
    args.iter().map(|z| (a - z).norm()).fold(0.0, f64::max)
}

pub fn carlson_rf(x: Complex64, y: Complex64, z: Complex64) -> Result<EllipticResult> {
    check_cut(&[x, y, z])?;
    let zeros = [x, y, z].iter().filter(|c| c.norm() == 0.0).count();
    if zeros > 1 {
        return Err(Error::SingularArgument("R_F with two zero arguments".into()));
    }
    let a0 = (x + y + z) / 3.0;
    let q = (3.0 * TOLERANCE).powf(-1.0 / 6.0) * max_dev(a0, &[x, y, z]);
    let (mut xm, mut ym, mut zm, mut am) = (x, y, z, a0);
    let mut pow4 = 1.0;
    let mut iterations = 0;
    while pow4 * q >= am.norm() {
        if iterations == MAX_ITERATIONS {
            return Err(Error::NonConvergence(format!(
                "R_F({x}, {y}, {z}) after {MAX_ITERATIONS} duplications"
            )));
        }
        let l = lambda(xm, ym, zm);
        am = (am + l) * 0.25;
        xm = (xm + l) * 0.25;
        ym = (ym + l) * 0.25;
        zm = (zm + l) * 0.25;
        pow4 *= 0.25;
        iterations += 1;
    }
    let dx = (a0 - x) * pow4 / am;
    let dy = (a0 - y) * pow4 / am;
    let dz = -(dx + dy);
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    let series = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - e2 * e3 * (3.0 / 44.0);
    Ok(EllipticResult {
        value: series / am.sqrt(),
        iterations,
        converged: true,
    })
}

pub fn carlson_rd(x: Complex64, y: Complex64, z: Complex64) -> Result<EllipticResult> {
    check_cut(&[x, y, z])?;
    if z.norm() == 0.0 || (x.norm() == 0.0 && y.norm() == 0.0) {
        return Err(Error::SingularArgument("R_D singular argument".into()));
    }
    let a0 = (x + y + 3.0 * z) / 5.0;
    let q = (TOLERANCE / 4.0).powf(-1.0 / 6.0) * max_dev(a0, &[x, y, z]);
    let (mut xm, mut ym, mut zm, mut am) = (x, y, z, a0);
    let mut pow4 = 1.0;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut iterations = 0;
    while pow4 * q >= am.norm() {
        if iterations == MAX_ITERATIONS {
            return Err(Error::NonConvergence(format!(
                "R_D({x}, {y}, {z}) after {MAX_ITERATIONS} duplications"
            )));
        }
        let l = lambda(xm, ym, zm);
        sum += pow4 / (zm.sqrt() * (zm + l));
        am = (am + l) * 0.25;
        xm = (xm + l) * 0.25;
        ym = (ym + l) * 0.25;
        zm = (zm + l) * 0.25;
        pow4 *= 0.25;
        iterations += 1;
    }
    let dx = (a0 - x) * pow4 / am;
    let dy = (a0 - y) * pow4 / am;
    let dz = -(dx + dy) / 3.0;
    let xy = dx * dy;
    let z2 = dz * dz;
    let e2 = xy - 6.0 * z2;
    let e3 = (3.0 * xy - 8.0 * z2) * dz;
    let e4 = 3.0 * (xy - z2) * z2;
    let e5 = xy * z2 * dz;
    let series = 1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 - 3.0 * e4 / 22.0 - 9.0 * e2 * e3 / 52.0
        + 3.0 * e5 / 26.0;
    Ok(EllipticResult {
        value: pow4 * series / (am * am.sqrt()) + 3.0 * sum,
        iterations,
        converged: true,
    })
}

fn complementary(k: Complex64) -> Result<Complex64> {
    let kp2 = 1.0 - k * k;
    if kp2.norm() <= f64::EPSILON {
        return Err(Error::SingularModulus);
    }
    Ok(kp2)
}

/// Complete elliptic integral of the first kind, modulus convention.
pub fn complete_k(k: Complex64) -> Result<Complex64> {
    let kp2 = complementary(k)?;
    Ok(carlson_rf(Complex64::new(0.0, 0.0), kp2, Complex64::new(1.0, 0.0))?.value)
}

/// Complete elliptic integral of the second kind, modulus convention.
pub fn complete_e(k: Complex64) -> Result<Complex64> {
    complete_ke(k).map(|(_, e)| e)
}

/// `(K(k), E(k))` sharing one `R_F` evaluation.
pub fn complete_ke(k: Complex64) -> Result<(Complex64, Complex64)> {
    let kp2 = complementary(k)?;
    complete_ke_split(k * k, kp2)
}

/// `(K, E)` from `k²` and `k'² = 1 − k²` supplied separately, for callers
/// that can form `k'²` without cancellation.
pub fn complete_ke_split(k2: Complex64, kp2: Complex64) -> Result<(Complex64, Complex64)> {
    if kp2.norm() == 0.0 {
        return Err(Error::SingularModulus);
    }
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let rf = carlson_rf(zero, kp2, one)?.value;
    let rd = carlson_rd(zero, kp2, one)?.value;
    Ok((rf, rf - k2 / 3.0 * rd))
}
