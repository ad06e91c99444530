use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::PhaseResult;
use crate::error::{Error, Result};
use crate::twolevel::{self, ComplexVec3, DegeneracyKind};

/// Charge `q` in `γ = (q/2)∮(1 − cosθ) dφ`; unit charge reproduces the
/// spin-½ monopole.
pub const DEFAULT_MONOPOLE_CHARGE: f64 = 1.0;

const EP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    Ground,
    Excited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZSign {
    Plus,
    Minus,
}

/// Phase acquired by the ground level on the `θ = const` loop through `v`:
/// `γ = π(1 − Z/R)`.
pub fn monopole_phase(v: &ComplexVec3) -> Result<PhaseResult> {
    monopole_phase_with(v, Level::Ground, DEFAULT_MONOPOLE_CHARGE)
}

pub fn monopole_phase_with(v: &ComplexVec3, level: Level, charge: f64) -> Result<PhaseResult> {
    if !v.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite field {v:?}")));
    }
    let class = twolevel::classify_degeneracy(v, twolevel::DEFAULT_TOL_DEGENERACY);
    if class.kind != DegeneracyKind::NonDegenerate {
        return Err(Error::Degeneracy(class));
    }
    let cos_theta = v.z / twolevel::complex_radius(v);
    let gamma = match level {
        Level::Ground => (1.0 - cos_theta) * (PI * charge),
        Level::Excited => (1.0 + cos_theta) * (PI * charge),
    };
    Ok(PhaseResult::analytic(gamma))
}

fn check_section(r: f64, eps: f64) -> Result<()> {
    if !(r >= 0.0 && eps >= 0.0) || !r.is_finite() || !eps.is_finite() {
        return Err(Error::Domain(format!(
            "need r >= 0, eps >= 0; got r = {r}, eps = {eps}"
        )));
    }
    if (r - eps).abs() <= EP_TOL * eps.max(1.0) {
        return Err(Error::ExceptionalPoint { r, eps });
    }
    Ok(())
}

/// `Re γ` on the `z → ±0` section: `π` outside the exceptional ring
/// (`r > ε`), `π(1 ∓ ε/√(ε² − r²))` inside.
pub fn phase_limits_re(r: f64, z_sign: ZSign, eps: f64) -> Result<f64> {
    check_section(r, eps)?;
    if r > eps {
        return Ok(PI);
    }
    let ratio = eps / (eps * eps - r * r).sqrt();
    Ok(match z_sign {
        ZSign::Plus => PI * (1.0 - ratio),
        ZSign::Minus => PI * (1.0 + ratio),
    })
}

/// `Im γ` on the `z = 0` section: zero inside the ring, `πε/√(r² − ε²)`
/// outside.
pub fn phase_limits_im(r: f64, eps: f64) -> Result<f64> {
    check_section(r, eps)?;
    if r < eps {
        Ok(0.0)
    } else {
        Ok(PI * eps / (r * r - eps * eps).sqrt())
    }
}
