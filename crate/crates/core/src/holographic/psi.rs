use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ψ₂ … ψ₆ for a linear aperture of half-length `L = ρD` seen at range `D`
/// and elevation `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiSet {
    pub rho: f64,
    pub theta: f64,
    pub d: f64,
    pub psi2: f64,
    pub psi3: f64,
    pub psi4: f64,
    pub psi5: f64,
    pub psi6: f64,
}

impl PsiSet {
    /// `[ψ₂, ψ₃, ψ₄, ψ₅, ψ₆]`.
    pub fn values(&self) -> [f64; 5] {
        [self.psi2, self.psi3, self.psi4, self.psi5, self.psi6]
    }
}

pub fn psi_set(rho: f64, theta: f64, d: f64) -> Result<PsiSet> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::domain(format!("ρ must be finite and non-negative, got {rho}")));
    }
    if !(theta.abs() < FRAC_PI_2) {
        return Err(Error::domain(format!("elevation must satisfy |θ| < π/2, got {theta}")));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::domain(format!("distance must be positive, got {d}")));
    }
    let (s, c) = theta.sin_cos();
    let q = 1.0 + rho * rho;
    let den = q * q - (2.0 * rho * s).powi(2);

    // arctan((ρ−s)/c) + arctan((ρ+s)/c), folded into one atan2 so that the
    // ρ → 0 limit keeps full precision.
    let d2psi2 = if rho == 0.0 {
        1.0
    } else {
        (2.0 * rho * c).atan2(1.0 - rho * rho) / (2.0 * rho * c)
    };
    let bracket = (q - 2.0 * s * s) / den + d2psi2;
    let (d2, c2) = (d * d, c * c);

    Ok(PsiSet {
        rho,
        theta,
        d,
        psi2: d2psi2 / d2,
        psi3: -s / (d2 * d * den),
        psi4: bracket / (2.0 * d2 * d2 * c2),
        psi5: -q * s / (d2 * d2 * d * den * den),
        psi6: (q * q - 4.0 * s * s) / (4.0 * d2 * d2 * d2 * c2 * den * den)
            + 3.0 * bracket / (8.0 * d2 * d2 * d2 * c2 * c2),
    })
}
