//! Normalized Gramians in the limit of a continuous transmit aperture.
//!
//! Closed forms for a linear aperture along y (ψ functions) and for a
//! rectangular aperture (Φ₂ plus tetrahedron angles), together with the
//! finite Riemann sums and numerical-integration oracles they are checked
//! against.

mod oracle;
mod psi;
mod riemann;
mod ula;
mod upa;

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Polarizations;

pub use oracle::{double_integral_oracle, quadrature_oracle, single_integral_oracle, ula_line_oracle, ORACLE_ABS_TOL};
pub use psi::{psi_set, PsiSet};
pub use riemann::{partial_sum_sk, partial_sums};
pub use ula::{ula_gramian, ula_gramian_offset, ula_matrix, THIN_PANEL_RATIO};
pub use upa::{phi2, phi2_double, upa_gramian, upa_gramian_2x3, upa_gramian_3x3, Phi2Method, Phi2Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrayKind {
    Ula,
    Upa,
}

/// `W̄^{t_pol×r_pol}`: a real symmetric `r_pol × r_pol` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticGramian {
    pub w: DMatrix<f64>,
    pub kind: ArrayKind,
    pub t_pol: Polarizations,
    pub r_pol: Polarizations,
}

impl AsymptoticGramian {
    /// Keeps the leading `r_pol × r_pol` block of a full 3×3 result.
    pub(crate) fn from_full(w: Matrix3<f64>, kind: ArrayKind, t_pol: Polarizations, r_pol: Polarizations) -> Self {
        let r = r_pol.count();
        Self {
            w: DMatrix::from_fn(r, r, |i, j| w[(i, j)]),
            kind,
            t_pol,
            r_pol,
        }
    }

    pub fn trace(&self) -> f64 {
        self.w.trace()
    }
}

pub(crate) fn require_partial_tpol(t_pol: Polarizations) -> Result<()> {
    if t_pol == Polarizations::ONE {
        return Err(Error::domain("closed forms exist for t_pol = 2 or 3 only"));
    }
    Ok(())
}

/// Packs the upper triangle `[00, 01, 02, 11, 12, 22]` into a symmetric matrix.
pub(crate) fn symmetric_from_upper(u: [f64; 6]) -> Matrix3<f64> {
    Matrix3::new(u[0], u[1], u[2], u[1], u[3], u[4], u[2], u[4], u[5])
}
