use nalgebra::Matrix3;

use super::{psi_set, require_partial_tpol, upa_gramian, ArrayKind, AsymptoticGramian};
use crate::error::{Error, Result};
use crate::geometry::{Point, Polarizations, UpaGeometry};

/// Builds the linear-aperture Gramian from `[ψ₂, …, ψ₆]` (or from any
/// sequence with the same role, such as the finite sums `s_M^(k)`).
pub fn ula_matrix(
    t_pol: Polarizations,
    r_pol: Polarizations,
    d: f64,
    theta: f64,
    psi: [f64; 5],
) -> Result<AsymptoticGramian> {
    require_partial_tpol(t_pol)?;
    let [p2, p3, p4, p5, p6] = psi;
    let dc = d * theta.cos();
    let (dc2, dc3, dc4) = (dc * dc, dc * dc * dc, dc * dc * dc * dc);
    #[rustfmt::skip]
    let w = if t_pol == Polarizations::THREE {
        Matrix3::new(
            p2, 0.0, 0.0,
            0.0, p4 * dc2, p3 * dc,
            0.0, p3 * dc, p2 - p4 * dc2,
        )
    } else {
        Matrix3::new(
            p2, 0.0, 0.0,
            0.0, dc4 * p6, dc3 * p5,
            0.0, dc3 * p5, dc2 * p4 - dc4 * p6,
        )
    };
    Ok(AsymptoticGramian::from_full(w * (d * d), ArrayKind::Ula, t_pol, r_pol))
}

/// Continuous linear aperture of half-length `ρD` along y, receiver at range
/// `d` and elevation `theta` in the y-z plane.
pub fn ula_gramian(
    t_pol: Polarizations,
    r_pol: Polarizations,
    rho: f64,
    theta: f64,
    d: f64,
) -> Result<AsymptoticGramian> {
    require_partial_tpol(t_pol)?;
    let psi = psi_set(rho, theta, d)?;
    ula_matrix(t_pol, r_pol, d, theta, psi.values())
}

/// Panel width, relative to its length, of the thin rectangles used to reach
/// a linear aperture through the planar closed forms.
pub const THIN_PANEL_RATIO: f64 = 1e-3;

/// Linear aperture of half-length `l` along y with the receiver anywhere in
/// front of it (`x₀ ≠ 0` allowed).
///
/// Evaluates the planar closed forms on panels of half-width `εl` and `εl/2`
/// and removes the `O(ε²)` term by Richardson extrapolation.
pub fn ula_gramian_offset(
    t_pol: Polarizations,
    r_pol: Polarizations,
    l: f64,
    rx: Point,
    d: f64,
) -> Result<AsymptoticGramian> {
    require_partial_tpol(t_pol)?;
    if !(l > 0.0) {
        return Err(Error::domain(format!("aperture half-length must be positive, got {l}")));
    }
    let coarse = upa_gramian(&UpaGeometry::new(THIN_PANEL_RATIO * l, l, rx)?, d, t_pol, r_pol)?;
    let fine = upa_gramian(&UpaGeometry::new(0.5 * THIN_PANEL_RATIO * l, l, rx)?, d, t_pol, r_pol)?;
    Ok(AsymptoticGramian {
        w: (fine.w * 4.0 - coarse.w) / 3.0,
        kind: ArrayKind::Ula,
        t_pol,
        r_pol,
    })
}
