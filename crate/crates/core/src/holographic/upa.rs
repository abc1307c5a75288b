use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::{require_partial_tpol, ArrayKind, AsymptoticGramian};
use crate::error::{Error, Result};
use crate::geometry::{Polarizations, UpaGeometry};
use crate::quadrature::{integrate, integrate_rect, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phi2Method {
    SingleIntegral,
    DoubleQuadrature,
}

/// Mean of `1/R²` over the panel, in 1/m².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phi2Value {
    pub value: f64,
    /// Estimated absolute error of `value`.
    pub error: f64,
    pub method: Phi2Method,
}

/// Tolerance on `Φ₂·|rx|²`, which is dimensionless and at most 1.
const PHI2_ABS_TOL: f64 = 1e-13;
const PHI2_DOUBLE_ABS_TOL: f64 = 1e-11;

fn check_panel(l_x: f64, l_y: f64, z0: f64) -> Result<()> {
    if !(l_x > 0.0 && l_y > 0.0) {
        return Err(Error::domain(format!(
            "panel half-lengths must be positive, got ({l_x}, {l_y})"
        )));
    }
    if !(z0 > 0.0) {
        return Err(Error::domain(format!("receiver must satisfy z > 0, got z = {z0}")));
    }
    Ok(())
}

/// Integration breakpoints: the interval ends plus the receiver's foot
/// point when it falls inside.
fn breakpoints(half: f64, foot: f64) -> Vec<f64> {
    if foot > -half && foot < half {
        vec![-half, foot, half]
    } else {
        vec![-half, half]
    }
}

/// `Φ₂ = (2L_x)⁻¹ ∫ ψ₂(x) dx`, where `ψ₂(x)` is the closed-form mean of `1/R²`
/// along the panel column at abscissa `x`.
pub fn phi2(l_x: f64, l_y: f64, x0: f64, y0: f64, z0: f64) -> Result<Phi2Value> {
    check_panel(l_x, l_y, z0)?;
    let scale = x0 * x0 + y0 * y0 + z0 * z0;
    let column = |x: f64| {
        let a = (x - x0).hypot(z0);
        let view = (2.0 * l_y * a).atan2(a * a + y0 * y0 - l_y * l_y);
        [scale * view / (2.0 * l_y * a * 2.0 * l_x)]
    };
    let opts = QuadOptions::default().with_abs_tol(PHI2_ABS_TOL);
    let pts = breakpoints(l_x, x0);
    let mut value = 0.0;
    let mut error = 0.0;
    for w in pts.windows(2) {
        let e = integrate(column, w[0], w[1], &opts)?;
        value += e.value[0];
        error += e.error;
    }
    Ok(Phi2Value {
        value: value / scale,
        error: error / scale,
        method: Phi2Method::SingleIntegral,
    })
}

/// `Φ₂` by nested quadrature of `1/R²` over the rectangle.
pub fn phi2_double(l_x: f64, l_y: f64, x0: f64, y0: f64, z0: f64) -> Result<Phi2Value> {
    check_panel(l_x, l_y, z0)?;
    let scale = x0 * x0 + y0 * y0 + z0 * z0;
    let norm = scale / (4.0 * l_x * l_y);
    let f = |x: f64, y: f64| {
        let (dx, dy) = (x - x0, y - y0);
        [norm / (dx * dx + dy * dy + z0 * z0)]
    };
    let opts = QuadOptions::default().with_abs_tol(PHI2_DOUBLE_ABS_TOL);
    let e = integrate_rect(f, (-l_x, l_x), (-l_y, l_y), &opts)?;
    Ok(Phi2Value {
        value: e.value[0] / scale,
        error: e.error / scale,
        method: Phi2Method::DoubleQuadrature,
    })
}

fn phi2_of(g: &UpaGeometry) -> Result<f64> {
    phi2(g.l_x, g.l_y, g.x0, g.y0, g.z0).map(|p| p.value)
}

/// Full three-polarization planar Gramian (3×3).
pub fn upa_gramian_3x3(g: &UpaGeometry, d: f64) -> Result<AsymptoticGramian> {
    let w = upa_full_3x3(g, d, phi2_of(g)?);
    Ok(AsymptoticGramian::from_full(
        w,
        ArrayKind::Upa,
        Polarizations::THREE,
        Polarizations::THREE,
    ))
}

/// Planar Gramian with the transmitter restricted to x and y dipoles (3×3).
pub fn upa_gramian_2x3(g: &UpaGeometry, d: f64) -> Result<AsymptoticGramian> {
    let w = upa_full_2x3(g, d, phi2_of(g)?);
    Ok(AsymptoticGramian::from_full(
        w,
        ArrayKind::Upa,
        Polarizations::TWO,
        Polarizations::THREE,
    ))
}

/// Planar Gramian for `t_pol ∈ {2, 3}`, truncated to `r_pol`.
pub fn upa_gramian(g: &UpaGeometry, d: f64, t_pol: Polarizations, r_pol: Polarizations) -> Result<AsymptoticGramian> {
    require_partial_tpol(t_pol)?;
    let phi = phi2_of(g)?;
    let w = if t_pol == Polarizations::THREE {
        upa_full_3x3(g, d, phi)
    } else {
        upa_full_2x3(g, d, phi)
    };
    Ok(AsymptoticGramian::from_full(w, ArrayKind::Upa, t_pol, r_pol))
}

pub(crate) fn upa_full_3x3(g: &UpaGeometry, d: f64, phi2: f64) -> Matrix3<f64> {
    let (xp, xm, yp, ym) = (g.tilt_x_plus(), g.tilt_x_minus(), g.tilt_y_plus(), g.tilt_y_minus());
    let a11 = xp.cos * g.gamma_y_plus + xm.cos * g.gamma_y_minus;
    let a22 = yp.cos * g.gamma_x_plus + ym.cos * g.gamma_x_minus;
    let a12 = g.log_vertex_ratio();
    let a13 = -(xp.sin * g.gamma_y_plus - xm.sin * g.gamma_y_minus);
    let a23 = -(yp.sin * g.gamma_x_plus - ym.sin * g.gamma_x_minus);
    let angles = Matrix3::new(a11, a12, a13, a12, a22, a23, a13, a23, -(a11 + a22));
    let d2 = d * d;
    Matrix3::from_diagonal(&nalgebra::Vector3::new(0.5, 0.5, 1.0)) * (phi2 * d2) + angles * (d2 / (8.0 * g.l_x * g.l_y))
}

pub(crate) fn upa_full_2x3(g: &UpaGeometry, d: f64, phi2: f64) -> Matrix3<f64> {
    let (xp, xm, yp, ym) = (g.tilt_x_plus(), g.tilt_x_minus(), g.tilt_y_plus(), g.tilt_y_minus());
    let (gxp, gxm, gyp, gym) = (g.gamma_x_plus, g.gamma_x_minus, g.gamma_y_plus, g.gamma_y_minus);
    let (spp, spm, smp, smm) = (g.sigma_pp, g.sigma_pm, g.sigma_mp, g.sigma_mm);
    let (lx, ly, x0, y0, z0) = (g.l_x, g.l_y, g.x0, g.y0, g.z0);
    let sq = |v: f64| v * v;
    let cube = |v: f64| v * v * v;

    let star = (4.0 - sq(xp.cos)) * xp.cos * gyp + (4.0 - sq(xm.cos)) * xm.cos * gym - yp.cos * gxp - ym.cos * gxm
        + sq(xp.sin) * (spp + spm)
        + sq(xm.sin) * (smp + smm);
    let star2 = (4.0 - sq(yp.cos)) * yp.cos * gxp + (4.0 - sq(ym.cos)) * ym.cos * gxm - xp.cos * gyp - xm.cos * gym
        + sq(yp.sin) * (spp + smp)
        + sq(ym.sin) * (spm + smm);
    let bullet = 4.0 * g.log_vertex_ratio()
        - z0 * z0 * (1.0 / sq(g.d_pp) + 1.0 / sq(g.d_mm) - 1.0 / sq(g.d_pm) - 1.0 / sq(g.d_mp));
    // s³/c·(σ + σ) written as s³·reach·Σ(L ∓ offset)/d², which stays finite
    // when the receiver is above an edge (c = 0).
    let bullet2 = cube(xm.sin) * xm.reach * ((ly - y0) / sq(g.d_mp) + (ly + y0) / sq(g.d_mm))
        - cube(xp.sin) * xp.reach * ((ly - y0) / sq(g.d_pp) + (ly + y0) / sq(g.d_pm))
        + cube(xm.sin) * gym
        - cube(xp.sin) * gyp;
    let bullet_star = cube(ym.sin) * ym.reach * ((lx - x0) / sq(g.d_pm) + (lx + x0) / sq(g.d_mm))
        - cube(yp.sin) * yp.reach * ((lx - x0) / sq(g.d_pp) + (lx + x0) / sq(g.d_mp))
        + cube(ym.sin) * gxm
        - cube(yp.sin) * gxp;
    let square = (1.0 + sq(yp.cos)) * yp.cos * gxp
        + (1.0 + sq(ym.cos)) * ym.cos * gxm
        + (1.0 + sq(xp.cos)) * xp.cos * gyp
        + (1.0 + sq(xm.cos)) * xm.cos * gym
        - sq(xp.sin) * (spp + spm)
        - sq(xm.sin) * (smp + smm)
        - sq(yp.sin) * (spp + smp)
        - sq(ym.sin) * (spm + smm);

    #[rustfmt::skip]
    let entries = Matrix3::new(
        star, bullet, bullet2,
        bullet, star2, bullet_star,
        bullet2, bullet_star, square,
    );
    let d2 = d * d;
    Matrix3::from_diagonal(&nalgebra::Vector3::new(0.5, 0.5, 0.0)) * (phi2 * d2) + entries * (d2 / (32.0 * lx * ly))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    #[test]
    fn phi2_point_panel_limit() {
        let (x0, y0, z0) = (0.3, -0.2, 4.0);
        let p = phi2(1e-7, 1e-7, x0, y0, z0).unwrap();
        let expect = 1.0 / (x0 * x0 + y0 * y0 + z0 * z0);
        assert!((p.value - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn phi2_sign_symmetry() {
        let base = phi2(1.3, 0.7, 0.4, 0.25, 1.1).unwrap().value;
        for (sx, sy) in [(-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
            let v = phi2(1.3, 0.7, sx * 0.4, sy * 0.25, 1.1).unwrap().value;
            assert!((v - base).abs() < 1e-14 * base);
        }
    }

    #[test]
    fn phi2_methods_agree() {
        for (lx, ly, x0, y0, z0) in [
            (2.0, 1.0, 0.3, -0.2, 4.0),
            (0.4, 3.0, 2.0, 1.0, 0.6),
            (1.0, 1.0, 0.0, 0.0, 0.5),
        ] {
            let a = phi2(lx, ly, x0, y0, z0).unwrap();
            let b = phi2_double(lx, ly, x0, y0, z0).unwrap();
            assert_eq!(a.method, Phi2Method::SingleIntegral);
            assert_eq!(b.method, Phi2Method::DoubleQuadrature);
            assert!(
                (a.value - b.value).abs() < 1e-10 * a.value,
                "{} vs {}",
                a.value,
                b.value
            );
        }
    }

    #[test]
    fn centred_receiver_gives_diagonal() {
        let g = UpaGeometry::new(1.5, 0.8, Point::new(0.0, 0.0, 2.0)).unwrap();
        assert_eq!(g.log_vertex_ratio(), 0.0);
        for w in [upa_gramian_3x3(&g, 2.0).unwrap().w, upa_gramian_2x3(&g, 2.0).unwrap().w] {
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                assert!(w[(i, j)].abs() < 1e-15, "({i},{j}) = {}", w[(i, j)]);
            }
        }
    }

    #[test]
    fn trace_identity() {
        let g = UpaGeometry::new(2.0, 1.0, Point::new(0.3, -0.2, 4.0)).unwrap();
        let d = g.range();
        let w = upa_gramian_3x3(&g, d).unwrap();
        let p = phi2(2.0, 1.0, 0.3, -0.2, 4.0).unwrap().value;
        assert!((w.trace() - 2.0 * d * d * p).abs() < 1e-14 * w.trace());
    }

    #[test]
    fn receiver_above_edge_is_finite() {
        let g = UpaGeometry::new(1.0, 1.0, Point::new(1.0, -1.0, 0.7)).unwrap();
        let w = upa_gramian_2x3(&g, g.range()).unwrap().w;
        assert!(w.iter().all(|v| v.is_finite()));
    }
}
