//! Numerical integration of the continuous-aperture Gramian, used to check
//! the closed forms.

use nalgebra::Matrix3;

use super::{require_partial_tpol, symmetric_from_upper, ArrayKind, AsymptoticGramian};
use crate::channel::projector;
use crate::error::{Error, Result};
use crate::geometry::{Point, Polarizations, UpaGeometry};
use crate::quadrature::{integrate, integrate_rect, QuadOptions};

/// Absolute tolerance on the normalized (dimensionless) Gramian entries.
pub const ORACLE_ABS_TOL: f64 = 1e-11;

fn upper(m: &Matrix3<f64>) -> [f64; 6] {
    [m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 1)], m[(1, 2)], m[(2, 2)]]
}

fn selection(t_pol: Polarizations) -> Matrix3<f64> {
    let t = t_pol.count();
    Matrix3::from_fn(|i, j| if i == j && i < t { 1.0 } else { 0.0 })
}

fn splits(half: f64, foot: f64) -> Vec<f64> {
    if foot > -half && foot < half {
        vec![-half, foot, half]
    } else {
        vec![-half, half]
    }
}

fn add6(acc: &mut [f64; 6], v: [f64; 6]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

/// Double integral of `D² P S P / R²` over the panel divided by its area,
/// with `S` selecting the first `t_pol` transmit polarizations.
pub fn double_integral_oracle(
    g: &UpaGeometry,
    d: f64,
    t_pol: Polarizations,
    r_pol: Polarizations,
    opts: &QuadOptions,
) -> Result<AsymptoticGramian> {
    let sel = selection(t_pol);
    let norm = d * d / (4.0 * g.l_x * g.l_y);
    let f = |x: f64, y: f64| {
        let v = Point::new(x - g.x0, y - g.y0, -g.z0);
        let p = projector(&v);
        upper(&(p * sel * p * (norm / v.norm_squared())))
    };
    let mut acc = [0.0; 6];
    for wx in splits(g.l_x, g.x0).windows(2) {
        for wy in splits(g.l_y, g.y0).windows(2) {
            add6(&mut acc, integrate_rect(f, (wx[0], wx[1]), (wy[0], wy[1]), opts)?.value);
        }
    }
    Ok(AsymptoticGramian::from_full(
        symmetric_from_upper(acc),
        ArrayKind::Upa,
        t_pol,
        r_pol,
    ))
}

/// [`double_integral_oracle`] at [`ORACLE_ABS_TOL`].
pub fn quadrature_oracle(
    g: &UpaGeometry,
    d: f64,
    t_pol: Polarizations,
    r_pol: Polarizations,
) -> Result<AsymptoticGramian> {
    double_integral_oracle(g, d, t_pol, r_pol, &QuadOptions::default().with_abs_tol(ORACLE_ABS_TOL))
}

/// Column closed forms at abscissa `x`: `[ψ₂, ψ₃, ψ₄, ψ₅, ψ₆](x)` for the
/// segment `x = const, |y| ≤ L_y`.
fn column_psi(x: f64, g: &UpaGeometry) -> [f64; 5] {
    let (ly, y0, z0) = (g.l_y, g.y0, g.z0);
    let dx = x - g.x0;
    let a2 = dx * dx + z0 * z0;
    let a = a2.sqrt();
    let r2 = a2 + y0 * y0;
    let den = (ly * ly + r2).powi(2) - (2.0 * ly * y0).powi(2);
    let p2 = (2.0 * ly * a).atan2(a2 + y0 * y0 - ly * ly) / (2.0 * ly * a);
    let bracket = (ly * ly + r2 - 2.0 * y0 * y0) / den + p2;
    let p3 = -y0 / den;
    let p4 = 0.5 / a2 * bracket;
    let p5 = -y0 * (r2 + ly * ly) / (den * den);
    let p6 = 0.25 / a2 * ((r2 + ly * ly).powi(2) - 4.0 * y0 * y0 * r2) / (den * den) + 0.375 / (a2 * a2) * bracket;
    [p2, p3, p4, p5, p6]
}

/// Integrates the column closed forms over x (the inner y integral done
/// analytically).
pub fn single_integral_oracle(
    g: &UpaGeometry,
    d: f64,
    t_pol: Polarizations,
    r_pol: Polarizations,
) -> Result<AsymptoticGramian> {
    require_partial_tpol(t_pol)?;
    let three = t_pol == Polarizations::THREE;
    let z0 = g.z0;
    let norm = d * d / (2.0 * g.l_x);
    let f = |x: f64| {
        let [p2, p3, p4, p5, p6] = column_psi(x, g);
        let dx = x - g.x0;
        let m = if three {
            [
                p2 - dx * dx * p4,
                -dx * p3,
                z0 * dx * p4,
                (dx * dx + z0 * z0) * p4,
                z0 * p3,
                p2 - z0 * z0 * p4,
            ]
        } else {
            let z2 = z0 * z0;
            [
                p2 - dx * dx * (p4 + z2 * p6),
                -dx * (p3 + z2 * p5),
                dx * z2 * z0 * p6,
                dx * dx * (p4 + z2 * p6) + z2 * z2 * p6,
                z2 * z0 * p5,
                z2 * (p4 - z2 * p6),
            ]
        };
        m.map(|v| v * norm)
    };
    let opts = QuadOptions::default().with_abs_tol(0.1 * ORACLE_ABS_TOL);
    let mut acc = [0.0; 6];
    for w in splits(g.l_x, g.x0).windows(2) {
        add6(&mut acc, integrate(f, w[0], w[1], &opts)?.value);
    }
    Ok(AsymptoticGramian::from_full(
        symmetric_from_upper(acc),
        ArrayKind::Upa,
        t_pol,
        r_pol,
    ))
}

/// Line integral of `D² P S P / r²` along `x = 0, |y| ≤ l`, divided by `2l`.
pub fn ula_line_oracle(
    l: f64,
    rx: Point,
    d: f64,
    t_pol: Polarizations,
    r_pol: Polarizations,
) -> Result<AsymptoticGramian> {
    if !(l > 0.0) {
        return Err(Error::domain(format!("aperture half-length must be positive, got {l}")));
    }
    if !(rx.z > 0.0) {
        return Err(Error::domain("receiver must satisfy z > 0"));
    }
    let sel = selection(t_pol);
    let norm = d * d / (2.0 * l);
    let f = |y: f64| {
        let v = Point::new(-rx.x, y - rx.y, -rx.z);
        let p = projector(&v);
        upper(&(p * sel * p * (norm / v.norm_squared())))
    };
    let opts = QuadOptions::default().with_abs_tol(0.1 * ORACLE_ABS_TOL);
    let mut acc = [0.0; 6];
    for w in splits(l, rx.y).windows(2) {
        add6(&mut acc, integrate(f, w[0], w[1], &opts)?.value);
    }
    Ok(AsymptoticGramian::from_full(
        symmetric_from_upper(acc),
        ArrayKind::Ula,
        t_pol,
        r_pol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holographic::{ula_gramian, ula_gramian_offset, upa_gramian};
    use crate::quadrature::Rule;

    fn pol(n: u8) -> Polarizations {
        Polarizations::new(n).unwrap()
    }

    fn rel(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>) -> f64 {
        (a - b).abs().max() / b.abs().max()
    }

    #[test]
    fn closed_forms_match_double_integral() {
        for (lx, ly, rx) in [
            (2.0, 1.0, Point::new(0.3, -0.2, 4.0)),
            (0.7, 1.9, Point::new(-1.2, 0.5, 1.1)),
            (1.0, 1.0, Point::new(2.5, -3.0, 0.8)),
        ] {
            let g = UpaGeometry::new(lx, ly, rx).unwrap();
            let d = rx.norm();
            for t in [3, 2] {
                let closed = upa_gramian(&g, d, pol(t), pol(3)).unwrap();
                let quad = quadrature_oracle(&g, d, pol(t), pol(3)).unwrap();
                assert!(rel(&closed.w, &quad.w) < 1e-9, "t_pol={t} {}", rel(&closed.w, &quad.w));
            }
        }
    }

    #[test]
    fn single_integral_matches_closed_forms() {
        let g = UpaGeometry::new(2.0, 1.0, Point::new(0.3, -0.2, 4.0)).unwrap();
        let d = g.range();
        for t in [3, 2] {
            let closed = upa_gramian(&g, d, pol(t), pol(3)).unwrap();
            let single = single_integral_oracle(&g, d, pol(t), pol(3)).unwrap();
            assert!(rel(&closed.w, &single.w) < 1e-10);
        }
    }

    #[test]
    fn quadrature_orders_agree() {
        let g = UpaGeometry::new(0.5, 1.5, Point::new(0.1, 0.4, 0.9)).unwrap();
        let base = QuadOptions::default().with_abs_tol(ORACLE_ABS_TOL);
        let a = double_integral_oracle(&g, 1.0, pol(3), pol(3), &base.with_rule(Rule::Gk15)).unwrap();
        let b = double_integral_oracle(&g, 1.0, pol(3), pol(3), &base.with_rule(Rule::Gk21)).unwrap();
        assert!(rel(&a.w, &b.w) < 1e-10);
    }

    #[test]
    fn centred_receiver_oracle_is_diagonal() {
        let g = UpaGeometry::new(1.0, 2.0, Point::new(0.0, 0.0, 1.5)).unwrap();
        let w = quadrature_oracle(&g, 1.5, pol(3), pol(3)).unwrap().w;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!(w[(i, j)].abs() < 1e-12);
        }
    }

    #[test]
    fn line_oracle_matches_linear_closed_form() {
        let (rho, theta, d): (f64, f64, f64) = (1.2, 0.5, 2.0);
        let rx = Point::new(0.0, d * theta.sin(), d * theta.cos());
        for t in [3, 2] {
            let closed = ula_gramian(pol(t), pol(3), rho, theta, d).unwrap();
            let line = ula_line_oracle(rho * d, rx, d, pol(t), pol(3)).unwrap();
            assert!(rel(&closed.w, &line.w) < 1e-11);
        }
    }

    #[test]
    fn thin_panel_matches_line_oracle_off_axis() {
        let rx = Point::new(0.8, -0.3, 1.7);
        let d = rx.norm();
        for t in [3, 2] {
            let thin = ula_gramian_offset(pol(t), pol(3), 1.1, rx, d).unwrap();
            let line = ula_line_oracle(1.1, rx, d, pol(t), pol(3)).unwrap();
            assert!(rel(&thin.w, &line.w) < 1e-8, "{}", rel(&thin.w, &line.w));
        }
    }

    #[test]
    fn nearly_linear_panel_reduces_to_linear_closed_form() {
        let (rho, theta, d): (f64, f64, f64) = (0.6, 0.3, 3.0);
        let rx = Point::new(0.0, d * theta.sin(), d * theta.cos());
        let g = UpaGeometry::new(1e-6 * rho * d, rho * d, rx).unwrap();
        let q = quadrature_oracle(&g, d, pol(3), pol(3)).unwrap();
        let closed = ula_gramian(pol(3), pol(3), rho, theta, d).unwrap();
        assert!(rel(&q.w, &closed.w) < 1e-9);
    }
}
