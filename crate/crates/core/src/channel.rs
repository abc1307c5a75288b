//! Dipole channel between transmit elements and receive antennas.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{element_positions, ArraySpec, Point, Polarizations, RxSpec};
use crate::sum::pairwise_sum;

/// Wavelength and the medium coupling constant `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub lambda: f64,
    pub xi: Complex64,
}

impl PhysicalConstants {
    pub fn new(lambda: f64, xi: Complex64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain(format!("wavelength must be positive, got {lambda}")));
        }
        if xi.norm() == 0.0 || !xi.is_finite() {
            return Err(Error::domain("coupling constant ξ must be finite and non-zero"));
        }
        Ok(Self { lambda, xi })
    }

    /// `|ξ/λ|²`.
    pub fn gain(&self) -> f64 {
        (self.xi / self.lambda).norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelModel {
    Exact,
    Radiative,
}

pub type Block = Matrix3<Complex64>;

/// `I − v vᵀ/|v|²`.
pub fn projector(v: &Point) -> Matrix3<f64> {
    Matrix3::identity() - v * v.transpose() / v.norm_squared()
}

fn separation(tx: &Point, rx: &Point) -> Result<(Point, f64)> {
    let v = rx - tx;
    let r = v.norm();
    if !(r > 0.0) {
        return Err(Error::domain(format!(
            "transmit element and receive antenna coincide at ({}, {}, {})",
            tx.x, tx.y, tx.z
        )));
    }
    Ok((v, r))
}

/// `(ξ/(λr)) e^{−j2πr/λ}`.
fn spherical_factor(r: f64, c: &PhysicalConstants) -> Complex64 {
    let phase = Complex64::from_polar(1.0, -2.0 * PI * r / c.lambda);
    c.xi / (c.lambda * r) * phase
}

/// Full dipole response including the reactive near-field terms:
/// `(ξ/(λr)) e^{−j2πr/λ} (α I − β r̂ r̂ᵀ)`.
pub fn exact_block(tx: &Point, rx: &Point, c: &PhysicalConstants) -> Result<Block> {
    let (v, r) = separation(tx, rx)?;
    let kr = 2.0 * PI * r;
    let reactive = Complex64::new(-c.lambda * c.lambda, c.lambda * kr) / (kr * kr);
    let alpha = 1.0 + reactive;
    let beta = 1.0 + 3.0 * reactive;
    let outer = (v * v.transpose() / (r * r)).map(Complex64::from);
    let m = Block::identity() * alpha - outer * beta;
    Ok(m * spherical_factor(r, c))
}

/// Far-field part only: `(ξ/(λr)) e^{−j2πr/λ} P⊥`.
pub fn radiative_block(tx: &Point, rx: &Point, c: &PhysicalConstants) -> Result<Block> {
    let (v, r) = separation(tx, rx)?;
    Ok(projector(&v).map(Complex64::from) * spherical_factor(r, c))
}

/// Stacked channel `H` of shape `(N_r·r_pol) × (N_elems·t_pol)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub entries: DMatrix<Complex64>,
    pub model: ChannelModel,
}

impl ChannelMatrix {
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }
}

/// Builds `H` with one block row per receive antenna and one block column per
/// transmit element, keeping the first `r_pol` rows and `t_pol` columns of
/// each 3×3 block.
pub fn stack_channel(
    array: &ArraySpec,
    rx: &RxSpec,
    c: &PhysicalConstants,
    model: ChannelModel,
) -> Result<ChannelMatrix> {
    let tx = element_positions(array);
    let (tp, rp) = (array.t_pol().count(), rx.r_pol().count());
    let mut h = DMatrix::zeros(rx.n_r() * rp, tx.len() * tp);
    for (i, q) in rx.positions().iter().enumerate() {
        for (e, p) in tx.iter().enumerate() {
            let b = match model {
                ChannelModel::Exact => exact_block(p, q, c)?,
                ChannelModel::Radiative => radiative_block(p, q, c)?,
            };
            h.view_mut((i * rp, e * tp), (rp, tp))
                .copy_from(&b.view((0, 0), (rp, tp)));
        }
    }
    Ok(ChannelMatrix { entries: h, model })
}

/// Normalized Gramian of the radiative channel:
/// `W = D²/N_elems · Σ_e G_e G_eᴴ` where `G_e` is the per-element column
/// block of `H` with `|ξ/λ|²` removed.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGramian {
    pub w: DMatrix<Complex64>,
    pub d_ref: f64,
}

impl FiniteGramian {
    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    /// Real part, valid as the Gramian itself when there is one receive antenna.
    pub fn real(&self) -> DMatrix<f64> {
        self.w.map(|z| z.re)
    }
}

/// Normalized Gramian of `array` seen from `rx`. `lambda` only matters when
/// there are several receive antennas (it sets the relative phases).
pub fn finite_gramian(array: &ArraySpec, rx: &RxSpec, lambda: f64, d_ref: f64) -> Result<FiniteGramian> {
    finite_gramian_from_positions(&element_positions(array), array.t_pol(), rx, lambda, d_ref)
}

/// As [`finite_gramian`] for an arbitrary list of element positions.
pub fn finite_gramian_from_positions(
    tx: &[Point],
    t_pol: Polarizations,
    rx: &RxSpec,
    lambda: f64,
    d_ref: f64,
) -> Result<FiniteGramian> {
    if tx.is_empty() {
        return Err(Error::domain("transmit array has no elements"));
    }
    if !(d_ref > 0.0) {
        return Err(Error::domain(format!(
            "reference distance must be positive, got {d_ref}"
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("wavelength must be positive, got {lambda}")));
    }
    for q in rx.positions() {
        for p in tx {
            separation(p, q)?;
        }
    }
    let (tp, rp) = (t_pol.count(), rx.r_pol().count());
    let scale = d_ref * d_ref / tx.len() as f64;

    let w = if rx.n_r() == 1 {
        let q = rx.positions()[0];
        let sel = Matrix3::from_fn(|i, j| if i == j && i < tp { 1.0 } else { 0.0 });
        let sum = pairwise_sum(tx.len(), Matrix3::<f64>::zeros(), &|e| {
            let v = q - tx[e];
            let p = projector(&v);
            p * sel * p / v.norm_squared()
        });
        (sum * scale).view((0, 0), (rp, rp)).map(Complex64::from)
    } else {
        let n = rx.n_r() * rp;
        let sum = pairwise_sum(tx.len(), DMatrix::<Complex64>::zeros(n, n), &|e| {
            let mut g = DMatrix::<Complex64>::zeros(n, tp);
            for (i, q) in rx.positions().iter().enumerate() {
                let v = q - tx[e];
                let r = v.norm();
                let f = Complex64::from_polar(1.0 / r, -2.0 * PI * r / lambda);
                let p = projector(&v);
                for a in 0..rp {
                    for b in 0..tp {
                        g[(i * rp + a, b)] = f * p[(a, b)];
                    }
                }
            }
            &g * g.adjoint()
        });
        sum * Complex64::from(scale)
    };
    Ok(FiniteGramian { w, d_ref })
}

/// Size of the reactive terms discarded by the radiative model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    /// Smallest element-to-receiver distance.
    pub d_inf: f64,
    /// Largest spectral norm over elements of `H Hᴴ − |ξ/λ|²/r² P P ᵀ`.
    pub measured_sup_norm: f64,
    pub bound_general: f64,
    /// Closed-form simplification for three transmit polarizations.
    pub bound_tpol3: Option<f64>,
    /// Exact error norm for `t_pol = r_pol = 3` at distance `d_inf`.
    pub exact_tpol3: Option<f64>,
    pub within_general: bool,
    pub within_tpol3: Option<bool>,
}

/// `8|ξ/λ|² λ/(2πd³)(1 + λ/(2πd)) + 32|ξ/λ|² λ²/((2π)³d⁴)(1 + (λ/(2πd))²)`.
pub fn reactive_bound_general(d: f64, c: &PhysicalConstants) -> f64 {
    let x = c.lambda / (2.0 * PI * d);
    let g = c.gain();
    8.0 * g * c.lambda / (2.0 * PI * d.powi(3)) * (1.0 + x)
        + 32.0 * g * c.lambda * c.lambda / ((2.0 * PI).powi(3) * d.powi(4)) * (1.0 + x * x)
}

/// `(1 + 2/π)|ξ|²/(2π²d⁴) + |λξ|²/(2π⁵d⁶)`.
pub fn reactive_bound_tpol3(d: f64, c: &PhysicalConstants) -> f64 {
    let xi2 = c.xi.norm_sqr();
    (1.0 + 2.0 / PI) * xi2 / (2.0 * PI * PI * d.powi(4)) + c.lambda * c.lambda * xi2 / (2.0 * PI.powi(5) * d.powi(6))
}

/// `|ξ|²(1 + (λ/(2πd))²)/(π²d⁴)`: the error norm for a fully polarized link.
pub fn reactive_error_tpol3(d: f64, c: &PhysicalConstants) -> f64 {
    let x = c.lambda / (2.0 * PI * d);
    c.xi.norm_sqr() * (1.0 + x * x) / (PI * PI * d.powi(4))
}

fn spectral_norm_hermitian(m: DMatrix<Complex64>) -> f64 {
    let herm = (&m + m.adjoint()) * Complex64::from(0.5);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, e| acc.max(e.abs()))
}

/// Per-element error of the radiative approximation (single receive antenna).
pub fn reactive_error(
    tx: &Point,
    rx: &Point,
    c: &PhysicalConstants,
    t_pol: Polarizations,
    r_pol: Polarizations,
) -> Result<f64> {
    let (tp, rp) = (t_pol.count(), r_pol.count());
    let (v, r) = separation(tx, rx)?;
    let h = exact_block(tx, rx, c)?.view((0, 0), (rp, tp)).into_owned();
    let p = projector(&v).view((0, 0), (rp, tp)).map(Complex64::from);
    let e = &h * h.adjoint() - (&p * p.adjoint()) * Complex64::from(c.gain() / (r * r));
    Ok(spectral_norm_hermitian(DMatrix::from_iterator(
        rp,
        rp,
        e.iter().copied(),
    )))
}

/// Measures the largest per-element reactive error over the array and
/// compares it with the closed-form bounds.
pub fn lemma1_verify(
    array: &ArraySpec,
    rx: &Point,
    c: &PhysicalConstants,
    t_pol: Polarizations,
    r_pol: Polarizations,
) -> Result<Lemma1Report> {
    let tx = element_positions(array);
    let mut d_inf = f64::INFINITY;
    let mut sup = 0.0f64;
    for p in &tx {
        let (_, r) = separation(p, rx)?;
        d_inf = d_inf.min(r);
        sup = sup.max(reactive_error(p, rx, c, t_pol, r_pol)?);
    }
    let bound_general = reactive_bound_general(d_inf, c);
    let (bound_tpol3, exact_tpol3) = if t_pol == Polarizations::THREE {
        (
            Some(reactive_bound_tpol3(d_inf, c)),
            Some(reactive_error_tpol3(d_inf, c)),
        )
    } else {
        (None, None)
    };
    Ok(Lemma1Report {
        d_inf,
        measured_sup_norm: sup,
        bound_general,
        bound_tpol3,
        exact_tpol3,
        within_general: sup <= bound_general,
        within_tpol3: bound_tpol3.map(|b| sup <= b),
    })
}
