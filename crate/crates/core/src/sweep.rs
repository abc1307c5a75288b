//! Parameter sweeps: aperture optimization, fraction-of-maximum apertures,
//! receive-separation grids and finite-versus-asymptotic eigenvalue studies.
//!
//! Grid points are evaluated in parallel and assembled in grid order, so
//! results do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{eig_sorted, rate_from_eigenvalues, spectral_efficiency, RateReport, SnrConfig, SnrConvention};
use crate::channel::finite_gramian;
use crate::error::{Error, Result};
use crate::geometry::{ArraySpec, Point, PolarPlacement, Polarizations, RxAxis, RxSpec, UpaGeometry};
use crate::holographic::{ula_gramian, upa_gramian, upa_gramian_3x3};

/// Resolution of golden-section and bisection refinement, relative to `D`.
pub const REFINE_REL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Aperture,
    Elevation,
    Distance,
    RxSeparation,
    JointApertureRxSep,
}

/// Strictly increasing, non-empty list of values for one swept variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub variable: SweepVariable,
    values: Vec<f64>,
}

impl SweepGrid {
    pub fn new(variable: SweepVariable, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("sweep grid is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("sweep grid must be finite and strictly increasing"));
        }
        Ok(Self { variable, values })
    }

    /// `points` evenly spaced values from `start` to `stop` inclusive.
    pub fn linspace(variable: SweepVariable, start: f64, stop: f64, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::domain("sweep needs at least one point"));
        }
        if points == 1 {
            return Self::new(variable, vec![start]);
        }
        let step = (stop - start) / (points - 1) as f64;
        let values = (0..points)
            .map(|i| if i + 1 == points { stop } else { start + step * i as f64 })
            .collect();
        Self::new(variable, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Grid coordinates (one value, or `(Λ, Δ_R)` for joint sweeps).
    pub point: Vec<f64>,
    pub se: f64,
    pub dof: Option<f64>,
    pub n_active: usize,
    pub eigenvalues: Vec<f64>,
}

impl SweepRow {
    fn from_report(point: Vec<f64>, r: &RateReport, dof_snr: f64) -> Self {
        Self {
            point,
            se: r.se,
            dof: r.effective_dof_at(dof_snr),
            n_active: r.active_count(),
            eigenvalues: r.eigenvalues.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Argmax {
    pub point: Vec<f64>,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionTarget {
    pub fraction: f64,
    /// Smallest coordinate reaching `fraction · C*`.
    pub point: Vec<f64>,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub rows: Vec<SweepRow>,
    /// Refined maximizer (may fall between grid points).
    pub argmax: Argmax,
    pub fractions: Vec<FractionTarget>,
    pub convention: SnrConvention,
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
pub fn golden_max<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let (fa, fb) = (f(a)?, f(b)?);
    let best = [(c, fc), (d, fd), (a, fa), (b, fb)]
        .into_iter()
        .fold(
            (f64::NAN, f64::NEG_INFINITY),
            |acc, p| if p.1 > acc.1 { p } else { acc },
        );
    Ok(best)
}

fn evaluate_grid<F>(values: &[f64], f: &F) -> Result<Vec<RateReport>>
where
    F: Fn(f64) -> Result<RateReport> + Sync,
{
    values.par_iter().map(|&v| f(v)).collect()
}

fn grid_argmax(rows: &[RateReport]) -> usize {
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.se > rows[best].se {
            best = i;
        }
    }
    best
}

/// Maximizes over a 1-D grid, refines around the best point and locates
/// fraction targets by bisection.
fn optimize_1d<F>(
    variable: SweepVariable,
    grid: &SweepGrid,
    fractions: &[f64],
    tol: f64,
    dof_snr: f64,
    convention: SnrConvention,
    f: F,
) -> Result<SweepResult>
where
    F: Fn(f64) -> Result<RateReport> + Sync,
{
    let g = grid.values();
    let reports = evaluate_grid(g, &f)?;
    let i = grid_argmax(&reports);
    let (mut x_star, mut c_star) = (g[i], reports[i].se);
    if g.len() > 1 {
        let lo = g[i.saturating_sub(1)];
        let hi = g[(i + 1).min(g.len() - 1)];
        let (x, c) = golden_max(|x| f(x).map(|r| r.se), lo, hi, tol)?;
        if c > c_star {
            x_star = x;
            c_star = c;
        }
    }

    let mut targets = Vec::with_capacity(fractions.len());
    for &frac in fractions {
        if !(frac > 0.0 && frac <= 1.0) {
            return Err(Error::domain(format!("fraction must lie in (0, 1], got {frac}")));
        }
        let goal = frac * c_star;
        let (point, se) = if frac == 1.0 {
            (x_star, c_star)
        } else {
            let first = g.iter().zip(&reports).position(|(&x, r)| x <= x_star && r.se >= goal);
            match first {
                Some(0) => (g[0], reports[0].se),
                Some(j) => bisect_first(&f, g[j - 1], g[j], goal, tol)?,
                None => {
                    // Only the refined maximizer reaches the goal.
                    let below = g.iter().rposition(|&x| x <= x_star).unwrap_or(0);
                    bisect_first(&f, g[below], x_star, goal, tol)?
                }
            }
        };
        targets.push(FractionTarget {
            fraction: frac,
            point: vec![point],
            se,
        });
    }

    Ok(SweepResult {
        variable,
        rows: g
            .iter()
            .zip(&reports)
            .map(|(&x, r)| SweepRow::from_report(vec![x], r, dof_snr))
            .collect(),
        argmax: Argmax {
            point: vec![x_star],
            se: c_star,
        },
        fractions: targets,
        convention,
    })
}

/// Smallest `x ∈ (lo, hi]` with `C(x) ≥ goal`, assuming `C(lo) < goal ≤ C(hi)`.
fn bisect_first<F>(f: &F, mut lo: f64, mut hi: f64, goal: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<RateReport>,
{
    let mut c_hi = f(hi)?.se;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let c = f(mid)?.se;
        if c >= goal {
            hi = mid;
            c_hi = c;
        } else {
            lo = mid;
        }
    }
    Ok((hi, c_hi))
}

/// Rate of a continuous linear aperture of length `aperture` (= 2L).
pub fn ula_rate(
    t_pol: Polarizations,
    r_pol: Polarizations,
    aperture: f64,
    theta: f64,
    d: f64,
    snr: &SnrConfig,
) -> Result<RateReport> {
    let w = ula_gramian(t_pol, r_pol, aperture / (2.0 * d), theta, d)?;
    spectral_efficiency(&w.w, snr.snr0(t_pol.count(), d))
}

/// Sweeps the linear aperture length `Λ` (meters) and reports `Λ*` plus the
/// smallest `Λ` reaching each requested fraction of `C*`.
pub fn optimal_aperture_ula(
    t_pol: Polarizations,
    r_pol: Polarizations,
    theta: f64,
    d: f64,
    snr: &SnrConfig,
    grid: &SweepGrid,
    fractions: &[f64],
) -> Result<SweepResult> {
    optimize_1d(
        SweepVariable::Aperture,
        grid,
        fractions,
        REFINE_REL * d,
        snr.ratio,
        snr.convention,
        |x| ula_rate(t_pol, r_pol, x, theta, d, snr),
    )
}

/// Smallest linear aperture reaching `fraction · C*`.
pub fn aperture_for_fraction(
    fraction: f64,
    t_pol: Polarizations,
    r_pol: Polarizations,
    theta: f64,
    d: f64,
    snr: &SnrConfig,
    grid: &SweepGrid,
) -> Result<f64> {
    let r = optimal_aperture_ula(t_pol, r_pol, theta, d, snr, grid, &[fraction])?;
    Ok(r.fractions[0].point[0])
}

/// Panel half-lengths `(L_x, L_y)` with `L_x/L_y = aspect` and aperture
/// `2√(L_x² + L_y²) = aperture`.
pub fn upa_half_lengths(aperture: f64, aspect: f64) -> (f64, f64) {
    let l_y = aperture / (2.0 * (1.0 + aspect * aspect).sqrt());
    (aspect * l_y, l_y)
}

/// Rate of a continuous planar aperture with receiver at `(0, D sinθ, D cosθ)`.
pub fn upa_rate(
    t_pol: Polarizations,
    r_pol: Polarizations,
    aperture: f64,
    aspect: f64,
    theta: f64,
    d: f64,
    snr: &SnrConfig,
) -> Result<RateReport> {
    let rx = PolarPlacement::new(d, theta)?.to_cartesian();
    let (l_x, l_y) = upa_half_lengths(aperture, aspect);
    let g = UpaGeometry::new(l_x, l_y, rx)?;
    let w = upa_gramian(&g, d, t_pol, r_pol)?;
    spectral_efficiency(&w.w, snr.snr0(t_pol.count(), d))
}

/// Sweep over the planar aperture `Λ_UPA = 2√(L_x² + L_y²)` at fixed aspect
/// ratio `L_x/L_y` (1 for a square panel).
#[allow(clippy::too_many_arguments)]
pub fn upa_aperture_sweep(
    t_pol: Polarizations,
    r_pol: Polarizations,
    theta: f64,
    d: f64,
    snr: &SnrConfig,
    aspect: f64,
    grid: &SweepGrid,
    fractions: &[f64],
) -> Result<SweepResult> {
    if !(aspect > 0.0) {
        return Err(Error::domain(format!("aspect ratio must be positive, got {aspect}")));
    }
    optimize_1d(
        SweepVariable::Aperture,
        grid,
        fractions,
        REFINE_REL * d,
        snr.ratio,
        snr.convention,
        |x| upa_rate(t_pol, r_pol, x, aspect, theta, d, snr),
    )
}

/// Finite linear transmitter with `2M+1` elements along y and a line of
/// receive antennas around `(0, D sinθ, D cosθ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteLink {
    pub t_pol: Polarizations,
    pub r_pol: Polarizations,
    pub m_half: usize,
    pub n_r: usize,
    pub d: f64,
    pub theta: f64,
    pub lambda: f64,
    pub rx_axis: RxAxis,
}

impl FiniteLink {
    /// Normalized Gramian for aperture `Λ = 2MΔ_T` and antenna separation `Δ_R`.
    pub fn gramian(&self, aperture: f64, delta_r: f64) -> Result<nalgebra::DMatrix<num_complex::Complex64>> {
        if self.m_half == 0 {
            return Err(Error::domain(
                "finite link needs M ≥ 1 to set the spacing from the aperture",
            ));
        }
        let array = ArraySpec::ula(aperture / (2.0 * self.m_half as f64), self.m_half, self.t_pol)?;
        let centre = PolarPlacement::new(self.d, self.theta)?.to_cartesian();
        let rx = RxSpec::line(centre, self.n_r, delta_r, self.rx_axis, self.r_pol)?;
        Ok(finite_gramian(&array, &rx, self.lambda, self.d)?.w)
    }

    pub fn rate(&self, aperture: f64, delta_r: f64, snr: &SnrConfig) -> Result<RateReport> {
        let w = self.gramian(aperture, delta_r)?;
        spectral_efficiency(&w, snr.snr0(self.t_pol.count(), self.d))
    }
}

/// `C` over the `(Λ, Δ_R)` grid; rows are ordered aperture-major. The
/// fraction targets are the smallest-aperture grid points reaching each
/// fraction of the grid maximum (ties broken by smaller `Δ_R`).
pub fn rx_separation_sweep(
    link: &FiniteLink,
    aperture_grid: &SweepGrid,
    delta_r_grid: &SweepGrid,
    snr: &SnrConfig,
    fractions: &[f64],
) -> Result<SweepResult> {
    let pts: Vec<(f64, f64)> = aperture_grid
        .values()
        .iter()
        .flat_map(|&a| delta_r_grid.values().iter().map(move |&r| (a, r)))
        .collect();
    let reports: Vec<RateReport> = pts
        .par_iter()
        .map(|&(a, r)| link.rate(a, r, snr))
        .collect::<Result<_>>()?;
    let best = grid_argmax(&reports);
    let c_star = reports[best].se;
    let mut targets = Vec::new();
    for &frac in fractions {
        if !(frac > 0.0 && frac <= 1.0) {
            return Err(Error::domain(format!("fraction must lie in (0, 1], got {frac}")));
        }
        let goal = frac * c_star;
        let j = if frac == 1.0 {
            best
        } else {
            reports.iter().position(|r| r.se >= goal).unwrap_or(best)
        };
        targets.push(FractionTarget {
            fraction: frac,
            point: vec![pts[j].0, pts[j].1],
            se: reports[j].se,
        });
    }
    Ok(SweepResult {
        variable: SweepVariable::JointApertureRxSep,
        rows: pts
            .iter()
            .zip(&reports)
            .map(|(&(a, r), rep)| SweepRow::from_report(vec![a, r], rep, snr.ratio))
            .collect(),
        argmax: Argmax {
            point: vec![pts[best].0, pts[best].1],
            se: c_star,
        },
        fractions: targets,
        convention: snr.convention,
    })
}

/// Finite and continuous-aperture eigenvalues at one panel height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRow {
    /// Requested half-height.
    pub l_y: f64,
    /// Half-extents actually realized by the element grid.
    pub l_x_grid: f64,
    pub l_y_grid: f64,
    pub finite: Vec<f64>,
    pub asymptotic: Vec<f64>,
    /// `|finite − asymptotic| / asymptotic` per eigenvalue.
    pub rel_gap: Vec<f64>,
}

/// Compares the normalized 3×3 Gramian eigenvalues of a `Δ_T`-spaced panel
/// with the continuous-aperture closed form, for each `L_y` in the grid.
pub fn eigenvalue_size_study(l_x: f64, l_y_grid: &[f64], d: f64, theta: f64, delta_t: f64) -> Result<Vec<EigenRow>> {
    let rx = PolarPlacement::new(d, theta)?.to_cartesian();
    l_y_grid
        .par_iter()
        .map(|&l_y| eigen_row(l_x, l_y, rx, d, delta_t))
        .collect()
}

fn eigen_row(l_x: f64, l_y: f64, rx: Point, d: f64, delta_t: f64) -> Result<EigenRow> {
    let k = (l_x / delta_t).round() as usize;
    let m = (l_y / delta_t).round() as usize;
    if k == 0 || m == 0 {
        return Err(Error::domain(format!(
            "panel {l_x}×{l_y} is smaller than one element spacing {delta_t}"
        )));
    }
    let array = ArraySpec::new(delta_t, m, k, Polarizations::THREE)?;
    let (l_x_grid, l_y_grid) = array.half_extents();
    let single = RxSpec::single(rx, Polarizations::THREE)?;
    // λ plays no role with a single receive antenna.
    let finite = eig_sorted(&finite_gramian(&array, &single, 1.0, d)?.w)?;
    let asymptotic = eig_sorted(&upa_gramian_3x3(&UpaGeometry::new(l_x_grid, l_y_grid, rx)?, d)?.w)?;
    let rel_gap = finite
        .iter()
        .zip(&asymptotic)
        .map(|(f, a)| (f - a).abs() / a.abs())
        .collect();
    Ok(EigenRow {
        l_y,
        l_x_grid,
        l_y_grid,
        finite,
        asymptotic,
        rel_gap,
    })
}

/// `Λ*/D` under each candidate convention, and the candidate closest to
/// `target` (first wins on ties).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub chosen: SnrConvention,
    pub candidates: Vec<(SnrConvention, f64)>,
}

/// Picks the SNR convention whose optimal normalized aperture for the given
/// configuration is closest to `target`.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_convention(
    candidates: &[SnrConvention],
    ratio: f64,
    t_pol: Polarizations,
    r_pol: Polarizations,
    theta: f64,
    d: f64,
    grid: &SweepGrid,
    target: f64,
) -> Result<Calibration> {
    if candidates.is_empty() {
        return Err(Error::domain("no candidate conventions"));
    }
    let mut out = Vec::with_capacity(candidates.len());
    for &c in candidates {
        let snr = SnrConfig::new(ratio, c)?;
        let r = optimal_aperture_ula(t_pol, r_pol, theta, d, &snr, grid, &[])?;
        out.push((c, r.argmax.point[0] / d));
    }
    let mut chosen = 0;
    for (i, (_, v)) in out.iter().enumerate() {
        if (v - target).abs() < (out[chosen].1 - target).abs() {
            chosen = i;
        }
    }
    Ok(Calibration {
        chosen: out[chosen].0,
        candidates: out,
    })
}

/// Rate of the normalized Gramian at a given SNR₀, from eigenvalues already
/// computed (used by callers that reuse eigenvalues across SNR values).
pub fn rate_at(eigenvalues: &[f64], snr0: f64) -> Result<RateReport> {
    rate_from_eigenvalues(eigenvalues.to_vec(), snr0)
}
