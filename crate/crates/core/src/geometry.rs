//! Transmit panel layout, receiver placement and the tetrahedron quantities
//! (vertex distances, edge view angles, face tilts) that parameterize the
//! planar-array closed forms.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Vector3<f64>;

/// Number of dipole orientations used at one end of the link. The first
/// `n` of (x, y, z) are always the ones in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Polarizations(u8);

impl Polarizations {
    pub const ONE: Self = Self(1);
    pub const TWO: Self = Self(2);
    pub const THREE: Self = Self(3);

    pub fn new(n: u8) -> Result<Self> {
        match n {
            1..=3 => Ok(Self(n)),
            _ => Err(Error::domain(format!("polarization count must be 1, 2 or 3, got {n}"))),
        }
    }

    pub fn count(self) -> usize {
        self.0 as usize
    }
}

impl TryFrom<u8> for Polarizations {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        Self::new(n)
    }
}

impl From<Polarizations> for u8 {
    fn from(p: Polarizations) -> u8 {
        p.0
    }
}

/// Uniform planar array in the z = 0 plane, centred on the origin.
///
/// Rows run along y and columns along x. The canonical layout has an odd
/// count per axis, `2M+1` rows and `2K+1` columns at positions `(kΔ, mΔ, 0)`;
/// even counts are accepted through [`ArraySpec::from_counts`] and are then
/// placed at half-integer offsets so the panel stays centred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    delta_t: f64,
    rows: usize,
    cols: usize,
    t_pol: Polarizations,
}

impl ArraySpec {
    /// `(2M+1) × (2K+1)` panel with spacing `delta_t`.
    pub fn new(delta_t: f64, m_half: usize, k_half: usize, t_pol: Polarizations) -> Result<Self> {
        Self::from_counts(delta_t, 2 * m_half + 1, 2 * k_half + 1, t_pol)
    }

    /// Uniform linear array along y (`K = 0`).
    pub fn ula(delta_t: f64, m_half: usize, t_pol: Polarizations) -> Result<Self> {
        Self::new(delta_t, m_half, 0, t_pol)
    }

    pub fn from_counts(delta_t: f64, rows: usize, cols: usize, t_pol: Polarizations) -> Result<Self> {
        if !(delta_t > 0.0 && delta_t.is_finite()) {
            return Err(Error::domain(format!(
                "element spacing must be positive, got {delta_t}"
            )));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::domain("array needs at least one row and one column"));
        }
        Ok(Self {
            delta_t,
            rows,
            cols,
            t_pol,
        })
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn t_pol(&self) -> Polarizations {
        self.t_pol
    }

    pub fn with_t_pol(mut self, t_pol: Polarizations) -> Self {
        self.t_pol = t_pol;
        self
    }

    pub fn element_count(&self) -> usize {
        self.rows * self.cols
    }

    /// `M` for odd row counts; `(rows - 1) / 2` in general.
    pub fn m_half(&self) -> f64 {
        (self.rows as f64 - 1.0) / 2.0
    }

    pub fn k_half(&self) -> f64 {
        (self.cols as f64 - 1.0) / 2.0
    }

    /// Half-extents `(L_x, L_y) = (KΔ, MΔ)` of the element grid.
    pub fn half_extents(&self) -> (f64, f64) {
        (self.k_half() * self.delta_t, self.m_half() * self.delta_t)
    }

    /// Position of the element with flat index `idx` in [`element_positions`]
    /// order (column-major over `(k, m)`: `k` outer, `m` inner).
    pub fn position(&self, idx: usize) -> Point {
        let k = (idx / self.rows) as f64 - self.k_half();
        let m = (idx % self.rows) as f64 - self.m_half();
        Point::new(k * self.delta_t, m * self.delta_t, 0.0)
    }
}

/// All element positions, ordered by `(k, m)` ascending with `k` outer.
pub fn element_positions(spec: &ArraySpec) -> Vec<Point> {
    (0..spec.element_count()).map(|i| spec.position(i)).collect()
}

/// Axis along which a receive line array is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RxAxis {
    X,
    #[default]
    Y,
    Z,
}

impl RxAxis {
    fn unit(self) -> Point {
        match self {
            RxAxis::X => Point::x(),
            RxAxis::Y => Point::y(),
            RxAxis::Z => Point::z(),
        }
    }
}

/// Receive antennas, each with `r_pol` dipoles aligned with the axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RxSpec {
    positions: Vec<Point>,
    r_pol: Polarizations,
    delta_r: f64,
}

impl RxSpec {
    pub fn single(position: Point, r_pol: Polarizations) -> Result<Self> {
        Self::from_positions(vec![position], r_pol, 0.0)
    }

    /// `n_r` antennas spaced `delta_r` apart along `axis`, centred on `centre`.
    pub fn line(centre: Point, n_r: usize, delta_r: f64, axis: RxAxis, r_pol: Polarizations) -> Result<Self> {
        if n_r == 0 {
            return Err(Error::domain("receiver needs at least one antenna"));
        }
        let offset = (n_r as f64 - 1.0) / 2.0;
        let dir = axis.unit();
        let positions = (0..n_r)
            .map(|i| centre + dir * ((i as f64 - offset) * delta_r))
            .collect();
        Self::from_positions(positions, r_pol, delta_r)
    }

    pub fn from_positions(positions: Vec<Point>, r_pol: Polarizations, delta_r: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::domain("receiver needs at least one antenna"));
        }
        if let Some(p) = positions
            .iter()
            .find(|p| !(p.z > 0.0) || !p.iter().all(|c| c.is_finite()))
        {
            return Err(Error::domain(format!(
                "receive antennas must lie in front of the panel (z > 0), got ({}, {}, {})",
                p.x, p.y, p.z
            )));
        }
        if positions.len() > 1 && !(delta_r > 0.0) {
            return Err(Error::domain("antenna separation must be positive when n_r > 1"));
        }
        Ok(Self {
            positions,
            r_pol,
            delta_r,
        })
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn n_r(&self) -> usize {
        self.positions.len()
    }

    pub fn r_pol(&self) -> Polarizations {
        self.r_pol
    }

    pub fn delta_r(&self) -> f64 {
        self.delta_r
    }

    pub fn with_r_pol(mut self, r_pol: Polarizations) -> Self {
        self.r_pol = r_pol;
        self
    }

    /// Number of receive ports, `N_r · r_pol`.
    pub fn ports(&self) -> usize {
        self.n_r() * self.r_pol.count()
    }
}

/// Receiver position in the y-z plane given by range and elevation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPlacement {
    pub distance: f64,
    pub elevation: f64,
}

impl PolarPlacement {
    pub fn new(distance: f64, elevation: f64) -> Result<Self> {
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(Error::domain(format!("distance must be positive, got {distance}")));
        }
        if !(elevation.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::domain(format!(
                "elevation must satisfy |θ| < π/2, got {elevation}"
            )));
        }
        Ok(Self { distance, elevation })
    }

    pub fn to_cartesian(&self) -> Point {
        polar_to_cartesian(self)
    }
}

/// `(0, D sinθ, D cosθ)`.
pub fn polar_to_cartesian(p: &PolarPlacement) -> Point {
    let (s, c) = p.elevation.sin_cos();
    Point::new(0.0, p.distance * s, p.distance * c)
}

/// Antenna-spacing product `Δ_T Δ_R = Dλ/M` that lets two confronted ULAs
/// carry `m_streams` parallel streams.
pub fn rayleigh_spacing_product(d: f64, lambda: f64, m_streams: usize) -> f64 {
    d * lambda / m_streams as f64
}

/// Distances, view angles and tilt angles of the tetrahedron formed by a
/// `2L_x × 2L_y` panel and a receiver at `(x₀, y₀, z₀)`.
///
/// Naming: a `+`/`−` suffix on an x-quantity refers to the panel edge at
/// `x = ±L_x`, and likewise for y. `gamma_y_*` is the angle under which the
/// receiver sees the edge parallel to y (so `gamma_y_plus` spans the
/// vertices `(L_x, ±L_y)`); `beta_x_*` is the tilt of the face containing that
/// edge. `cos β_x^± = (L_x ∓ x₀)/√((L_x ∓ x₀)² + z₀²)`. Vertex distance
/// `d_ab` goes to `(aL_x, bL_y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpaGeometry {
    pub l_x: f64,
    pub l_y: f64,
    pub x0: f64,
    pub y0: f64,
    pub z0: f64,
    pub d_pp: f64,
    pub d_pm: f64,
    pub d_mp: f64,
    pub d_mm: f64,
    pub gamma_x_plus: f64,
    pub gamma_x_minus: f64,
    pub gamma_y_plus: f64,
    pub gamma_y_minus: f64,
    pub beta_x_plus: f64,
    pub beta_x_minus: f64,
    pub beta_y_plus: f64,
    pub beta_y_minus: f64,
    pub sigma_pp: f64,
    pub sigma_pm: f64,
    pub sigma_mp: f64,
    pub sigma_mm: f64,
}

/// Sine/cosine pair of a tilt angle, taken directly from the side ratios
/// rather than through the angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tilt {
    pub cos: f64,
    pub sin: f64,
    /// `√(edge offset² + z₀²)`: distance from the receiver's foot line to the edge.
    pub reach: f64,
}

/// Receivers closer to the panel plane than this fraction of their range are
/// rejected.
pub const MIN_ELEVATION_RATIO: f64 = 1e-6;

impl UpaGeometry {
    pub fn new(l_x: f64, l_y: f64, rx: Point) -> Result<Self> {
        if !(l_x > 0.0 && l_y > 0.0) {
            return Err(Error::domain(format!(
                "panel half-lengths must be positive, got ({l_x}, {l_y})"
            )));
        }
        let (x0, y0, z0) = (rx.x, rx.y, rx.z);
        if !(z0 > 0.0) {
            return Err(Error::domain(format!("receiver must satisfy z > 0, got z = {z0}")));
        }
        if z0 / rx.norm() < MIN_ELEVATION_RATIO {
            return Err(Error::domain(format!(
                "receiver is nearly in the panel plane (z/D = {:.3e})",
                z0 / rx.norm()
            )));
        }
        let dist = |a: f64, b: f64| (a * a + b * b + z0 * z0).sqrt();
        let d_pp = dist(l_x - x0, l_y - y0);
        let d_pm = dist(l_x - x0, l_y + y0);
        let d_mp = dist(l_x + x0, l_y - y0);
        let d_mm = dist(l_x + x0, l_y + y0);

        let reach_xp = (l_x - x0).hypot(z0);
        let reach_xm = (l_x + x0).hypot(z0);
        let reach_yp = (l_y - y0).hypot(z0);
        let reach_ym = (l_y + y0).hypot(z0);

        // arctan((h − o)/r) + arctan((h + o)/r) as a single atan2; the sum lies in
        // (0, π) and the one-term form avoids cancellation for narrow edges.
        let view = |half: f64, offset: f64, reach: f64| {
            (2.0 * half * reach).atan2(reach * reach + offset * offset - half * half)
        };

        Ok(Self {
            l_x,
            l_y,
            x0,
            y0,
            z0,
            d_pp,
            d_pm,
            d_mp,
            d_mm,
            gamma_x_plus: view(l_x, x0, reach_yp),
            gamma_x_minus: view(l_x, x0, reach_ym),
            gamma_y_plus: view(l_y, y0, reach_xp),
            gamma_y_minus: view(l_y, y0, reach_xm),
            beta_x_plus: z0.atan2(l_x - x0),
            beta_x_minus: z0.atan2(l_x + x0),
            beta_y_plus: z0.atan2(l_y - y0),
            beta_y_minus: z0.atan2(l_y + y0),
            sigma_pp: (l_x - x0) * (l_y - y0) / (d_pp * d_pp),
            sigma_pm: (l_x - x0) * (l_y + y0) / (d_pm * d_pm),
            sigma_mp: (l_x + x0) * (l_y - y0) / (d_mp * d_mp),
            sigma_mm: (l_x + x0) * (l_y + y0) / (d_mm * d_mm),
        })
    }

    pub fn receiver(&self) -> Point {
        Point::new(self.x0, self.y0, self.z0)
    }

    /// Distance from the panel centre to the receiver.
    pub fn range(&self) -> f64 {
        self.receiver().norm()
    }

    pub fn tilt_x_plus(&self) -> Tilt {
        Self::tilt(self.l_x - self.x0, self.z0)
    }

    pub fn tilt_x_minus(&self) -> Tilt {
        Self::tilt(self.l_x + self.x0, self.z0)
    }

    pub fn tilt_y_plus(&self) -> Tilt {
        Self::tilt(self.l_y - self.y0, self.z0)
    }

    pub fn tilt_y_minus(&self) -> Tilt {
        Self::tilt(self.l_y + self.y0, self.z0)
    }

    fn tilt(offset: f64, z0: f64) -> Tilt {
        let reach = offset.hypot(z0);
        Tilt {
            cos: offset / reach,
            sin: z0 / reach,
            reach,
        }
    }

    /// `log(d₋₋ d₊₊ / (d₊₋ d₋₊))`.
    pub fn log_vertex_ratio(&self) -> f64 {
        (self.d_mm.ln() + self.d_pp.ln()) - (self.d_pm.ln() + self.d_mp.ln())
    }

    /// Aperture length `2√(L_x² + L_y²)`.
    pub fn aperture(&self) -> f64 {
        2.0 * self.l_x.hypot(self.l_y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pol(n: u8) -> Polarizations {
        Polarizations::new(n).unwrap()
    }

    #[test]
    fn single_element_at_origin() {
        let a = ArraySpec::new(1.0, 0, 0, pol(3)).unwrap();
        assert_eq!(element_positions(&a), vec![Point::zeros()]);
    }

    #[test]
    fn ula_along_y() {
        let a = ArraySpec::new(0.5, 1, 0, pol(3)).unwrap();
        assert_eq!(
            element_positions(&a),
            vec![Point::new(0.0, -0.5, 0.0), Point::zeros(), Point::new(0.0, 0.5, 0.0)]
        );
    }

    #[test]
    fn square_grid_order_and_extent() {
        let a = ArraySpec::new(0.5, 1, 1, pol(3)).unwrap();
        let p = element_positions(&a);
        assert_eq!(p.len(), 9);
        assert_eq!(p[0], Point::new(-0.5, -0.5, 0.0));
        assert_eq!(p[1], Point::new(-0.5, 0.0, 0.0));
        assert_eq!(p[3], Point::new(0.0, -0.5, 0.0));
        assert_eq!(p[8], Point::new(0.5, 0.5, 0.0));
        assert_eq!(a.half_extents(), (0.5, 0.5));
    }

    #[test]
    fn even_counts_are_centred() {
        let a = ArraySpec::from_counts(1.0, 2, 1, pol(2)).unwrap();
        let p = element_positions(&a);
        assert_eq!(p, vec![Point::new(0.0, -0.5, 0.0), Point::new(0.0, 0.5, 0.0)]);
    }

    #[test]
    fn positions_are_point_symmetric() {
        let a = ArraySpec::new(0.3, 4, 3, pol(3)).unwrap();
        let p = element_positions(&a);
        let n = p.len();
        for i in 0..n {
            assert_eq!(p[i], -p[n - 1 - i]);
            assert_eq!(p[i].z, 0.0);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(Polarizations::new(0).is_err());
        assert!(Polarizations::new(4).is_err());
        assert!(ArraySpec::new(0.0, 1, 1, pol(3)).is_err());
        assert!(ArraySpec::new(-1.0, 1, 1, pol(3)).is_err());
        assert!(RxSpec::single(Point::new(0.0, 0.0, 0.0), pol(3)).is_err());
        assert!(RxSpec::single(Point::new(0.0, 0.0, -1.0), pol(3)).is_err());
        assert!(RxSpec::from_positions(vec![Point::z(), Point::z() * 2.0], pol(3), 0.0).is_err());
        assert!(PolarPlacement::new(1.0, PI / 2.0).is_err());
        assert!(PolarPlacement::new(0.0, 0.0).is_err());
    }

    #[test]
    fn polar_examples() {
        let p = polar_to_cartesian(&PolarPlacement::new(4.0, 0.0).unwrap());
        assert_eq!(p, Point::new(0.0, 0.0, 4.0));
        let p = polar_to_cartesian(&PolarPlacement::new(4.0, PI / 6.0).unwrap());
        assert!((p.y - 2.0).abs() < 1e-15);
        assert!((p.z - 2.0 * 3f64.sqrt()).abs() < 1e-15);
        let p = polar_to_cartesian(&PolarPlacement::new(1.0, PI / 2.0 - 1e-9).unwrap());
        assert!(p.z > 0.0 && p.z < 1e-8);
    }

    #[test]
    fn rx_line_is_centred_along_axis() {
        let rx = RxSpec::line(Point::new(0.0, 0.0, 3.0), 3, 0.5, RxAxis::Y, pol(3)).unwrap();
        assert_eq!(rx.positions()[0], Point::new(0.0, -0.5, 3.0));
        assert_eq!(rx.positions()[1], Point::new(0.0, 0.0, 3.0));
        assert_eq!(rx.positions()[2], Point::new(0.0, 0.5, 3.0));
        assert_eq!(rx.ports(), 9);
        let rx = RxSpec::line(Point::new(0.0, 0.0, 3.0), 2, 1.0, RxAxis::X, pol(2)).unwrap();
        assert_eq!(rx.positions()[0], Point::new(-0.5, 0.0, 3.0));
    }

    #[test]
    fn rayleigh_examples() {
        assert!((rayleigh_spacing_product(10.0, 0.01, 4) - 0.025).abs() < 1e-17);
        assert_eq!(rayleigh_spacing_product(1.0, 1.0, 1), 1.0);
        assert!((rayleigh_spacing_product(100.0, 0.005, 10) - 0.05).abs() < 1e-16);
    }

    #[test]
    fn symmetric_geometry() {
        let g = UpaGeometry::new(1.0, 1.0, Point::new(0.0, 0.0, 1.0)).unwrap();
        for d in [g.d_pp, g.d_pm, g.d_mp, g.d_mm] {
            assert!((d - 3f64.sqrt()).abs() < 1e-15);
        }
        assert_eq!(g.gamma_x_plus, g.gamma_x_minus);
        assert_eq!(g.gamma_y_plus, g.gamma_y_minus);
        for s in [g.sigma_pp, g.sigma_pm, g.sigma_mp, g.sigma_mm] {
            assert!((s - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(g.log_vertex_ratio(), 0.0);
    }

    #[test]
    fn thin_panel_recovers_ula_view_angle() {
        let (l_y, theta, d) = (1.5, 0.4f64, 3.0);
        let (s, c) = theta.sin_cos();
        let g = UpaGeometry::new(1e-9, l_y, Point::new(0.0, d * s, d * c)).unwrap();
        let rho = l_y / d;
        let bracket = ((rho - s) / c).atan() + ((rho + s) / c).atan();
        assert!((g.gamma_y_plus - bracket).abs() < 1e-12);
        assert!((g.gamma_y_minus - bracket).abs() < 1e-12);
    }

    #[test]
    fn grazing_receiver_is_rejected() {
        assert!(UpaGeometry::new(1.0, 1.0, Point::new(0.0, 10.0, 1e-7)).is_err());
        assert!(UpaGeometry::new(0.0, 1.0, Point::z()).is_err());
    }

    #[test]
    fn tilt_pairs_match_angles() {
        let g = UpaGeometry::new(2.0, 1.0, Point::new(2.7, -0.2, 0.9)).unwrap();
        for (t, beta) in [
            (g.tilt_x_plus(), g.beta_x_plus),
            (g.tilt_x_minus(), g.beta_x_minus),
            (g.tilt_y_plus(), g.beta_y_plus),
            (g.tilt_y_minus(), g.beta_y_minus),
        ] {
            assert!((t.cos - beta.cos()).abs() < 1e-14);
            assert!((t.sin - beta.sin()).abs() < 1e-14);
        }
        // receiver beyond the x = +L_x edge: obtuse tilt
        assert!(g.beta_x_plus > PI / 2.0);
    }
}
