//! Oracle suites run by `holomimo validate`.

use std::fmt::Write as _;

use holomimo::channel::{lemma1_verify, PhysicalConstants};
use holomimo::geometry::{ArraySpec, Point, Polarizations, UpaGeometry};
use holomimo::holographic::{
    partial_sums, phi2, quadrature_oracle, single_integral_oracle, ula_gramian, ula_matrix, upa_gramian,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Lemma1,
    Quadrature,
    Riemann,
}

/// Worst case of one check over all seeded cases.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub worst_case: usize,
    /// Advisory checks are reported but do not fail the suite.
    pub advisory: bool,
    pub failures: Vec<usize>,
}

impl Check {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            max_error: 0.0,
            tolerance,
            worst_case: 0,
            advisory: false,
            failures: Vec::new(),
        }
    }

    fn advisory(mut self) -> Self {
        self.advisory = true;
        self
    }

    fn record(&mut self, case: usize, err: f64) {
        if err > self.max_error || err.is_nan() {
            self.max_error = err;
            self.worst_case = case;
        }
        if !(err <= self.tolerance) {
            self.failures.push(case);
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.advisory || c.passed())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "suite {} (seed {}, {} cases)", self.suite, self.seed, self.cases).unwrap();
        for c in &self.checks {
            let status = match (c.passed(), c.advisory) {
                (true, _) => "PASS",
                (false, true) => "WARN",
                (false, false) => "FAIL",
            };
            writeln!(
                out,
                "  {status} {:<40} max {:.3e} (tol {:.1e}, worst case {})",
                c.name, c.max_error, c.tolerance, c.worst_case
            )
            .unwrap();
            if !c.passed() {
                let shown: Vec<String> = c.failures.iter().take(20).map(|i| i.to_string()).collect();
                writeln!(out, "       failing cases ({}): {}", c.failures.len(), shown.join(" ")).unwrap();
            }
        }
        out
    }
}

/// `max |a − b| / max |b|`.
fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax()
}

/// Panel and receiver drawn from the validation box.
pub fn random_panel(rng: &mut ChaCha8Rng) -> (f64, f64, Point) {
    let l_x = rng.gen_range(0.1..4.0);
    let l_y = rng.gen_range(0.1..4.0);
    let rx = Point::new(
        rng.gen_range(-5.0..5.0),
        rng.gen_range(-5.0..5.0),
        rng.gen_range(0.5..10.0),
    );
    (l_x, l_y, rx)
}

pub fn quadrature_suite(seed: u64, cases: usize) -> CliResult<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vs_double3 = Check::new("3x3 closed form vs double integral", 1e-8);
    let mut vs_double2 = Check::new("2x3 closed form vs double integral", 1e-8);
    let mut vs_single2 = Check::new("2x3 closed form vs single integral", 1e-9);
    let mut trace = Check::new("trace = 2 D^2 Phi2", 1e-12);
    for case in 0..cases {
        let (l_x, l_y, rx) = random_panel(&mut rng);
        let g = UpaGeometry::new(l_x, l_y, rx)?;
        let d = rx.norm();
        let three = Polarizations::THREE;
        let w3 = upa_gramian(&g, d, three, three)?.w;
        let w2 = upa_gramian(&g, d, Polarizations::TWO, three)?.w;
        vs_double3.record(case, rel_err(&w3, &quadrature_oracle(&g, d, three, three)?.w));
        vs_double2.record(
            case,
            rel_err(&w2, &quadrature_oracle(&g, d, Polarizations::TWO, three)?.w),
        );
        vs_single2.record(
            case,
            rel_err(&w2, &single_integral_oracle(&g, d, Polarizations::TWO, three)?.w),
        );
        let p = phi2(l_x, l_y, rx.x, rx.y, rx.z)?.value;
        trace.record(case, (w3.trace() - 2.0 * d * d * p).abs() / w3.trace());
    }
    Ok(SuiteReport {
        suite: "quadrature".into(),
        seed,
        cases,
        checks: vec![vs_double3, vs_double2, vs_single2, trace],
    })
}

pub const LEMMA1_WAVELENGTHS: [f64; 3] = [0.005, 0.01, 0.1];

/// Array and receiver with the nearest element between 0.2 m and 20 m away.
pub fn random_link(rng: &mut ChaCha8Rng) -> CliResult<(ArraySpec, Point, f64, Polarizations, Polarizations)> {
    let lambda = LEMMA1_WAVELENGTHS[rng.gen_range(0..3)];
    let t = Polarizations::new(rng.gen_range(1..=3))?;
    let r = Polarizations::new(rng.gen_range(1..=3))?;
    let array = ArraySpec::new(
        rng.gen_range(0.1..1.0) * lambda,
        rng.gen_range(0..6),
        rng.gen_range(0..4),
        t,
    )?;
    let (l_x, l_y) = array.half_extents();
    let corner = l_x.hypot(l_y);
    // Placing the receiver at d + corner from the centre keeps the nearest
    // element within [d, d + 2·corner].
    let d = rng.gen_range(0.2..20.0 - 2.0 * corner);
    let theta: f64 = rng.gen_range(-1.2..1.2);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let dir = Point::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
    let rx = dir * (d + corner);
    Ok((array, rx, lambda, t, r))
}

pub fn lemma1_suite(seed: u64, cases: usize, xi_abs: f64) -> CliResult<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut general = Check::new("measured <= general bound", 0.0);
    // The error is a difference of terms of size |ξ/λ|²/d², so it is compared
    // on that scale.
    let mut exact = Check::new("measured = exact norm (3x3)", 1e-12);
    let mut simplified = Check::new("measured <= simplified t_pol=3 bound", 0.0).advisory();
    for case in 0..cases {
        let (array, rx, lambda, t, r) = random_link(&mut rng)?;
        let c = PhysicalConstants::new(lambda, Complex64::new(xi_abs, 0.0))?;
        let rep = lemma1_verify(&array, &rx, &c, t, r)?;
        general.record(
            case,
            (rep.measured_sup_norm - rep.bound_general).max(0.0) / rep.bound_general,
        );
        if let (Some(b), Some(e)) = (rep.bound_tpol3, rep.exact_tpol3) {
            simplified.record(case, (rep.measured_sup_norm - b).max(0.0) / b);
            if r == Polarizations::THREE {
                exact.record(case, (rep.measured_sup_norm - e).abs() * rep.d_inf.powi(2) / c.gain());
            }
        }
    }
    Ok(SuiteReport {
        suite: "lemma1".into(),
        seed,
        cases,
        checks: vec![general, exact, simplified],
    })
}

pub const RIEMANN_RHOS: [f64; 3] = [0.25, 1.0, 2.5];
pub const RIEMANN_THETAS_DEG: [f64; 3] = [0.0, 20.0, 40.0];
pub const RIEMANN_MS: [usize; 3] = [1_000, 10_000, 100_000];

/// Relative Frobenius error of the finite line Gramian against the closed
/// form, for each element count in [`RIEMANN_MS`].
pub fn riemann_errors(t_pol: Polarizations, rho: f64, theta: f64, d: f64) -> CliResult<Vec<f64>> {
    let exact = ula_gramian(t_pol, Polarizations::THREE, rho, theta, d)?.w;
    RIEMANN_MS
        .iter()
        .map(|&m| {
            let s = partial_sums(m, rho * d / m as f64, d, theta)?;
            let w = ula_matrix(t_pol, Polarizations::THREE, d, theta, s)?.w;
            Ok((&w - &exact).norm() / exact.norm())
        })
        .collect()
}

pub fn riemann_suite() -> CliResult<SuiteReport> {
    let mut finest = Check::new("rel. Frobenius error at M = 1e5", 1e-3);
    let mut order = Check::new("error ratio per 10x M below 1/5", 0.2);
    let mut case = 0;
    for t in [Polarizations::TWO, Polarizations::THREE] {
        for rho in RIEMANN_RHOS {
            for theta in RIEMANN_THETAS_DEG {
                let e = riemann_errors(t, rho, theta.to_radians(), 4.0)?;
                finest.record(case, e[2]);
                order.record(case, (e[1] / e[0]).max(e[2] / e[1]));
                case += 1;
            }
        }
    }
    Ok(SuiteReport {
        suite: "riemann".into(),
        seed: 0,
        cases: case,
        checks: vec![finest, order],
    })
}
