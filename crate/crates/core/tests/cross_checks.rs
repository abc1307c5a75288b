//! The same quantity reached by two independent routes.

use holomimo::capacity::{capacity_finite, eig_sorted, spectral_efficiency, SnrConfig, SnrConvention};
use holomimo::channel::{finite_gramian, lemma1_verify, stack_channel, ChannelModel, PhysicalConstants};
use holomimo::geometry::{ArraySpec, Point, PolarPlacement, Polarizations, RxSpec, UpaGeometry};
use holomimo::holographic::{partial_sums, psi_set, ula_gramian, ula_gramian_offset, ula_matrix, upa_gramian_3x3};
use holomimo::sweep::{aperture_for_fraction, eigenvalue_size_study, optimal_aperture_ula, SweepGrid, SweepVariable};
use num_complex::Complex64;

fn pol(n: u8) -> Polarizations {
    Polarizations::new(n).unwrap()
}

fn receiver(d: f64, theta: f64) -> Point {
    PolarPlacement::new(d, theta).unwrap().to_cartesian()
}

#[test]
fn finite_line_gramian_is_the_sum_layout() {
    for (m, dt, d, theta, t) in [
        (5, 0.3, 2.0, 0.4, 3),
        (40, 0.05, 3.0, -0.9, 2),
        (200, 0.01, 1.0, 0.0, 3),
        (7, 1.0, 0.8, 1.2, 2),
    ] {
        let array = ArraySpec::ula(dt, m, pol(t)).unwrap();
        let rx = RxSpec::single(receiver(d, theta), Polarizations::THREE).unwrap();
        let direct = finite_gramian(&array, &rx, 1.0, d).unwrap().real();
        let via_sums = ula_matrix(
            pol(t),
            Polarizations::THREE,
            d,
            theta,
            partial_sums(m, dt, d, theta).unwrap(),
        )
        .unwrap()
        .w;
        let diff = (&direct - &via_sums).amax();
        assert!(diff <= 1e-13 * direct.amax(), "M={m} t_pol={t}: {diff:e}");
    }
}

#[test]
fn riemann_sums_settle_monotonically() {
    let (rho, theta, d) = (1.0, 0.5, 3.0);
    let psi = psi_set(rho, theta, d).unwrap().values();
    let mut prev = [f64::INFINITY; 5];
    for m in [1_000usize, 2_000, 4_000, 8_000, 16_000] {
        let s = partial_sums(m, rho * d / m as f64, d, theta).unwrap();
        for k in 0..5 {
            let err = (s[k] - psi[k]).abs() / psi[k].abs();
            assert!(err < prev[k], "k={} M={m}: {err:e} after {:e}", k + 2, prev[k]);
            prev[k] = err;
        }
    }
    assert!(prev.iter().all(|&e| e < 1e-4), "{prev:?}");
}

#[test]
fn channel_capacity_equals_normalized_gramian_rate() {
    let c = PhysicalConstants::new(0.01, Complex64::new(0.8, -0.3)).unwrap();
    let (d, theta) = (2.5, 0.6);
    for t in [2u8, 3] {
        let array = ArraySpec::ula(0.04, 12, pol(t)).unwrap();
        let rx = RxSpec::single(receiver(d, theta), Polarizations::THREE).unwrap();
        let h = stack_channel(&array, &rx, &c, ChannelModel::Radiative).unwrap();
        let ratio = 1e4;
        let n = array.element_count() as f64;
        // Total power P̄ spread over N t_pol inputs, unit noise.
        let direct = capacity_finite(&h, ratio / (n * t as f64), 1.0).unwrap();
        let snr = SnrConfig::new(
            ratio,
            SnrConvention::PerEq6 {
                xi_abs: c.xi.norm(),
                lambda: c.lambda,
            },
        )
        .unwrap();
        let w = finite_gramian(&array, &rx, c.lambda, d).unwrap().w;
        let via_w = spectral_efficiency(&w, snr.snr0(t as usize, d)).unwrap();
        assert!(
            (direct.se - via_w.se).abs() <= 1e-9 * via_w.se,
            "{} vs {}",
            direct.se,
            via_w.se
        );
    }
}

#[test]
fn reactive_error_stays_under_general_bound() {
    let c = PhysicalConstants::new(0.01, Complex64::new(1.0, 0.0)).unwrap();
    for (m, dt, d, theta) in [(10, 0.005, 0.05, 0.3), (20, 0.005, 0.2, 0.0), (5, 0.01, 1.0, -0.7)] {
        for t in 1u8..=3 {
            for r in 1u8..=3 {
                let rep = lemma1_verify(
                    &ArraySpec::ula(dt, m, pol(t)).unwrap(),
                    &receiver(d, theta),
                    &c,
                    pol(t),
                    pol(r),
                )
                .unwrap();
                assert!(rep.within_general, "{rep:?}");
            }
        }
    }
}

#[test]
fn thin_panel_matches_line_closed_form() {
    let (d, theta, l) = (4.0, 0.5, 2.0);
    let rx = receiver(d, theta);
    let line = ula_gramian(Polarizations::THREE, Polarizations::THREE, l / d, theta, d).unwrap();
    let via_offset = ula_gramian_offset(Polarizations::THREE, Polarizations::THREE, l, rx, d).unwrap();
    assert!((&line.w - &via_offset.w).amax() < 1e-8);
    // A panel thin along y matches a line along x; swapping axes permutes x and y.
    let panel = upa_gramian_3x3(&UpaGeometry::new(l, 1e-4 * l, Point::new(0.0, rx.y, rx.z)).unwrap(), d).unwrap();
    let rotated = ula_gramian_offset(
        Polarizations::THREE,
        Polarizations::THREE,
        l,
        Point::new(rx.y, 0.0, rx.z),
        d,
    )
    .unwrap();
    let a = eig_sorted(&panel.w).unwrap();
    let b = eig_sorted(&rotated.w).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-6, "{a:?} vs {b:?}");
    }
}

#[test]
fn dense_panel_approaches_continuous_eigenvalues() {
    let rows = eigenvalue_size_study(1.0, &[0.5, 1.0, 2.0], 3.0, std::f64::consts::FRAC_PI_6, 0.005).unwrap();
    for row in rows {
        for g in &row.rel_gap {
            assert!(*g < 0.02, "{row:?}");
        }
    }
}

#[test]
fn optimum_is_stable_under_grid_refinement() {
    let snr = SnrConfig::from_db(20.0, SnrConvention::Direct).unwrap();
    let (theta, d) = (std::f64::consts::FRAC_PI_6, 4.0);
    let coarse = SweepGrid::linspace(SweepVariable::Aperture, 0.1, 40.0, 80).unwrap();
    let fine = SweepGrid::linspace(SweepVariable::Aperture, 0.1, 40.0, 159).unwrap();
    for t in [2u8, 3] {
        let a = optimal_aperture_ula(pol(t), pol(3), theta, d, &snr, &coarse, &[]).unwrap();
        let b = optimal_aperture_ula(pol(t), pol(3), theta, d, &snr, &fine, &[]).unwrap();
        let (xa, xb) = (a.argmax.point[0], b.argmax.point[0]);
        assert!((xa - xb).abs() <= 1e-3 * xb, "t_pol={t}: {xa} vs {xb}");
    }
}

#[test]
fn required_aperture_grows_with_fraction() {
    let snr = SnrConfig::from_db(20.0, SnrConvention::Direct).unwrap();
    let grid = SweepGrid::linspace(SweepVariable::Aperture, 0.1, 40.0, 120).unwrap();
    let mut prev = 0.0;
    for f in [0.5, 0.7, 0.8, 0.9, 0.95, 0.99] {
        let x = aperture_for_fraction(f, pol(2), pol(3), 0.3, 4.0, &snr, &grid).unwrap();
        assert!(x >= prev, "fraction {f}: {x} < {prev}");
        prev = x;
    }
}
