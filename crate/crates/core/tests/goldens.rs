#![allow(clippy::excessive_precision)]

//! Reference values computed once with 30-digit arithmetic (vector angles,
//! direct double integrals, direct line integrals) and frozen here.

use holomimo::channel::{exact_block, PhysicalConstants};
use holomimo::geometry::{Point, Polarizations, UpaGeometry};
use holomimo::holographic::{phi2, psi_set, upa_gramian};
use num_complex::Complex64;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

fn reference_geometry() -> UpaGeometry {
    UpaGeometry::new(2.0, 1.0, Point::new(0.3, -0.2, 4.0)).unwrap()
}

#[test]
fn tetrahedron_quantities() {
    let g = reference_geometry();
    let expected = [
        (g.d_pp, 4.5088801270381983842),
        (g.d_pm, 4.4192759587968706076),
        (g.d_mp, 4.7675989764240867829),
        (g.d_mm, 4.6829477895872381806),
        (g.gamma_y_plus, 0.4514166126804595924),
        (g.gamma_y_minus, 0.42610999352356177669),
        (g.gamma_x_plus, 0.89001053288397683709),
        (g.gamma_x_minus, 0.9082615491702963301),
        (g.beta_x_plus, 1.168925679354440112),
        (g.beta_x_minus, 1.0489620469804862137),
        (g.beta_y_plus, 1.2793395323170295272),
        (g.beta_y_minus, 1.3734007669450158609),
        (g.sigma_pp, 0.10034431874077717659),
        (g.sigma_pm, 0.069636456733230926779),
        (g.sigma_mp, 0.12142542894852617686),
        (g.sigma_mm, 0.083903328773369813041),
    ];
    for (i, (got, want)) in expected.iter().enumerate() {
        assert!(close(*got, *want, 2e-15), "field {i}: {got} vs {want}");
    }
}

#[test]
fn mean_inverse_square_distance() {
    let p = phi2(2.0, 1.0, 0.3, -0.2, 4.0).unwrap();
    assert!(close(p.value, 0.0565325842233126243, 1e-13), "{}", p.value);
}

#[test]
fn planar_gramians() {
    let g = reference_geometry();
    let d = g.range();
    let three = [
        0.848066590884062264,
        0.00217543662573170867,
        -0.0464294252901553518,
        0.893327853774376931,
        0.038458195528224106,
        0.0823467223856260658,
    ];
    let two = [
        0.793786118335156037,
        0.00382864428295595128,
        -0.0364639362962387028,
        0.876732771914712776,
        0.0338373287546254664,
        0.0708755544085703816,
    ];
    let idx = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    for (t, want) in [(3, three), (2, two)] {
        let w = upa_gramian(&g, d, Polarizations::new(t).unwrap(), Polarizations::THREE)
            .unwrap()
            .w;
        for (k, &(i, j)) in idx.iter().enumerate() {
            assert!(
                (w[(i, j)] - want[k]).abs() < 1e-13,
                "t_pol={t} ({i},{j}): {} vs {}",
                w[(i, j)],
                want[k]
            );
            assert_eq!(w[(i, j)], w[(j, i)]);
        }
    }
}

#[test]
fn psi_at_unit_ratio_and_thirty_degrees() {
    let p = psi_set(1.0, std::f64::consts::FRAC_PI_6, 4.0).unwrap();
    let want = [
        0.056681230132319307831,
        -0.0026041666666666666667,
        0.003663801255513304493,
        -0.00010850694444444444444,
        0.00025611431458069264192,
    ];
    for (k, (got, w)) in p.values().iter().zip(want).enumerate() {
        assert!(close(*got, w, 1e-14), "psi{}: {got} vs {w}", k + 2);
    }
}

#[test]
fn dipole_block_near_field() {
    let c = PhysicalConstants::new(0.01, Complex64::new(1.0, 0.5)).unwrap();
    let b = exact_block(&Point::new(0.013, -0.021, 0.0), &Point::new(0.05, 0.0011, 0.0037), &c).unwrap();
    let want = [
        [
            (-121.65394768903430682, -696.41389484901083014),
            (-111.74020813569001027, 1126.3163783537640075),
            (-18.707636656201494931, 188.56880542574329538),
        ],
        [
            (-111.74020813569001027, 1126.3163783537640075),
            (-1.3197054459044717454, -1909.3562204140604173),
            (-11.174020813569001027, 112.63163783537640075),
        ],
        [
            (-18.707636656201494931, 188.56880542574329538),
            (-11.174020813569001027, 112.63163783537640075),
            (63.551655207360493002, -2563.2450685638694544),
        ],
    ];
    let scale = b.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    for i in 0..3 {
        for j in 0..3 {
            let w = Complex64::new(want[i][j].0, want[i][j].1);
            assert!(
                (b[(i, j)] - w).norm() < 1e-12 * scale,
                "({i},{j}): {} vs {w}",
                b[(i, j)]
            );
        }
    }
}

/// Eigenvalues of a real symmetric 3×3 matrix from the trigonometric roots of
/// its characteristic cubic.
fn cubic_eigenvalues(a: &nalgebra::Matrix3<f64>) -> [f64; 3] {
    let q = a.trace() / 3.0;
    let b = a - nalgebra::Matrix3::identity() * q;
    let p = (b.norm_squared() / 6.0).sqrt();
    let r = (b / p).determinant() / 2.0;
    let phi = r.clamp(-1.0, 1.0).acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [e1, 3.0 * q - e1 - e3, e3]
}

#[test]
fn eigenvalues_against_cubic_roots() {
    use holomimo::capacity::eig_sorted;
    let g = reference_geometry();
    for t in [2u8, 3] {
        let w = upa_gramian(&g, g.range(), Polarizations::new(t).unwrap(), Polarizations::THREE)
            .unwrap()
            .w;
        let m = nalgebra::Matrix3::from_fn(|i, j| w[(i, j)]);
        let want = cubic_eigenvalues(&m);
        let got = eig_sorted(&w).unwrap();
        for (a, b) in got.iter().zip(want) {
            assert!((a - b).abs() < 1e-13, "{got:?} vs {want:?}");
        }
    }
}

/// Exhaustive search over active sets for the allocation meeting every
/// optimality condition.
fn brute_force_waterfill(eigs: &[f64], snr0: f64) -> Vec<f64> {
    let n = eigs.len();
    for mask in 1u32..(1 << n) {
        let active: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let inv: f64 = active.iter().map(|&i| 1.0 / eigs[i]).sum();
        let level = active.len() as f64 / (snr0 + inv);
        let feasible = active.iter().all(|&i| eigs[i] > level)
            && (0..n).filter(|i| mask & (1 << i) == 0).all(|i| eigs[i] <= level);
        if feasible {
            return (0..n)
                .map(|i| {
                    if mask & (1 << i) != 0 {
                        1.0 / level - 1.0 / eigs[i]
                    } else {
                        0.0
                    }
                })
                .collect();
        }
    }
    unreachable!("some active set is always optimal")
}

#[test]
fn waterfilling_against_exhaustive_search() {
    use holomimo::capacity::waterfill;
    let cases: [(&[f64], f64); 5] = [
        (&[1.0, 0.5, 0.1], 10.0),
        (&[1.0, 0.5, 0.1], 0.5),
        (&[2.0, 2.0, 0.3, 0.01], 3.0),
        (&[0.9, 0.05, 0.04, 0.03, 0.02], 100.0),
        (&[5.0], 1e-3),
    ];
    for (eigs, snr0) in cases {
        let want = brute_force_waterfill(eigs, snr0);
        let got = waterfill(eigs, snr0).unwrap().powers;
        for (a, b) in got.iter().zip(&want) {
            assert!(
                (a - b).abs() < 1e-12 * snr0.max(1.0),
                "{eigs:?} at {snr0}: {got:?} vs {want:?}"
            );
        }
    }
    // ρ = [1, 0.5, 0.1] at SNR₀ = 10: the weakest mode stays off, ϑ = 2/13.
    let a = waterfill(&[1.0, 0.5, 0.1], 10.0).unwrap();
    assert_eq!(a.active_count, 2);
    assert!((a.water_level - 2.0 / 13.0).abs() < 1e-15);
    for (got, want) in a.powers.iter().zip([5.5, 4.5, 0.0]) {
        assert!((got - want).abs() < 1e-13);
    }
}
