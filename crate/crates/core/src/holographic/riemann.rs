use nalgebra::SVector;

use crate::error::{Error, Result};
use crate::sum::pairwise_sum;

type Sums = SVector<f64, 5>;

fn checked(big_m: usize, delta_t: f64, d: f64, theta: f64) -> Result<()> {
    if !(delta_t > 0.0) {
        return Err(Error::domain(format!(
            "element spacing must be positive, got {delta_t}"
        )));
    }
    if !(d > 0.0) {
        return Err(Error::domain(format!("distance must be positive, got {d}")));
    }
    if !(theta.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::domain(format!("elevation must satisfy |θ| < π/2, got {theta}")));
    }
    if big_m > (usize::MAX - 1) / 2 {
        return Err(Error::domain("element count overflows"));
    }
    Ok(())
}

/// `[s_M^(2), …, s_M^(6)]` for a `(2M+1)`-element line with spacing `Δ_T`:
/// the element averages of `r_m^{−k}` (even `k`) and of `(mΔ_T − D sinθ)/r_m^{k+1}`
/// (odd `k`). Replacing ψ₂…ψ₆ by these in the closed-form layout gives the
/// finite-array Gramian exactly.
pub fn partial_sums(big_m: usize, delta_t: f64, d: f64, theta: f64) -> Result<[f64; 5]> {
    checked(big_m, delta_t, d, theta)?;
    let (s, c) = theta.sin_cos();
    let (ds, dc) = (d * s, d * c);
    let term = |off: f64| {
        let inv = 1.0 / (off * off + dc * dc);
        let inv2 = inv * inv;
        Sums::new(inv, off * inv2, inv2, off * inv2 * inv, inv2 * inv)
    };
    // Elements ±m are paired so the odd sums cancel exactly at broadside.
    let total = pairwise_sum(big_m + 1, Sums::zeros(), &|m| {
        if m == 0 {
            term(-ds)
        } else {
            let y = m as f64 * delta_t;
            term(y - ds) + term(-y - ds)
        }
    });
    let mean = total / (2 * big_m + 1) as f64;
    Ok([mean[0], mean[1], mean[2], mean[3], mean[4]])
}

/// Single `s_M^(k)`, `k ∈ 2..=6`.
pub fn partial_sum_sk(k: u32, big_m: usize, delta_t: f64, d: f64, theta: f64) -> Result<f64> {
    if !(2..=6).contains(&k) {
        return Err(Error::domain(format!("k must be in 2..=6, got {k}")));
    }
    Ok(partial_sums(big_m, delta_t, d, theta)?[(k - 2) as usize])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holographic::psi_set;

    #[test]
    fn single_term() {
        let d = 3.0;
        let s = partial_sums(0, 0.1, d, 0.7).unwrap();
        assert!((s[0] - 1.0 / 9.0).abs() < 1e-16);
        assert!((s[2] - 1.0 / 81.0).abs() < 1e-17);
        assert!((s[1] + 0.7f64.sin() / 27.0).abs() < 1e-16);
    }

    #[test]
    fn odd_sums_vanish_at_broadside() {
        for k in [3, 5] {
            assert_eq!(partial_sum_sk(k, 500, 0.01, 2.0, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn converges_to_psi() {
        let (rho, theta, d) = (1.0, std::f64::consts::FRAC_PI_6, 4.0);
        let psi = psi_set(rho, theta, d).unwrap().values();
        let m = 1_000_000;
        let s = partial_sums(m, rho * d / m as f64, d, theta).unwrap();
        for k in 0..5 {
            let rel = (s[k] - psi[k]).abs() / psi[k].abs();
            assert!(rel < 1e-5, "k={} rel={rel}", k + 2);
        }
    }

    #[test]
    fn error_shrinks_like_one_over_m() {
        let (rho, theta, d) = (0.5, 0.3, 2.0);
        let psi = psi_set(rho, theta, d).unwrap().values();
        let err = |m: usize| {
            let s = partial_sums(m, rho * d / m as f64, d, theta).unwrap();
            (s[0] - psi[0]).abs()
        };
        let (e1, e2) = (err(1000), err(10_000));
        assert!(e2 < e1);
        let ratio = e1 / e2;
        assert!((5.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_k() {
        assert!(partial_sum_sk(1, 1, 1.0, 1.0, 0.0).is_err());
        assert!(partial_sum_sk(7, 1, 1.0, 1.0, 0.0).is_err());
    }
}
