//! Waterfilling over Gramian eigenmodes.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};

/// Eigenvalues within this fraction of the trace are treated as zero.
pub const ZERO_EIG_REL: f64 = 1e-12;
/// Allowed asymmetry, relative to the largest entry.
pub const HERMITIAN_REL: f64 = 1e-12;

/// Real eigenvalues of a Hermitian matrix in descending order; values in
/// `[-ε·tr, ε·tr]` with `ε` = [`ZERO_EIG_REL`] are set to exactly zero.
pub fn eig_sorted<T>(w: &DMatrix<T>) -> Result<Vec<f64>>
where
    T: ComplexField<RealField = f64>,
{
    if !w.is_square() {
        return Err(Error::domain(format!(
            "Gramian must be square, got {}×{}",
            w.nrows(),
            w.ncols()
        )));
    }
    if w.iter().any(|v| !v.clone().is_finite()) {
        return Err(Error::domain("Gramian has non-finite entries"));
    }
    let n = w.nrows();
    let scale = w.iter().fold(0.0f64, |m, v| m.max(v.clone().modulus()));
    let mut asymmetry = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            asymmetry = asymmetry.max((w[(i, j)].clone() - w[(j, i)].clone().conjugate()).modulus());
        }
    }
    let tolerance = HERMITIAN_REL * scale;
    if asymmetry > tolerance {
        return Err(Error::NotHermitian { asymmetry, tolerance });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let herm = (w + w.adjoint()).map(|v| v * T::from_real(0.5));
    let trace: f64 = (0..n).map(|i| herm[(i, i)].clone().real()).sum();
    let mut eigs: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
    let floor = ZERO_EIG_REL * trace.abs();
    for e in &mut eigs {
        if e.abs() <= floor {
            *e = 0.0;
        }
    }
    eigs.sort_by(|a, b| b.total_cmp(a));
    Ok(eigs)
}

/// Waterfilling solution `p̃_i = [1/ϑ − 1/ρ_i]⁺`, `Σ p̃_i = SNR₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    /// `ϑ`: modes with `ρ_i > ϑ` are active.
    pub water_level: f64,
    pub active_count: usize,
}

pub fn waterfill(eigs: &[f64], snr0: f64) -> Result<PowerAllocation> {
    if !(snr0 > 0.0 && snr0.is_finite()) {
        return Err(Error::domain(format!("SNR must be positive and finite, got {snr0}")));
    }
    if eigs.iter().any(|e| !e.is_finite()) {
        return Err(Error::domain("eigenvalues must be finite"));
    }
    if eigs.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::domain("eigenvalues must be sorted in descending order"));
    }
    let usable = eigs.iter().take_while(|&&e| e > 0.0).count();
    if usable == 0 {
        return Err(Error::NoUsableChannel);
    }
    let mut inv_sum: f64 = eigs[..usable].iter().map(|e| 1.0 / e).sum();
    let mut n = usable;
    let mut level = n as f64 / (snr0 + inv_sum);
    // Drop the weakest mode while it sits at or below the water level.
    while n > 1 && level >= eigs[n - 1] {
        inv_sum -= 1.0 / eigs[n - 1];
        n -= 1;
        level = n as f64 / (snr0 + inv_sum);
    }
    // p_i = 1/ϑ − 1/ρ_i rewritten as (SNR₀ + Σ_j (1/ρ_j − 1/ρ_i))/n: on the
    // active set every difference is bounded by SNR₀, so the powers stay
    // accurate when 1/ϑ ≫ SNR₀.
    let inv: Vec<f64> = eigs[..n].iter().map(|e| 1.0 / e).collect();
    let powers = (0..eigs.len())
        .map(|i| {
            if i < n {
                let spread: f64 = inv.iter().map(|v| v - inv[i]).sum();
                ((snr0 + spread) / n as f64).max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(PowerAllocation {
        powers,
        water_level: level,
        active_count: n,
    })
}

/// SNR at which mode `n + 1` switches on, for `n = 1 .. len−1`:
/// `SNR_th^(n) = n/ρ_{n+1} − Σ_{i≤n} 1/ρ_i` (infinite when `ρ_{n+1} = 0`).
pub fn stream_thresholds(eigs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(eigs.len().saturating_sub(1));
    let mut inv_sum = 0.0;
    for n in 1..eigs.len() {
        inv_sum += 1.0 / eigs[n - 1];
        let next = eigs[n];
        out.push(if next > 0.0 {
            n as f64 / next - inv_sum
        } else {
            f64::INFINITY
        });
    }
    out
}

/// Number of active streams from the threshold classification.
pub fn streams_from_thresholds(thresholds: &[f64], snr0: f64) -> usize {
    1 + thresholds.iter().take_while(|&&t| snr0 > t).count()
}

/// How the figure-level `P/σ²` maps to the reference SNR used in waterfilling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SnrConvention {
    /// `SNR₀ = P/σ²`.
    Direct,
    /// `SNR₀ = P/(σ² t_pol)`.
    PerTpol,
    /// `SNR₀ = (P/σ²)(d_ref/D)²`: the stated ratio holds at `D = d_ref` and
    /// follows free-space loss elsewhere.
    ReferenceDistance { d_ref: f64 },
    /// `SNR₀ = (P/(σ² t_pol)) |ξ/λ|²/D²`.
    PerEq6 { xi_abs: f64, lambda: f64 },
    /// `SNR₀ = (P/σ²) |ξ/λ|²/D²`.
    LinkBudget { xi_abs: f64, lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrConfig {
    /// Linear `P/σ²`.
    pub ratio: f64,
    pub convention: SnrConvention,
}

impl SnrConfig {
    pub fn new(ratio: f64, convention: SnrConvention) -> Result<Self> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::domain(format!("P/σ² must be positive, got {ratio}")));
        }
        match convention {
            SnrConvention::ReferenceDistance { d_ref } if !(d_ref > 0.0) => {
                return Err(Error::domain("reference distance must be positive"));
            }
            SnrConvention::PerEq6 { xi_abs, lambda } | SnrConvention::LinkBudget { xi_abs, lambda }
                if !(xi_abs > 0.0 && lambda > 0.0) =>
            {
                return Err(Error::domain("|ξ| and λ must be positive"));
            }
            _ => {}
        }
        Ok(Self { ratio, convention })
    }

    pub fn from_db(db: f64, convention: SnrConvention) -> Result<Self> {
        Self::new(10f64.powf(db / 10.0), convention)
    }

    pub fn direct(ratio: f64) -> Result<Self> {
        Self::new(ratio, SnrConvention::Direct)
    }

    /// Reference SNR for a link at distance `d` with `t_pol` transmit
    /// polarizations.
    pub fn snr0(&self, t_pol: usize, d: f64) -> f64 {
        let r = self.ratio;
        match self.convention {
            SnrConvention::Direct => r,
            SnrConvention::PerTpol => r / t_pol as f64,
            SnrConvention::ReferenceDistance { d_ref } => r * (d_ref / d).powi(2),
            SnrConvention::PerEq6 { xi_abs, lambda } => r * (xi_abs / lambda).powi(2) / (t_pol as f64 * d * d),
            SnrConvention::LinkBudget { xi_abs, lambda } => r * (xi_abs / lambda).powi(2) / (d * d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// Spectral efficiency in bit/s/Hz.
    pub se: f64,
    pub snr0: f64,
    pub eigenvalues: Vec<f64>,
    pub allocation: PowerAllocation,
    /// `C / log₂(SNR₀)`, present when `SNR₀ > 1`.
    pub effective_dof: Option<f64>,
    /// `SNR_th^(1), SNR_th^(2), …`.
    pub thresholds: Vec<f64>,
}

impl RateReport {
    pub fn active_count(&self) -> usize {
        self.allocation.active_count
    }

    /// `C / log₂(snr)` for another reference ratio, e.g. the nominal `P/σ²`.
    pub fn effective_dof_at(&self, snr: f64) -> Option<f64> {
        (snr > 1.0).then(|| self.se / snr.log2())
    }
}

/// Waterfilling rate over the given (descending) eigenvalues.
pub fn rate_from_eigenvalues(eigenvalues: Vec<f64>, snr0: f64) -> Result<RateReport> {
    let allocation = waterfill(&eigenvalues, snr0)?;
    let se = eigenvalues
        .iter()
        .zip(&allocation.powers)
        .map(|(e, p)| (e * p).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2;
    let thresholds = stream_thresholds(&eigenvalues);
    Ok(RateReport {
        se,
        snr0,
        effective_dof: (snr0 > 1.0).then(|| se / snr0.log2()),
        eigenvalues,
        allocation,
        thresholds,
    })
}

/// `C = Σ log₂(1 + ρ_i p̃_i)` over the eigenvalues of a normalized Gramian.
pub fn spectral_efficiency<T>(w: &DMatrix<T>, snr0: f64) -> Result<RateReport>
where
    T: ComplexField<RealField = f64>,
{
    rate_from_eigenvalues(eig_sorted(w)?, snr0)
}

/// Capacity of a channel matrix with total transmit power `p_total` and noise
/// variance `sigma2`, waterfilling over the squared singular values.
pub fn capacity_finite(h: &ChannelMatrix, p_total: f64, sigma2: f64) -> Result<RateReport> {
    capacity_of_matrix(&h.entries, p_total, sigma2)
}

pub fn capacity_of_matrix(h: &DMatrix<Complex64>, p_total: f64, sigma2: f64) -> Result<RateReport> {
    if !(p_total > 0.0 && sigma2 > 0.0) {
        return Err(Error::domain("transmit power and noise variance must be positive"));
    }
    if h.is_empty() {
        return Err(Error::NoUsableChannel);
    }
    let sv = SVD::new(h.clone(), false, false).singular_values;
    let mut gains: Vec<f64> = sv.iter().map(|s| s * s).collect();
    gains.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = gains.iter().sum();
    for g in &mut gains {
        if *g <= ZERO_EIG_REL * total {
            *g = 0.0;
        }
    }
    rate_from_eigenvalues(gains, p_total / sigma2)
}

/// `ν(snr) = C(snr)/log₂(snr)`.
pub fn effective_dof<F>(rate: F, snr: f64) -> Result<f64>
where
    F: FnOnce(f64) -> Result<f64>,
{
    if !(snr > 1.0) {
        return Err(Error::domain(format!("effective DoF needs snr > 1, got {snr}")));
    }
    Ok(rate(snr)? / snr.log2())
}
