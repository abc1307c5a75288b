use thiserror::Error;

/// Errors raised by the channel, Gramian and capacity computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inputs outside the domain where the model is defined (coincident
    /// points, receiver in the panel plane, invalid counts, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Every eigenvalue / singular value of the channel is zero.
    #[error("no usable channel: all eigenvalues are zero")]
    NoUsableChannel,

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e}, tolerance {tolerance:.3e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error(
        "quadrature did not converge: estimate {estimate:.6e}, error {error:.3e} \
         (requested {tolerance:.3e}) after {intervals} intervals"
    )]
    Quadrature {
        estimate: f64,
        error: f64,
        tolerance: f64,
        intervals: usize,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
