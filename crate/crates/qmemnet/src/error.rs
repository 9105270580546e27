//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by model construction, analysis, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: max residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("eigenvalue iteration failed to converge")]
    EigenFailure,

    #[error("resolvent (sI - A) is singular or nearly singular at s = {re}{im:+}i")]
    SingularResolvent { re: f64, im: f64 },

    #[error("system is not in block decoherence-free form: residual {residual:.3e}")]
    BlockStructureViolation { residual: f64 },

    #[error("drift matrix is not Hurwitz (spectral abscissa {abscissa:.3e})")]
    NotHurwitz { abscissa: f64 },

    #[error("quadrature window too small: estimated tail {tail:.3e} exceeds tolerance {tol:.3e}")]
    WindowTooSmall { tail: f64, tol: f64 },

    #[error("single-photon coefficients must have unit norm: got ||s||^2 = {norm_sq}")]
    NormViolation { norm_sq: f64 },

    #[error("integration step too large: ||A|| h = {product:.3e} exceeds 0.5")]
    StepTooLarge { product: f64 },

    #[error("input coefficients have weight {weight:.3e} outside the memory modes")]
    UnsupportedCoefficients { weight: f64 },

    #[error("operation requires a {expected} input")]
    WrongInputKind { expected: &'static str },

    #[error("invalid stage schedule: {0}")]
    ScheduleInvalid(String),

    #[error("rate must be strictly positive: got {0}")]
    NonPositiveRate(f64),

    #[error("squeezing strength {epsilon} must lie in [0, kappa) with kappa = {kappa}")]
    EpsilonTooLarge { epsilon: f64, kappa: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
