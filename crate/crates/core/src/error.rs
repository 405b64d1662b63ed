use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what}: argument {value} outside the domain of definition")]
    Domain { what: &'static str, value: f64 },

    #[error("Hurst index {0} is not in (0, 1)")]
    InvalidHurst(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no sign change of J_{{1-H}} on [{lo}, {hi}] while bracketing zero {k}")]
    BracketNoSignChange { k: usize, lo: f64, hi: f64 },

    #[error("Toeplitz system is numerically singular at step {step} (reflection coefficient {reflection})")]
    Singular { step: usize, reflection: f64 },

    #[error("matrix is not positive definite (pivot {index} = {pivot})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("solve residual {residual} exceeds {limit}")]
    Residual { residual: f64, limit: f64 },

    #[error("quadrature did not converge for coefficient k = {k} (refinement difference {difference})")]
    QuadratureNonConvergence { k: i64, difference: f64 },

    #[error("series is not conjugate symmetric: imaginary residue {residue}")]
    SymmetryViolation { residue: f64 },

    #[error("consistency failure in {what}: {value}")]
    Consistency { what: &'static str, value: f64 },

    #[error("simulation failed: {0}")]
    Simulation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Validates a Hurst index.
pub fn check_hurst(hurst: f64) -> Result<f64> {
    if hurst > 0.0 && hurst < 1.0 {
        Ok(hurst)
    } else {
        Err(Error::InvalidHurst(hurst))
    }
}
