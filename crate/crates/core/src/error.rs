use thiserror::Error;

/// Errors raised by curve analysis and construction routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter {t} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integration failed: {0}")]
    IntegrationFailure(String),
    #[error("variation did not converge on [{a}, {b}] (last estimate {last})")]
    NonConvergent { a: f64, b: f64, last: f64 },
    #[error("component ({a}, {b}) collapses below grid resolution")]
    DegenerateComponent { a: f64, b: f64 },
    #[error("greedy sweep stalled at {at}")]
    StallDetected { at: f64 },
    #[error("certificate failure on cells {cells:?}")]
    CertificateFailure { cells: Vec<usize> },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("root not bracketed: {0}")]
    RootNotBracketed(String),
    #[error("precondition failure: {0}")]
    PreconditionFailure(String),
    #[error("monotonicity of the curvature not detected near the endpoints")]
    MonotonicityNotDetected,
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),
}

pub type Result<T> = std::result::Result<T, Error>;
