use thiserror::Error;

/// Errors raised by kernel algebra, transforms and the time integrator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("kernel has no pointwise value (Dirac delta)")]
    PointwiseUndefined,

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("numerical error: {0}")]
    NumericalError(String),

    #[error("kernel has no integrable resolvent: {0}")]
    NoIntegrableResolvent(String),

    #[error("unsupported scenario: {0}")]
    UnsupportedScenario(String),

    #[error("assumption does not apply to this kernel pair: {0}")]
    CaseMismatch(String),

    #[error("shape error: {0}")]
    ShapeError(String),

    #[error("degenerate coefficient: {0}")]
    DegenerateCoefficient(String),

    #[error("fixed-point iteration did not contract after {iterations} iterations (last residual {residual:e})")]
    NoContraction { iterations: usize, residual: f64 },

    #[error("solution blew up at t = {time}: modal norm {norm:e}")]
    Runaway { time: f64, norm: f64 },

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
