use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole of the kappa-tangent at u = {u} (kappa = {kappa})")]
    Pole { kappa: f64, u: f64 },

    #[error("degenerate symplectic weight W = {0:e}")]
    SymplecticDegeneracy(f64),

    #[error("degenerate chart: {0}")]
    DegenerateChart(String),

    #[error("no real solution: {0}")]
    NoRealSolution(String),

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("finite-time blow-up detected near t = {t}")]
    BlowUp { t: f64, state: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

