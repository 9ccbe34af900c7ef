use thiserror::Error;

/// Errors raised by geometry construction, solvers and the flow engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("operator is not invertible: {0}")]
    NonInvertibleOperator(String),
    #[error("reference metric is incompatible: {0}")]
    IncompatibleReference(String),
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("insufficient decay: {0}")]
    InsufficientDecay(String),
    #[error("characteristic left the domain at t = {t}: {detail}")]
    OutOfDomain { t: f64, detail: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NumericalBreakdown(format!(
            "non-finite {what} at index {i}"
        ))),
        None => Ok(()),
    }
}
