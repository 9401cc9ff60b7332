use thiserror::Error;

/// Errors produced by construction, estimation, and generation code.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data violated a documented invariant.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A weight function could not be built from the given parameters.
    #[error("weight construction: {0}")]
    Construction(String),

    /// Evaluation point lies below a table-backed weight's domain.
    #[error("t = {t} is below the weight table domain start {start}")]
    Domain { t: f64, start: f64 },

    /// No point v satisfies W(v) >= y.
    #[error("no solution: the weight never reaches {y} (sup W = {sup})")]
    NoSolution { y: f64, sup: f64 },

    /// The requested quantity cannot be estimated from the data and weight.
    #[error("unidentifiable: {0}")]
    Unidentifiable(String),

    /// The estimator reached a degenerate state.
    #[error("degenerate estimator state: {0}")]
    Degenerate(String),

    /// A requested censoring fraction cannot be reached by any constant.
    #[error("censoring target {target} unattainable (maximum attainable {max})")]
    Unattainable { target: f64, max: f64 },

    /// Generator or benchmark configuration is unusable.
    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
