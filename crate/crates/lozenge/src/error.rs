use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid endpoint configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid parameters: {0}")]
    InvalidParameter(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("region admits no valid configuration")]
    NoValidConfig,
    #[error("empty sample stream")]
    EmptySamples,
    #[error("point ({x}, {y}) is outside the liquid region")]
    OutsideLiquid { x: f64, y: f64 },
    #[error("quadrature did not converge (estimated error {error:e} after {evaluations} evaluations)")]
    Quadrature { error: f64, evaluations: usize },
    #[error("solver did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
