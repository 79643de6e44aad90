use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge (estimated error {achieved:.3e}, requested {requested:.3e})")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("functional diverges: {0}")]
    Divergent(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("lattice construction failed: {0}")]
    Lattice(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
