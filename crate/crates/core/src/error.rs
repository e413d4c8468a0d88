use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("close to a node of the wave function at x = {x:e}, t = {t:e} (clamped v_x = {vx:e})")]
    NearNode { x: f64, t: f64, vx: f64 },
    #[error("quadrature did not converge (residual {residual:.3e})")]
    Quadrature { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
