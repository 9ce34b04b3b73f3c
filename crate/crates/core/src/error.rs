use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Rabi frequency must be positive (eigenvectors degenerate at zero coupling)")]
    ZeroCoupling,

    #[error("closed-form atom-at-rest solution requires gamma = 0, got {0}")]
    DampingNotSupported(f64),

    #[error("ODE integration failed: {0}")]
    OdeFailure(String),

    #[error("quadrature did not converge: change {change:e} exceeds tolerance {tolerance:e}")]
    QuadratureNotConverged { change: f64, tolerance: f64 },

    #[error("grid resolution violated: {0}")]
    Resolution(String),

    #[error("population inside the laser region ({0:e}) is too small to define an internal state")]
    EmptyLaserRegion(f64),

    #[error("threshold already violated at t = 0 (k_L * dy0 = {initial} >= {threshold})")]
    ThresholdViolated { initial: f64, threshold: f64 },

    #[error("field does not live on the propagator grid: {0}")]
    GridMismatch(String),

    #[error("time integral did not converge when doubling t_max: relative change {0:e}")]
    IntensityNotConverged(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
