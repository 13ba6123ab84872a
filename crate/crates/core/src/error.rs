use thiserror::Error;

/// Errors produced by the library.
///
/// Degenerate geometry is *not* an error: bounds that cannot be evaluated
/// come back as `f64::INFINITY` so that sweeps and plots can still render them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("elevation {0} rad outside [0, pi]")]
    ElevationOutOfRange(f64),
    #[error("azimuth {0} rad outside [0, 2pi]")]
    AzimuthOutOfRange(f64),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("planar decomposition undefined: covariance has out-of-plane energy {0:e}")]
    NotPlanar(f64),
    #[error("angular region is empty")]
    EmptyRegion,
    #[error("initial trajectory infeasible: {0}")]
    InfeasibleStart(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
