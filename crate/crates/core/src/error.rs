use std::path::PathBuf;

use thiserror::Error;

use crate::signal::Unit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("unit mismatch: expected {expected}, found {found}")]
    UnitMismatch { expected: Unit, found: Unit },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("band [{lo}, {hi}] Hz is outside (0, {nyquist}) Hz")]
    BandOutOfRange { lo: f64, hi: f64, nyquist: f64 },

    #[error("time windows do not overlap")]
    NoOverlap,

    #[error("trace carries zero energy")]
    ZeroEnergy,

    #[error("input has zero variance")]
    ZeroVariance,

    #[error("reference signal is identically zero")]
    ZeroReference,

    #[error("invalid source geometry: {0}")]
    Geometry(String),

    #[error("constant input, correlation undefined")]
    ConstantInput,

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable identifier, used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSeries(_) => "invalid_series",
            Error::UnitMismatch { .. } => "unit_mismatch",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::BandOutOfRange { .. } => "band_out_of_range",
            Error::NoOverlap => "no_overlap",
            Error::ZeroEnergy => "zero_energy",
            Error::ZeroVariance => "zero_variance",
            Error::ZeroReference => "zero_reference",
            Error::Geometry(_) => "geometry",
            Error::ConstantInput => "constant_input",
            Error::Format { .. } => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
