//! Ground-motion validation toolkit: point-source synthesis, intensity-measure
//! and time-frequency goodness-of-fit scoring, and focal-mechanism sweeps with
//! significance-filtered correlation analysis.

pub mod error;
pub mod signal;

pub use error::{Error, Result};
pub mod anderson;
pub mod commands;
pub mod config;
pub mod earthmodel;
pub mod ensemble;
pub mod gof;
pub mod imeasures;
pub mod report;
pub mod source;
pub mod tfgof;
pub mod traceio;
