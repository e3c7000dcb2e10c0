use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::integrator::Trajectory;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("non-finite value while evaluating {what} at t = {t}")]
    NonFinite { what: &'static str, t: f64 },

    #[error("state has dimension {got}, system expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("switching surface gradient vanishes at t = {t}")]
    DegenerateSurface { t: f64 },

    #[error(
        "normal projections of both limit fields coincide at t = {t}; no unique sliding velocity"
    )]
    DegenerateSliding { t: f64 },

    #[error("point at t = {t} is not an attracting sliding point (p = {p}, m = {m})")]
    NotSliding { t: f64, p: f64, m: f64 },

    #[error("surface set has no tangent element although both limit fields point toward the surface (t = {t})")]
    ModelingInconsistency { t: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("model does not declare a discontinuity channel; {0}")]
    UnsupportedModel(&'static str),

    #[error("initial state lies outside the model domain")]
    OutOfDomain,

    #[error("no equilibrium: gamma = {gamma} must satisfy 0 <= gamma < a/2 = {half_a}")]
    NoEquilibrium { gamma: f64, half_a: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("domain error: {0}")]
    Domain(&'static str),

    #[error("step size underflow at t = {t}")]
    StepUnderflow {
        t: f64,
        x: Vec<f64>,
        partial: Box<Trajectory>,
    },

    #[error("more than {limit} events before t1 (chattering or Zeno behaviour) at t = {t}")]
    Chattering {
        limit: usize,
        t: f64,
        partial: Box<Trajectory>,
    },

    #[error("run with eps = {eps} failed: {source}")]
    AtEpsilon { eps: f64, source: Box<Error> },
}

impl Error {
    /// Partial trajectory carried by integration failures, if any.
    pub fn partial_trajectory(&self) -> Option<&Trajectory> {
        match self {
            Error::StepUnderflow { partial, .. } | Error::Chattering { partial, .. } => {
                Some(partial)
            }
            Error::AtEpsilon { source, .. } => source.partial_trajectory(),
            _ => None,
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
