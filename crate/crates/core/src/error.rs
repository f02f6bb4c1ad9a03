use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad arguments or a violated precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("viewpoint lies on the curve (distance {0:e})")]
    ViewpointOnCurve(f64),

    #[error("visibility requires a segment set")]
    NotASegmentSet,

    #[error("curve self-intersects: segments {0} and {1}")]
    SelfIntersection(usize, usize),

    #[error("Frostman precondition fails at point {index}, radius {radius:e}: mass {mass:e} > {bound:e}")]
    FrostmanViolation {
        index: usize,
        radius: f64,
        mass: f64,
        bound: f64,
    },

    #[error("malformed CSV at line {line}: {msg}")]
    Csv { line: u64, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for errors caused by bad user input rather than failures while running.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_)
                | Error::ViewpointOnCurve(_)
                | Error::NotASegmentSet
                | Error::Csv { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
