use thiserror::Error;

use crate::model::OperationMode;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("pose has a nonzero coordinate `{coord}` that is inactive in operation mode {mode}")]
    InactiveCoordinate { mode: OperationMode, coord: &'static str },

    /// Zero-based indices of every leg whose discriminant is negative.
    #[error("pose is out of reach of leg(s) {}", fmt_legs(.legs))]
    Unreachable { legs: Vec<usize> },

    #[error("sphere centers are collinear")]
    CollinearCenters,

    #[error("circles are concentric")]
    ConcentricCircles,

    #[error("a*cos + b*sin = d has a = b = 0 and d != 0")]
    Degenerate,

    #[error("a*cos + b*sin = d is satisfied by every angle")]
    IndeterminateAngle,

    #[error("configuration is off the constraint manifold (max |residual| = {0:e})")]
    OffManifold(f64),

    #[error("no sign change over the bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("grid spec does not match the constraint system: {0}")]
    SpecMismatch(String),
}

fn fmt_legs(legs: &[usize]) -> String {
    legs.iter().map(|l| (l + 1).to_string()).collect::<Vec<_>>().join(", ")
}
