use thiserror::Error;

use crate::model::{ArcId, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidInstance(Vec<Violation>),

    #[error("critical arc {0} lies outside every s-t path of G+A")]
    CriticalArcUnreachable(ArcId),

    #[error("unknown arc id {0}")]
    UnknownArcId(ArcId),

    #[error("arc {arc} cannot be {action}: it is not a {expected} arc")]
    WrongArcKind {
        arc: ArcId,
        action: &'static str,
        expected: &'static str,
    },

    #[error("L-set exceeds the cap of {0} values")]
    LSetExplosion(usize),

    #[error("agent tie enumeration exceeded {0} branches")]
    ExplosionGuard(usize),

    #[error("no feasible plan of cost at most {budget}; every plan cheaper than {infeasible_below} is infeasible")]
    BudgetExceeded { budget: usize, infeasible_below: usize },

    #[error("calibration failure: {0}")]
    CalibrationFailure(String),

    #[error("generator failure: {0}")]
    Generation(String),

    #[error("cover hint misses the edge {0}-{1}")]
    InvalidCover(usize, usize),

    #[error("instance variants must share everything except arc kinds")]
    IncompatibleVariants,

    #[error("instance too large for this engine: {0}")]
    TooLarge(String),

    #[error("deadline exceeded")]
    Timeout,
}

pub type Result<T> = std::result::Result<T, Error>;
