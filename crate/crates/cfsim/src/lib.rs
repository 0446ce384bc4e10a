//! Numerical verification toolkit for a rank-one (C,F)-action of `G = R ⋉_φ SU(2)`,
//! compact group extensions of a Chacon base, and estimation of self-joinings.
//!
//! Modules, bottom-up: [`groups`], [`equidist`], [`cf_engine`], [`rank_one`],
//! [`cocycles`], [`joinings`], [`verifier`]. [`api`] holds the HTTP bodies.

pub mod api;
pub mod cf_engine;
pub mod cocycles;
pub mod equidist;
pub mod groups;
pub mod joinings;
pub mod rank_one;
pub mod rng;
pub mod verifier;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no points")]
    NoPoints,
    #[error("chart boundary")]
    ChartBoundary,
    #[error("distribution test failed: distance {distance} >= {bound}")]
    DistributionTestFailed { distance: f64, bound: f64 },
    #[error("level too deep")]
    LevelTooDeep,
    #[error("expansion too large")]
    ExpansionTooLarge,
    #[error("orbit left truncation")]
    OrbitLeftTruncation,
    #[error("n too small for schedule")]
    NTooSmall,
    #[error("dictionary mismatch")]
    DictionaryMismatch,
    #[error("normalizing product diverges")]
    Divergent,
    #[error("translate {0} left the truncated orbit")]
    TranslateOverflow(i128),
    #[error("tail exhausted")]
    TailExhausted,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
