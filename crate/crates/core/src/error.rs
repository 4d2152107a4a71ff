use std::io;

use thiserror::Error;

use crate::genome::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("invalid genome: {0}")]
    InvalidGenome(Violation),

    #[error("invalid tier: {0}")]
    InvalidTier(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "infeasible parameter band [{min}, {max}] for tier {tier}: \
         no in-band genome after {attempts} samples"
    )]
    Infeasible {
        tier: String,
        min: u64,
        max: u64,
        attempts: usize,
    },

    #[error("grid of {points} points exceeds the exhaustive limit of {limit}")]
    GridTooLarge { points: u128, limit: u128 },

    #[error("no genome of tier {tier} lies in the parameter band [{min}, {max}]")]
    EmptyFeasibleSet { tier: String, min: u64, max: u64 },

    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    #[error("non-binary value {value} in spike tensor at flat index {index}")]
    NonBinary { index: usize, value: f32 },

    #[error("NaN input to {0}")]
    NotANumber(&'static str),

    #[error("need ≥ 2 samples, got {0}")]
    InsufficientSamples(usize),

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
