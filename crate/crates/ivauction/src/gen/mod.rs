//! Instance generators.

pub mod fixtures;
pub mod formula;
pub mod fracvertex;
pub mod hardness;
pub mod query;
pub mod random;

pub use formula::{Formula1in3, Literal};
pub use fracvertex::find_fractional_vertex;
pub use hardness::{default_epsilon, gen_hardness, Hardness, HardnessLayout};
pub use query::{gen_query_adversary, Plant, QueryAdversary};
pub use random::{gen_random, gen_random_ratios};

use crate::model::ModelError;
use crate::oracle::OracleError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("malformed formula (line {line}): {reason}")]
    MalformedFormula { line: usize, reason: String },
    #[error("{0}")]
    BadParameter(String),
    #[error("assignment does not satisfy the formula")]
    NotSatisfying,
    #[error("witness construction failed: {0}")]
    WitnessConflict(String),
    #[error("plant index {index} out of range for a set of size {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("no fractional vertex after {trials} trials")]
    NotFound { trials: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
