//! Finite-scale workbench for tree gadgets, relational-structure morphisms,
//! ultrametric spaces and monoid actions built from normal trees.
//!
//! Everything infinite is replaced by a truncation ([`trees::TruncationParams`]):
//! sequences have bounded length and entries, gadget tails have bounded
//! height, and every construction is an explicit finite value.

pub mod corpus;
pub mod gadgets;
pub mod io;
pub mod metrics;
pub mod monoid;
pub mod morphisms;
pub mod seqs;
pub mod structures;
pub mod suites;
pub mod trees;

use thiserror::Error;

pub use seqs::{FinSeq, SeqError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error("invalid truncation parameters: {0}")]
    InvalidParams(String),
    #[error("out of bounds: {0}")]
    OutOfBounds(String),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(u64),
    #[error("self-loop at vertex {0}")]
    SelfLoop(u64),
    #[error("map is not total: {0}")]
    PartialMap(String),
    #[error("map is not injective: {0}")]
    NotInjective(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
