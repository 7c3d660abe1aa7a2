//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: relation is {got_objects}x{got_features}, context is {want_objects}x{want_features}")]
    DimensionMismatch {
        got_objects: usize,
        got_features: usize,
        want_objects: usize,
        want_features: usize,
    },

    #[error("duplicate {kind} identifier `{name}`")]
    DuplicateName { kind: &'static str, name: String },

    #[error("context dimensions {objects}x{features} exceed the representation limit of 64")]
    DimensionLimit { objects: usize, features: usize },

    #[error("concept enumeration bound exceeded: context is {objects}x{features}, bound is {bound}")]
    EnumerationLimit {
        objects: usize,
        features: usize,
        bound: usize,
    },

    #[error("index {index} out of range for {kind} (size {len})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        len: usize,
    },

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("relation for agent `{agent}` is not I-compatible")]
    IncompatibleRelation { agent: String },

    #[error("agent sequence is empty")]
    EmptySequence,

    #[error("agent set is empty")]
    NoAgents,

    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("`{construct}` is not available in dialect {dialect} (at {line}:{col})")]
    DialectViolation {
        construct: &'static str,
        dialect: String,
        line: usize,
        col: usize,
    },

    #[error(
        "atom `{atom}` extent {given:?} is not Galois-stable; the generated concept has extent {closure:?}"
    )]
    UnstableAtomExtent {
        atom: String,
        given: Vec<String>,
        closure: Vec<String>,
    },

    #[error("not a lattice: {reason}")]
    NotALattice { reason: String },

    #[error("operator for agent `{agent}` is not normal: {detail}")]
    NotNormal { agent: String, detail: String },

    #[error("lattice has {size} elements, over the enumeration bound of {bound}")]
    LatticeBound { size: usize, bound: usize },

    #[error("search bounds too large to enumerate ({detail}); estimated {estimate} candidate models")]
    SearchBoundTooLarge { detail: String, estimate: String },

    #[error("malformed context file at line {line}: {msg}")]
    Cxt { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
