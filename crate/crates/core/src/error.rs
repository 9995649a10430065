use thiserror::Error;

use crate::graph::Vertex;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),

    #[error("no edge between {0} and {1}")]
    NoSuchEdge(Vertex, Vertex),

    #[error("sets do not partition the vertex set: {0}")]
    NotAPartition(String),

    #[error("edge {0}-{1} joins the two sides of the separation")]
    CrossingEdge(Vertex, Vertex),

    #[error("separation is not proper")]
    NotProper,

    #[error("separation order {order} is not below the tangle order {bound}")]
    OrderTooHigh { order: usize, bound: usize },

    #[error("graph has {n} vertices, above the size cap {cap}")]
    SizeCap { n: usize, cap: usize },

    #[error("graph is not {k}-connected (separator {witness:?})")]
    NotConnected { k: usize, witness: Vec<Vertex> },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid minor model: {0}")]
    InvalidModel(String),

    #[error("internal invariant failed [{check}]: {detail}")]
    Invariant { check: &'static str, detail: String },

    #[error("not a quasi-4-connected region: {0}")]
    Region(crate::quasi4::RegionViolation),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub fn invariant(check: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant { check, detail: detail.into() }
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
