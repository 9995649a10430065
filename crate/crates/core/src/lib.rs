//! Decomposition of graphs into quasi-4-connected components, order-4
//! tangles and the regions they live in.

pub mod decomposition;
pub mod defined;
pub mod embedding;
pub mod error;
pub mod fuzz;
pub mod generators;
pub mod graph;
pub mod io;
pub mod mincut;
pub mod minor;
pub mod oracle;
pub mod quasi4;
pub mod random;
pub mod separation;
pub mod tangle;
pub mod validate;

pub use error::{Error, Result};
pub use graph::{Graph, Vertex, VertexMap, VertexSet};
pub use minor::MinorModel;
pub use separation::Separation;
pub use tangle::Tangle;
