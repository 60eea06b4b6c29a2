//! Distance and reachability oracles over r-divisions of sparse digraphs.
//!
//! Every oracle is built over a [`graph::DiGraph`], partitioned by
//! [`rdiv::build_r_division`], and can be checked against the brute-force
//! references in [`graph`].

pub mod approx;
pub mod audit;
pub mod decremental;
pub mod error;
pub mod graph;
pub mod harness;
pub mod io;
pub mod minfind;
pub mod patterns;
pub mod rdiv;
pub mod strings;
pub mod unweighted;
pub mod weighted;

pub use error::{GraphError, IoError, OracleError, StringError};
pub use graph::{load_graph, DiGraph, Dist, VertexId};
