//! Hamilton decompositions of regular bipartite tournaments, at desk scale.

pub mod digraph;
pub mod error;
pub mod feasible;
pub mod forest;
pub mod hamilton;
pub mod matchwork;
pub mod params;
pub mod partition;

pub use error::{Error, Result};
pub use params::Params;
