//! Lattice polygons, rational curves in toric surfaces and the monodromy of
//! their nodes.
//!
//! The combinatorial side computes the labelling of interior lattice points by
//! quotients of Z² modulo ±id and the permutation groups they determine. The
//! numerical side parametrizes rational curves with prescribed Newton polygon,
//! locates their nodes and tracks them along loops in parameter space.

pub mod curves;
pub mod error;
pub mod hungarian;
pub mod hypotheses;
pub mod lattice;
pub mod monodromy;
pub mod obstruction;
pub mod patchwork;
pub mod permgroup;
pub mod poly;

pub use error::{Error, Result};
pub use lattice::{LatticePoint, LatticePolygon};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
