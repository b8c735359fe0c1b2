//! Certified upper bounds on the k-th Laplacian eigenvalue of structured graphs.
//!
//! The pipeline runs from vertex weights to test vectors:
//!
//! 1. [`duality`] finds a spreading vertex weighting `ω` (and, independently,
//!    a congestion-minimal subset flow whose value must agree with it).
//! 2. [`certify`] carves the `ω`-metric into padded cells, builds bump
//!    functions with pairwise separated supports and hands them to
//!    [`spectral::disjoint_support_bound`].
//! 3. [`bounds`] evaluates the closed-form congestion lower bounds that make
//!    the spreading value provably large on planar, bounded-genus and
//!    minor-free hosts.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the experiment
//! harness and the command line live in the companion `lapbound` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod certify;
pub mod duality;
mod error;
pub mod flow;
pub mod graph;
mod hull;
pub mod linalg;
pub mod metric;
pub mod minor;
pub mod spectral;
mod subsets;

pub use error::{Error, Result};
pub use graph::{Family, Graph, Vertex};
pub use metric::{MetricOracle, VertexWeighting};
