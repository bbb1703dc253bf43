//! Recovery of signals on graphs under a Laplacian-weighted error metric: the
//! Dirichlet-energy risk, its Cramér-Rao bound, estimators that attain it, sensor
//! placement policies and a Monte Carlo harness.
//!
//! Vertex indices are 0-based throughout the library; file formats and the command line
//! use 1-based indices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod constraint;
pub mod error;
pub mod estimators;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod sampling;
pub mod simkit;
pub mod spectrum;

pub use bounds::{graph_crb, relative_crb, BoundResult, FisherInfo};
pub use constraint::{bandlimited_constraint, ConstraintSet};
pub use error::{Error, ErrorKind, Result};
pub use graph::{Edge, Graph};
pub use spectrum::{decompose, pinv_laplacian, GraphSignal, SpectralSignal, Spectrum};
