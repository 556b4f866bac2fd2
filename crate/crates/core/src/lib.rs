//! p-conductance learning on weighted graphs.
//!
//! Semi-supervised classification by measure minimum cuts: label measures are
//! diffused by the heat kernel, each one-vs-all column is solved as a
//! p-conductance program (closed form for p = 2, semismooth Newton augmented
//! Lagrangian otherwise), and potentials are turned into labels by argmax, a
//! transportation LP with cardinality constraints, or MBO refinement.

// `!(x >= 0.0)` is how NaN gets rejected; index loops read better in the numerics.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assignment;
pub mod cli;
pub mod dense;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod measures;
pub mod prox;
pub mod solvers;
pub mod validators;

pub use error::{Error, Result};
pub use graph::{Edge, WeightedGraph};
pub use measures::{LabelMatrix, NodeMeasure, SignedMeasureMatrix};
