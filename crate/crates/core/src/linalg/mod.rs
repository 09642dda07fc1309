//! Sparse vectors and positive-definite confidence matrices.

mod matrix;
mod sparse;

pub use matrix::{MatrixKind, SecondOrderMatrix};
pub use sparse::{dense_dot, SparseVec};
