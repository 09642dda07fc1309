//! Contextual dueling bandits with second-order linear reward models.
//!
//! A learner sees `K` items per round, shows two of them, and receives a
//! single stochastic bit saying which one was preferred. The CONQUER
//! family keeps a linear model `w` together with a positive-definite
//! matrix `A` and differs only in how the second item is chosen.
//!
//! Modules:
//! - [`linalg`]: sparse vectors and the confidence matrix.
//! - [`model`], [`projection`], [`policy`]: the learner itself.
//! - [`baselines`]: Confidit and Banditron adapted to item sets.
//! - [`env`]: feedback, regret accounting, synthetic environments, diagnostics.
//! - [`text`]: review preprocessing, hashed bigram features, splits and rounds.
//! - [`depparse`]: the single-edge-query dependency parsing variant.
//! - [`experiment`]: tuning, training, evaluation and reports.

pub mod baselines;
pub mod checkpoint;
pub mod depparse;
pub mod env;
pub mod error;
pub mod experiment;
pub mod learner;
pub mod linalg;
pub mod model;
pub mod parallel;
pub mod policy;
pub mod projection;
pub mod rng;
pub mod text;

pub use error::{Error, Result};
pub use linalg::{MatrixKind, SecondOrderMatrix, SparseVec};
pub use model::LinearModel;
pub use parallel::Execution;
pub use policy::{PairDecision, PolicyKind};
