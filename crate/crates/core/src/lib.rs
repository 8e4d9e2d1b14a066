//! Parameterized proximal point methods for two-block separable convex
//! problems, with a lasso driver and an ADMM baseline.
//!
//! The problem is `min f(x) + g(y)` subject to `Ax + By = c`. Solvers only
//! touch `f` and `g` through proximal oracles (see [`TwoBlockProblem`]).

// `!(x > 0.0)` is used on purpose so NaN fails the check too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admm;
pub mod diagnostics;
pub mod lasso;
pub mod linalg;
pub mod params;
pub mod problem;
pub mod proximal;
pub mod registry;
pub mod solver;

pub use admm::{admm_solve, AdmmConfig};
pub use lasso::{as_two_block, generate, GenerationConfig, LassoError, LassoInstance, LassoProblem};
pub use linalg::{DenseMatrix, DenseVector, LinalgError, LinearOperator};
pub use params::{ParameterSet, ParameterViolation};
pub use problem::{ProxError, TwoBlockProblem};
pub use registry::{AlgorithmConfig, LassoStrategy, RegistryError, StrategyRegistry, StrategySettings};
pub use solver::{
    solve, Algorithm, IterationRecord, NullSink, SolveError, SolveReport, SolverState, StoppingCriteria,
    TraceSink,
};
