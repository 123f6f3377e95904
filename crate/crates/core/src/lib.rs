//! Structure learning for sparse directed acyclic graphs by l1-penalized
//! maximum likelihood.
//!
//! A DAG weight matrix is written as `G = P T Pᵀ` with `P` a node ordering
//! and `T` strictly lower triangular. For a fixed ordering the optimal `T`
//! solves a convex lasso-type problem ([`solver`]); a genetic algorithm
//! searches the orderings ([`ga`]). Around that core sit a synthetic
//! structural-equation-model generator ([`sem`]), regularization-path edge
//! ranking and precision/recall metrics ([`metrics`]), brute-force
//! references ([`oracle`]), file formats ([`io`]) and the command-line
//! front end ([`cli`]).

pub mod cli;
pub mod config;
pub mod error;
pub mod ga;
pub mod io;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod sem;
pub mod solver;

pub use error::{Error, Result};
pub use ga::{GaConfig, GaReport, Individual, StopReason};
pub use model::{
    compose, decompose, is_dag, Dataset, Edge, Permutation, StrictLowerTriangular, WeightedDag,
};
pub use sem::{GraphSpec, GroundTruth};
pub use solver::{InnerProblem, SolveReport, SolverConfig};
