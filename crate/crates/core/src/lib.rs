//! Solvers for saddle-point problems `min_x max_y f(x, y)` whose objective
//! satisfies a two-sided Polyak–Łojasiewicz condition.
//!
//! The outer loop runs inexact gradient descent on `g(x) = max_y f(x, y)`;
//! each inexact gradient comes from an inner gradient-ascent solve. Both
//! loops stop on gradient-norm rules that certify the output quality:
//!
//! * inner: `|grad_y f(x, y)| <= mu2 gamma` gives `|y - y*(x)| <= gamma`,
//! * outer: `|grad_x f(x, y_hat)| <= sqrt(6) L12 gamma` gives
//!   `g(x) - g* <= 7 L12^2 gamma^2 / mu1`.
//!
//! [`bounds`] evaluates the matching a-priori iteration ceilings,
//! [`validation`] falsification checks for declared constants, and
//! [`harness`] drives grid experiments.

pub mod bounds;
pub mod error;
pub mod harness;
pub mod inner;
pub mod outer;
pub mod problem;
pub mod validation;

pub use bounds::BoundSet;
pub use error::{Error, Result};
pub use inner::{default_inner_cap, solve_inner, InnerResult, InnerStop};
pub use nalgebra;
pub use outer::{
    sample_uniform, solve_fixed_budget, solve_saddle, solve_saddle_observed, InitStrategy,
    OuterCapPolicy, OuterStop, SaddleReport, SolverConfig,
};
pub use problem::{Objective, PLConstants, Saddle, SaddleProblem};
pub use validation::CheckReport;
