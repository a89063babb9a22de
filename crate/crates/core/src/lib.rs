//! Multivariate functional equations for generating functions.
//!
//! Equations of the shape
//! `F(r) = e(r) + Σ_j x f_j(r) F(…, 1 or q^{j_i} r_i, …)` are solved exactly
//! over truncated multivariate power series, either by summing over step
//! sequences or by fixed-point iteration, and the two built-in applications
//! (parallelogram polyominoes and (L)(M)(R)-words) are checked against
//! brute-force enumeration.

pub mod cli;
pub mod eqfile;
pub mod expr;
pub mod lmr;
pub mod models;
pub mod polyomino;
pub mod qcomb;
pub mod rational;
pub mod series;
pub mod solver;

pub use rational::Coeff;
pub use series::{Action, Monomial, Series, SeriesError, VarTable};
pub use solver::{ExponentState, FunctionalEquation, SolveError, SolveOptions, StepSpec};
