//! Conformable fractional boundary value problems
//!
//! ```text
//! D^α x(t) + f(t, x(t)) = 0,   0 < t < 1,   1 < α <= 2
//! x(0) = 0,   x(1) = λ ∫₀^η x(t) dt
//! ```
//!
//! solved through their Green's kernel, together with numerical checks of
//! sufficient conditions for a positive solution.

// `!(x > 0.0)` deliberately rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod existence;
pub mod expr;
pub mod fmt;
pub mod grid;
pub mod kernel;
pub mod problem;
pub mod quadrature;
pub mod solver;

pub use calculus::{conformable_derivative, fractional_integral, CalculusError, Order, RealFunction};
pub use existence::{check_existence, compute_lambda1, compute_lambda2, estimate_growth, ExistenceReport};
pub use expr::{parse, Expression};
pub use grid::GridFunction;
pub use kernel::{ConeParams, KernelParams};
pub use problem::{LimitHints, ProblemSpec};
pub use quadrature::{apply_kernel, integrate, QuadratureConfig};
pub use solver::{solve_linear, solve_nonlinear, SolveOptions, SolveResult};
