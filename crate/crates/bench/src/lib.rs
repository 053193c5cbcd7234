//! Fixtures shared by the benchmarks.

use cfbvp_core::problem::builtin;
use cfbvp_core::{GridFunction, KernelParams, ProblemSpec};

/// Parameters of built-in problem 1: `α = 3/2`, `λ = 2`, `η = 1/3`.
pub fn coupled_params() -> KernelParams {
    builtin_problem().params
}

/// Built-in problem 1, `f = t + e^{-x}`.
pub fn builtin_problem() -> ProblemSpec {
    builtin(1).expect("built-in problem 1 exists")
}

/// A cone-shaped iterate `t(1-t)` on `n + 1` nodes.
pub fn parabola(n: usize) -> GridFunction {
    GridFunction::from_fn(n, |t| t * (1.0 - t)).expect("at least 4 nodes")
}

/// `count` evenly spread `(t, s)` pairs in `(0, 1)²`.
pub fn sample_pairs(count: usize) -> Vec<(f64, f64)> {
    let golden = 0.618_033_988_749_895;
    (1..=count).map(|i| ((i as f64 * golden).fract(), (i as f64 + 0.5) / (count as f64 + 1.0))).collect()
}
