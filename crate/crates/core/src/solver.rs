//! Linear solves `x = ∫K h`, the operator `(Ax)(t) = ∫₀¹ K(t,s) f(s,x(s)) ds`,
//! damped Picard iteration for `x = Ax`, and residual checks.
//!
//! `A` is assembled from per-cell integrals on the solution grid: with
//! `P_i = ∫ s^{α-1} F` and `Q_i = ∫ (1-s) s^{α-2} F` over cell `i` and
//! `F(s) = f(s, x(s))`,
//!
//! ```text
//! (A₁x)(t_j) = (1 - t_j) Σ_{i<j} P_i + t_j Σ_{i>=j} Q_i
//! (A₂x)(t_j) = λ t_j / (2 - λη²) · ∫₀¹ H(η,s) F(s) ds
//! ```

use std::cell::RefCell;

use thiserror::Error;

use crate::calculus::RealFunction;
use crate::expr::EvalError;
use crate::grid::{uniform_nodes, GridError, GridFunction};
use crate::kernel::{eval_H, ConeParams, KernelError, KernelParams};
use crate::problem::ProblemSpec;
use crate::quadrature::{apply_kernel, integrate, integrate_weighted, QuadratureConfig, QuadratureError};

/// Iterates whose sup norm exceeds this are declared divergent.
pub const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid option: {0}")]
    Option(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("f cannot be evaluated at s = {s}, x = {x}: {source}")]
    Eval { s: f64, x: f64, source: EvalError },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Number of grid cells; the grid has `grid_n + 1` nodes.
    pub grid_n: usize,
    /// Sup-norm update at which the iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// `ω` in `x ← (1-ω)x + ωAx`.
    pub damping: f64,
    /// Cone parameter for the reported `cone_ratio`.
    pub theta: f64,
    pub quadrature: QuadratureConfig,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            grid_n: 400,
            tol: 1e-10,
            max_iter: 500,
            damping: 0.5,
            theta: 0.25,
            quadrature: QuadratureConfig::default().with_tol(1e-12),
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.grid_n < 4 {
            return Err(SolverError::Option(format!("grid_n must be >= 4, got {}", self.grid_n)));
        }
        if !(self.tol > 0.0) {
            return Err(SolverError::Option(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter < 1 {
            return Err(SolverError::Option("max_iter must be >= 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(SolverError::Option(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        ConeParams::new(self.theta)?;
        self.quadrature.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Diverged,
}

impl SolveStatus {
    pub fn label(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "not converged (iteration limit reached)",
            SolveStatus::Diverged => "diverged",
        }
    }
}

/// Diagnostics of a candidate solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// `max |t^{2-α} x''(t) + f(t, x(t))|` over nodes in `[0.05, 0.95]`.
    pub ode_residual_sup: f64,
    /// `|x(0)|`
    pub bc0_residual: f64,
    /// `|x(1) - λ∫₀^η x|`
    pub bc1_residual: f64,
    pub min_value: f64,
    /// `min_{[θ,1-θ]} x / ‖x‖`, or 1 for `x ≡ 0`; compare against `θ²`.
    pub cone_ratio: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub solution: GridFunction,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Sup norm of the last update.
    pub update_norm: f64,
    pub residuals: Residuals,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// `x(t) = ∫₀¹ K(t,s) h(s) ds` at `grid_n + 1` uniform nodes; `x(0) = 0`.
pub fn solve_linear<H>(
    params: &KernelParams,
    h: &H,
    grid_n: usize,
    cfg: &QuadratureConfig,
) -> Result<GridFunction, SolverError>
where
    H: RealFunction + ?Sized,
{
    if grid_n < 4 {
        return Err(SolverError::Option(format!("grid_n must be >= 4, got {grid_n}")));
    }
    let nodes = uniform_nodes(grid_n);
    let mut values = Vec::with_capacity(nodes.len());
    for &t in &nodes {
        values.push(if t == 0.0 { 0.0 } else { apply_kernel(params, h, t, cfg)? });
    }
    Ok(GridFunction::new(nodes, values)?)
}

/// `F(s) = f(s, x(s))`, recording the first evaluation error and returning
/// `NaN` for it so the quadrature stops.
struct Source<'a> {
    problem: &'a ProblemSpec,
    x: &'a GridFunction,
    error: RefCell<Option<SolverError>>,
}

impl<'a> Source<'a> {
    fn new(problem: &'a ProblemSpec, x: &'a GridFunction) -> Self {
        Source { problem, x, error: RefCell::new(None) }
    }

    fn value(&self, s: f64) -> f64 {
        let xs = self.x.eval(s);
        match self.problem.f.evaluate(s, xs) {
            Ok(v) => v,
            Err(source) => {
                self.error.borrow_mut().get_or_insert(SolverError::Eval { s, x: xs, source });
                f64::NAN
            }
        }
    }

    /// Prefers a recorded evaluation error over the quadrature error it caused.
    fn lift(&self, e: QuadratureError) -> SolverError {
        self.error.borrow_mut().take().unwrap_or(SolverError::Quadrature(e))
    }
}

impl RealFunction for Source<'_> {
    fn value(&self, s: f64) -> f64 {
        Source::value(self, s)
    }
}

/// `(A₁x, A₂x)` on the nodes of `x`.
pub fn apply_operator_parts(
    problem: &ProblemSpec,
    x: &GridFunction,
    cfg: &QuadratureConfig,
) -> Result<(GridFunction, GridFunction), SolverError> {
    let params = &problem.params;
    let alpha = params.alpha();
    let eta = params.eta();
    let coupling = params.coupling();
    let nodes = x.nodes();
    let cells = nodes.len() - 1;
    let src = Source::new(problem, x);
    let beta = alpha - 1.0;
    let smooth = QuadratureConfig { grading_exponent: 1.0, ..*cfg };
    // H(η,s) / s^{α-2}
    let boundary_reduced = |s: f64| if s <= eta { (2.0 * eta - eta * eta - s) * s } else { eta * eta * (1.0 - s) };

    let mut p = vec![0.0; cells];
    let mut q = vec![0.0; cells];
    let mut r = 0.0;
    for i in 0..cells {
        let (a, b) = (nodes[i], nodes[i + 1]);
        let tol = cfg.tol * (b - a);
        if i == 0 {
            // s^{α-2} is singular at 0: integrate against it as a weight
            let run = |g: &dyn Fn(f64) -> f64, hi: f64| {
                integrate_weighted(g, 0.0, hi, beta, &cfg.with_tol(tol)).map_err(|e| src.lift(e))
            };
            p[0] = run(&|s: f64| s * src.value(s), b)?;
            q[0] = run(&|s: f64| (1.0 - s) * src.value(s), b)?;
            if coupling != 0.0 {
                let g = |s: f64| boundary_reduced(s) * src.value(s);
                r += if eta < b {
                    run(&g, eta)?
                        + integrate(&|s: f64| eval_H(alpha, eta, s) * src.value(s), eta, b, &smooth.with_tol(tol))
                            .map_err(|e| src.lift(e))?
                } else {
                    run(&g, b)?
                };
            }
            continue;
        }
        let piece = smooth.with_tol(tol);
        let run = |g: &dyn Fn(f64) -> f64, lo: f64, hi: f64| integrate(g, lo, hi, &piece).map_err(|e| src.lift(e));
        p[i] = run(&|s: f64| s.powf(alpha - 1.0) * src.value(s), a, b)?;
        q[i] = run(&|s: f64| (1.0 - s) * s.powf(alpha - 2.0) * src.value(s), a, b)?;
        if coupling != 0.0 {
            let boundary = |s: f64| eval_H(alpha, eta, s) * src.value(s);
            r += if a < eta && eta < b {
                run(&boundary, a, eta)? + run(&boundary, eta, b)?
            } else {
                run(&boundary, a, b)?
            };
        }
    }

    let mut suffix = vec![0.0; cells + 1];
    for i in (0..cells).rev() {
        suffix[i] = suffix[i + 1] + q[i];
    }
    let mut left = 0.0;
    let mut a1 = Vec::with_capacity(nodes.len());
    for (j, &t) in nodes.iter().enumerate() {
        if j > 0 {
            left += p[j - 1];
        }
        a1.push((1.0 - t) * left + t * suffix[j]);
    }
    let a2: Vec<f64> = nodes.iter().map(|&t| coupling * t * r).collect();
    Ok((GridFunction::new(nodes.to_vec(), a1)?, GridFunction::new(nodes.to_vec(), a2)?))
}

/// `Ax = A₁x + A₂x` on the nodes of `x`.
pub fn apply_operator(
    problem: &ProblemSpec,
    x: &GridFunction,
    cfg: &QuadratureConfig,
) -> Result<GridFunction, SolverError> {
    let (a1, a2) = apply_operator_parts(problem, x, cfg)?;
    let values = a1.values().iter().zip(a2.values()).map(|(a, b)| a + b).collect();
    Ok(GridFunction::new(x.nodes().to_vec(), values)?)
}

/// Damped Picard iteration `x_{k+1} = (1-ω)x_k + ωAx_k` from `x₀ ≡ 0`.
///
/// Running out of iterations or diverging is reported through
/// [`SolveResult::status`], not as an error.
pub fn solve_nonlinear(problem: &ProblemSpec, opts: &SolveOptions) -> Result<SolveResult, SolverError> {
    opts.validate()?;
    let mut x = GridFunction::zeros(opts.grid_n)?;
    let omega = opts.damping;
    let mut status = SolveStatus::MaxIterations;
    let mut update_norm = f64::INFINITY;
    let mut iterations = 0;
    for k in 1..=opts.max_iter {
        iterations = k;
        let ax = apply_operator(problem, &x, &opts.quadrature)?;
        let next: Vec<f64> = x.values().iter().zip(ax.values()).map(|(a, b)| (1.0 - omega) * a + omega * b).collect();
        update_norm = next.iter().zip(x.values()).fold(0.0, |m, (a, b)| m.max((a - b).abs()));
        if next.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_NORM) {
            status = SolveStatus::Diverged;
            break;
        }
        x = GridFunction::new(x.nodes().to_vec(), next)?;
        if update_norm <= opts.tol {
            status = SolveStatus::Converged;
            break;
        }
    }
    let residuals = verify_solution(problem, &x, opts.theta)?;
    Ok(SolveResult { solution: x, iterations, status, update_norm, residuals })
}

/// Residual and structure diagnostics of `x` as a solution of `problem`.
/// Points where `f` cannot be evaluated give an infinite ODE residual.
pub fn verify_solution(problem: &ProblemSpec, x: &GridFunction, theta: f64) -> Result<Residuals, SolverError> {
    ConeParams::new(theta)?;
    let alpha = problem.params.alpha();
    let mut ode: f64 = 0.0;
    for (&t, &v) in x.nodes().iter().zip(x.values()) {
        if !(0.05..=0.95).contains(&t) {
            continue;
        }
        let r = match problem.f.evaluate(t, v) {
            Ok(fv) => (t.powf(2.0 - alpha) * x.second_derivative(t) + fv).abs(),
            Err(_) => f64::INFINITY,
        };
        ode = ode.max(r);
    }
    let x1 = x.eval(1.0);
    let bc1 = (x1 - problem.params.lambda() * x.integral_to(problem.params.eta())).abs();
    let norm = x.sup_norm();
    let cone_ratio = if norm == 0.0 { 1.0 } else { x.min_on(theta, 1.0 - theta) / norm };
    Ok(Residuals {
        ode_residual_sup: ode,
        bc0_residual: x.eval(0.0).abs(),
        bc1_residual: bc1,
        min_value: x.min_value(),
        cone_ratio,
        theta,
    })
}
