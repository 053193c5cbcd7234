//! Conformable fractional derivative and integral for `α ∈ (0, 2]`.
//!
//! For `α ∈ (n, n+1]` and `t > 0` the derivative is evaluated through the
//! product form `D^α f(t) = t^{n+1-α} f^{(n+1)}(t)`, with `f^{(n+1)}` taken
//! by central differences and one Richardson step. At `t = 0` it is the
//! right limit. The integral is
//! `I^α f(t) = (1/n!) ∫₀^t (t-s)^n s^{α-n-1} f(s) ds`.

use thiserror::Error;

use crate::expr::Expression;
use crate::quadrature::{integrate_weighted, QuadratureConfig, QuadratureError};

/// A real function on `[0, ∞)`.
pub trait RealFunction {
    fn value(&self, t: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + ?Sized> RealFunction for F {
    fn value(&self, t: f64) -> f64 {
        self(t)
    }
}

/// An expression in `t` viewed as a function of `t` with `x` held fixed.
/// Domain errors surface as `NaN`, which the consumers reject.
pub struct ExprFunction<'a> {
    pub expr: &'a Expression,
    pub x: f64,
}

impl RealFunction for ExprFunction<'_> {
    fn value(&self, t: f64) -> f64 {
        self.expr.evaluate(t, self.x).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalculusError {
    #[error("order alpha must lie in (0, 2], got {0}")]
    Order(f64),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("non-finite value near t = {0}")]
    NonFinite(f64),
    #[error("the limit t -> 0+ did not stabilize (last values {0:?})")]
    LimitDivergent(Vec<f64>),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// `α` with its split `α = n + β`, `β ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Order {
    alpha: f64,
    n: u32,
    beta: f64,
}

impl Order {
    pub fn new(alpha: f64) -> Result<Order, CalculusError> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(CalculusError::Order(alpha));
        }
        let n = (alpha.ceil() - 1.0) as u32;
        Ok(Order { alpha, n, beta: alpha - n as f64 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Finite-difference step for `D^α` at `t`: `max(1e-4, 1e-4·t)` for
/// `α <= 1` (first differences) and `max(2e-3, 2e-3·t)` for `α > 1`, where
/// the second difference divides rounding noise by `h²`.
pub fn default_step(order: Order, t: f64) -> f64 {
    let base = if order.n == 0 { 1e-4 } else { 2e-3 };
    base * t.max(1.0)
}

/// Central difference for the `order`-th derivative (order 1 or 2).
fn central(f: &dyn Fn(f64) -> f64, t: f64, h: f64, order: u32) -> f64 {
    match order {
        1 => (f(t + h) - f(t - h)) / (2.0 * h),
        _ => (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h),
    }
}

/// `f^{(order)}(t)` with one Richardson step on `h, h/2`.
fn derivative(f: &dyn Fn(f64) -> f64, t: f64, h: f64, order: u32) -> f64 {
    let coarse = central(f, t, h, order);
    let fine = central(f, t, h / 2.0, order);
    (4.0 * fine - coarse) / 3.0
}

fn derivative_positive<F: RealFunction + ?Sized>(f: &F, order: Order, t: f64, step: f64) -> Result<f64, CalculusError> {
    // keep the stencil inside [0, ∞)
    let h = step.min(0.5 * t);
    let g = |s: f64| f.value(s);
    let d = derivative(&g, t, h, order.n + 1);
    let v = t.powf(order.n as f64 + 1.0 - order.alpha) * d;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CalculusError::NonFinite(t))
    }
}

/// Aitken Δ² of three consecutive terms; falls back to the last term when
/// the second difference vanishes.
fn aitken(a: f64, b: f64, c: f64) -> f64 {
    let denom = c - 2.0 * b + a;
    if denom == 0.0 || !denom.is_finite() {
        return c;
    }
    let v = c - (c - b) * (c - b) / denom;
    if v.is_finite() {
        v
    } else {
        c
    }
}

fn agree(vals: &[f64]) -> bool {
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo <= 1e-6 * hi.abs().max(lo.abs()).max(1.0)
}

/// `D^α f(t)`. `step` is the finite-difference step (see [`default_step`]).
///
/// At `t = 0` the derivative is evaluated at `t_k = 2^{-k}·10^{-2}`,
/// `k = 0..=12`. While the differences of that sequence shrink it is
/// Aitken-accelerated (once, then again on the accelerated values), and the
/// limit is accepted once three successive values of either pass agree to
/// `1e-6·max(1, |value|)`.
pub fn conformable_derivative<F: RealFunction + ?Sized>(
    f: &F,
    order: Order,
    t: f64,
    step: f64,
) -> Result<f64, CalculusError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(CalculusError::Argument(format!("t must be >= 0, got {t}")));
    }
    if !(step > 0.0) {
        return Err(CalculusError::Argument(format!("step must be > 0, got {step}")));
    }
    if t > 0.0 {
        return derivative_positive(f, order, t, step);
    }

    let mut raw = Vec::with_capacity(13);
    let mut accel: Vec<f64> = Vec::new();
    let mut twice: Vec<f64> = Vec::new();
    for k in 0..=12 {
        let tk = 1e-2 * 0.5f64.powi(k);
        raw.push(derivative_positive(f, order, tk, step.min(1e-2 * tk))?);
        if raw.len() >= 3 {
            let n = raw.len();
            let (a, b, c) = (raw[n - 3], raw[n - 2], raw[n - 1]);
            // Aitken also "sums" growing geometric sequences; only trust it
            // on contracting ones
            if (c - b).abs() > (b - a).abs() {
                accel.clear();
                twice.clear();
                continue;
            }
            accel.push(aitken(a, b, c));
            let m = accel.len();
            if m >= 3 {
                if agree(&accel[m - 3..]) {
                    return Ok(accel[m - 1]);
                }
                // a second pass removes the next power of t
                twice.push(aitken(accel[m - 3], accel[m - 2], accel[m - 1]));
                let q = twice.len();
                if q >= 3 && agree(&twice[q - 3..]) {
                    return Ok(twice[q - 1]);
                }
            }
        }
    }
    Err(CalculusError::LimitDivergent(raw[raw.len() - 3..].to_vec()))
}

/// `I^α f(t)` to absolute tolerance `tol`, with `s^{β-1}` as a quadrature weight.
pub fn fractional_integral<F: RealFunction + ?Sized>(
    f: &F,
    order: Order,
    t: f64,
    tol: f64,
) -> Result<f64, CalculusError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(CalculusError::Argument(format!("t must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let cfg = QuadratureConfig::default().with_tol(tol);
    // the weight s^{β-1} is folded into the quadrature
    let integrand = |s: f64| {
        let poly = if order.n == 0 { 1.0 } else { t - s };
        poly * f.value(s)
    };
    // n! is 1 for n ∈ {0, 1}
    Ok(integrate_weighted(&integrand, 0.0, t, order.beta, &cfg)?)
}
