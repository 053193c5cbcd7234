//! Composite Gauss–Legendre quadrature on meshes graded toward the left
//! endpoint, and the kernel-weighted integral `∫₀¹ K(t,s) h(s) ds`.
//!
//! A mesh with `m` panels has edges `a + (b-a)(k/m)^γ`. Each panel is
//! integrated by Gauss–Legendre in the stretching coordinate `u`
//! (`s = a + (b-a)u^γ`), Jacobian included, so an endpoint factor
//! `(s-a)^{β-1}` becomes `u^{γβ-1}` and is a polynomial whenever `γβ` is an
//! integer. [`QuadratureConfig::aligned_to`] picks such a `γ`, and
//! [`integrate_weighted`] folds a singular weight `(s-a)^{β-1}` into the
//! Jacobian so it is never evaluated directly.

use thiserror::Error;

use crate::calculus::RealFunction;
use crate::kernel::{eval_G, eval_H, KernelParams};

/// Largest grading exponent [`QuadratureConfig::aligned_to`] will pick.
pub const MAX_ALIGNED_GRADING: f64 = 16.0;

/// Relative accuracy below which successive estimates are rounding noise.
const RELATIVE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("no convergence within {panels} panels (last two estimates differ by {difference:e})")]
    NonConvergence { panels: usize, difference: f64 },
    #[error("integrand is not finite at s = {at}")]
    NonFinite { at: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Absolute tolerance on the difference of successive estimates (never
    /// tighter than `1e-14` relative to the estimate).
    pub tol: f64,
    /// Gauss points per panel.
    pub base_nodes: usize,
    pub grading_exponent: f64,
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { tol: 1e-9, base_nodes: 8, grading_exponent: 3.0, max_panels: 4096 }
    }
}

impl QuadratureConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.tol > 0.0) {
            return Err(QuadratureError::InvalidConfig("tol must be > 0".into()));
        }
        if self.base_nodes < 4 {
            return Err(QuadratureError::InvalidConfig("base_nodes must be >= 4".into()));
        }
        if !(self.grading_exponent >= 1.0) || !self.grading_exponent.is_finite() {
            return Err(QuadratureError::InvalidConfig("grading_exponent must be >= 1".into()));
        }
        if self.max_panels < 2 {
            return Err(QuadratureError::InvalidConfig("max_panels must be >= 2".into()));
        }
        Ok(())
    }

    /// Raises the grading exponent to the smallest `γ' >= γ` with `γ'·β` an
    /// integer, for integrands carrying a bounded factor `(s-a)^β`. Left
    /// unchanged when `γ'` would exceed [`MAX_ALIGNED_GRADING`]; singular
    /// weights belong in [`integrate_weighted`].
    pub fn aligned_to(mut self, beta: f64) -> Self {
        if beta > 0.0 && beta <= 1.0 {
            let k = (self.grading_exponent * beta - 1e-9).ceil().max(1.0);
            let gamma = k / beta;
            if gamma <= MAX_ALIGNED_GRADING {
                self.grading_exponent = gamma.max(1.0);
            }
        }
        self
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`, nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> GaussRule {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = nf * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            // z is the i-th largest root
            nodes[n - 1 - i] = 0.5 * (1.0 + z);
            nodes[i] = 0.5 * (1.0 - z);
            weights[n - 1 - i] = 0.5 * w;
            weights[i] = 0.5 * w;
        }
        GaussRule { nodes, weights }
    }
}

/// Stretching `s = a + w·u^γ` on `[0, 1]`, returning `s` and the factor
/// multiplying `g(s)` (Jacobian, with an absorbed endpoint weight if any).
trait Map {
    fn at(&self, u: f64) -> (f64, f64);
}

struct Graded {
    a: f64,
    width: f64,
    gamma: f64,
}

impl Map for Graded {
    fn at(&self, u: f64) -> (f64, f64) {
        if self.gamma == 1.0 {
            (self.a + self.width * u, self.width)
        } else {
            let ug = u.powf(self.gamma - 1.0);
            (self.a + self.width * ug * u, self.width * self.gamma * ug)
        }
    }
}

/// `(s-a)^{β-1} ds = w^β γ u^{k-1} du` with `γβ = k` an integer.
struct Weighted {
    a: f64,
    width: f64,
    gamma: f64,
    k: i32,
    scale: f64,
}

impl Map for Weighted {
    fn at(&self, u: f64) -> (f64, f64) {
        // s may underflow to a; the weight never is evaluated at s itself
        (self.a + self.width * u.powf(self.gamma), self.scale * u.powi(self.k - 1))
    }
}

fn composite<G, M>(g: &G, map: &M, panels: usize, rule: &GaussRule) -> Result<f64, QuadratureError>
where
    G: Fn(f64) -> f64 + ?Sized,
    M: Map,
{
    let du = 1.0 / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let u0 = k as f64 * du;
        let mut panel = 0.0;
        for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
            let (s, jac) = map.at(u0 + du * z);
            let v = g(s);
            if !v.is_finite() {
                return Err(QuadratureError::NonFinite { at: s });
            }
            panel += w * jac * v;
        }
        total += panel * du;
    }
    Ok(total)
}

/// Doubles the panel count until two successive estimates differ by less
/// than `cfg.tol`; returns the finer one.
fn adaptive<G, M>(g: &G, map: &M, cfg: &QuadratureConfig) -> Result<f64, QuadratureError>
where
    G: Fn(f64) -> f64 + ?Sized,
    M: Map,
{
    let rule = GaussRule::new(cfg.base_nodes);
    let mut panels = 1;
    let mut prev = composite(g, map, panels, &rule)?;
    let mut difference = f64::INFINITY;
    while panels * 2 <= cfg.max_panels {
        panels *= 2;
        let cur = composite(g, map, panels, &rule)?;
        difference = (cur - prev).abs();
        if difference < cfg.tol.max(RELATIVE_FLOOR * cur.abs()) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(QuadratureError::NonConvergence { panels, difference })
}

fn check_interval(a: f64, b: f64) -> Result<(), QuadratureError> {
    if !(a <= b) || !a.is_finite() || !b.is_finite() {
        return Err(QuadratureError::InvalidInterval { a, b });
    }
    Ok(())
}

/// `∫_a^b g(s) ds` on the graded mesh.
pub fn integrate<G>(g: &G, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64, QuadratureError>
where
    G: Fn(f64) -> f64 + ?Sized,
{
    cfg.validate()?;
    check_interval(a, b)?;
    if a == b {
        return Ok(0.0);
    }
    adaptive(g, &Graded { a, width: b - a, gamma: cfg.grading_exponent }, cfg)
}

/// `∫_a^b (s-a)^{β-1} g(s) ds` for `β ∈ (0, 1]`, with `g` smooth.
///
/// When some `γ = k/β` in `[cfg.grading_exponent, MAX_ALIGNED_GRADING]` exists the
/// weight is folded into the stretching so that only `g` is sampled.
/// Otherwise (tiny `β`) the endpoint value is subtracted:
/// `g(a)·w^β/β + ∫ (s-a)^{β-1} (g(s) - g(a)) ds`.
pub fn integrate_weighted<G>(g: &G, a: f64, b: f64, beta: f64, cfg: &QuadratureConfig) -> Result<f64, QuadratureError>
where
    G: Fn(f64) -> f64 + ?Sized,
{
    cfg.validate()?;
    check_interval(a, b)?;
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(QuadratureError::InvalidConfig(format!("weight exponent beta must lie in (0, 1], got {beta}")));
    }
    if a == b {
        return Ok(0.0);
    }
    let width = b - a;
    let k = (cfg.grading_exponent * beta - 1e-9).ceil().max(1.0);
    let gamma = k / beta;
    if gamma <= MAX_ALIGNED_GRADING {
        let map = Weighted { a, width, gamma, k: k as i32, scale: width.powf(beta) * gamma };
        return adaptive(g, &map, cfg);
    }
    let g0 = g(a);
    if !g0.is_finite() {
        return Err(QuadratureError::NonFinite { at: a });
    }
    let head = g0 * width.powf(beta) / beta;
    let rest = |s: f64| (s - a).powf(beta - 1.0) * (g(s) - g0);
    let graded = Graded { a, width, gamma: cfg.grading_exponent };
    // the bulk of the integral is in `head`; converge relative to it
    let cfg = cfg.with_tol(cfg.tol.max(RELATIVE_FLOOR * head.abs()));
    Ok(head + adaptive(&rest, &graded, &cfg)?)
}

/// `∫₀¹ K(t,s) h(s) ds`, split at the kinks `s = t` and `s = η`.
///
/// The grading is aligned to the kernel's `s^{α-2}` endpoint behaviour; each
/// of the four pieces gets a quarter of `cfg.tol`.
pub fn apply_kernel<H>(params: &KernelParams, h: &H, t: f64, cfg: &QuadratureConfig) -> Result<f64, QuadratureError>
where
    H: RealFunction + ?Sized,
{
    let alpha = params.alpha();
    let eta = params.eta();
    let piece = cfg.aligned_to(alpha - 1.0).with_tol(cfg.tol / 4.0);

    let green = |s: f64| eval_G(alpha, t, s) * h.value(s);
    let g_part = integrate(&green, 0.0, t, &piece)? + integrate(&green, t, 1.0, &piece)?;

    let coupling = params.coupling();
    if coupling == 0.0 || t == 0.0 {
        return Ok(g_part);
    }
    let boundary = |s: f64| eval_H(alpha, eta, s) * h.value(s);
    let h_part = integrate(&boundary, 0.0, eta, &piece)? + integrate(&boundary, eta, 1.0, &piece)?;
    Ok(g_part + coupling * t * h_part)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_weights_and_symmetry() {
        for n in [4, 5, 8, 12, 20] {
            let r = GaussRule::new(n);
            let sum: f64 = r.weights.iter().sum();
            assert!((sum - 1.0).abs() < 1e-14, "n={n}");
            for i in 0..n {
                assert!((r.nodes[i] + r.nodes[n - 1 - i] - 1.0).abs() < 1e-14);
            }
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn single_panel_polynomial_exactness() {
        let rule = GaussRule::new(8);
        // degree 15 is the limit for 8 points
        for deg in 0..=15 {
            let g = |s: f64| (deg as f64 + 1.0) * s.powi(deg);
            let v = composite(&g, &Graded { a: 0.0, width: 1.0, gamma: 1.0 }, 1, &rule).unwrap();
            assert!((v - 1.0).abs() <= 1e-13, "deg {deg}: {v}");
        }
    }

    #[test]
    fn integrates_reference_integrals() {
        let cfg = QuadratureConfig::default();
        let one = integrate(&|_s: f64| 1.0, 0.0, 1.0, &cfg).unwrap();
        assert!((one - 1.0).abs() < 1e-12);

        let smooth = |s: f64| (1.0 - s) * s.sqrt();
        let v = integrate(&smooth, 0.0, 1.0, &cfg.aligned_to(0.5)).unwrap();
        assert!((v - 4.0 / 15.0).abs() < 1e-9, "{v}");

        let singular = |s: f64| (1.0 - s) / s.sqrt();
        let v = integrate(&singular, 0.0, 1.0, &cfg.aligned_to(0.5)).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn weighted_integrals() {
        let cfg = QuadratureConfig::default().with_tol(1e-13);
        // ∫₀¹ s^{-1/2}(1-s) ds = 4/3
        let v = integrate_weighted(&|s: f64| 1.0 - s, 0.0, 1.0, 0.5, &cfg).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-12, "{v}");
        // ∫_1^2 (s-1)^{β-1} ds = 1/β, even for tiny β
        for beta in [1.0, 0.3, 0.01, 1e-4] {
            let v = integrate_weighted(&|_s: f64| 1.0, 1.0, 2.0, beta, &cfg).unwrap();
            assert!((v * beta - 1.0).abs() < 1e-12, "beta={beta}: {v}");
        }
        // ∫₀^{1/2} s^{-0.9} e^s ds against a series oracle
        let want: f64 = (0..40)
            .map(|n| 0.5f64.powf(n as f64 + 0.1) / ((n as f64 + 0.1) * (1..=n).map(|k| k as f64).product::<f64>()))
            .sum();
        let v = integrate_weighted(&f64::exp, 0.0, 0.5, 0.1, &cfg).unwrap();
        assert!((v - want).abs() < 1e-11 * want, "{v} vs {want}");
        assert!(integrate_weighted(&f64::exp, 0.0, 1.0, 0.0, &cfg).is_err());
    }

    #[test]
    fn aligned_exponents() {
        let cfg = QuadratureConfig::default();
        assert_eq!(cfg.aligned_to(1.0).grading_exponent, 3.0);
        assert_eq!(cfg.aligned_to(0.5).grading_exponent, 4.0);
        assert!((cfg.aligned_to(0.1).grading_exponent - 10.0).abs() < 1e-12);
        assert_eq!(cfg.aligned_to(0.01).grading_exponent, 3.0);
        assert!(cfg.aligned_to(0.3).grading_exponent >= 3.0);
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = QuadratureConfig::default();
        assert!(matches!(integrate(&|s: f64| s, 1.0, 0.0, &cfg), Err(QuadratureError::InvalidInterval { .. })));
        let bad = QuadratureConfig { base_nodes: 3, ..cfg };
        assert!(matches!(integrate(&|s: f64| s, 0.0, 1.0, &bad), Err(QuadratureError::InvalidConfig(_))));
        assert!(matches!(
            integrate(&|s: f64| (s - 1.0 / 3.0).powi(-2), 0.0, 1.0, &QuadratureConfig { grading_exponent: 1.0, ..cfg }),
            Err(QuadratureError::NonFinite { .. }) | Err(QuadratureError::NonConvergence { .. })
        ));
        let tiny = QuadratureConfig { max_panels: 4, tol: 1e-15, grading_exponent: 1.0, ..cfg };
        assert!(matches!(
            integrate(&|s: f64| s.sqrt(), 0.0, 1.0, &tiny),
            Err(QuadratureError::NonConvergence { panels: 4, .. })
        ));
    }
}
