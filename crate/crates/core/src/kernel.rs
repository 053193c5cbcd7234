//! Green's kernels for `D^α x + h = 0`, `x(0) = 0`, `x(1) = λ∫₀^η x`.
//!
//! ```text
//! G(t,s) = (1-t) s^{α-1}        s <= t
//!        = t (1-s) s^{α-2}      t <= s
//! H(t,s) = (2t - t² - s) s^{α-1}  s <= t
//!        = t² (1-s) s^{α-2}       t <= s
//! K(t,s) = G(t,s) + λt/(2-λη²) · H(η,s)
//! ```
//!
//! Every branch tends to zero as `s -> 0+` when `α > 1`, so the `s = 0`
//! column is defined as zero.
#![allow(non_snake_case)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Smallest admissible `2 - λη²`.
pub const MIN_DENOMINATOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("alpha must lie in (1, 2], got {0}")]
    Alpha(f64),
    #[error("lambda must be a finite number >= 0, got {0}")]
    Lambda(f64),
    #[error("eta must lie in (0, 1], got {0}")]
    Eta(f64),
    #[error("lambda*eta^2 must be < 2 (got {0})")]
    Degenerate(f64),
    #[error("theta must lie in (0, 1/2), got {0}")]
    Theta(f64),
}

/// Validated `(α, λ, η)` with `λη² < 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    alpha: f64,
    lambda: f64,
    eta: f64,
}

impl KernelParams {
    pub fn new(alpha: f64, lambda: f64, eta: f64) -> Result<Self, KernelError> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(KernelError::Alpha(alpha));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(KernelError::Lambda(lambda));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(KernelError::Eta(eta));
        }
        let product = lambda * eta * eta;
        if 2.0 - product < MIN_DENOMINATOR {
            return Err(KernelError::Degenerate(product));
        }
        Ok(KernelParams { alpha, lambda, eta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `λ / (2 - λη²)`.
    pub fn coupling(&self) -> f64 {
        self.lambda / (2.0 - self.lambda * self.eta * self.eta)
    }
}

/// Cone parameter `θ ∈ (0, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeParams {
    theta: f64,
}

impl ConeParams {
    pub fn new(theta: f64) -> Result<Self, KernelError> {
        if theta > 0.0 && theta < 0.5 {
            Ok(ConeParams { theta })
        } else {
            Err(KernelError::Theta(theta))
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

#[inline]
fn spow(s: f64, p: f64) -> f64 {
    if p == 1.0 {
        s
    } else if p == 0.0 {
        1.0
    } else {
        s.powf(p)
    }
}

#[inline]
pub fn eval_G(alpha: f64, t: f64, s: f64) -> f64 {
    if s <= t {
        (1.0 - t) * spow(s, alpha - 1.0)
    } else {
        t * (1.0 - s) * spow(s, alpha - 2.0)
    }
}

#[inline]
pub fn eval_H(alpha: f64, t: f64, s: f64) -> f64 {
    if s <= t {
        (2.0 * t - t * t - s) * spow(s, alpha - 1.0)
    } else {
        t * t * (1.0 - s) * spow(s, alpha - 2.0)
    }
}

#[inline]
pub fn eval_K(params: &KernelParams, t: f64, s: f64) -> f64 {
    let g = eval_G(params.alpha, t, s);
    if params.lambda == 0.0 {
        return g;
    }
    g + params.coupling() * t * eval_H(params.alpha, params.eta, s)
}

/// `min(t², t(1-t))`.
#[inline]
pub fn rho(t: f64) -> f64 {
    if t <= 0.5 {
        t * t
    } else {
        t * (1.0 - t)
    }
}

/// `G(s,s) = (1-s) s^{α-1}`.
#[inline]
pub fn diag_G(alpha: f64, s: f64) -> f64 {
    (1.0 - s) * spow(s, alpha - 1.0)
}

/// The four sampled kernel inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// `θ² G(s,s) <= G(t,s) <= G(s,s)` on `[θ,1-θ] × (0,1]`
    GreenOnCore,
    /// `ρ(t) G(s,s) <= H(t,s) <= G(s,s)` on `(0,1] × (0,1]`
    BoundaryRho,
    /// `θ² G(s,s) <= H(t,s) <= G(s,s)` on `[θ,1-θ] × (0,1]`
    BoundaryOnCore,
    /// `K(t,s) >= 0` on `[0,1]²`
    KernelNonnegative,
}

impl BoundKind {
    pub const ALL: [BoundKind; 4] =
        [BoundKind::GreenOnCore, BoundKind::BoundaryRho, BoundKind::BoundaryOnCore, BoundKind::KernelNonnegative];

    pub fn label(self) -> &'static str {
        match self {
            BoundKind::GreenOnCore => "theta^2 G(s,s) <= G(t,s) <= G(s,s)",
            BoundKind::BoundaryRho => "rho(t) G(s,s) <= H(t,s) <= G(s,s)",
            BoundKind::BoundaryOnCore => "theta^2 G(s,s) <= H(t,s) <= G(s,s)",
            BoundKind::KernelNonnegative => "K(t,s) >= 0",
        }
    }
}

/// Violation counts and worst (smallest) margins per inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub samples: usize,
    pub violations: [usize; 4],
    pub worst_margin: [f64; 4],
}

impl BoundReport {
    fn empty() -> Self {
        BoundReport { samples: 0, violations: [0; 4], worst_margin: [f64::INFINITY; 4] }
    }

    pub fn total_violations(&self) -> usize {
        self.violations.iter().sum()
    }

    pub fn merge(&mut self, other: &BoundReport) {
        self.samples += other.samples;
        for i in 0..4 {
            self.violations[i] += other.violations[i];
            self.worst_margin[i] = self.worst_margin[i].min(other.worst_margin[i]);
        }
    }

    fn record(&mut self, kind: usize, margin: f64, slack: f64) {
        if margin < -slack || margin.is_nan() {
            self.violations[kind] += 1;
        }
        self.worst_margin[kind] = self.worst_margin[kind].min(margin);
    }
}

/// Margins of the four inequalities at one sample. `core_t ∈ [θ,1-θ]`,
/// `t ∈ (0,1]`, `s ∈ (0,1]`, `(kt, ks) ∈ [0,1]²`.
pub fn bound_margins(params: &KernelParams, theta: f64, core_t: f64, t: f64, s: f64, kt: f64, ks: f64) -> [f64; 4] {
    let a = params.alpha;
    let theta2 = theta * theta;
    let diag = diag_G(a, s);
    let g = eval_G(a, core_t, s);
    let h_core = eval_H(a, core_t, s);
    let h = eval_H(a, t, s);
    [
        (g - theta2 * diag).min(diag - g),
        (h - rho(t) * diag).min(diag - h),
        (h_core - theta2 * diag).min(diag - h_core),
        eval_K(params, kt, ks),
    ]
}

/// Samples `samples` points with a seeded generator and checks every bound.
pub fn verify_bounds(params: &KernelParams, cone: ConeParams, samples: usize, seed: u64, slack: f64) -> BoundReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = cone.theta();
    let mut report = BoundReport::empty();
    for _ in 0..samples {
        let core_t = theta + (1.0 - 2.0 * theta) * rng.random::<f64>();
        let t = 1.0 - rng.random::<f64>();
        let s = 1.0 - rng.random::<f64>();
        let kt = rng.random::<f64>();
        let ks = rng.random::<f64>();
        let m = bound_margins(params, theta, core_t, t, s, kt, ks);
        for (i, &v) in m.iter().enumerate() {
            report.record(i, v, slack);
        }
        report.samples += 1;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-14 * (1.0 + b.abs())
    }

    #[test]
    fn green_examples() {
        assert!(close(eval_G(2.0, 0.25, 0.5), 0.125));
        for alpha in [1.1, 1.5, 2.0] {
            let s: f64 = 0.5;
            let left = (1.0 - s) * s.powf(alpha - 1.0);
            let right = s * (1.0 - s) * s.powf(alpha - 2.0);
            assert!(close(eval_G(alpha, s, s), left));
            assert!((left - right).abs() <= 1e-15);
            for s in [0.0, 0.3, 1.0] {
                assert_eq!(eval_G(alpha, 0.0, s), 0.0);
                assert_eq!(eval_H(alpha, 0.0, s), 0.0);
            }
        }
    }

    #[test]
    fn boundary_kernel_examples() {
        for alpha in [1.1, 1.5, 2.0] {
            let v = eval_H(alpha, 1.0, 0.3);
            assert!(close(v, 0.7 * 0.3f64.powf(alpha - 1.0)));
            assert!(close(v, diag_G(alpha, 0.3)));
        }
        assert!(close(eval_H(2.0, 0.5, 0.25), 0.125));
    }

    #[test]
    fn composite_kernel_examples() {
        let p = KernelParams::new(2.0, 1.6, 0.5).unwrap();
        assert!(close(p.coupling(), 1.0));
        assert!(close(eval_K(&p, 0.5, 0.25), 0.1875));
        assert_eq!(eval_K(&p, 0.0, 0.7), 0.0);
        let p0 = KernelParams::new(1.5, 0.0, 0.3).unwrap();
        for &(t, s) in &[(0.2, 0.7), (0.9, 0.1), (0.5, 0.5)] {
            assert_eq!(eval_K(&p0, t, s), eval_G(1.5, t, s));
        }
    }

    #[test]
    fn rho_and_diagonal() {
        assert_eq!(rho(0.5), 0.25);
        assert!(close(rho(0.3), 0.09));
        assert!(close(rho(0.8), 0.16));
        assert_eq!(diag_G(2.0, 0.5), 0.25);
        assert!(close(diag_G(1.5, 0.25), 0.375));
        assert_eq!(diag_G(1.3, 1.0), 0.0);
        assert_eq!(diag_G(1.3, 0.0), 0.0);
    }

    #[test]
    fn parameter_validation() {
        assert!(KernelParams::new(1.5, 2.0, 1.0 / 3.0).is_ok());
        let err = KernelParams::new(1.5, 8.0, 0.6).unwrap_err();
        assert!(err.to_string().contains("lambda*eta^2 must be < 2"));
        assert!(matches!(KernelParams::new(1.0, 0.0, 0.5), Err(KernelError::Alpha(_))));
        assert!(matches!(KernelParams::new(2.5, 0.0, 0.5), Err(KernelError::Alpha(_))));
        assert!(matches!(KernelParams::new(1.5, -1.0, 0.5), Err(KernelError::Lambda(_))));
        assert!(matches!(KernelParams::new(1.5, 1.0, 0.0), Err(KernelError::Eta(_))));
        // 2 - λη² just under the margin
        assert!(matches!(KernelParams::new(1.5, 2.0 - 5e-10, 1.0), Err(KernelError::Degenerate(_))));
        assert!(ConeParams::new(0.6).unwrap_err().to_string().contains("theta must lie in (0, 1/2)"));
        assert!(ConeParams::new(0.0).is_err());
    }

    #[test]
    fn seeded_verification_is_clean_and_reproducible() {
        let p = KernelParams::new(1.5, 2.0, 1.0 / 3.0).unwrap();
        let cone = ConeParams::new(0.25).unwrap();
        let a = verify_bounds(&p, cone, 20_000, 7, 1e-12);
        let b = verify_bounds(&p, cone, 20_000, 7, 1e-12);
        assert_eq!(a, b);
        assert_eq!(a.total_violations(), 0);
        assert!(a.worst_margin.iter().all(|m| *m >= -1e-12));
    }
}
