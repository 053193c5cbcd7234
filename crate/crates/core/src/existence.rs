//! Existence certificates for positive solutions.
//!
//! ```text
//! Λ₂ = [ (1 + c) ∫₀¹ G(s,s) ds ]⁻¹,                    c = λ/(2-λη²)
//! Λ₁(θ) = [ θ⁴ ∫_θ^{1-θ} (G(s,s) + c H(η,s)) ds ]⁻¹
//! ```
//!
//! and the growth numbers of `f(t,x)/x`:
//! `f₀ = lim_{x→0⁺} min_t`, `f⁰ = lim_{x→0⁺} max_t`, `f_∞ = lim_{x→∞} min_t`,
//! `f^∞ = lim_{x→∞} max_t`.
//!
//! A positive solution exists when
//! - (superlinear at 0, sublinear at ∞) `f^∞ < Λ₂/2` and `f₀ > Λ₁(θ)`, or
//! - (sublinear at 0, superlinear at ∞) `f⁰ < Λ₂` and `f_∞ > Λ₁(θ)`,
//!
//! with the limiting case `(f₀ = ∞, f^∞ = 0)` or `(f⁰ = 0, f_∞ = ∞)`.
//! These are sufficient conditions only; failing them proves nothing.

use serde_json::{json, Value};
use thiserror::Error;

use crate::expr::{EvalError, Expression, Wide};
use crate::fmt::round_sig;
use crate::kernel::{diag_G, eval_H, ConeParams, KernelError, KernelParams};
use crate::problem::{LimitHints, ProblemSpec};
use crate::quadrature::{integrate, QuadratureConfig, QuadratureError};

/// Growth samples above this count as unbounded.
pub const INFINITY_THRESHOLD: f64 = 1e8;
/// Growth samples below this count as vanishing.
pub const ZERO_THRESHOLD: f64 = 1e-8;
/// Relative agreement of the last three samples for a finite limit, and the
/// band applied to both thresholds.
pub const AGREEMENT: f64 = 0.01;
/// Number of `t` points in `[0, 1]` for the min/max over `t`.
pub const GROWTH_T_POINTS: usize = 101;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExistenceError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("invalid theta grid: {0}")]
    ThetaGrid(String),
    #[error("f cannot be evaluated at t = {t}, x = {x:e}: {source}")]
    Eval { t: f64, x: f64, source: EvalError },
}

/// `∫₀¹ (1-s) s^{α-1} ds`, which is `1/(α(α+1))`.
pub fn diagonal_integral(alpha: f64, cfg: &QuadratureConfig) -> Result<f64, QuadratureError> {
    integrate(&|s: f64| diag_G(alpha, s), 0.0, 1.0, &cfg.aligned_to(alpha - 1.0))
}

pub fn compute_lambda2(params: &KernelParams, cfg: &QuadratureConfig) -> Result<f64, QuadratureError> {
    Ok(1.0 / ((1.0 + params.coupling()) * diagonal_integral(params.alpha(), cfg)?))
}

pub fn compute_lambda1(params: &KernelParams, theta: f64, cfg: &QuadratureConfig) -> Result<f64, ExistenceError> {
    let theta = ConeParams::new(theta)?.theta();
    let (alpha, eta, c) = (params.alpha(), params.eta(), params.coupling());
    let g = |s: f64| diag_G(alpha, s) + c * eval_H(alpha, eta, s);
    let (lo, hi) = (theta, 1.0 - theta);
    let integral = if lo < eta && eta < hi {
        integrate(&g, lo, eta, cfg)? + integrate(&g, eta, hi, cfg)?
    } else {
        integrate(&g, lo, hi, cfg)?
    };
    Ok(1.0 / (theta.powi(4) * integral))
}

/// `n` uniform points on `[min, max]` (just `min` when `n = 1`).
pub fn theta_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>, ExistenceError> {
    if !(min > 0.0 && min <= max && max < 0.5) {
        return Err(ExistenceError::ThetaGrid(format!("need 0 < theta_min <= theta_max < 1/2, got [{min}, {max}]")));
    }
    if n == 0 {
        return Err(ExistenceError::ThetaGrid("theta_steps must be >= 1".into()));
    }
    if n == 1 {
        return Ok(vec![min]);
    }
    let step = (max - min) / (n - 1) as f64;
    Ok((0..n).map(|i| if i + 1 == n { max } else { min + step * i as f64 }).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitValue {
    Finite(f64),
    Infinite,
    Undetermined,
}

impl LimitValue {
    fn from_hint(v: f64) -> LimitValue {
        if v.is_infinite() {
            LimitValue::Infinite
        } else {
            LimitValue::Finite(v)
        }
    }

    pub fn is_known(self) -> bool {
        !matches!(self, LimitValue::Undetermined)
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, LimitValue::Infinite)
    }

    pub fn is_zero(self) -> bool {
        self == LimitValue::Finite(0.0)
    }

    /// `Some(self < bound)` when known.
    pub fn less_than(self, bound: f64) -> Option<bool> {
        match self {
            LimitValue::Finite(v) => Some(v < bound),
            LimitValue::Infinite => Some(false),
            LimitValue::Undetermined => None,
        }
    }

    /// `Some(self > bound)` when known.
    pub fn greater_than(self, bound: f64) -> Option<bool> {
        match self {
            LimitValue::Finite(v) => Some(v > bound),
            LimitValue::Infinite => Some(true),
            LimitValue::Undetermined => None,
        }
    }

    /// JSON form: a number, `"inf"`, or `null`.
    pub fn to_json(self) -> Value {
        match self {
            LimitValue::Finite(v) => json!(round_sig(v)),
            LimitValue::Infinite => json!("inf"),
            LimitValue::Undetermined => Value::Null,
        }
    }
}

impl std::fmt::Display for LimitValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LimitValue::Finite(v) => f.write_str(&crate::fmt::fmt_sig(*v)),
            LimitValue::Infinite => f.write_str("inf"),
            LimitValue::Undetermined => f.write_str("undetermined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    UserAsserted,
    NumericallyEstimated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthValue {
    pub value: LimitValue,
    pub provenance: Provenance,
}

impl GrowthValue {
    fn asserted(&self) -> bool {
        self.provenance == Provenance::UserAsserted
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthEstimates {
    pub f0: GrowthValue,
    pub f_sup0: GrowthValue,
    pub f_inf: GrowthValue,
    pub f_supinf: GrowthValue,
}

impl GrowthEstimates {
    fn all(&self) -> [GrowthValue; 4] {
        [self.f0, self.f_sup0, self.f_inf, self.f_supinf]
    }

    /// `"user-asserted"`, `"numerically-estimated"` or `"mixed"`.
    pub fn source(&self) -> &'static str {
        let asserted = self.all().iter().filter(|g| g.asserted()).count();
        match asserted {
            0 => "numerically-estimated",
            4 => "user-asserted",
            _ => "mixed",
        }
    }

    pub fn any_estimated(&self) -> bool {
        self.all().iter().any(|g| !g.asserted())
    }
}

/// `(min_t, max_t)` of `f(t,x)/x` over the `t` grid.
fn ratio_range(f: &Expression, x: f64) -> Result<(f64, f64), ExistenceError> {
    let wx = Wide::from_f64(x);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..GROWTH_T_POINTS {
        let t = i as f64 / (GROWTH_T_POINTS - 1) as f64;
        let fv = f.evaluate_wide(t, x).map_err(|source| ExistenceError::Eval { t, x, source })?;
        let r = fv.checked_div(wx).map_err(|source| ExistenceError::Eval { t, x, source })?.to_f64();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

/// Classifies samples ordered toward the limit point.
pub fn classify_samples(samples: &[f64]) -> LimitValue {
    let n = samples.len();
    if n < 3 || samples.iter().any(|v| v.is_nan()) {
        return LimitValue::Undetermined;
    }
    let last = samples[n - 1];
    let tail = &samples[n - 3..];
    if tail.iter().all(|v| v.is_finite()) {
        let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        if hi - lo <= AGREEMENT * hi.abs().max(lo.abs()) {
            return LimitValue::Finite(last);
        }
    }
    let rising = samples.windows(2).all(|w| w[1] >= w[0]);
    let falling = samples.windows(2).all(|w| w[1] <= w[0]);
    if rising && last >= INFINITY_THRESHOLD * (1.0 - AGREEMENT) {
        return LimitValue::Infinite;
    }
    if falling && last.abs() <= ZERO_THRESHOLD * (1.0 + AGREEMENT) {
        return LimitValue::Finite(0.0);
    }
    LimitValue::Undetermined
}

/// `x` ladders: toward `0⁺` (`10^-2 … 10^-8`) and toward `∞` (`10^2 … 10^8`).
pub fn growth_ladders() -> ([f64; 7], [f64; 7]) {
    let mut zero = [0.0; 7];
    let mut inf = [0.0; 7];
    for k in 0..7 {
        zero[k] = 10f64.powi(-(k as i32) - 2);
        inf[k] = 10f64.powi(k as i32 + 2);
    }
    (zero, inf)
}

/// Estimates the four growth numbers, taking asserted hints verbatim.
pub fn estimate_growth(f: &Expression, hints: &LimitHints) -> Result<GrowthEstimates, ExistenceError> {
    let (zero, inf) = growth_ladders();
    let sample = |ladder: &[f64; 7]| -> Result<(Vec<f64>, Vec<f64>), ExistenceError> {
        let mut mins = Vec::with_capacity(7);
        let mut maxs = Vec::with_capacity(7);
        for &x in ladder {
            let (lo, hi) = ratio_range(f, x)?;
            mins.push(lo);
            maxs.push(hi);
        }
        Ok((mins, maxs))
    };
    let pick = |hint: Option<f64>, samples: &[f64]| match hint {
        Some(v) => GrowthValue { value: LimitValue::from_hint(v), provenance: Provenance::UserAsserted },
        None => GrowthValue { value: classify_samples(samples), provenance: Provenance::NumericallyEstimated },
    };
    let need_zero = hints.f0.is_none() || hints.f_sup0.is_none();
    let need_inf = hints.f_inf.is_none() || hints.f_supinf.is_none();
    let (zmin, zmax) = if need_zero { sample(&zero)? } else { (vec![], vec![]) };
    let (imin, imax) = if need_inf { sample(&inf)? } else { (vec![], vec![]) };
    Ok(GrowthEstimates {
        f0: pick(hints.f0, &zmin),
        f_sup0: pick(hints.f_sup0, &zmax),
        f_inf: pick(hints.f_inf, &imin),
        f_supinf: pick(hints.f_supinf, &imax),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    Satisfied,
    NotSatisfied,
    Inconclusive,
}

impl VerdictStatus {
    pub fn label(self) -> &'static str {
        match self {
            VerdictStatus::Satisfied => "satisfied",
            VerdictStatus::NotSatisfied => "not-satisfied",
            VerdictStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: VerdictStatus,
    /// Grid `θ` at which the hypotheses hold.
    pub witnesses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExistenceReport {
    pub lambda2: f64,
    pub lambda1_curve: Vec<(f64, f64)>,
    pub growth: GrowthEstimates,
    /// `f^∞ < Λ₂/2` and `f₀ > Λ₁(θ)`.
    pub superlinear_at_zero: Verdict,
    /// `f⁰ < Λ₂` and `f_∞ > Λ₁(θ)`.
    pub superlinear_at_infinity: Verdict,
    /// `(f₀ = ∞ and f^∞ = 0)` or `(f⁰ = 0 and f_∞ = ∞)`.
    pub limiting_case: Verdict,
}

/// Verdict for `small < bound` together with `large > Λ₁(θ)` at some `θ`.
fn pair_verdict(small: GrowthValue, bound: f64, large: GrowthValue, curve: &[(f64, f64)]) -> Verdict {
    let small_ok = small.value.less_than(bound);
    let mut witnesses = Vec::new();
    let mut all_known = small_ok.is_some();
    for &(theta, l1) in curve {
        match (small_ok, large.value.greater_than(l1)) {
            (Some(true), Some(true)) => witnesses.push(theta),
            (_, None) => all_known = false,
            _ => {}
        }
    }
    let status = if !witnesses.is_empty() {
        VerdictStatus::Satisfied
    } else if all_known && small.asserted() && large.asserted() {
        VerdictStatus::NotSatisfied
    } else {
        VerdictStatus::Inconclusive
    };
    Verdict { status, witnesses }
}

fn limiting_verdict(g: &GrowthEstimates) -> Verdict {
    let first = g.f0.value.is_infinite() && g.f_supinf.value.is_zero();
    let second = g.f_sup0.value.is_zero() && g.f_inf.value.is_infinite();
    let status = if first || second {
        VerdictStatus::Satisfied
    } else if g.all().iter().all(|v| v.asserted()) {
        VerdictStatus::NotSatisfied
    } else {
        VerdictStatus::Inconclusive
    };
    Verdict { status, witnesses: Vec::new() }
}

/// Λ₂, Λ₁ over the `θ` grid, growth numbers and the three verdicts.
pub fn check_existence(
    problem: &ProblemSpec,
    theta_min: f64,
    theta_max: f64,
    theta_steps: usize,
    cfg: &QuadratureConfig,
) -> Result<ExistenceReport, ExistenceError> {
    let thetas = theta_grid(theta_min, theta_max, theta_steps)?;
    let lambda2 = compute_lambda2(&problem.params, cfg)?;
    let mut curve = Vec::with_capacity(thetas.len());
    for &theta in &thetas {
        curve.push((theta, compute_lambda1(&problem.params, theta, cfg)?));
    }
    let growth = estimate_growth(&problem.f, &problem.limits)?;
    let superlinear_at_zero = pair_verdict(growth.f_supinf, lambda2 / 2.0, growth.f0, &curve);
    let superlinear_at_infinity = pair_verdict(growth.f_sup0, lambda2, growth.f_inf, &curve);
    let limiting_case = limiting_verdict(&growth);
    Ok(ExistenceReport {
        lambda2,
        lambda1_curve: curve,
        growth,
        superlinear_at_zero,
        superlinear_at_infinity,
        limiting_case,
    })
}

impl ExistenceReport {
    /// Union of the witnesses of both superlinear conditions, ascending.
    pub fn witness_thetas(&self) -> Vec<f64> {
        let mut all: Vec<f64> =
            self.superlinear_at_zero.witnesses.iter().chain(&self.superlinear_at_infinity.witnesses).cloned().collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        all
    }

    /// The report document; numbers carry 12 significant digits.
    pub fn to_json(&self) -> Value {
        let round_all = |v: &[f64]| v.iter().map(|&x| round_sig(x)).collect::<Vec<_>>();
        json!({
            "lambda2": round_sig(self.lambda2),
            "lambda1_curve": self.lambda1_curve.iter().map(|&(t, v)| json!([round_sig(t), round_sig(v)])).collect::<Vec<_>>(),
            "growth": {
                "f0": self.growth.f0.value.to_json(),
                "f_sup0": self.growth.f_sup0.value.to_json(),
                "f_inf": self.growth.f_inf.value.to_json(),
                "f_supinf": self.growth.f_supinf.value.to_json(),
                "source": self.growth.source(),
            },
            "verdicts": {
                "thm31": self.superlinear_at_zero.status.label(),
                "thm32": self.superlinear_at_infinity.status.label(),
                "cor31": self.limiting_case.status.label(),
                "witness_thetas": round_all(&self.witness_thetas()),
                "thm31_witnesses": round_all(&self.superlinear_at_zero.witnesses),
                "thm32_witnesses": round_all(&self.superlinear_at_infinity.witnesses),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default().with_tol(1e-13)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn lambda2_examples() {
        let p = KernelParams::new(1.5, 1.6, 0.5).unwrap();
        assert!(rel(compute_lambda2(&p, &cfg()).unwrap(), 1.875) < 1e-10);
        let p = KernelParams::new(2.0, 0.0, 0.5).unwrap();
        assert!(rel(compute_lambda2(&p, &cfg()).unwrap(), 6.0) < 1e-10);
        let p = KernelParams::new(1.5, 0.0, 0.5).unwrap();
        assert!(rel(compute_lambda2(&p, &cfg()).unwrap(), 3.75) < 1e-10);
    }

    #[test]
    fn lambda1_examples() {
        let p = KernelParams::new(1.5, 1.6, 0.5).unwrap();
        assert!(rel(compute_lambda1(&p, 0.4, &cfg()).unwrap(), 370.675258) < 1e-8);
        assert!(rel(compute_lambda1(&p, 0.38, &cfg()).unwrap(), 380.368327) < 1e-8);
        let p = KernelParams::new(2.0, 0.0, 0.5).unwrap();
        // θ⁴ ∫_{1/4}^{3/4} s(1-s) ds = 11/96 / 256
        assert!(rel(compute_lambda1(&p, 0.25, &cfg()).unwrap(), 256.0 * 96.0 / 11.0) < 1e-10);
        assert!(compute_lambda1(&p, 0.01, &cfg()).unwrap() > 1e6);
        assert!(compute_lambda1(&p, 0.5, &cfg()).is_err());
    }

    #[test]
    fn grid_construction() {
        assert_eq!(theta_grid(0.1, 0.4, 4).unwrap().len(), 4);
        assert_eq!(theta_grid(0.2, 0.2, 1).unwrap(), vec![0.2]);
        assert!(theta_grid(0.3, 0.2, 3).is_err());
        assert!(theta_grid(0.0, 0.2, 3).is_err());
        assert!(theta_grid(0.1, 0.2, 0).is_err());
        let g = theta_grid(0.38, 0.42, 51).unwrap();
        assert_eq!((g[0], g[50]), (0.38, 0.42));
    }

    #[test]
    fn classification() {
        assert_eq!(classify_samples(&[1.0, 1.0, 1.0]), LimitValue::Finite(1.0));
        assert_eq!(classify_samples(&[1e2, 1e4, 1e6, 1e8]), LimitValue::Infinite);
        assert_eq!(classify_samples(&[1e-2, 1e-5, 1e-8]), LimitValue::Finite(0.0));
        assert_eq!(classify_samples(&[1.0, 2.0, 1.0, 2.0]), LimitValue::Undetermined);
        assert_eq!(classify_samples(&[1e2, 1e3, 1e4]), LimitValue::Undetermined);
        assert_eq!(classify_samples(&[1.0, f64::INFINITY, f64::INFINITY]), LimitValue::Infinite);
    }

    #[test]
    fn growth_of_builtin_sources() {
        let none = LimitHints::default();
        let g = estimate_growth(&parse("t + exp(-x)").unwrap(), &none).unwrap();
        assert_eq!(g.f0.value, LimitValue::Infinite);
        assert_eq!(g.f_supinf.value, LimitValue::Finite(0.0));
        assert_eq!(g.source(), "numerically-estimated");

        let g = estimate_growth(&parse(crate::problem::BUILTIN_2_F).unwrap(), &none).unwrap();
        let LimitValue::Finite(f0) = g.f0.value else { panic!("{:?}", g.f0) };
        assert!((f0 - 400.0).abs() < 0.01, "{f0}");
        let LimitValue::Finite(fs) = g.f_supinf.value else { panic!("{:?}", g.f_supinf) };
        assert!((fs - 0.8).abs() < 1e-6, "{fs}");
        assert_eq!(g.f_sup0.value, LimitValue::Infinite);

        let g = estimate_growth(&parse("x").unwrap(), &LimitHints { f0: Some(2.0), ..none }).unwrap();
        assert_eq!(g.f0.value, LimitValue::Finite(2.0));
        assert_eq!(g.f_inf.value, LimitValue::Finite(1.0));
        assert_eq!(g.source(), "mixed");
    }

    #[test]
    fn verdicts() {
        let two = crate::problem::builtin(2).unwrap();
        let r = check_existence(&two, 0.38, 0.42, 5, &cfg()).unwrap();
        assert_eq!(r.superlinear_at_zero.status, VerdictStatus::Satisfied);
        assert_eq!(r.superlinear_at_zero.witnesses.len(), 5);

        let one = crate::problem::builtin(1).unwrap();
        let r = check_existence(&one, 0.05, 0.45, 41, &cfg()).unwrap();
        assert_eq!(r.limiting_case.status, VerdictStatus::Satisfied);

        let lin = ProblemSpec::from_parts(2.0, 0.0, 0.5, "x", LimitHints::default()).unwrap();
        let r = check_existence(&lin, 0.1, 0.4, 7, &cfg()).unwrap();
        for v in [&r.superlinear_at_zero, &r.superlinear_at_infinity, &r.limiting_case] {
            assert_eq!(v.status, VerdictStatus::Inconclusive);
        }

        // the same limits, asserted, are a definite miss
        let all = LimitHints { f0: Some(1.0), f_sup0: Some(1.0), f_inf: Some(1.0), f_supinf: Some(1.0) };
        let lin = ProblemSpec { limits: all, ..lin };
        let r = check_existence(&lin, 0.1, 0.4, 7, &cfg()).unwrap();
        for v in [&r.superlinear_at_zero, &r.superlinear_at_infinity, &r.limiting_case] {
            assert_eq!(v.status, VerdictStatus::NotSatisfied);
        }
        let doc = r.to_json();
        assert_eq!(doc["verdicts"]["thm31"], "not-satisfied");
        assert_eq!(doc["growth"]["source"], "user-asserted");
        assert_eq!(doc["lambda2"], 6.0);
    }
}
