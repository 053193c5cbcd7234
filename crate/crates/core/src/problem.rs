//! The boundary value problem `D^α x + f(t,x) = 0`, `x(0) = 0`,
//! `x(1) = λ∫₀^η x`, and its JSON problem-file form.
//!
//! ```json
//! {"alpha": 1.5, "lambda": 2, "eta": 0.3333333333333333, "f": "t + exp(-x)",
//!  "limits": {"f0": "inf", "f_supinf": 0}}
//! ```

use serde_json::{Map, Value};
use thiserror::Error;

use crate::expr::{parse, EvalError, Expression, ParseError};
use crate::kernel::{KernelError, KernelParams};

/// Points where `f >= 0` is spot-checked.
pub const VALIDATION_T: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
pub const VALIDATION_X: [f64; 5] = [0.0, 0.5, 1.0, 10.0, 100.0];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("field `f`: {0}")]
    Parse(#[from] ParseError),
    #[error("f must be nonnegative, but f({t}, {x}) = {value}")]
    Negative { t: f64, x: f64, value: f64 },
    #[error("f cannot be evaluated at t = {t}, x = {x}: {source}")]
    Eval { t: f64, x: f64, source: EvalError },
}

fn field_error(field: &str, message: impl Into<String>) -> ProblemError {
    ProblemError::Field { field: field.to_string(), message: message.into() }
}

/// User-asserted limits; `None` means not asserted, `f64::INFINITY` is `+∞`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LimitHints {
    /// `lim_{x→0⁺} min_t f/x`
    pub f0: Option<f64>,
    /// `lim_{x→0⁺} max_t f/x`
    pub f_sup0: Option<f64>,
    /// `lim_{x→∞} min_t f/x`
    pub f_inf: Option<f64>,
    /// `lim_{x→∞} max_t f/x`
    pub f_supinf: Option<f64>,
}

impl LimitHints {
    pub const KEYS: [&'static str; 4] = ["f0", "f_sup0", "f_inf", "f_supinf"];

    pub fn is_empty(&self) -> bool {
        self.values().iter().all(Option::is_none)
    }

    pub fn values(&self) -> [Option<f64>; 4] {
        [self.f0, self.f_sup0, self.f_inf, self.f_supinf]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub params: KernelParams,
    pub f: Expression,
    pub limits: LimitHints,
}

impl ProblemSpec {
    /// Validates `f >= 0` on the spot-check grid.
    pub fn new(params: KernelParams, f: Expression, limits: LimitHints) -> Result<Self, ProblemError> {
        for &t in &VALIDATION_T {
            for &x in &VALIDATION_X {
                // wide evaluation so that fast-growing f does not fail spuriously
                let v = f.evaluate_wide(t, x).map_err(|source| ProblemError::Eval { t, x, source })?;
                if v.is_sign_negative() {
                    return Err(ProblemError::Negative { t, x, value: v.to_f64() });
                }
            }
        }
        Ok(ProblemSpec { params, f, limits })
    }

    pub fn from_parts(alpha: f64, lambda: f64, eta: f64, f: &str, limits: LimitHints) -> Result<Self, ProblemError> {
        let params = KernelParams::new(alpha, lambda, eta)?;
        ProblemSpec::new(params, parse(f)?, limits)
    }

    /// Parses a JSON problem file.
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        let doc: Value = serde_json::from_str(text).map_err(|e| ProblemError::Json(e.to_string()))?;
        let obj = doc.as_object().ok_or_else(|| ProblemError::Json("top level must be an object".into()))?;
        for key in obj.keys() {
            if !["alpha", "lambda", "eta", "f", "limits"].contains(&key.as_str()) {
                return Err(field_error(key, "unknown field"));
            }
        }
        let alpha = number_field(obj, "alpha")?;
        let lambda = number_field(obj, "lambda")?;
        let eta = number_field(obj, "eta")?;
        let f = match obj.get("f") {
            None => return Err(field_error("f", "missing")),
            Some(Value::String(s)) => s.as_str(),
            Some(_) => return Err(field_error("f", "must be a string expression in t and x")),
        };
        let limits = match obj.get("limits") {
            None | Some(Value::Null) => LimitHints::default(),
            Some(Value::Object(m)) => parse_limits(m)?,
            Some(_) => return Err(field_error("limits", "must be an object")),
        };
        let params = KernelParams::new(alpha, lambda, eta)?;
        ProblemSpec::new(params, parse(f)?, limits)
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("alpha".into(), self.params.alpha().into());
        obj.insert("lambda".into(), self.params.lambda().into());
        obj.insert("eta".into(), self.params.eta().into());
        obj.insert("f".into(), self.f.to_string().into());
        if !self.limits.is_empty() {
            let mut lim = Map::new();
            for (key, v) in LimitHints::KEYS.iter().zip(self.limits.values()) {
                if let Some(v) = v {
                    lim.insert((*key).into(), limit_to_json(v));
                }
            }
            obj.insert("limits".into(), Value::Object(lim));
        }
        Value::Object(obj)
    }
}

/// A finite number, or the string `"inf"` for `+∞`.
pub fn limit_to_json(v: f64) -> Value {
    if v.is_infinite() {
        Value::String("inf".into())
    } else {
        v.into()
    }
}

fn number_field(obj: &Map<String, Value>, key: &str) -> Result<f64, ProblemError> {
    match obj.get(key) {
        None => Err(field_error(key, "missing")),
        Some(v) => v.as_f64().ok_or_else(|| field_error(key, "must be a number")),
    }
}

fn parse_limits(m: &Map<String, Value>) -> Result<LimitHints, ProblemError> {
    let mut out = [None; 4];
    for (key, v) in m {
        let Some(idx) = LimitHints::KEYS.iter().position(|k| k == key) else {
            return Err(field_error(
                &format!("limits.{key}"),
                "unknown limit (expected f0, f_sup0, f_inf or f_supinf)",
            ));
        };
        let name = format!("limits.{key}");
        let value = match v {
            Value::Null => None,
            Value::String(s) if s == "inf" => Some(f64::INFINITY),
            Value::Number(n) => {
                let x = n.as_f64().ok_or_else(|| field_error(&name, "must be a number or \"inf\""))?;
                if !(x >= 0.0) {
                    return Err(field_error(&name, format!("must be >= 0, got {x}")));
                }
                Some(x)
            }
            _ => return Err(field_error(&name, "must be a number or \"inf\"")),
        };
        out[idx] = value;
    }
    Ok(LimitHints { f0: out[0], f_sup0: out[1], f_inf: out[2], f_supinf: out[3] })
}

/// `f` for built-in problem 2, `t + (4/5)·x e^{2x} / (e^{2x} + e^x − 999/500)`.
pub const BUILTIN_2_F: &str = "t + (4/5)*x*exp(2*x)/(exp(2*x)+exp(x)-999/500)";

/// The two built-in demonstration problems.
///
/// 1. `α = 3/2`, `λ = 2`, `η = 1/3`, `f = t + e^{-x}`.
/// 2. `α = 3/2`, `λ = 8/5`, `η = 1/2`, `f =` [`BUILTIN_2_F`], with the
///    asserted limits `f₀ = 400`, `f^∞ = 4/5`.
pub fn builtin(which: u8) -> Option<ProblemSpec> {
    let spec = match which {
        1 => ProblemSpec::from_parts(1.5, 2.0, 1.0 / 3.0, "t + exp(-x)", LimitHints::default()),
        2 => ProblemSpec::from_parts(
            1.5,
            1.6,
            0.5,
            BUILTIN_2_F,
            LimitHints { f0: Some(400.0), f_supinf: Some(0.8), ..LimitHints::default() },
        ),
        _ => return None,
    };
    Some(spec.expect("built-in problems are valid"))
}
