//! Nonlinearities `f(t, x)` written as text.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?
//! primary := number | "t" | "x" | func "(" expr ")" | "(" expr ")"
//! func    := "exp" | "log" | "sqrt" | "sin" | "cos" | "abs"
//! number  := digits ["." digits] [("e" | "E") ["+" | "-"] digits]
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus on its left,
//! so `-x^2` is `-(x^2)` and `2^3^2` is `2^(3^2)`. There is no implicit
//! multiplication.

mod parser;
mod wide;

use std::fmt;

use thiserror::Error;

pub use parser::parse;
pub use wide::Wide;

/// The two variables an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Abs,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Exp, Func::Log, Func::Sqrt, Func::Sin, Func::Cos, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Parsed expression tree. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Literal(f64),
    Var(Var),
    Neg(Box<Expression>),
    Binary(BinOp, Box<Expression>, Box<Expression>),
    Call(Func, Box<Expression>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset} (variables are `t` and `x`; functions are exp, log, sqrt, sin, cos, abs)")]
    UnknownIdentifier { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overflow: {0} produced a non-finite value")]
    Overflow(String),
}

impl Expression {
    pub fn literal(v: f64) -> Self {
        Expression::Literal(v)
    }

    pub fn var(v: Var) -> Self {
        Expression::Var(v)
    }

    pub fn negate(e: Expression) -> Self {
        Expression::Neg(Box::new(e))
    }

    pub fn binary(op: BinOp, lhs: Expression, rhs: Expression) -> Self {
        Expression::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(func: Func, arg: Expression) -> Self {
        Expression::Call(func, Box::new(arg))
    }

    /// Evaluates the expression at `(t, x)`.
    ///
    /// Any operation leaving its domain (division by zero, `log` of a
    /// non-positive number, `sqrt` of a negative number, a negative base
    /// raised to a non-integer power) is a [`EvalError::Domain`]; any
    /// intermediate that leaves the `f64` range is an [`EvalError::Overflow`].
    pub fn evaluate(&self, t: f64, x: f64) -> Result<f64, EvalError> {
        match self {
            Expression::Literal(v) => Ok(*v),
            Expression::Var(Var::T) => Ok(t),
            Expression::Var(Var::X) => Ok(x),
            Expression::Neg(e) => Ok(-e.evaluate(t, x)?),
            Expression::Binary(op, l, r) => {
                let a = l.evaluate(t, x)?;
                let b = r.evaluate(t, x)?;
                let v = match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::Domain(format!("division of {a} by zero")));
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        check_pow_domain(a, b)?;
                        a.powf(b)
                    }
                };
                finite(v, op_name(*op))
            }
            Expression::Call(func, arg) => {
                let a = arg.evaluate(t, x)?;
                let v = match func {
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(EvalError::Domain(format!("log({a})")));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::Domain(format!("sqrt({a})")));
                        }
                        a.sqrt()
                    }
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Abs => a.abs(),
                };
                finite(v, func.name())
            }
        }
    }

    /// Evaluates with an extended exponent range.
    ///
    /// Values such as `exp(2x)` at `x = 1e8` stay representable, so ratios
    /// like `x*exp(2x)/(exp(2x)+exp(x))` resolve to their true magnitude
    /// instead of `inf/inf`.
    pub fn evaluate_wide(&self, t: f64, x: f64) -> Result<Wide, EvalError> {
        match self {
            Expression::Literal(v) => Ok(Wide::from_f64(*v)),
            Expression::Var(Var::T) => Ok(Wide::from_f64(t)),
            Expression::Var(Var::X) => Ok(Wide::from_f64(x)),
            Expression::Neg(e) => Ok(-e.evaluate_wide(t, x)?),
            Expression::Binary(op, l, r) => {
                let a = l.evaluate_wide(t, x)?;
                let b = r.evaluate_wide(t, x)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => a.checked_div(b),
                    BinOp::Pow => a.pow(b),
                }
            }
            Expression::Call(func, arg) => {
                let a = arg.evaluate_wide(t, x)?;
                match func {
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Sqrt => a.sqrt(),
                    Func::Sin => Ok(Wide::from_f64(a.to_finite_f64("sin")?.sin())),
                    Func::Cos => Ok(Wide::from_f64(a.to_finite_f64("cos")?.cos())),
                    Func::Abs => Ok(a.abs()),
                }
            }
        }
    }

    /// Whether the variable occurs anywhere in the tree.
    pub fn mentions(&self, v: Var) -> bool {
        match self {
            Expression::Literal(_) => false,
            Expression::Var(w) => *w == v,
            Expression::Neg(e) | Expression::Call(_, e) => e.mentions(v),
            Expression::Binary(_, l, r) => l.mentions(v) || r.mentions(v),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expression::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expression::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expression::Neg(_) => 3,
            Expression::Binary(BinOp::Pow, ..) => 4,
            Expression::Literal(_) | Expression::Var(_) | Expression::Call(..) => 5,
        }
    }
}

pub(crate) fn check_pow_domain(base: f64, exponent: f64) -> Result<(), EvalError> {
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(EvalError::Domain(format!("{base}^{exponent}")));
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::Domain(format!("0^{exponent}")));
    }
    Ok(())
}

fn op_name(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
        BinOp::Pow => "^",
    }
}

fn finite(v: f64, what: &str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Overflow(what.to_string()))
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(e: &Expression, parens: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expression::Literal(v) => write!(f, "{v}"),
            Expression::Var(Var::T) => f.write_str("t"),
            Expression::Var(Var::X) => f.write_str("x"),
            Expression::Neg(e) => {
                f.write_str("-")?;
                wrap(e, e.precedence() < 3, f)
            }
            Expression::Call(func, arg) => write!(f, "{}({arg})", func.name()),
            Expression::Binary(BinOp::Pow, l, r) => {
                wrap(l, l.precedence() <= 4, f)?;
                f.write_str("^")?;
                wrap(r, r.precedence() < 3, f)
            }
            Expression::Binary(op, l, r) => {
                let p = self.precedence();
                wrap(l, l.precedence() < p, f)?;
                write!(f, " {} ", op_name(*op))?;
                wrap(r, r.precedence() <= p, f)
            }
        }
    }
}

impl std::str::FromStr for Expression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
