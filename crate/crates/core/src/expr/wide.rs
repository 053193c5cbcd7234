//! Extended-exponent floating point: an `f64` mantissa in `[0.5, 1)` paired
//! with an `i64` binary exponent. Only what expression evaluation needs.

use std::f64::consts::LN_2;
use std::ops::{Add, Mul, Neg, Sub};

use super::{check_pow_domain, EvalError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wide {
    mant: f64,
    exp: i64,
}

/// Exponents past this are treated as a genuine overflow (the value no
/// longer fits even the widened range in a meaningful way).
const MAX_EXP: i64 = 1 << 52;

/// Splits a finite `f64` into mantissa in `[0.5, 1)` and exponent.
fn frexp(v: f64) -> (f64, i64) {
    if v == 0.0 || !v.is_finite() {
        return (v, 0);
    }
    let bits = v.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    if raw_exp == 0 {
        // subnormal: scale into the normal range first
        let (m, e) = frexp(v * 2f64.powi(64));
        return (m, e - 64);
    }
    let mant_bits = (bits & !(0x7ffu64 << 52)) | (1022u64 << 52);
    (f64::from_bits(mant_bits), raw_exp - 1022)
}

/// `m * 2^e` for an `e` that may exceed the `powi` range.
fn ldexp(m: f64, e: i64) -> f64 {
    if m == 0.0 {
        return m;
    }
    if e > 2100 {
        return m * f64::INFINITY;
    }
    if e < -2200 {
        return m * 0.0;
    }
    let mut v = m;
    let mut e = e as i32;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e)
}

impl Wide {
    pub const ZERO: Wide = Wide { mant: 0.0, exp: 0 };

    pub fn from_f64(v: f64) -> Wide {
        let (mant, exp) = frexp(v);
        Wide { mant, exp }
    }

    fn normalized(mant: f64, exp: i64) -> Wide {
        if mant == 0.0 {
            return Wide::ZERO;
        }
        let (m, e) = frexp(mant);
        Wide { mant: m, exp: exp + e }
    }

    /// Nearest `f64`; saturates to `±inf` or `±0` outside the `f64` range.
    pub fn to_f64(self) -> f64 {
        ldexp(self.mant, self.exp)
    }

    pub(crate) fn to_finite_f64(self, what: &str) -> Result<f64, EvalError> {
        let v = self.to_f64();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Overflow(what.to_string()))
        }
    }

    pub fn is_zero(self) -> bool {
        self.mant == 0.0
    }

    pub fn is_sign_negative(self) -> bool {
        self.mant < 0.0
    }

    pub fn abs(self) -> Wide {
        Wide { mant: self.mant.abs(), exp: self.exp }
    }

    /// Natural logarithm as a plain `f64` (always representable).
    fn ln_f64(self) -> f64 {
        self.mant.ln() + self.exp as f64 * LN_2
    }

    fn check(self, what: &str) -> Result<Wide, EvalError> {
        if self.mant.is_finite() && self.exp.abs() <= MAX_EXP {
            Ok(self)
        } else {
            Err(EvalError::Overflow(what.to_string()))
        }
    }

    pub fn checked_div(self, rhs: Wide) -> Result<Wide, EvalError> {
        if rhs.is_zero() {
            return Err(EvalError::Domain(format!("division of {} by zero", self.to_f64())));
        }
        Wide::normalized(self.mant / rhs.mant, self.exp - rhs.exp).check("/")
    }

    /// `e^y` for a `y` given as a plain `f64`.
    fn exp_of(y: f64) -> Result<Wide, EvalError> {
        if !y.is_finite() {
            return if y < 0.0 { Ok(Wide::ZERO) } else { Err(EvalError::Overflow("exp".into())) };
        }
        if y.abs() < 700.0 {
            return Ok(Wide::from_f64(y.exp()));
        }
        let k = (y / LN_2).floor();
        if k.abs() > MAX_EXP as f64 {
            return if y < 0.0 { Ok(Wide::ZERO) } else { Err(EvalError::Overflow("exp".into())) };
        }
        let r = y - k * LN_2;
        Ok(Wide::normalized(r.exp(), k as i64))
    }

    pub fn exp(self) -> Result<Wide, EvalError> {
        let y = self.to_f64();
        Wide::exp_of(y)
    }

    pub fn ln(self) -> Result<Wide, EvalError> {
        if self.mant <= 0.0 {
            return Err(EvalError::Domain(format!("log({})", self.to_f64())));
        }
        Ok(Wide::from_f64(self.ln_f64()))
    }

    pub fn sqrt(self) -> Result<Wide, EvalError> {
        if self.mant < 0.0 {
            return Err(EvalError::Domain(format!("sqrt({})", self.to_f64())));
        }
        if self.is_zero() {
            return Ok(Wide::ZERO);
        }
        if self.exp % 2 == 0 {
            Ok(Wide::normalized(self.mant.sqrt(), self.exp / 2))
        } else {
            Ok(Wide::normalized((2.0 * self.mant).sqrt(), (self.exp - 1) / 2))
        }
    }

    pub fn pow(self, exponent: Wide) -> Result<Wide, EvalError> {
        let b = exponent.to_f64();
        // sign and zero-ness are all the domain check needs
        check_pow_domain(if self.is_zero() { 0.0 } else { self.mant }, b)?;
        if self.is_zero() {
            return Ok(if b == 0.0 { Wide::from_f64(1.0) } else { Wide::ZERO });
        }
        if !b.is_finite() {
            return Err(EvalError::Overflow("^".into()));
        }
        let magnitude = Wide::exp_of(b * self.abs().ln_f64())?;
        // negative base only reaches here with an integer exponent
        let odd = self.is_sign_negative() && (b % 2.0).abs() == 1.0;
        Ok(if odd { -magnitude } else { magnitude })
    }
}

impl Neg for Wide {
    type Output = Wide;

    fn neg(self) -> Wide {
        Wide { mant: -self.mant, exp: self.exp }
    }
}

impl Add for Wide {
    type Output = Wide;

    fn add(self, rhs: Wide) -> Wide {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exp >= rhs.exp { (self, rhs) } else { (rhs, self) };
        let shift = hi.exp - lo.exp;
        if shift > 60 {
            return hi;
        }
        Wide::normalized(hi.mant + ldexp(lo.mant, -shift), hi.exp)
    }
}

impl Sub for Wide {
    type Output = Wide;

    fn sub(self, rhs: Wide) -> Wide {
        self + (-rhs)
    }
}

impl Mul for Wide {
    type Output = Wide;

    fn mul(self, rhs: Wide) -> Wide {
        Wide::normalized(self.mant * rhs.mant, self.exp + rhs.exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_f64() {
        for v in [0.0, 1.0, -3.5, 1e-310, 1e300, -2.5e-5, f64::MAX] {
            assert_eq!(Wide::from_f64(v).to_f64(), v);
        }
    }

    #[test]
    fn arithmetic_beyond_f64_range() {
        let big = Wide::from_f64(1000.0).exp().unwrap();
        assert!(big.to_f64().is_infinite());
        let ratio = big.checked_div(big + Wide::from_f64(1.0)).unwrap();
        assert_eq!(ratio.to_f64(), 1.0);
        let lg = big.ln().unwrap().to_f64();
        assert!((lg - 1000.0).abs() < 1e-10);
        let root = (big * big).sqrt().unwrap().ln().unwrap().to_f64();
        assert!((root - 1000.0).abs() < 1e-10);
    }

    #[test]
    fn pow_matches_powf() {
        for &(a, b) in &[(2.0, 10.0), (-2.0, 3.0), (-2.0, 2.0), (0.5, -3.0), (9.0, 0.5)] {
            let w = Wide::from_f64(a).pow(Wide::from_f64(b)).unwrap().to_f64();
            let r: f64 = f64::powf(a, b);
            assert!((w - r).abs() <= 1e-14 * r.abs(), "{a}^{b}: {w} vs {r}");
        }
        assert!(Wide::from_f64(-2.0).pow(Wide::from_f64(0.5)).is_err());
        assert!(Wide::ZERO.pow(Wide::from_f64(-1.0)).is_err());
    }
}
