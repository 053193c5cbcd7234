//! Fixed-significance number formatting shared by the CLI and reports.

/// Formats `v` with `digits` significant digits, in the manner of C's `%g`:
/// positional notation for decimal exponents in `[-4, digits)`, scientific
/// otherwise, trailing zeros dropped.
pub fn fmt_sig_digits(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        return format!("{}e{}", trim_zeros(mant), exp);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, v)).to_string()
}

/// [`fmt_sig_digits`] with 12 digits.
pub fn fmt_sig(v: f64) -> String {
    fmt_sig_digits(v, 12)
}

/// Rounds `v` to 12 significant digits (non-finite values pass through).
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    fmt_sig(v).parse().unwrap_or(v)
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
