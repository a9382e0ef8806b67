//! Minimal CSV writing: RFC 4180 quoting and `\n` record ends.

use std::borrow::Cow;
use std::fmt::Write as _;

/// Quotes `s` when it holds a comma, quote or line break.
pub fn field(s: &str) -> Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        Cow::Owned(format!("\"{}\"", s.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(s)
    }
}

/// Appends one record to `out`.
pub fn push_record<S: AsRef<str>>(out: &mut String, fields: &[S]) {
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&field(f.as_ref()));
    }
    out.push('\n');
}

/// Fixed-point decimal with 10 significant digits.
pub fn sig10(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0.000000000".into();
    }
    let exp = v.abs().log10().floor() as i32;
    let fixed = |decimals: i32| {
        let mut s = String::new();
        if decimals >= 0 {
            let _ = write!(s, "{:.*}", decimals as usize, v);
        } else {
            let scale = 10f64.powi(-decimals);
            let _ = write!(s, "{:.0}", (v / scale).round() * scale);
        }
        s
    };
    let s = fixed(9 - exp);
    // Rounding up to the next power of ten adds a digit.
    if s.parse::<f64>().is_ok_and(|r| r.abs() >= 10f64.powi(exp + 1)) {
        return fixed(8 - exp);
    }
    s
}
