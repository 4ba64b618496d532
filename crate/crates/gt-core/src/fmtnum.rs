//! Numeric text output at nine significant digits, for reproducible
//! CSV/JSON diffs.

/// Format with nine significant digits: plain decimal in a comfortable
/// range, scientific notation outside it.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let a = x.abs();
    let mut exp = a.log10().floor() as i32;
    // guard against log10 landing on the wrong side of a power of ten
    if a >= 10f64.powi(exp + 1) {
        exp += 1;
    } else if a < 10f64.powi(exp) {
        exp -= 1;
    }
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}

/// Round to nine significant digits (for JSON number emission).
pub fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let exp = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(8 - exp);
    (x * scale).round() / scale
}
