//! Number formatting for human-readable and machine-readable output.

/// `x` to 12 significant digits, trailing zeros trimmed; scientific
/// notation outside `1e-5 <= |x| < 1e12`.
pub fn sig12(x: f64) -> String {
    const DIGITS: usize = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..DIGITS as i32).contains(&exp) {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Shortest representation that round-trips to the same `f64`, switching to
/// exponent notation for very small and very large magnitudes.
pub fn full(x: f64) -> String {
    if x == 0.0 {
        // Normalises -0.
        "0".into()
    } else {
        format!("{x:?}")
    }
}
