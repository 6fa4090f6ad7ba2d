//! Floating-point comparison helpers used throughout the test suites.

/// Unit of least precision for f64 (2^-52).
pub const ULP: f64 = f64::EPSILON;

/// Number of representable f64 values strictly between `a` and `b`.
///
/// Both arguments must be finite. Returns `u64::MAX` when the signs differ
/// and neither value is zero.
pub fn ulps_between(a: f64, b: f64) -> u64 {
    assert!(a.is_finite() && b.is_finite());
    if a == b {
        return 0;
    }
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    if a < 0.0 && b > 0.0 {
        return u64::MAX;
    }
    if a >= 0.0 {
        b.to_bits() - a.to_bits()
    } else {
        a.abs().to_bits() - b.abs().to_bits()
    }
}

/// Relative difference |a - b| / max(|a|, |b|), zero when both are zero.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
