//! Machine-precision evaluation of Λ(z) = Γ(z + 1/2) / Γ(z + 1), the building
//! block of every Legendre ↔ Chebyshev-type connection kernel.

/// Above this argument the seven-term asymptotic series is accurate to
/// machine precision.
pub const ASYMPTOTIC_THRESHOLD: f64 = 9.84475;

/// Coefficients of the even asymptotic series in 1/(z + 1/4). All numerators
/// and denominators are exactly representable, so each coefficient is the
/// correctly rounded rational.
pub const ASYMPTOTIC_COEFFS: [f64; 7] = [
    1.0,
    -1.0 / 64.0,
    21.0 / 8192.0,
    -671.0 / 524288.0,
    180323.0 / 134217728.0,
    -20898423.0 / 8589934592.0,
    7426362705.0 / 1099511627776.0,
];

/// Λ(z) for z ≥ 0.
///
/// For z above the threshold the asymptotic series is evaluated directly.
/// Below it, the argument is lifted past the threshold in unit steps and the
/// result is brought back down with the exact recursion
/// Λ(z) = Λ(z+1) · (z+1)/(z+1/2).
///
/// Panics for negative z (poles of Γ are not handled).
pub fn lambda(z: f64) -> f64 {
    assert!(z >= 0.0, "lambda: negative argument {z}");
    if z > ASYMPTOTIC_THRESHOLD {
        return lambda_asymptotic(z);
    }
    let mut lift = 0u32;
    while z + f64::from(lift) <= ASYMPTOTIC_THRESHOLD {
        lift += 1;
    }
    let mut val = lambda_asymptotic(z + f64::from(lift));
    for i in (0..lift).rev() {
        let zi = z + f64::from(i);
        val *= (zi + 1.0) / (zi + 0.5);
    }
    val
}

fn lambda_asymptotic(z: f64) -> f64 {
    let w = z + 0.25;
    let iw2 = 1.0 / (w * w);
    let mut s = ASYMPTOTIC_COEFFS[6];
    for c in ASYMPTOTIC_COEFFS[..6].iter().rev() {
        s = s * iw2 + c;
    }
    s / w.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::ulps_between;

    #[test]
    fn small_integer_values() {
        // Λ(0) = Γ(1/2)/Γ(1) = √π, Λ(1) = √π/2.
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!(ulps_between(lambda(0.0), sqrt_pi) <= 4);
        assert!(ulps_between(lambda(1.0), sqrt_pi / 2.0) <= 4);
    }

    #[test]
    fn value_above_threshold_matches_frozen_oracle() {
        // Γ(10.5)/Γ(11) rounded from a 50-digit computation.
        let oracle = f64::from_bits(0x3fd3fcbdef494261);
        assert_eq!(format!("{oracle:.16}"), "0.3123011433390613");
        assert!(ulps_between(lambda(10.0), oracle) <= 4);
    }

    #[test]
    fn recursion_consistency() {
        // Λ(z+1)·(z+1) = Λ(z)·(z+1/2) within 4 ulp.
        let mut z = 0.0;
        while z <= 50.0 {
            let lhs = lambda(z + 1.0) * (z + 1.0);
            let rhs = lambda(z) * (z + 0.5);
            assert!(
                ulps_between(lhs, rhs) <= 4,
                "recursion mismatch at z={z}: {lhs} vs {rhs}"
            );
            z += 0.5;
        }
    }

    #[test]
    fn no_jump_at_threshold() {
        // Walk a few representable values across the branch switch.
        let mut z = ASYMPTOTIC_THRESHOLD;
        for _ in 0..8 {
            z = f64::from_bits(z.to_bits() - 1);
        }
        let mut prev = lambda(z);
        for _ in 0..16 {
            z = f64::from_bits(z.to_bits() + 1);
            let cur = lambda(z);
            assert!(
                ulps_between(cur, prev) <= 4,
                "jump at z={z}: {prev} -> {cur}"
            );
            prev = cur;
        }
    }

    #[test]
    #[should_panic(expected = "negative argument")]
    fn rejects_negative() {
        lambda(-0.5);
    }
}
