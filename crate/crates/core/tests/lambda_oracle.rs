//! Λ(z) against a frozen 50-digit oracle table.
//!
//! The fixture holds (z, Λ(z)) pairs as f64 bit patterns: 10,000 points
//! z = i/10 over [0, 999.9], each Λ value computed at 50 decimal digits and
//! rounded to nearest.

use harmonium::fp::ulps_between;
use harmonium::lambda::{lambda, ASYMPTOTIC_THRESHOLD};

fn oracle_table() -> Vec<(f64, f64)> {
    let text = include_str!("data/lambda_oracle.txt");
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let mut parts = line.split_whitespace();
            let z = f64::from_bits(u64::from_str_radix(parts.next().unwrap(), 16).unwrap());
            let v = f64::from_bits(u64::from_str_radix(parts.next().unwrap(), 16).unwrap());
            (z, v)
        })
        .collect()
}

#[test]
fn matches_oracle_within_8_ulp_on_10000_points() {
    let table = oracle_table();
    assert_eq!(table.len(), 10_000);
    let mut worst = 0u64;
    let mut worst_z = 0.0;
    for &(z, expect) in &table {
        let got = lambda(z);
        let d = ulps_between(got, expect);
        if d > worst {
            worst = d;
            worst_z = z;
        }
    }
    assert!(worst <= 8, "worst {worst} ulp at z = {worst_z}");
}

#[test]
fn monotone_decreasing_on_oracle_grid() {
    let table = oracle_table();
    let mut prev = f64::INFINITY;
    for &(z, _) in &table {
        let v = lambda(z);
        assert!(v < prev, "not decreasing at z = {z}");
        prev = v;
    }
}

#[test]
fn branch_switch_is_seamless() {
    // max jump between adjacent representable arguments around the threshold
    let mut z = ASYMPTOTIC_THRESHOLD;
    for _ in 0..64 {
        z = f64::from_bits(z.to_bits() - 1);
    }
    let mut prev = lambda(z);
    for _ in 0..128 {
        z = f64::from_bits(z.to_bits() + 1);
        let cur = lambda(z);
        assert!(
            ulps_between(cur, prev) <= 4,
            "jump of {} ulp at z = {z}",
            ulps_between(cur, prev)
        );
        prev = cur;
    }
}
