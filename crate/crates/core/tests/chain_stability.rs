//! Backward-stability of the rotation chains: the up∘down round trip on
//! random unit columns grows like c·sqrt(n)·ulp with a small constant.

use harmonium::fp::ULP;
use harmonium::givens::{lower_order_chain, ChainDirection};
use harmonium::mat::norm2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[test]
fn updown_roundtrip_error_fits_sqrt_n_growth() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst_c = 0.0f64;
    for &n in &[63usize, 127, 255, 511] {
        for &abs_m in &[2usize, 8, 30] {
            let len = n + 1 - abs_m;
            let parity = abs_m % 2;
            for _ in 0..3 {
                let mut v: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() - 0.5).collect();
                let nv = norm2(&v);
                v.iter_mut().for_each(|x| *x /= nv);
                let down = lower_order_chain(abs_m, parity, &v, ChainDirection::Down).unwrap();
                let up = lower_order_chain(abs_m, parity, &down, ChainDirection::Up).unwrap();
                let err = norm2(
                    &v.iter().zip(&up).map(|(a, b)| a - b).collect::<Vec<_>>(),
                );
                let c = err / ((n as f64).sqrt() * ULP);
                worst_c = worst_c.max(c);
            }
        }
    }
    assert!(
        worst_c <= 100.0,
        "fitted growth constant {worst_c:.1} exceeds 100"
    );
}
