//! Reconstruction probe over every factorized chain matrix of a thin plan:
//! 20 random vectors per matrix, relative error of the butterfly apply
//! against the dense multiply.

use harmonium::butterfly::butterfly_factor;
use harmonium::givens::dense_chain_matrix;
use harmonium::mat::{norm2, parity_split};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[test]
fn probe_every_factorized_order() {
    let n = 511usize;
    let stride = 64usize;
    let tol = f64::EPSILON;
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut worst: f64 = 0.0;
    let mut worst_order = 0;
    let mut orders: Vec<usize> = (1..).map(|t| t * stride).take_while(|&o| o <= n).collect();
    orders.extend((1..).map(|t| t * stride + 1).take_while(|&o| o <= n));
    for &order in &orders {
        let chain = dense_chain_matrix(n, order).unwrap();
        let (ee, oo) = parity_split(&chain);
        for half in [&ee, &oo] {
            let bf = butterfly_factor(half, tol);
            for _ in 0..20 {
                let v: Vec<f64> = (0..half.cols()).map(|_| rng.gen::<f64>() - 0.5).collect();
                let exact = half.matvec(&v);
                let fast = bf.apply(&v);
                let diff: Vec<f64> = exact.iter().zip(&fast).map(|(a, b)| a - b).collect();
                let rel = norm2(&diff) / norm2(&exact);
                if rel > worst {
                    worst = rel;
                    worst_order = order;
                }
            }
        }
    }
    println!("worst probe {worst:.3e} at order {worst_order} (100·tol = {:.3e})", 100.0 * tol);
    assert!(worst <= 100.0 * tol, "{worst:e} > {:e}", 100.0 * tol);
}
