use harmonium::coeffs::{CoeffKind, CoeffMatrix, ColumnOrder};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Standard-normal coefficients over the staircase, columns normalized in ℓ².
pub fn random_normalized_coeffs(n: usize, seed: u64) -> CoeffMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = CoeffMatrix::zeros(n, CoeffKind::SphericalHarmonic);
    for j in 0..2 * n + 1 {
        let len = n + 1 - ColumnOrder::from_column(j).abs_m;
        for i in 0..len {
            f.set(i, j, rng.sample(StandardNormal));
        }
    }
    f.normalize_columns()
}

/// Maximum over columns of the ℓ² norm of (a − b).
pub fn max_column_error(a: &CoeffMatrix, b: &CoeffMatrix) -> f64 {
    assert_eq!(a.n(), b.n());
    let mut worst = 0.0f64;
    for j in 0..a.cols() {
        let err: f64 = a
            .column(j)
            .iter()
            .zip(b.column(j))
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(err);
    }
    worst
}
