//! Exact construction and application of the Givens-rotation representation
//! of the connection matrices C^(m), which re-expand an order-(m+2) expansion
//! of normalized associated Legendre functions in order m.
//!
//! C^(m) ∈ R^{(n+3)×(n+1)} is the product of n+1 plane rotations acting on
//! rows (j, j+2) applied to the rectangular identity, with sines and cosines
//! known in closed form:
//!
//!   s_j^m = sqrt((j+1)(j+2) / ((j+2m+3)(j+2m+4)))
//!   c_j^m = sqrt((2m+2)(2j+2m+5) / ((j+2m+3)(j+2m+4)))
//!
//! Numerators and denominators are formed in 64-bit signed integer arithmetic
//! (they are exact up to 2^53), so each value commits at most two rounding
//! errors: one division and one square root. This makes every routine built
//! on these rotations 2-normwise backward stable.

use crate::error::{Error, Result};
use crate::mat::Mat;

/// One Givens rotation, acting on vector components two apart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationParams {
    pub s: f64,
    pub c: f64,
}

/// Largest integer exactly representable in an f64 significand.
const EXACT_LIMIT: i64 = 1 << 53;

/// Sine and cosine of rotation j in layer m, formed exactly in integers.
///
/// Errors with [`Error::ExactnessOverflow`] when the denominator
/// (j+2m+3)(j+2m+4) exceeds 2^53, past which the integer-to-float conversion
/// would no longer be lossless; callers must chunk or refuse.
pub fn rotation_params(j: usize, m: usize) -> Result<RotationParams> {
    let j_ = j as i64;
    let m_ = m as i64;
    let overflow = || Error::ExactnessOverflow { j, m };
    let d1 = j_.checked_add(2 * m_ + 3).ok_or_else(overflow)?;
    let den = d1.checked_mul(d1 + 1).ok_or_else(overflow)?;
    // Both numerators are bounded by the denominator (the ratios are in
    // [0, 1]), so one exactness check covers all three products.
    if den > EXACT_LIMIT {
        return Err(overflow());
    }
    let num_s = (j_ + 1) * (j_ + 2);
    let num_c = (2 * m_ + 2) * (2 * j_ + 2 * m_ + 5);
    Ok(RotationParams {
        s: ((num_s as f64) / (den as f64)).sqrt(),
        c: ((num_c as f64) / (den as f64)).sqrt(),
    })
}

/// The rotation sequence of one connection matrix C^(m), cached.
///
/// `params[j]` equals `rotation_params(j, m)` exactly; storage is purely an
/// optimization over regenerating rotations on the fly.
#[derive(Clone, Debug)]
pub struct LayerRotations {
    m: usize,
    params: Vec<RotationParams>,
}

impl LayerRotations {
    pub fn new(m: usize, count: usize) -> Result<Self> {
        let params = (0..count)
            .map(|j| rotation_params(j, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(LayerRotations { m, params })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[RotationParams] {
        &self.params
    }
}

/// Entry (l, q) of C^(m) from the closed form: banded-plus-semiseparable
/// upper part for l ≤ q with l+q even, the subdiagonal −s_q^m at l = q+2,
/// zero elsewhere.
///
/// Factorial ratios are accumulated as paired products so the relative error
/// stays at a small multiple of machine precision even for large arguments.
/// This is the dense test oracle for the rotation representation.
pub fn connection_entry(l: usize, q: usize, m: usize) -> f64 {
    if l == q + 2 {
        let den = ((q + 2 * m + 3) * (q + 2 * m + 4)) as f64;
        return -(((q + 1) * (q + 2)) as f64 / den).sqrt();
    }
    if l > q || (l + q) % 2 != 0 {
        return 0.0;
    }
    // (2l+2m+1)(2m+2) sqrt[ (l+2m)!/((l+m+1/2) l!) * (q+m+5/2) q!/(q+2m+4)! ]
    //
    // (l+2m)!/l! has 2m factors (l+1)…(l+2m); q!/(q+2m+4)! has 2m+4. Pair the
    // first 2m of them as (l+i)/(q+i) ≤ 1 and divide the four leftovers.
    let mut ratio = 1.0;
    for i in 1..=2 * m {
        ratio *= (l + i) as f64 / (q + i) as f64;
    }
    for i in 2 * m + 1..=2 * m + 4 {
        ratio /= (q + i) as f64;
    }
    let lm = l as f64 + m as f64;
    let qm = q as f64 + m as f64;
    let pre = (2.0 * lm + 1.0) * (2 * m + 2) as f64;
    pre * (ratio * (qm + 2.5) / (lm + 0.5)).sqrt()
}

/// Materializes C^(m) by applying the rotation sequence to the rectangular
/// identity; rotations nearest the identity are applied first.
pub fn dense_layer_matrix(n: usize, m: usize) -> Result<Mat> {
    let rot = LayerRotations::new(m, n + 1)?;
    let mut c = Mat::rect_identity(n + 3, n + 1);
    for col in 0..n + 1 {
        // row rotations act on each column independently
        let v = c.col_mut(col);
        for j in (0..n + 1).rev() {
            let RotationParams { s, c: cc } = rot.params[j];
            let a = v[j];
            let b = v[j + 2];
            v[j] = cc * a + s * b;
            v[j + 2] = -s * a + cc * b;
        }
    }
    Ok(c)
}

/// In-place C^(m)·v on a buffer: grows the buffer by two and applies the
/// rotation sequence, nearest the rectangular identity first.
pub(crate) fn apply_layer_into(params: &[RotationParams], v: &mut Vec<f64>) {
    let len = v.len();
    debug_assert!(params.len() >= len);
    v.push(0.0);
    v.push(0.0);
    for j in (0..len).rev() {
        let RotationParams { s, c } = params[j];
        let a = v[j];
        let b = v[j + 2];
        v[j] = c * a + s * b;
        v[j + 2] = -s * a + c * b;
    }
}

/// In-place C^(m)ᵀ·v: transposed rotations in reverse order, then the buffer
/// shrinks by two.
pub(crate) fn apply_layer_transpose_into(params: &[RotationParams], v: &mut Vec<f64>) {
    let len = v.len() - 2;
    debug_assert!(params.len() >= len);
    for j in 0..len {
        let RotationParams { s, c } = params[j];
        let a = v[j];
        let b = v[j + 2];
        v[j] = c * a - s * b;
        v[j + 2] = s * a + c * b;
    }
    v.truncate(len);
}

/// C^(m)·v for a vector of length n+1; returns length n+3.
pub fn apply_layer(m: usize, v: &[f64]) -> Result<Vec<f64>> {
    let rot = LayerRotations::new(m, v.len())?;
    let mut buf = v.to_vec();
    apply_layer_into(rot.params(), &mut buf);
    Ok(buf)
}

/// C^(m)ᵀ·v (least-squares lift) for a vector of length n+3; returns n+1.
pub fn apply_layer_transpose(m: usize, v: &[f64]) -> Result<Vec<f64>> {
    assert!(v.len() >= 2);
    let rot = LayerRotations::new(m, v.len() - 2)?;
    let mut buf = v.to_vec();
    apply_layer_transpose_into(rot.params(), &mut buf);
    Ok(buf)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainDirection {
    Down,
    Up,
}

/// Chain of connection layers between order `abs_m` and order `parity_target`
/// (= abs_m mod 2).
///
/// Down: applies C^(abs_m−2), …, C^(parity_target) so an order-abs_m
/// coefficient vector is re-expanded in order parity_target, growing by two
/// per layer. Up: the transposed chain (least-squares in the other
/// direction), shrinking by two per layer.
pub fn lower_order_chain(
    abs_m: usize,
    parity_target: usize,
    v: &[f64],
    direction: ChainDirection,
) -> Result<Vec<f64>> {
    assert!(abs_m >= 2, "chain needs abs_m >= 2");
    assert_eq!(parity_target, abs_m % 2, "parity target must match abs_m");
    let mut buf = v.to_vec();
    match direction {
        ChainDirection::Down => {
            let mut mu = abs_m - 2;
            loop {
                let rot = LayerRotations::new(mu, buf.len())?;
                apply_layer_into(rot.params(), &mut buf);
                if mu == parity_target {
                    break;
                }
                mu -= 2;
            }
        }
        ChainDirection::Up => {
            let mut mu = parity_target;
            while mu + 2 <= abs_m {
                let rot = LayerRotations::new(mu, buf.len() - 2)?;
                apply_layer_transpose_into(rot.params(), &mut buf);
                mu += 2;
            }
        }
    }
    Ok(buf)
}

/// Dense matrix of the full chain C^(p) C^(p+2) ⋯ C^(order−2) taking an
/// order-`order` coefficient vector of bandlimit `n` down to parity
/// p = order mod 2. Dimensions (n+1−p) × (n+1−order).
///
/// Built by right-multiplying the identity with one layer of column
/// rotations at a time, O(order·n²) total.
pub fn dense_chain_matrix(n: usize, order: usize) -> Result<Mat> {
    let p = order % 2;
    assert!(order <= n);
    let rows = n + 1 - p;
    let mut chain = ChainAccumulator::identity(n, p)?;
    let mut mu = p;
    while mu + 2 <= order {
        chain.absorb_next_layer()?;
        mu += 2;
    }
    debug_assert_eq!(chain.source_order(), order);
    Ok(chain.snapshot(rows))
}

/// Incrementally maintained dense product C^(p)⋯C^(µ−2) over a fixed buffer.
///
/// Absorbing layer µ appends the factor C^(µ) on the right: column rotations
/// in place followed by dropping the two rightmost columns, so the row count
/// never changes and no reallocation happens.
pub(crate) struct ChainAccumulator {
    n: usize,
    source_order: usize,
    rows: usize,
    ncols: usize,
    data: Vec<f64>, // column-major, fixed column stride = rows
}

impl ChainAccumulator {
    pub fn identity(n: usize, parity: usize) -> Result<Self> {
        let rows = n + 1 - parity;
        let mut data = vec![0.0; rows * rows];
        for i in 0..rows {
            data[i * rows + i] = 1.0;
        }
        Ok(ChainAccumulator {
            n,
            source_order: parity,
            rows,
            ncols: rows,
            data,
        })
    }

    pub fn source_order(&self) -> usize {
        self.source_order
    }

    /// Right-multiply by C^(source_order): the chain then consumes
    /// order-(source_order+2) vectors.
    pub fn absorb_next_layer(&mut self) -> Result<()> {
        let mu = self.source_order;
        assert!(mu + 2 <= self.n, "chain already at the bandlimit");
        let rot = LayerRotations::new(mu, self.ncols.saturating_sub(2))?;
        let rows = self.rows;
        // (M G_j) mixes columns j and j+2; G_0 acts first.
        for j in 0..self.ncols - 2 {
            let RotationParams { s, c } = rot.params[j];
            let (left, right) = self.data.split_at_mut((j + 2) * rows);
            let col_j = &mut left[j * rows..j * rows + rows];
            let col_j2 = &mut right[..rows];
            for (a, b) in col_j.iter_mut().zip(col_j2.iter_mut()) {
                let x = *a;
                let y = *b;
                *a = c * x - s * y;
                *b = s * x + c * y;
            }
        }
        self.ncols -= 2;
        self.source_order += 2;
        Ok(())
    }

    /// Dense copy of the current chain (first `rows` rows are all rows).
    pub fn snapshot(&self, rows: usize) -> Mat {
        debug_assert_eq!(rows, self.rows);
        let mut out = Mat::zeros(self.rows, self.ncols);
        for j in 0..self.ncols {
            out.col_mut(j)
                .copy_from_slice(&self.data[j * self.rows..j * self.rows + self.rows]);
        }
        out
    }
}
