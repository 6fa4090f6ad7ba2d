//! Coefficient array layout, column/order bookkeeping, and parity shuffling.
//!
//! A bandlimit-n expansion is stored as an (n+1) × (2n+1) real array whose
//! columns carry the orders m = 0, −1, +1, −2, +2, …. Column j of order m
//! holds the degrees ℓ = |m| … n in rows 0 … n−|m|; the trailing entries
//! below this staircase are kept as explicit exact zeros.

use crate::error::{Error, Result};
use crate::wire;
use std::io::{Read, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoeffKind {
    SphericalHarmonic,
    Fourier,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Order bookkeeping for one column of the coefficient array.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ColumnOrder {
    pub j: usize,
    pub m: i64,
    pub abs_m: usize,
    pub parity: Parity,
}

impl ColumnOrder {
    /// Column j holds order m = (−1)^j ⌈j/2⌉.
    pub fn from_column(j: usize) -> Self {
        let abs_m = j.div_ceil(2);
        let m = if j % 2 == 1 {
            -(abs_m as i64)
        } else {
            abs_m as i64
        };
        ColumnOrder {
            j,
            m,
            abs_m,
            parity: if abs_m % 2 == 0 {
                Parity::Even
            } else {
                Parity::Odd
            },
        }
    }

    pub fn from_order(m: i64) -> Self {
        let abs_m = m.unsigned_abs() as usize;
        let j = if m == 0 {
            0
        } else if m < 0 {
            2 * abs_m - 1
        } else {
            2 * abs_m
        };
        let co = ColumnOrder::from_column(j);
        debug_assert_eq!(co.m, m);
        co
    }
}

/// Array position of the coefficient of degree ℓ, order m.
///
/// Inverse of the column/row decoding; bijective over the staircase
/// {(ℓ, m) : |m| ≤ ℓ ≤ n}.
pub fn layout_index(n: usize, l: usize, m: i64) -> Result<(usize, usize)> {
    let abs_m = m.unsigned_abs() as usize;
    if abs_m > l || l > n {
        return Err(Error::IndexOutOfRange { l, m, n });
    }
    Ok((l - abs_m, ColumnOrder::from_order(m).j))
}

/// Split a vector into its even-indexed and odd-indexed entries.
pub fn parity_shuffle(v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let even = v.iter().step_by(2).copied().collect();
    let odd = v.iter().skip(1).step_by(2).copied().collect();
    (even, odd)
}

/// Inverse of [`parity_shuffle`]; bit-exact.
pub fn parity_unshuffle(even: &[f64], odd: &[f64]) -> Vec<f64> {
    assert!(even.len() == odd.len() || even.len() == odd.len() + 1);
    let mut v = vec![0.0; even.len() + odd.len()];
    for (i, &x) in even.iter().enumerate() {
        v[2 * i] = x;
    }
    for (i, &x) in odd.iter().enumerate() {
        v[2 * i + 1] = x;
    }
    v
}

/// Coefficients of a bandlimited expansion in the staircase layout,
/// column-major so per-column conversions are contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffMatrix {
    n: usize,
    kind: CoeffKind,
    data: Vec<f64>,
}

impl CoeffMatrix {
    pub fn zeros(n: usize, kind: CoeffKind) -> Self {
        CoeffMatrix {
            n,
            kind,
            data: vec![0.0; (n + 1) * (2 * n + 1)],
        }
    }

    pub fn from_data(n: usize, kind: CoeffKind, data: Vec<f64>) -> Result<Self> {
        if data.len() != (n + 1) * (2 * n + 1) {
            return Err(Error::Format(format!(
                "coefficient data has {} entries, expected {}",
                data.len(),
                (n + 1) * (2 * n + 1)
            )));
        }
        Ok(CoeffMatrix { n, kind, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> CoeffKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        self.n + 1
    }

    pub fn cols(&self) -> usize {
        2 * self.n + 1
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * (self.n + 1) + row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[col * (self.n + 1) + row] = v;
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.data[col * (self.n + 1)..(col + 1) * (self.n + 1)]
    }

    pub fn column_mut(&mut self, col: usize) -> &mut [f64] {
        &mut self.data[col * (self.n + 1)..(col + 1) * (self.n + 1)]
    }

    /// Number of structurally meaningful leading entries in column j:
    /// n + 1 − ⌈j/2⌉.
    pub fn meaningful_len(&self, col: usize) -> usize {
        self.n + 1 - ColumnOrder::from_column(col).abs_m
    }

    pub fn with_kind(mut self, kind: CoeffKind) -> Self {
        self.kind = kind;
        self
    }

    /// Scale every nonzero column to unit Euclidean norm.
    pub fn normalize_columns(mut self) -> Self {
        let rows = self.n + 1;
        for col in 0..self.cols() {
            let c = &mut self.data[col * rows..(col + 1) * rows];
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in c.iter_mut() {
                    *v /= norm;
                }
            }
        }
        self
    }

    /// Write the binary coefficient container: magic "FSHC", version,
    /// kind tag, bandlimit, then the raw array column-major little-endian.
    pub fn write_fshc(&self, w: &mut impl Write) -> Result<()> {
        let mut buf = Vec::with_capacity(20 + 8 * self.data.len());
        buf.extend_from_slice(b"FSHC");
        wire::put_u32(&mut buf, 1);
        wire::put_u32(
            &mut buf,
            match self.kind {
                CoeffKind::SphericalHarmonic => 0,
                CoeffKind::Fourier => 1,
            },
        );
        wire::put_u64(&mut buf, self.n as u64);
        for &v in &self.data {
            wire::put_f64(&mut buf, v);
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_fshc(r: &mut impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let mut rd = wire::Reader::new(&bytes);
        rd.magic(b"FSHC")?;
        let version = rd.u32()?;
        if version != 1 {
            return Err(Error::Format(format!("unsupported FSHC version {version}")));
        }
        let kind = match rd.u32()? {
            0 => CoeffKind::SphericalHarmonic,
            1 => CoeffKind::Fourier,
            k => return Err(Error::Format(format!("unknown kind tag {k}"))),
        };
        let n = rd.u64()? as usize;
        let len = (n + 1) * (2 * n + 1);
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(rd.f64()?);
        }
        CoeffMatrix::from_data(n, kind, data)
    }

    /// Headerless CSV export: one line per row, 2n+1 comma-separated values.
    /// Values are printed in shortest round-trip form.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        let mut out = String::new();
        for row in 0..self.rows() {
            for col in 0..self.cols() {
                if col > 0 {
                    out.push(',');
                }
                out.push_str(&format!("{}", self.get(row, col)));
            }
            out.push('\n');
        }
        w.write_all(out.as_bytes())?;
        Ok(())
    }

    /// CSV import; the shape must be (n+1) × (2n+1) for some n.
    pub fn read_csv(r: &mut impl Read, kind: CoeffKind) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for field in line.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Format(format!("line {}: bad number {:?}", lineno + 1, field))
                })?;
                row.push(v);
            }
            rows.push(row);
        }
        let nrows = rows.len();
        if nrows == 0 {
            return Err(Error::Format("empty CSV".into()));
        }
        let ncols = rows[0].len();
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Format("ragged CSV rows".into()));
        }
        if ncols != 2 * nrows - 1 {
            return Err(Error::Format(format!(
                "shape {nrows}×{ncols} is not (n+1)×(2n+1)"
            )));
        }
        let n = nrows - 1;
        let mut m = CoeffMatrix::zeros(n, kind);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout_examples() {
        // top-left, head of column 2, head of the last column
        assert_eq!(layout_index(4, 0, 0).unwrap(), (0, 0));
        assert_eq!(layout_index(4, 1, -1).unwrap(), (0, 1));
        assert_eq!(layout_index(4, 4, 4).unwrap(), (0, 8));
        assert!(layout_index(4, 1, 2).is_err());
        assert!(layout_index(4, 5, 0).is_err());
    }

    #[test]
    fn layout_bijection_small_bandlimits() {
        for n in 0..=32usize {
            let mut seen = vec![false; (n + 1) * (2 * n + 1)];
            let mut count = 0;
            for l in 0..=n {
                for m in -(l as i64)..=(l as i64) {
                    let (row, col) = layout_index(n, l, m).unwrap();
                    assert!(row < n + 1 - m.unsigned_abs() as usize);
                    let flat = col * (n + 1) + row;
                    assert!(!seen[flat], "collision at n={n} l={l} m={m}");
                    seen[flat] = true;
                    count += 1;
                    // decode back
                    let co = ColumnOrder::from_column(col);
                    assert_eq!(co.m, m);
                    assert_eq!(row + co.abs_m, l);
                }
            }
            assert_eq!(count, (n + 1) * (n + 1));
        }
    }

    #[test]
    fn column_order_convention() {
        let orders: Vec<i64> = (0..9).map(|j| ColumnOrder::from_column(j).m).collect();
        assert_eq!(orders, vec![0, -1, 1, -2, 2, -3, 3, -4, 4]);
    }

    #[test]
    fn shuffle_examples() {
        let (e, o) = parity_shuffle(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e, vec![1.0, 3.0]);
        assert_eq!(o, vec![2.0, 4.0]);
        let (e, o) = parity_shuffle(&[5.0]);
        assert_eq!(e, vec![5.0]);
        assert!(o.is_empty());
    }

    #[test]
    fn shuffle_roundtrip_all_lengths() {
        for len in 0..=1024usize {
            let v: Vec<f64> = (0..len).map(|i| (i as f64).sin() + i as f64).collect();
            let (e, o) = parity_shuffle(&v);
            assert_eq!(parity_unshuffle(&e, &o), v);
        }
    }

    proptest! {
        #[test]
        fn shuffle_roundtrip_random(v in proptest::collection::vec(-1e6f64..1e6, 0..300)) {
            let (e, o) = parity_shuffle(&v);
            prop_assert_eq!(parity_unshuffle(&e, &o), v);
        }
    }

    #[test]
    fn normalize_345_column() {
        let mut m = CoeffMatrix::zeros(2, CoeffKind::SphericalHarmonic);
        m.set(0, 0, 3.0);
        m.set(1, 0, 4.0);
        let m = m.normalize_columns();
        assert_eq!(m.get(0, 0), 0.6);
        assert_eq!(m.get(1, 0), 0.8);
        assert_eq!(m.get(2, 0), 0.0);
        // untouched zero columns stay zero
        assert!(m.column(3).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalize_random_column_has_unit_norm() {
        let mut m = CoeffMatrix::zeros(20, CoeffKind::SphericalHarmonic);
        for i in 0..21 {
            m.set(i, 0, ((i * 37 + 11) % 23) as f64 - 11.0);
        }
        let m = m.normalize_columns();
        let norm: f64 = m.column(0).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(crate::fp::ulps_between(norm, 1.0) <= 2);
    }

    #[test]
    fn fshc_roundtrip_is_bit_exact() {
        let mut m = CoeffMatrix::zeros(3, CoeffKind::Fourier);
        for (i, v) in m.data.iter_mut().enumerate() {
            *v = (i as f64).exp() * 0.1234567890123;
        }
        let mut bytes = Vec::new();
        m.write_fshc(&mut bytes).unwrap();
        let back = CoeffMatrix::read_fshc(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn csv_roundtrip_is_bit_exact() {
        let mut m = CoeffMatrix::zeros(2, CoeffKind::SphericalHarmonic);
        for (i, v) in m.data.iter_mut().enumerate() {
            *v = 1.0 / (i as f64 + 3.0);
        }
        let mut text = Vec::new();
        m.write_csv(&mut text).unwrap();
        let back = CoeffMatrix::read_csv(&mut text.as_slice(), CoeffKind::SphericalHarmonic)
            .unwrap();
        assert_eq!(back, m);
    }
}
