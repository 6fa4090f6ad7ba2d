//! Interpolative decomposition: A ≈ A_CS · A_I where the k columns of A_CS
//! are columns of A itself and A_I contains the k×k identity as a sub-block.
//!
//! Factorization is a column-pivoted Householder orthogonal-triangular
//! decomposition with early termination on the diagonal-decay criterion,
//! followed by back-substitution of the trailing block to form the
//! interpolation coefficients. The identity sub-block is kept implicit as a
//! column permutation (compact form).

use crate::mat::{norm2, Mat};
use crate::wire;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct InterpDecomp {
    nrows: usize,
    ncols: usize,
    /// Source-column indices of the skeleton, in pivot order.
    skeleton: Vec<usize>,
    /// The remaining column indices, in pivot order.
    rest: Vec<usize>,
    /// k × (n−k) interpolation coefficients for the non-skeleton columns.
    coef: Mat,
}

impl InterpDecomp {
    pub fn rank(&self) -> usize {
        self.skeleton.len()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn skeleton(&self) -> &[usize] {
        &self.skeleton
    }

    pub fn rest(&self) -> &[usize] {
        &self.rest
    }

    pub fn coef(&self) -> &Mat {
        &self.coef
    }

    /// The full k×n interpolation matrix A_I; the skeleton columns form the
    /// identity exactly.
    pub fn interp_matrix(&self) -> Mat {
        let k = self.rank();
        let mut a_i = Mat::zeros(k, self.ncols);
        for (i, &j) in self.skeleton.iter().enumerate() {
            a_i.set(i, j, 1.0);
        }
        for (jj, &j) in self.rest.iter().enumerate() {
            for i in 0..k {
                a_i.set(i, j, self.coef.get(i, jj));
            }
        }
        a_i
    }

    /// u = A_I · v.
    pub fn apply_interp(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.ncols);
        let mut u: Vec<f64> = self.skeleton.iter().map(|&j| v[j]).collect();
        if !self.rest.is_empty() {
            let rest_vals: Vec<f64> = self.rest.iter().map(|&j| v[j]).collect();
            self.coef.matvec_acc(&rest_vals, &mut u);
        }
        u
    }

    /// y = A_Iᵀ · u.
    pub fn apply_interp_transpose(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.rank());
        let mut y = vec![0.0; self.ncols];
        for (i, &j) in self.skeleton.iter().enumerate() {
            y[j] += u[i];
        }
        if !self.rest.is_empty() {
            let spread = self.coef.matvec_t(u);
            for (jj, &j) in self.rest.iter().enumerate() {
                y[j] += spread[jj];
            }
        }
        y
    }

    pub fn max_interp_entry(&self) -> f64 {
        self.coef.max_abs().max(if self.rank() > 0 { 1.0 } else { 0.0 })
    }

    pub(crate) fn write(&self, buf: &mut Vec<u8>) {
        wire::put_usize(buf, self.nrows);
        wire::put_usize(buf, self.ncols);
        wire::put_usize_slice(buf, &self.skeleton);
        wire::put_usize_slice(buf, &self.rest);
        wire::put_usize(buf, self.coef.rows());
        wire::put_usize(buf, self.coef.cols());
        for &v in self.coef.data() {
            wire::put_f64(buf, v);
        }
    }

    pub(crate) fn read(rd: &mut wire::Reader) -> Result<Self> {
        let nrows = rd.usize()?;
        let ncols = rd.usize()?;
        let skeleton = rd.usize_vec()?;
        let rest = rd.usize_vec()?;
        let cr = rd.usize()?;
        let cc = rd.usize()?;
        let mut data = Vec::with_capacity(cr * cc);
        for _ in 0..cr * cc {
            data.push(rd.f64()?);
        }
        if skeleton.len() != cr || rest.len() != cc {
            return Err(Error::Format("inconsistent interpolative decomposition".into()));
        }
        Ok(InterpDecomp {
            nrows,
            ncols,
            skeleton,
            rest,
            coef: Mat::from_raw(cr, cc, data),
        })
    }
}

/// Interpolative decomposition at fixed precision.
///
/// The rank is the smallest k at which the column-pivoted triangular factor's
/// diagonal falls below `tol · max(m, n)` relative to its leading entry; when
/// no truncation qualifies, k = min(m, n) and the reconstruction is exact.
pub fn id_fixed_precision(a: &Mat, tol: f64) -> InterpDecomp {
    assert!(tol > 0.0);
    let m = a.rows();
    let n = a.cols();
    let kmax = m.min(n);
    let mut r = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    // Squared trailing column norms, downdated each step with an exact
    // recompute once cancellation eats the reference value.
    let mut norms2: Vec<f64> = (0..n).map(|j| norm2(r.col(j)).powi(2)).collect();
    let mut refs2 = norms2.clone();

    let threshold_scale = tol * m.max(n) as f64;
    let mut r00 = 0.0f64;
    let mut k = kmax;
    let mut reflector = vec![0.0; m];

    for i in 0..kmax {
        let pivot = (i..n)
            .max_by(|&x, &y| norms2[x].total_cmp(&norms2[y]))
            .unwrap();
        if pivot != i {
            let (rows, _) = (m, n);
            for row in 0..rows {
                let tmp = r.get(row, i);
                r.set(row, i, r.get(row, pivot));
                r.set(row, pivot, tmp);
            }
            perm.swap(i, pivot);
            norms2.swap(i, pivot);
            refs2.swap(i, pivot);
        }

        let normx = norm2(&r.col(i)[i..]);
        if i == 0 {
            r00 = normx;
        }
        if normx <= threshold_scale * r00 {
            k = i;
            break;
        }

        // Householder reflector sending the trailing part of column i onto
        // alpha·e_i.
        let x0 = r.get(i, i);
        let alpha = if x0 >= 0.0 { -normx } else { normx };
        let v = &mut reflector[..m - i];
        v.copy_from_slice(&r.col(i)[i..]);
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        r.set(i, i, alpha);
        for row in i + 1..m {
            r.set(row, i, 0.0);
        }
        if vnorm2 > 0.0 {
            let scale = 2.0 / vnorm2;
            for j in i + 1..n {
                let col = &mut r.col_mut(j)[i..];
                let t: f64 = scale * v.iter().zip(col.iter()).map(|(a, b)| a * b).sum::<f64>();
                for (cv, vv) in col.iter_mut().zip(v.iter()) {
                    *cv -= t * vv;
                }
            }
        }

        // Downdate trailing norms; recompute when the running value has lost
        // most of its reference magnitude.
        for j in i + 1..n {
            let rij = r.get(i, j);
            norms2[j] -= rij * rij;
            if norms2[j] <= 1e-8 * refs2[j] {
                let exact = norm2(&r.col(j)[i + 1..]).powi(2);
                norms2[j] = exact;
                refs2[j] = exact;
            } else if norms2[j] < 0.0 {
                norms2[j] = 0.0;
            }
        }
    }

    // Interpolation coefficients: solve R11 · X = R12 by back-substitution.
    let coef = {
        let mut x = Mat::zeros(k, n - k);
        for jj in 0..n - k {
            let j = k + jj;
            let mut colbuf: Vec<f64> = (0..k).map(|i| r.get(i, j)).collect();
            for i in (0..k).rev() {
                let mut s = colbuf[i];
                for l in i + 1..k {
                    s -= r.get(i, l) * colbuf[l];
                }
                colbuf[i] = s / r.get(i, i);
            }
            for i in 0..k {
                x.set(i, jj, colbuf[i]);
            }
        }
        x
    };

    InterpDecomp {
        nrows: m,
        ncols: n,
        skeleton: perm[..k].to_vec(),
        rest: perm[k..].to_vec(),
        coef,
    }
}

/// A_CS · (A_I · v), given the gathered skeleton columns.
pub fn id_apply(d: &InterpDecomp, source_columns: &Mat, v: &[f64]) -> Vec<f64> {
    assert_eq!(source_columns.cols(), d.rank());
    assert_eq!(source_columns.rows(), d.nrows());
    source_columns.matvec(&d.apply_interp(v))
}

/// A_Iᵀ · (A_CSᵀ · v).
pub fn id_apply_transpose(d: &InterpDecomp, source_columns: &Mat, v: &[f64]) -> Vec<f64> {
    assert_eq!(source_columns.cols(), d.rank());
    assert_eq!(source_columns.rows(), d.nrows());
    d.apply_interp_transpose(&source_columns.matvec_t(v))
}
