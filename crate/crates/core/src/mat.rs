//! Minimal column-major dense matrix. Every hot loop in the transforms walks
//! one column at a time, so columns are kept contiguous.

#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[j * rows + i] = f(i, j);
            }
        }
        m
    }

    /// Rectangular identity: ones on the main diagonal.
    pub fn rect_identity(rows: usize, cols: usize) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m.data[i * rows + i] = 1.0;
        }
        m
    }

    pub fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec_acc(x, &mut y);
        y
    }

    /// y += A x.
    pub fn matvec_acc(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let col = self.col(j);
            for (yi, &aij) in y.iter_mut().zip(col) {
                *yi += aij * xj;
            }
        }
    }

    /// y = A^T x.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.cols];
        self.matvec_t_acc(x, &mut y);
        y
    }

    /// y += A^T x.
    pub fn matvec_t_acc(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.rows);
        assert_eq!(y.len(), self.cols);
        for (j, yj) in y.iter_mut().enumerate() {
            let col = self.col(j);
            let mut acc = 0.0;
            for (&aij, &xi) in col.iter().zip(x) {
                acc += aij * xi;
            }
            *yj += acc;
        }
    }

    /// Dense sub-matrix with the given contiguous row range and gathered columns.
    pub fn gather(&self, row_start: usize, row_end: usize, cols: &[usize]) -> Mat {
        let h = row_end - row_start;
        let mut out = Mat::zeros(h, cols.len());
        for (jj, &j) in cols.iter().enumerate() {
            let src = &self.col(j)[row_start..row_end];
            out.col_mut(jj).copy_from_slice(src);
        }
        out
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }
}

/// Perfect-shuffle split into the (even rows, even cols) and
/// (odd rows, odd cols) sub-matrices. For matrices whose entries couple only
/// equal-parity indices this removes the chessboard of structural zeros.
pub fn parity_split(a: &Mat) -> (Mat, Mat) {
    let ee = Mat::from_fn(a.rows().div_ceil(2), a.cols().div_ceil(2), |i, j| {
        a.get(2 * i, 2 * j)
    });
    let oo = Mat::from_fn(a.rows() / 2, a.cols() / 2, |i, j| a.get(2 * i + 1, 2 * j + 1));
    (ee, oo)
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_transpose_agree_with_direct_sums() {
        let a = Mat::from_fn(3, 2, |i, j| (i + 2 * j) as f64);
        let y = a.matvec(&[1.0, -1.0]);
        assert_eq!(y, vec![-2.0, -2.0, -2.0]);
        let z = a.matvec_t(&[1.0, 0.0, -1.0]);
        assert_eq!(z, vec![-2.0, -2.0]);
    }

    #[test]
    fn gather_selects_columns() {
        let a = Mat::from_fn(4, 4, |i, j| (10 * i + j) as f64);
        let g = a.gather(1, 3, &[3, 0]);
        assert_eq!(g.rows(), 2);
        assert_eq!(g.col(0), &[13.0, 23.0]);
        assert_eq!(g.col(1), &[10.0, 20.0]);
    }
}
