//! Conversions between order-0/1 normalized Legendre expansions and
//! cosine/sine series: dense reference forms and hierarchical
//! (well-separated block, barycentric low-rank) fast forms.
//!
//! All four conversion matrices are upper triangular with a chessboard
//! sparsity pattern and factor as D_row · K · D_col where K is a smooth
//! bivariate kernel built from Λ(z) = Γ(z+1/2)/Γ(z+1). The diagonal scalings
//! are applied separately so the low-rank blocks interpolate only the smooth
//! kernel, and the parity shuffle removes the chessboard zeros, leaving two
//! dense triangular sub-problems per conversion.

use crate::coeffs::{parity_shuffle, parity_unshuffle};
use crate::lambda::lambda;
use crate::mat::Mat;
use crate::wire;
use crate::{Error, Result};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    /// Normalized Legendre polynomials to cosines.
    Leg0ToCos,
    /// Cosines to normalized Legendre polynomials.
    CosToLeg0,
    /// Order-1 normalized Legendre functions to sines.
    Leg1ToSin,
    /// Sines to order-1 normalized Legendre functions.
    SinToLeg1,
}

impl KernelKind {
    pub fn inverse(self) -> KernelKind {
        match self {
            KernelKind::Leg0ToCos => KernelKind::CosToLeg0,
            KernelKind::CosToLeg0 => KernelKind::Leg0ToCos,
            KernelKind::Leg1ToSin => KernelKind::SinToLeg1,
            KernelKind::SinToLeg1 => KernelKind::Leg1ToSin,
        }
    }

    pub(crate) fn tag(self) -> u32 {
        match self {
            KernelKind::Leg0ToCos => 0,
            KernelKind::CosToLeg0 => 1,
            KernelKind::Leg1ToSin => 2,
            KernelKind::SinToLeg1 => 3,
        }
    }

    pub(crate) fn from_tag(tag: u32) -> Result<Self> {
        Ok(match tag {
            0 => KernelKind::Leg0ToCos,
            1 => KernelKind::CosToLeg0,
            2 => KernelKind::Leg1ToSin,
            3 => KernelKind::SinToLeg1,
            _ => return Err(Error::Format(format!("bad kernel tag {tag}"))),
        })
    }
}

/// Chebyshev interpolation degree reaching precision `tol` on any
/// well-separated square, from the geometric convergence rate ρ = 3 + √8.
pub fn interp_degree(tol: f64) -> usize {
    assert!(tol > 0.0 && tol < 1.0);
    let rho = 3.0 + 8.0f64.sqrt();
    let arg = 4.0 * 2.0f64.sqrt() * (5.0f64 / 3.0).exp() / (PI * (1.0 + 2.0f64.sqrt()) * tol);
    let k = (arg.ln() / rho.ln()).ceil();
    (k as isize).max(1) as usize
}

fn row_scale(kind: KernelKind, l: usize) -> f64 {
    match kind {
        KernelKind::Leg0ToCos => {
            if l == 0 {
                0.5
            } else {
                1.0
            }
        }
        KernelKind::CosToLeg0 => (l as f64 + 0.5).sqrt(),
        KernelKind::Leg1ToSin => 2.0 * (l as f64 + 1.0) / PI,
        KernelKind::SinToLeg1 => {
            let lf = l as f64;
            ((lf + 1.5) * (lf + 1.0) * (lf + 2.0)).sqrt()
        }
    }
}

fn col_scale(kind: KernelKind, q: usize) -> f64 {
    match kind {
        KernelKind::Leg0ToCos => (q as f64 + 0.5).sqrt(),
        KernelKind::CosToLeg0 => {
            if q == 0 {
                1.0
            } else {
                q as f64
            }
        }
        KernelKind::Leg1ToSin => {
            let qf = q as f64;
            ((qf + 1.5) / ((qf + 1.0) * (qf + 2.0))).sqrt()
        }
        KernelKind::SinToLeg1 => 1.0,
    }
}

/// Smooth kernel at a continuous row coordinate (in original degree units).
/// Valid away from the diagonal; low-rank blocks only ever sample here.
fn kernel_smooth(kind: KernelKind, x: f64, y: f64) -> f64 {
    match kind {
        KernelKind::Leg0ToCos => (2.0 / PI) * lambda((y - x) / 2.0) * lambda((y + x) / 2.0),
        KernelKind::CosToLeg0 => {
            -lambda((y - x - 2.0) / 2.0) * lambda((y + x - 1.0) / 2.0)
                / ((y - x) * (y + x + 1.0))
        }
        KernelKind::Leg1ToSin => lambda((y - x) / 2.0) * lambda((y + x + 2.0) / 2.0),
        KernelKind::SinToLeg1 => {
            -lambda((y - x) / 2.0) * lambda((y + x + 3.0) / 2.0)
                / ((y - x - 1.0) * (y + x + 2.0))
        }
    }
}

/// Smooth-kernel value at integer indices, including the limiting values on
/// the diagonal of the cosine-to-Legendre kernel (finite by cancellation of
/// the (y−x) factor against the Λ((y−x−2)/2) zero) and its q = 0 column.
fn kernel_inner_int(kind: KernelKind, l: usize, q: usize, lam_half: &[f64]) -> f64 {
    debug_assert!(q >= l && (q - l) % 2 == 0);
    let sqrt_pi = lam_half[0];
    match kind {
        KernelKind::Leg0ToCos => (2.0 / PI) * lam_half[q - l] * lam_half[q + l],
        KernelKind::CosToLeg0 => {
            if l == q {
                if q == 0 {
                    2.0
                } else {
                    // lim -Λ((y−x−2)/2)/(y−x) = √π at y = x
                    sqrt_pi * lam_half[2 * q - 1] / (2.0 * q as f64 + 1.0)
                }
            } else {
                -lam_half[q - l - 2] * lam_half[q + l - 1]
                    / ((q - l) as f64 * (q + l + 1) as f64)
            }
        }
        KernelKind::Leg1ToSin => lam_half[q - l] * lam_half[q + l + 2],
        KernelKind::SinToLeg1 => {
            -lam_half[q - l] * lam_half[q + l + 3]
                / ((q as f64 - l as f64 - 1.0) * (q + l + 2) as f64)
        }
    }
}

/// Λ at half-integer arguments: table[t] = Λ(t/2) for t = 0..=tmax.
fn lambda_half_table(tmax: usize) -> Vec<f64> {
    (0..=tmax).map(|t| lambda(t as f64 / 2.0)).collect()
}

/// Entry (row, col) of the conversion matrix, diagonal scalings included.
/// Zero off the triangular chessboard structure.
pub fn kernel_entry(kind: KernelKind, row: usize, col: usize) -> f64 {
    if col < row || (col - row) % 2 != 0 {
        return 0.0;
    }
    let lam_half = lambda_half_table(row + col + 3);
    row_scale(kind, row) * kernel_inner_int(kind, row, col, &lam_half) * col_scale(kind, col)
}

/// O(n²) dense triangular multiply; the reference path and test oracle.
pub fn dense_convert(kind: KernelKind, v: &[f64]) -> Vec<f64> {
    let s = v.len();
    if s == 0 {
        return Vec::new();
    }
    let lam_half = lambda_half_table(2 * s + 4);
    let mut out = vec![0.0; s];
    for q in 0..s {
        if v[q] == 0.0 {
            continue;
        }
        let vq = v[q] * col_scale(kind, q);
        let mut l = q % 2;
        while l <= q {
            out[l] += kernel_inner_int(kind, l, q, &lam_half) * vq;
            l += 2;
        }
    }
    for (l, o) in out.iter_mut().enumerate() {
        *o *= row_scale(kind, l);
    }
    out
}

/// Multiply-add count of the dense reference path for size-`s` vectors.
pub fn dense_convert_flops(s: usize) -> usize {
    (0..s).map(|q| 2 * (q / 2 + 1)).sum()
}

/// Chebyshev points and barycentric weights of the first kind.
#[derive(Clone, Debug, PartialEq)]
pub struct BarycentricGrid {
    k: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl BarycentricGrid {
    pub fn new(k: usize) -> Self {
        let count = k + 1;
        let mut points = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for l in 0..count {
            let theta = (2 * l + 1) as f64 * PI / (2 * k + 2) as f64;
            points.push(theta.cos());
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            weights.push(sign * theta.sin());
        }
        BarycentricGrid { k, points, weights }
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Row of second-form barycentric weights for evaluating at `x` an
    /// interpolant sampled at the grid mapped onto [a, b]. When `x` lands
    /// exactly on a mapped node the row degenerates to the matching unit
    /// vector (direct sample lookup).
    pub fn weights_row(&self, a: f64, b: f64, x: f64) -> Vec<f64> {
        let count = self.k + 1;
        let mut row = vec![0.0; count];
        let mut denoms = Vec::with_capacity(count);
        for l in 0..count {
            let d = x - self.mapped_point(a, b, l);
            if d == 0.0 {
                row[l] = 1.0;
                return row;
            }
            denoms.push(d);
        }
        let mut sum = 0.0;
        for l in 0..count {
            let t = self.weights[l] / denoms[l];
            row[l] = t;
            sum += t;
        }
        for r in row.iter_mut() {
            *r /= sum;
        }
        row
    }

    #[inline]
    fn mapped_point(&self, a: f64, b: f64, l: usize) -> f64 {
        0.5 * (a + b) + 0.5 * (b - a) * self.points[l]
    }

    /// Node positions mapped onto [a, b].
    pub fn mapped_points(&self, a: f64, b: f64) -> Vec<f64> {
        (0..=self.k).map(|l| self.mapped_point(a, b, l)).collect()
    }
}

#[derive(Clone, Debug)]
enum HodlrBlock {
    Dense {
        r0: usize,
        c0: usize,
        mat: Mat,
    },
    LowRank {
        r0: usize,
        c0: usize,
        /// (rows × k+1) barycentric weight matrix.
        w: Mat,
        /// (k+1 × cols) kernel samples at the mapped Chebyshev points.
        ftilde: Mat,
    },
}

#[derive(Clone, Debug)]
struct SubPlan {
    parity: usize,
    size: usize,
    blocks: Vec<HodlrBlock>,
}

/// Summary of one block for structural tests, in parity-shuffled index
/// coordinates (inclusive ranges).
#[derive(Clone, Copy, Debug)]
pub struct BlockSummary {
    pub parity: usize,
    pub rows: (usize, usize),
    pub cols: (usize, usize),
    pub low_rank: bool,
}

/// Hierarchical partition of one triangular conversion matrix into dense
/// leaf blocks and barycentric low-rank blocks.
#[derive(Clone, Debug)]
pub struct HodlrPlan {
    n: usize,
    kind: KernelKind,
    k: usize,
    grid: BarycentricGrid,
    leaf: usize,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    even: SubPlan,
    odd: SubPlan,
}

struct SubBuilder<'a> {
    kind: KernelKind,
    parity: usize,
    grid: &'a BarycentricGrid,
    leaf: usize,
    lam_half: &'a [f64],
    blocks: Vec<HodlrBlock>,
}

impl SubBuilder<'_> {
    fn orig(&self, sub: f64) -> f64 {
        2.0 * sub + self.parity as f64
    }

    fn dense_block(&mut self, r0: usize, r1: usize, c0: usize, c1: usize) {
        let mat = Mat::from_fn(r1 - r0 + 1, c1 - c0 + 1, |i, j| {
            let (l, q) = (r0 + i, c0 + j);
            if q < l {
                0.0
            } else {
                let (lo, qo) = (2 * l + self.parity, 2 * q + self.parity);
                kernel_inner_int(self.kind, lo, qo, self.lam_half)
            }
        });
        self.blocks.push(HodlrBlock::Dense { r0, c0, mat });
    }

    fn lowrank_block(&mut self, r0: usize, r1: usize, c0: usize, c1: usize) {
        let count = self.grid.degree() + 1;
        let nodes = self.grid.mapped_points(r0 as f64, r1 as f64);
        let ftilde = Mat::from_fn(count, c1 - c0 + 1, |l, j| {
            kernel_smooth(
                self.kind,
                self.orig(nodes[l]),
                self.orig((c0 + j) as f64),
            )
        });
        let mut w = Mat::zeros(r1 - r0 + 1, count);
        for i in r0..=r1 {
            let row = self.grid.weights_row(r0 as f64, r1 as f64, i as f64);
            for (l, &v) in row.iter().enumerate() {
                w.set(i - r0, l, v);
            }
        }
        self.blocks.push(HodlrBlock::LowRank { r0, c0, w, ftilde });
    }

    /// Off-diagonal rectangle strictly above the diagonal (c0 > r1): keep it
    /// as one barycentric block when well-separated, refine toward the
    /// diagonal corner otherwise.
    fn rec_off(&mut self, r0: usize, r1: usize, c0: usize, c1: usize) {
        let span = (r1 - r0).max(c1 - c0);
        if c0 - r0 >= 2 * span && (r1 - r0).min(c1 - c0) + 1 > self.grid.degree() + 1 {
            self.lowrank_block(r0, r1, c0, c1);
        } else if (r1 - r0 + 1).max(c1 - c0 + 1) <= self.leaf {
            self.dense_block(r0, r1, c0, c1);
        } else {
            let rm = r0 + (r1 - r0) / 2;
            let cm = c0 + (c1 - c0) / 2;
            self.rec_off(r0, rm, c0, cm);
            self.rec_off(r0, rm, cm + 1, c1);
            self.rec_off(rm + 1, r1, cm + 1, c1);
            self.rec_off(rm + 1, r1, c0, cm);
        }
    }

    fn rec_tri(&mut self, lo: usize, hi: usize) {
        let size = hi - lo + 1;
        if size <= self.leaf {
            self.dense_block(lo, hi, lo, hi);
            return;
        }
        let mid = lo + size / 2;
        self.rec_off(lo, mid - 1, mid, hi);
        self.rec_tri(lo, mid - 1);
        self.rec_tri(mid, hi);
    }
}

fn build_sub(
    kind: KernelKind,
    parity: usize,
    size: usize,
    grid: &BarycentricGrid,
    leaf: usize,
    lam_half: &[f64],
) -> SubPlan {
    let mut b = SubBuilder {
        kind,
        parity,
        grid,
        leaf,
        lam_half,
        blocks: Vec::new(),
    };
    if size > 0 {
        b.rec_tri(0, size - 1);
    }
    SubPlan {
        parity,
        size,
        blocks: b.blocks,
    }
}

impl HodlrPlan {
    /// Hierarchical plan for vectors of length n+1.
    pub fn build(kind: KernelKind, n: usize, tol: f64) -> HodlrPlan {
        let k = interp_degree(tol);
        let grid = BarycentricGrid::new(k);
        let leaf = (2 * (k + 1)).max(32);
        let s = n + 1;
        let lam_half = lambda_half_table(2 * s + 6);
        let row_scale: Vec<f64> = (0..s).map(|l| row_scale(kind, l)).collect();
        let col_scale: Vec<f64> = (0..s).map(|q| col_scale(kind, q)).collect();
        let even = build_sub(kind, 0, s.div_ceil(2), &grid, leaf, &lam_half);
        let odd = build_sub(kind, 1, s / 2, &grid, leaf, &lam_half);
        HodlrPlan {
            n,
            kind,
            k,
            grid,
            leaf,
            row_scale,
            col_scale,
            even,
            odd,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn leaf_threshold(&self) -> usize {
        self.leaf
    }

    pub fn blocks(&self) -> Vec<BlockSummary> {
        let mut out = Vec::new();
        for sub in [&self.even, &self.odd] {
            for b in &sub.blocks {
                out.push(match b {
                    HodlrBlock::Dense { r0, c0, mat } => BlockSummary {
                        parity: sub.parity,
                        rows: (*r0, r0 + mat.rows() - 1),
                        cols: (*c0, c0 + mat.cols() - 1),
                        low_rank: false,
                    },
                    HodlrBlock::LowRank { r0, c0, w, ftilde } => BlockSummary {
                        parity: sub.parity,
                        rows: (*r0, r0 + w.rows() - 1),
                        cols: (*c0, c0 + ftilde.cols() - 1),
                        low_rank: true,
                    },
                });
            }
        }
        out
    }

    /// Fast apply: sum of dense-leaf multiplies and W·(F̃·x) products over
    /// the parity-shuffled halves.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n + 1);
        let scaled: Vec<f64> = v
            .iter()
            .zip(&self.col_scale)
            .map(|(x, s)| x * s)
            .collect();
        let (xe, xo) = parity_shuffle(&scaled);
        let ye = self.apply_sub(&self.even, &xe);
        let yo = self.apply_sub(&self.odd, &xo);
        let mut out = parity_unshuffle(&ye, &yo);
        for (o, s) in out.iter_mut().zip(&self.row_scale) {
            *o *= s;
        }
        out
    }

    fn apply_sub(&self, sub: &SubPlan, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; sub.size];
        for b in &sub.blocks {
            match b {
                HodlrBlock::Dense { r0, c0, mat } => {
                    mat.matvec_acc(&x[*c0..c0 + mat.cols()], &mut y[*r0..r0 + mat.rows()]);
                }
                HodlrBlock::LowRank { r0, c0, w, ftilde } => {
                    let t = ftilde.matvec(&x[*c0..c0 + ftilde.cols()]);
                    w.matvec_acc(&t, &mut y[*r0..r0 + w.rows()]);
                }
            }
        }
        y
    }

    /// Multiply-add count of one application.
    pub fn apply_flops(&self) -> usize {
        let mut flops = 4 * (self.n + 1); // the two diagonal scalings
        for sub in [&self.even, &self.odd] {
            for b in &sub.blocks {
                flops += match b {
                    HodlrBlock::Dense { mat, .. } => 2 * mat.rows() * mat.cols(),
                    HodlrBlock::LowRank { w, ftilde, .. } => {
                        2 * (self.k + 1) * (w.rows() + ftilde.cols())
                    }
                };
            }
        }
        flops
    }

    pub(crate) fn write(&self, buf: &mut Vec<u8>) {
        wire::put_u32(buf, self.kind.tag());
        wire::put_usize(buf, self.n);
        wire::put_usize(buf, self.k);
        wire::put_usize(buf, self.leaf);
        wire::put_f64_slice(buf, self.grid.points());
        wire::put_f64_slice(buf, self.grid.weights());
        wire::put_f64_slice(buf, &self.row_scale);
        wire::put_f64_slice(buf, &self.col_scale);
        for sub in [&self.even, &self.odd] {
            wire::put_usize(buf, sub.parity);
            wire::put_usize(buf, sub.size);
            wire::put_usize(buf, sub.blocks.len());
            for b in &sub.blocks {
                match b {
                    HodlrBlock::Dense { r0, c0, mat } => {
                        wire::put_u32(buf, 0);
                        wire::put_usize(buf, *r0);
                        wire::put_usize(buf, *c0);
                        write_mat(buf, mat);
                    }
                    HodlrBlock::LowRank { r0, c0, w, ftilde } => {
                        wire::put_u32(buf, 1);
                        wire::put_usize(buf, *r0);
                        wire::put_usize(buf, *c0);
                        write_mat(buf, w);
                        write_mat(buf, ftilde);
                    }
                }
            }
        }
    }

    pub(crate) fn read(rd: &mut wire::Reader) -> Result<Self> {
        let kind = KernelKind::from_tag(rd.u32()?)?;
        let n = rd.usize()?;
        let k = rd.usize()?;
        let leaf = rd.usize()?;
        let points = rd.f64_vec()?;
        let weights = rd.f64_vec()?;
        let row_scale = rd.f64_vec()?;
        let col_scale = rd.f64_vec()?;
        let mut subs = Vec::with_capacity(2);
        for _ in 0..2 {
            let parity = rd.usize()?;
            let size = rd.usize()?;
            let nblocks = rd.usize()?;
            let mut blocks = Vec::with_capacity(nblocks);
            for _ in 0..nblocks {
                let tag = rd.u32()?;
                let r0 = rd.usize()?;
                let c0 = rd.usize()?;
                blocks.push(match tag {
                    0 => HodlrBlock::Dense {
                        r0,
                        c0,
                        mat: read_mat(rd)?,
                    },
                    1 => HodlrBlock::LowRank {
                        r0,
                        c0,
                        w: read_mat(rd)?,
                        ftilde: read_mat(rd)?,
                    },
                    _ => return Err(Error::Format("bad block tag".into())),
                });
            }
            subs.push(SubPlan {
                parity,
                size,
                blocks,
            });
        }
        let odd = subs.pop().unwrap();
        let even = subs.pop().unwrap();
        if points.len() != k + 1 || weights.len() != k + 1 {
            return Err(Error::Format("inconsistent grid".into()));
        }
        Ok(HodlrPlan {
            n,
            kind,
            k,
            grid: BarycentricGrid {
                k,
                points,
                weights,
            },
            leaf,
            row_scale,
            col_scale,
            even,
            odd,
        })
    }
}

fn write_mat(buf: &mut Vec<u8>, m: &Mat) {
    wire::put_usize(buf, m.rows());
    wire::put_usize(buf, m.cols());
    for &v in m.data() {
        wire::put_f64(buf, v);
    }
}

fn read_mat(rd: &mut wire::Reader) -> Result<Mat> {
    let r = rd.usize()?;
    let c = rd.usize()?;
    let mut data = Vec::with_capacity(r * c);
    for _ in 0..r * c {
        data.push(rd.f64()?);
    }
    Ok(Mat::from_raw(r, c, data))
}

/// Both sides of the finite-sum identity behind the rank property: the
/// weighted Gegenbauer re-expansion sum against its closed form
/// 2√π Γ(ℓ+4m+1) / (16^m Γ(m+1/2) Γ(ℓ+1)). Pochhammer (m)_0 = 1 by the
/// empty-product convention, so m = 0 is convention-dependent.
pub fn lemma_4f3_check(l: usize, m: usize) -> (f64, f64) {
    // Γ(a+1/2)/Γ(b+1/2) by stepping between half-integers
    fn half_ratio(a: usize, b: usize) -> f64 {
        if a >= b {
            (b..a).map(|i| i as f64 + 0.5).product()
        } else {
            1.0 / (a..b).map(|i| i as f64 + 0.5).product::<f64>()
        }
    }
    let mut lhs = 0.0;
    for j in 0..=l / 2 {
        let poch_over_fact: f64 = (0..j)
            .map(|i| (m + i) as f64 / (i + 1) as f64)
            .product();
        if poch_over_fact == 0.0 {
            continue;
        }
        let g1 = half_ratio(l + 2 * m - j, l + m - j + 1);
        let g2: f64 = ((l - 2 * j + 1)..=(l + 2 * m - 2 * j)).map(|i| i as f64).product();
        lhs += (2 * m + 1 + 2 * l - 4 * j) as f64 * g1 * poch_over_fact * g2;
    }
    let num: f64 = ((l + 1)..=(l + 4 * m)).map(|i| i as f64).product();
    let den: f64 = (1..=m).map(|i| i as f64 - 0.5).product::<f64>() * 16.0f64.powi(m as i32);
    (lhs, 2.0 * num / den)
}
