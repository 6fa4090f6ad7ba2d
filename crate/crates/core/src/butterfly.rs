//! Multilevel butterfly factorization of a dense matrix satisfying the rank
//! property, and its fast forward/transpose application.
//!
//! The columns are first partitioned into leaf blocks of `leaf_width`
//! columns. Full-height columns of an orthonormal-column matrix are
//! incompressible, so the first level skips compression and instead pairs
//! adjacent blocks, halves the rows, and computes interpolative
//! decompositions; the merge/split step then repeats level by level. The
//! final per-strip skeleton columns are stored densely.

use crate::idfact::{id_fixed_precision, InterpDecomp};
use crate::mat::Mat;
use crate::wire;
use crate::{Error, Result};

/// Default leaf column width: max(8, 2·expected rank) with the expected rank
/// seeded at 16.
pub const DEFAULT_LEAF_WIDTH: usize = 32;

#[derive(Clone, Debug)]
enum BlockKind {
    /// Fresh interpolative decomposition of the two parents' skeleton
    /// columns restricted to this row strip.
    Id {
        left_len: usize,
        right_len: usize,
        id: InterpDecomp,
    },
    /// Unpaired rightmost group promoted unchanged from the previous level.
    Lone,
}

#[derive(Clone, Debug)]
struct Block {
    rows: (usize, usize),
    /// Source-matrix indices of the surviving skeleton columns.
    skel_global: Vec<usize>,
    kind: BlockKind,
}

#[derive(Clone, Debug)]
struct Level {
    nstrips: usize,
    ngroups: usize,
    blocks: Vec<Block>, // index: strip * ngroups + group
}

#[derive(Clone, Debug)]
struct FinalStrip {
    rows: (usize, usize),
    skel_global: Vec<usize>,
    cols: Mat, // dense skeleton columns restricted to the strip
}

#[derive(Clone, Debug)]
pub struct ButterflyFactorization {
    nrows: usize,
    ncols: usize,
    leaf_width: usize,
    tol: f64,
    col_blocks: Vec<(usize, usize)>,
    levels: Vec<Level>,
    finals: Vec<FinalStrip>,
}

/// Aggregate numerical-rank statistics over the interpolation blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct RankStats {
    pub avg: f64,
    pub std: f64,
    pub max: usize,
    /// (level, mean rank) pairs, level numbering starting at 1.
    pub per_level: Vec<(usize, f64)>,
}

impl RankStats {
    pub fn from_ranks(ranks: &[(usize, usize)]) -> RankStats {
        if ranks.is_empty() {
            return RankStats {
                avg: 0.0,
                std: 0.0,
                max: 0,
                per_level: Vec::new(),
            };
        }
        let n = ranks.len() as f64;
        let avg = ranks.iter().map(|&(_, k)| k as f64).sum::<f64>() / n;
        let var = ranks
            .iter()
            .map(|&(_, k)| (k as f64 - avg).powi(2))
            .sum::<f64>()
            / n;
        let max = ranks.iter().map(|&(_, k)| k).max().unwrap();
        let mut per_level = Vec::new();
        let max_level = ranks.iter().map(|&(l, _)| l).max().unwrap();
        for level in 1..=max_level {
            let lv: Vec<usize> = ranks
                .iter()
                .filter(|&&(l, _)| l == level)
                .map(|&(_, k)| k)
                .collect();
            if !lv.is_empty() {
                per_level.push((
                    level,
                    lv.iter().sum::<usize>() as f64 / lv.len() as f64,
                ));
            }
        }
        RankStats {
            avg,
            std: var.sqrt(),
            max,
            per_level,
        }
    }
}

/// Butterfly-factorize a dense matrix with the default leaf width.
pub fn butterfly_factor(a: &Mat, tol: f64) -> ButterflyFactorization {
    butterfly_factor_with(a, tol, DEFAULT_LEAF_WIDTH)
}

pub fn butterfly_factor_with(a: &Mat, tol: f64, leaf_width: usize) -> ButterflyFactorization {
    assert!(leaf_width >= 1);
    let r = a.rows();
    let c = a.cols();
    let nblocks = c.div_ceil(leaf_width);
    let col_blocks: Vec<(usize, usize)> = (0..nblocks)
        .map(|i| (i * leaf_width, ((i + 1) * leaf_width).min(c)))
        .collect();

    // Levels: one per column-pair merge; capped so every final strip keeps at
    // least one row. Empty or single-block matrices stay dense.
    let nlevels = if r == 0 || nblocks <= 1 {
        0
    } else {
        let from_cols = nblocks.next_power_of_two().trailing_zeros() as usize;
        let from_rows = usize::BITS as usize - 1 - r.leading_zeros() as usize;
        from_cols.min(from_rows)
    };

    if nlevels == 0 {
        // Degenerate: keep a single dense block.
        let skel: Vec<usize> = (0..c).collect();
        return ButterflyFactorization {
            nrows: r,
            ncols: c,
            leaf_width,
            tol,
            col_blocks,
            levels: Vec::new(),
            finals: vec![FinalStrip {
                rows: (0, r),
                skel_global: skel.clone(),
                cols: a.gather(0, r, &skel),
            }],
        };
    }

    let mut strips: Vec<(usize, usize)> = vec![(0, r)];
    let mut skels: Vec<Vec<usize>> = col_blocks
        .iter()
        .map(|&(s, e)| (s..e).collect())
        .collect();
    let mut ng = nblocks;
    let mut levels = Vec::with_capacity(nlevels);

    for _ in 0..nlevels {
        let mut new_strips = Vec::with_capacity(2 * strips.len());
        for &(s0, s1) in &strips {
            let mid = s0 + (s1 - s0).div_ceil(2);
            new_strips.push((s0, mid));
            new_strips.push((mid, s1));
        }
        let new_ng = ng.div_ceil(2);
        let mut blocks = Vec::with_capacity(new_strips.len() * new_ng);
        let mut new_skels = Vec::with_capacity(blocks.capacity());
        for (s, &rows) in new_strips.iter().enumerate() {
            let t = s / 2;
            for g in 0..new_ng {
                if 2 * g + 1 < ng {
                    let left = &skels[t * ng + 2 * g];
                    let right = &skels[t * ng + 2 * g + 1];
                    let mut cols = Vec::with_capacity(left.len() + right.len());
                    cols.extend_from_slice(left);
                    cols.extend_from_slice(right);
                    let sub = a.gather(rows.0, rows.1, &cols);
                    let id = id_fixed_precision(&sub, tol);
                    let skel_global: Vec<usize> =
                        id.skeleton().iter().map(|&i| cols[i]).collect();
                    new_skels.push(skel_global.clone());
                    blocks.push(Block {
                        rows,
                        skel_global,
                        kind: BlockKind::Id {
                            left_len: left.len(),
                            right_len: right.len(),
                            id,
                        },
                    });
                } else {
                    let parent = skels[t * ng + 2 * g].clone();
                    new_skels.push(parent.clone());
                    blocks.push(Block {
                        rows,
                        skel_global: parent,
                        kind: BlockKind::Lone,
                    });
                }
            }
        }
        levels.push(Level {
            nstrips: new_strips.len(),
            ngroups: new_ng,
            blocks,
        });
        strips = new_strips;
        skels = new_skels;
        ng = new_ng;
    }

    debug_assert_eq!(ng, 1);
    let finals = strips
        .iter()
        .enumerate()
        .map(|(s, &rows)| {
            let skel = skels[s].clone();
            FinalStrip {
                rows,
                cols: a.gather(rows.0, rows.1, &skel),
                skel_global: skel,
            }
        })
        .collect();

    ButterflyFactorization {
        nrows: r,
        ncols: c,
        leaf_width,
        tol,
        col_blocks,
        levels,
        finals,
    }
}

impl ButterflyFactorization {
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    pub fn leaf_width(&self) -> usize {
        self.leaf_width
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// (level, rank) of every interpolation block, level numbering from 1.
    pub fn block_ranks(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (li, level) in self.levels.iter().enumerate() {
            for block in &level.blocks {
                if let BlockKind::Id { id, .. } = &block.kind {
                    out.push((li + 1, id.rank()));
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.ncols);
        let mut out = vec![0.0; self.nrows];
        if self.levels.is_empty() {
            let f = &self.finals[0];
            let gathered: Vec<f64> = f.skel_global.iter().map(|&j| v[j]).collect();
            f.cols.matvec_acc(&gathered, &mut out);
            return out;
        }
        let mut u: Vec<Vec<f64>> = self
            .col_blocks
            .iter()
            .map(|&(s, e)| v[s..e].to_vec())
            .collect();
        let mut ng = self.col_blocks.len();
        for level in &self.levels {
            let mut nu = Vec::with_capacity(level.blocks.len());
            for (idx, block) in level.blocks.iter().enumerate() {
                let s = idx / level.ngroups;
                let g = idx % level.ngroups;
                let t = s / 2;
                match &block.kind {
                    BlockKind::Id {
                        left_len,
                        right_len,
                        id,
                    } => {
                        let lu = &u[t * ng + 2 * g];
                        let ru = &u[t * ng + 2 * g + 1];
                        debug_assert_eq!(lu.len(), *left_len);
                        debug_assert_eq!(ru.len(), *right_len);
                        let mut x = Vec::with_capacity(left_len + right_len);
                        x.extend_from_slice(lu);
                        x.extend_from_slice(ru);
                        nu.push(id.apply_interp(&x));
                    }
                    BlockKind::Lone => nu.push(u[t * ng + 2 * g].clone()),
                }
            }
            u = nu;
            ng = level.ngroups;
        }
        for (s, f) in self.finals.iter().enumerate() {
            f.cols.matvec_acc(&u[s], &mut out[f.rows.0..f.rows.1]);
        }
        out
    }

    pub fn apply_transpose(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.nrows);
        let mut out = vec![0.0; self.ncols];
        if self.levels.is_empty() {
            let f = &self.finals[0];
            let u = f.cols.matvec_t(&w[f.rows.0..f.rows.1]);
            for (i, &j) in f.skel_global.iter().enumerate() {
                out[j] += u[i];
            }
            return out;
        }
        let mut u: Vec<Vec<f64>> = self
            .finals
            .iter()
            .map(|f| f.cols.matvec_t(&w[f.rows.0..f.rows.1]))
            .collect();
        for (li, level) in self.levels.iter().enumerate().rev() {
            let (prev_nstrips, prev_ng) = if li == 0 {
                (1, self.col_blocks.len())
            } else {
                (self.levels[li - 1].nstrips, self.levels[li - 1].ngroups)
            };
            // parent vector lengths
            let mut sizes = vec![0usize; prev_nstrips * prev_ng];
            for (idx, block) in level.blocks.iter().enumerate() {
                let s = idx / level.ngroups;
                let g = idx % level.ngroups;
                let t = s / 2;
                match &block.kind {
                    BlockKind::Id {
                        left_len,
                        right_len,
                        ..
                    } => {
                        sizes[t * prev_ng + 2 * g] = *left_len;
                        sizes[t * prev_ng + 2 * g + 1] = *right_len;
                    }
                    BlockKind::Lone => {
                        sizes[t * prev_ng + 2 * g] = block.skel_global.len();
                    }
                }
            }
            let mut prev: Vec<Vec<f64>> = sizes.into_iter().map(|n| vec![0.0; n]).collect();
            for (idx, block) in level.blocks.iter().enumerate() {
                let s = idx / level.ngroups;
                let g = idx % level.ngroups;
                let t = s / 2;
                match &block.kind {
                    BlockKind::Id {
                        left_len, id, ..
                    } => {
                        let y = id.apply_interp_transpose(&u[idx]);
                        let (yl, yr) = y.split_at(*left_len);
                        for (dst, &src) in prev[t * prev_ng + 2 * g].iter_mut().zip(yl) {
                            *dst += src;
                        }
                        for (dst, &src) in prev[t * prev_ng + 2 * g + 1].iter_mut().zip(yr) {
                            *dst += src;
                        }
                    }
                    BlockKind::Lone => {
                        for (dst, &src) in prev[t * prev_ng + 2 * g].iter_mut().zip(&u[idx]) {
                            *dst += src;
                        }
                    }
                }
            }
            u = prev;
        }
        for (g, &(s, e)) in self.col_blocks.iter().enumerate() {
            for (dst, &src) in out[s..e].iter_mut().zip(&u[g]) {
                *dst += src;
            }
        }
        out
    }

    /// Multiply-add count of one forward application.
    pub fn apply_flops(&self) -> usize {
        let mut flops = 0;
        for level in &self.levels {
            for block in &level.blocks {
                if let BlockKind::Id { id, .. } = &block.kind {
                    flops += 2 * id.rank() * (id.ncols() - id.rank());
                }
            }
        }
        for f in &self.finals {
            flops += 2 * (f.rows.1 - f.rows.0) * f.skel_global.len();
        }
        flops
    }

    /// Multiply-add count of the dense multiply it replaces.
    pub fn dense_flops(&self) -> usize {
        2 * self.nrows * self.ncols
    }

    /// Serialized size in bytes (the storage the plan file pays).
    pub fn storage_bytes(&self) -> usize {
        let mut buf = Vec::new();
        self.write(&mut buf);
        buf.len()
    }

    pub(crate) fn write(&self, buf: &mut Vec<u8>) {
        wire::put_usize(buf, self.nrows);
        wire::put_usize(buf, self.ncols);
        wire::put_usize(buf, self.leaf_width);
        wire::put_f64(buf, self.tol);
        wire::put_usize(buf, self.col_blocks.len());
        for &(s, e) in &self.col_blocks {
            wire::put_usize(buf, s);
            wire::put_usize(buf, e);
        }
        wire::put_usize(buf, self.levels.len());
        for (li, level) in self.levels.iter().enumerate() {
            wire::put_usize(buf, li + 1);
            wire::put_usize(buf, level.nstrips);
            wire::put_usize(buf, level.ngroups);
            for block in &level.blocks {
                wire::put_usize(buf, block.rows.0);
                wire::put_usize(buf, block.rows.1);
                match &block.kind {
                    BlockKind::Id {
                        left_len,
                        right_len,
                        id,
                    } => {
                        wire::put_u32(buf, 0);
                        wire::put_usize(buf, *left_len);
                        wire::put_usize(buf, *right_len);
                        wire::put_usize(buf, id.rank());
                        id.write(buf);
                    }
                    BlockKind::Lone => wire::put_u32(buf, 1),
                }
                wire::put_usize_slice(buf, &block.skel_global);
            }
        }
        wire::put_usize(buf, self.finals.len());
        for f in &self.finals {
            wire::put_usize(buf, f.rows.0);
            wire::put_usize(buf, f.rows.1);
            wire::put_usize_slice(buf, &f.skel_global);
            wire::put_usize(buf, f.cols.rows());
            wire::put_usize(buf, f.cols.cols());
            for &v in f.cols.data() {
                wire::put_f64(buf, v);
            }
        }
    }

    pub(crate) fn read(rd: &mut wire::Reader) -> Result<Self> {
        let nrows = rd.usize()?;
        let ncols = rd.usize()?;
        let leaf_width = rd.usize()?;
        let tol = rd.f64()?;
        let nb = rd.usize()?;
        let mut col_blocks = Vec::with_capacity(nb);
        for _ in 0..nb {
            col_blocks.push((rd.usize()?, rd.usize()?));
        }
        let nlevels = rd.usize()?;
        let mut levels = Vec::with_capacity(nlevels);
        for _ in 0..nlevels {
            let _level_no = rd.usize()?;
            let nstrips = rd.usize()?;
            let ngroups = rd.usize()?;
            let mut blocks = Vec::with_capacity(nstrips * ngroups);
            for _ in 0..nstrips * ngroups {
                let rows = (rd.usize()?, rd.usize()?);
                let tag = rd.u32()?;
                let kind = match tag {
                    0 => {
                        let left_len = rd.usize()?;
                        let right_len = rd.usize()?;
                        let _k = rd.usize()?;
                        let id = InterpDecomp::read(rd)?;
                        BlockKind::Id {
                            left_len,
                            right_len,
                            id,
                        }
                    }
                    1 => BlockKind::Lone,
                    _ => return Err(Error::Format("bad butterfly block tag".into())),
                };
                let skel_global = rd.usize_vec()?;
                blocks.push(Block {
                    rows,
                    skel_global,
                    kind,
                });
            }
            levels.push(Level {
                nstrips,
                ngroups,
                blocks,
            });
        }
        let nfinals = rd.usize()?;
        let mut finals = Vec::with_capacity(nfinals);
        for _ in 0..nfinals {
            let rows = (rd.usize()?, rd.usize()?);
            let skel_global = rd.usize_vec()?;
            let cr = rd.usize()?;
            let cc = rd.usize()?;
            let mut data = Vec::with_capacity(cr * cc);
            for _ in 0..cr * cc {
                data.push(rd.f64()?);
            }
            finals.push(FinalStrip {
                rows,
                skel_global,
                cols: Mat::from_raw(cr, cc, data),
            });
        }
        Ok(ButterflyFactorization {
            nrows,
            ncols,
            leaf_width,
            tol,
            col_blocks,
            levels,
            finals,
        })
    }
}

/// Rank statistics of one factorization.
pub fn rank_statistics(f: &ButterflyFactorization) -> RankStats {
    RankStats::from_ranks(&f.block_ranks())
}
