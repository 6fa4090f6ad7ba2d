//! End-to-end driver: plan construction (dense-Givens or thin-butterfly
//! mode), whole-array sph2fourier / fourier2sph, and naive point-evaluation
//! oracles.
//!
//! A column of order m travels in two steps: Givens chains (and/or a
//! butterfly factorization in thin mode) re-expand it in order m mod 2, then
//! the order-0 part is converted to a cosine series and the order-1 part to a
//! sine series. Even-|m| Fourier columns hold coefficients against cos(ℓθ)
//! in rows ℓ = 0…n; odd-|m| columns hold coefficients against sin((ℓ+1)θ) in
//! rows ℓ = 0…n−1 with the last row exactly zero. Negative orders reuse the
//! |m| pipeline verbatim; the sine/cosine pairing lives in the column order
//! convention of [`crate::coeffs`].

use crate::butterfly::{butterfly_factor, ButterflyFactorization, RankStats};
use crate::cheblegendre::{HodlrPlan, KernelKind};
use crate::coeffs::{parity_shuffle, parity_unshuffle, CoeffKind, CoeffMatrix, ColumnOrder};
use crate::givens::{apply_layer_into, apply_layer_transpose_into, ChainAccumulator, LayerRotations};
use crate::mat::parity_split;
use crate::wire;
use crate::{Error, Result};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanMode {
    /// Rotation chains only: O(n²) storage, O(n³) application over a full
    /// array.
    DenseGivens,
    /// Butterfly factorizations at stride-spaced orders bridged by short
    /// Givens chains.
    ThinButterfly { stride: usize },
}

/// Butterfly factorizations of the parity-shuffled halves of one chain
/// matrix (order → parity).
#[derive(Debug)]
struct OrderButterfly {
    order: usize,
    even_half: ButterflyFactorization,
    odd_half: ButterflyFactorization,
}

/// Pre-computation for transforms at one bandlimit.
#[derive(Debug)]
pub struct SphPlan {
    n: usize,
    tol: f64,
    mode: PlanMode,
    /// Cached rotations for layer µ at index µ (µ = 0 … n−2).
    layers: Vec<LayerRotations>,
    leg0_to_cos: HodlrPlan,
    cos_to_leg0: HodlrPlan,
    leg1_to_sin: Option<HodlrPlan>,
    sin_to_leg1: Option<HodlrPlan>,
    even_factorizations: Vec<OrderButterfly>,
    odd_factorizations: Vec<OrderButterfly>,
}

fn build_layer_cache(n: usize) -> Result<Vec<LayerRotations>> {
    if n >= 2 {
        // the largest denominator over the whole plan is in the last layer;
        // fail fast before allocating the O(n²) cache
        crate::givens::rotation_params(0, n - 2)?;
    }
    let mut layers = Vec::new();
    for mu in 0..n.saturating_sub(1) {
        // layer µ consumes order-(µ+2) vectors of length n−1−µ
        layers.push(LayerRotations::new(mu, n - 1 - mu)?);
    }
    Ok(layers)
}

impl SphPlan {
    pub fn new(n: usize, tol: f64, mode: PlanMode) -> Result<SphPlan> {
        assert!(tol > 0.0 && tol < 1.0);
        let layers = build_layer_cache(n)?;

        let leg0_to_cos = HodlrPlan::build(KernelKind::Leg0ToCos, n, tol);
        let cos_to_leg0 = HodlrPlan::build(KernelKind::CosToLeg0, n, tol);
        let (leg1_to_sin, sin_to_leg1) = if n >= 1 {
            (
                Some(HodlrPlan::build(KernelKind::Leg1ToSin, n - 1, tol)),
                Some(HodlrPlan::build(KernelKind::SinToLeg1, n - 1, tol)),
            )
        } else {
            (None, None)
        };

        let (even_factorizations, odd_factorizations) = match mode {
            PlanMode::DenseGivens => (Vec::new(), Vec::new()),
            PlanMode::ThinButterfly { stride } => {
                assert!(stride >= 1, "stride must be positive");
                let step = (stride + stride % 2).max(2);
                let even_orders: Vec<usize> =
                    (1..).map(|t| t * step).take_while(|&o| o <= n).collect();
                let odd_orders: Vec<usize> = (1..)
                    .map(|t| t * step + 1)
                    .take_while(|&o| o <= n)
                    .collect();
                (
                    build_factorizations(n, 0, &even_orders, tol)?,
                    build_factorizations(n, 1, &odd_orders, tol)?,
                )
            }
        };

        Ok(SphPlan {
            n,
            tol,
            mode,
            layers,
            leg0_to_cos,
            cos_to_leg0,
            leg1_to_sin,
            sin_to_leg1,
            even_factorizations,
            odd_factorizations,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn mode(&self) -> PlanMode {
        self.mode
    }

    /// Aggregate butterfly rank statistics (thin mode; None for dense plans).
    pub fn rank_statistics(&self) -> Option<RankStats> {
        if matches!(self.mode, PlanMode::DenseGivens) {
            return None;
        }
        let mut ranks = Vec::new();
        for ob in self
            .even_factorizations
            .iter()
            .chain(&self.odd_factorizations)
        {
            ranks.extend(ob.even_half.block_ranks());
            ranks.extend(ob.odd_half.block_ranks());
        }
        Some(RankStats::from_ranks(&ranks))
    }

    fn factorization_at_or_below(&self, abs_m: usize) -> Option<&OrderButterfly> {
        let list = if abs_m % 2 == 0 {
            &self.even_factorizations
        } else {
            &self.odd_factorizations
        };
        list.iter().rev().find(|ob| ob.order <= abs_m)
    }

    /// Order abs_m → parity, growing the buffer to length n+1−parity.
    fn reduce_to_parity(&self, abs_m: usize, v: &mut Vec<f64>) {
        let parity = abs_m % 2;
        if abs_m < 2 {
            return;
        }
        let mut order = abs_m;
        if let Some(ob) = self.factorization_at_or_below(abs_m) {
            while order > ob.order {
                let mu = order - 2;
                apply_layer_into(self.layers[mu].params(), v);
                order = mu;
            }
            let (ve, vo) = parity_shuffle(v);
            let we = ob.even_half.apply(&ve);
            let wo = ob.odd_half.apply(&vo);
            *v = parity_unshuffle(&we, &wo);
            return;
        }
        while order > parity {
            let mu = order - 2;
            apply_layer_into(self.layers[mu].params(), v);
            order = mu;
        }
    }

    /// Parity → order abs_m (least-squares lift), shrinking the buffer to
    /// length n+1−abs_m.
    fn lift_to_order(&self, abs_m: usize, v: &mut Vec<f64>) {
        let parity = abs_m % 2;
        if abs_m < 2 {
            return;
        }
        if let Some(ob) = self.factorization_at_or_below(abs_m) {
            let (we, wo) = parity_shuffle(v);
            let ve = ob.even_half.apply_transpose(&we);
            let vo = ob.odd_half.apply_transpose(&wo);
            *v = parity_unshuffle(&ve, &vo);
            let mut order = ob.order;
            while order < abs_m {
                apply_layer_transpose_into(self.layers[order].params(), v);
                order += 2;
            }
            return;
        }
        let mut order = parity;
        while order < abs_m {
            apply_layer_transpose_into(self.layers[order].params(), v);
            order += 2;
        }
    }

    /// Spherical harmonic coefficients → bivariate Fourier coefficients.
    pub fn sph2fourier(&self, f: &CoeffMatrix) -> Result<CoeffMatrix> {
        self.check_input(f, CoeffKind::SphericalHarmonic)?;
        let n = self.n;
        let mut out = CoeffMatrix::zeros(n, CoeffKind::Fourier);
        out.data_mut()
            .par_chunks_mut(n + 1)
            .enumerate()
            .for_each(|(j, out_col)| {
                let co = ColumnOrder::from_column(j);
                let len = n + 1 - co.abs_m;
                let mut v = f.column(j)[..len].to_vec();
                self.reduce_to_parity(co.abs_m, &mut v);
                if co.abs_m % 2 == 0 {
                    let w = self.leg0_to_cos.apply(&v);
                    out_col.copy_from_slice(&w);
                } else {
                    let w = self.leg1_to_sin.as_ref().unwrap().apply(&v);
                    out_col[..n].copy_from_slice(&w);
                    out_col[n] = 0.0;
                }
            });
        Ok(out)
    }

    /// Bivariate Fourier coefficients → spherical harmonic coefficients
    /// (least-squares through the transposed chains).
    pub fn fourier2sph(&self, g: &CoeffMatrix) -> Result<CoeffMatrix> {
        self.check_input(g, CoeffKind::Fourier)?;
        let n = self.n;
        let mut out = CoeffMatrix::zeros(n, CoeffKind::SphericalHarmonic);
        out.data_mut()
            .par_chunks_mut(n + 1)
            .enumerate()
            .for_each(|(j, out_col)| {
                let co = ColumnOrder::from_column(j);
                let len = n + 1 - co.abs_m;
                let mut v = if co.abs_m % 2 == 0 {
                    self.cos_to_leg0.apply(g.column(j))
                } else {
                    self.sin_to_leg1.as_ref().unwrap().apply(&g.column(j)[..n])
                };
                self.lift_to_order(co.abs_m, &mut v);
                debug_assert_eq!(v.len(), len);
                out_col[..len].copy_from_slice(&v);
                for x in out_col[len..].iter_mut() {
                    *x = 0.0;
                }
            });
        Ok(out)
    }

    fn check_input(&self, f: &CoeffMatrix, expected: CoeffKind) -> Result<()> {
        if f.kind() != expected {
            return Err(Error::KindMismatch {
                expected,
                actual: f.kind(),
            });
        }
        if f.n() != self.n {
            return Err(Error::BandlimitMismatch {
                plan_n: self.n,
                input_n: f.n(),
            });
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(b"FSHT");
        wire::put_u32(&mut buf, 1);
        wire::put_u64(&mut buf, self.n as u64);
        wire::put_f64(&mut buf, self.tol);
        match self.mode {
            PlanMode::DenseGivens => {
                wire::put_u32(&mut buf, 0);
                wire::put_u32(&mut buf, 0);
            }
            PlanMode::ThinButterfly { stride } => {
                wire::put_u32(&mut buf, 1);
                wire::put_u32(&mut buf, stride as u32);
            }
        }
        for list in [&self.even_factorizations, &self.odd_factorizations] {
            wire::put_u32(&mut buf, list.len() as u32);
            for ob in list.iter() {
                wire::put_u64(&mut buf, ob.order as u64);
                for half in [&ob.even_half, &ob.odd_half] {
                    let mut section = Vec::new();
                    half.write(&mut section);
                    wire::put_usize(&mut buf, section.len());
                    buf.extend_from_slice(&section);
                }
            }
        }
        for plan in [Some(&self.leg0_to_cos), Some(&self.cos_to_leg0)] {
            write_hodlr_section(&mut buf, plan);
        }
        write_hodlr_section(&mut buf, self.leg1_to_sin.as_ref());
        write_hodlr_section(&mut buf, self.sin_to_leg1.as_ref());
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<SphPlan> {
        let mut rd = wire::Reader::new(bytes);
        rd.magic(b"FSHT")?;
        let version = rd.u32()?;
        if version != 1 {
            return Err(Error::Format(format!("unsupported FSHT version {version}")));
        }
        let n = rd.u64()? as usize;
        let tol = rd.f64()?;
        let mode_tag = rd.u32()?;
        let stride = rd.u32()? as usize;
        let mode = match mode_tag {
            0 => PlanMode::DenseGivens,
            1 => PlanMode::ThinButterfly { stride },
            t => return Err(Error::Format(format!("unknown mode tag {t}"))),
        };
        let mut lists = Vec::with_capacity(2);
        for _ in 0..2 {
            let count = rd.u32()? as usize;
            let mut list = Vec::with_capacity(count);
            for _ in 0..count {
                let order = rd.u64()? as usize;
                let mut halves = Vec::with_capacity(2);
                for _ in 0..2 {
                    let _len = rd.usize()?;
                    halves.push(ButterflyFactorization::read(&mut rd)?);
                }
                let odd_half = halves.pop().unwrap();
                let even_half = halves.pop().unwrap();
                list.push(OrderButterfly {
                    order,
                    even_half,
                    odd_half,
                });
            }
            lists.push(list);
        }
        let odd_factorizations = lists.pop().unwrap();
        let even_factorizations = lists.pop().unwrap();
        let leg0_to_cos =
            read_hodlr_section(&mut rd)?.ok_or_else(|| Error::Format("missing plan".into()))?;
        let cos_to_leg0 =
            read_hodlr_section(&mut rd)?.ok_or_else(|| Error::Format("missing plan".into()))?;
        let leg1_to_sin = read_hodlr_section(&mut rd)?;
        let sin_to_leg1 = read_hodlr_section(&mut rd)?;
        let layers = build_layer_cache(n)?;
        Ok(SphPlan {
            n,
            tol,
            mode,
            layers,
            leg0_to_cos,
            cos_to_leg0,
            leg1_to_sin,
            sin_to_leg1,
            even_factorizations,
            odd_factorizations,
        })
    }

    /// Serialized plan size in bytes.
    pub fn plan_bytes(&self) -> usize {
        self.to_bytes().len()
    }
}

fn write_hodlr_section(buf: &mut Vec<u8>, plan: Option<&HodlrPlan>) {
    match plan {
        None => wire::put_u32(buf, 0),
        Some(p) => {
            wire::put_u32(buf, 1);
            let mut section = Vec::new();
            p.write(&mut section);
            wire::put_usize(buf, section.len());
            buf.extend_from_slice(&section);
        }
    }
}

fn read_hodlr_section(rd: &mut wire::Reader) -> Result<Option<HodlrPlan>> {
    if rd.u32()? == 0 {
        return Ok(None);
    }
    let _len = rd.usize()?;
    Ok(Some(HodlrPlan::read(rd)?))
}

/// Dense chain matrices for the given orders of one parity, butterfly
/// factorized on their parity-shuffled halves. The chain is accumulated
/// incrementally, one layer of column rotations at a time, and snapshotted
/// at each requested order.
fn build_factorizations(
    n: usize,
    parity: usize,
    orders: &[usize],
    tol: f64,
) -> Result<Vec<OrderButterfly>> {
    let mut out = Vec::with_capacity(orders.len());
    if orders.is_empty() {
        return Ok(out);
    }
    let rows = n + 1 - parity;
    let mut acc = ChainAccumulator::identity(n, parity)?;
    for &order in orders {
        while acc.source_order() < order {
            acc.absorb_next_layer()?;
        }
        let chain = acc.snapshot(rows);
        let (ee, oo) = parity_split(&chain);
        out.push(OrderButterfly {
            order,
            even_half: butterfly_factor(&ee, tol),
            odd_half: butterfly_factor(&oo, tol),
        });
    }
    Ok(out)
}

/// Normalized associated Legendre values P̃_ℓ^m(x) for ℓ = m…n, by the
/// stable three-term recurrence in the orthonormal scaling.
fn ptilde_values(m: usize, n: usize, x: f64) -> Vec<f64> {
    let sin_theta = (1.0 - x * x).max(0.0).sqrt();
    let mut double_ratio = 1.0;
    for k in 1..=m {
        double_ratio *= (2 * k - 1) as f64 / (2 * k) as f64;
    }
    let p_mm = ((m as f64 + 0.5) * double_ratio).sqrt() * sin_theta.powi(m as i32);
    let mut vals = Vec::with_capacity(n + 1 - m);
    vals.push(p_mm);
    if n == m {
        return vals;
    }
    let b = |l: usize| {
        (((l - m) * (l + m)) as f64 / ((2 * l - 1) as f64 * (2 * l + 1) as f64)).sqrt()
    };
    vals.push(x * ((2 * m + 3) as f64).sqrt() * p_mm);
    for l in m + 2..=n {
        let prev = vals[l - 1 - m];
        let prev2 = vals[l - 2 - m];
        vals.push((x * prev - b(l - 1) * prev2) / b(l));
    }
    vals
}

/// Naive O(n²) point evaluation of a spherical harmonic expansion in the
/// real longitudinal basis {1/√2, sinφ, cosφ, sin2φ, cos2φ, …}/√π.
pub fn eval_sph_point(f: &CoeffMatrix, theta: f64, phi: f64) -> f64 {
    let n = f.n();
    let x = theta.cos();
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    let mut total = 0.0;
    for j in 0..f.cols() {
        let co = ColumnOrder::from_column(j);
        let vals = ptilde_values(co.abs_m, n, x);
        let col = f.column(j);
        let lat: f64 = col[..n + 1 - co.abs_m]
            .iter()
            .zip(&vals)
            .map(|(c, p)| c * p)
            .sum();
        let lon = if j == 0 {
            inv_sqrt_pi / 2.0f64.sqrt()
        } else if j % 2 == 1 {
            (co.abs_m as f64 * phi).sin() * inv_sqrt_pi
        } else {
            (co.abs_m as f64 * phi).cos() * inv_sqrt_pi
        };
        total += lat * lon;
    }
    total
}

/// Naive point evaluation of the bivariate trigonometric series, with
/// latitudinal basis cos(ℓθ) on even columns and sin((ℓ+1)θ) on odd columns.
pub fn eval_fourier_point(g: &CoeffMatrix, theta: f64, phi: f64) -> f64 {
    let n = g.n();
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    let mut total = 0.0;
    for j in 0..g.cols() {
        let co = ColumnOrder::from_column(j);
        let col = g.column(j);
        let lat: f64 = if co.abs_m % 2 == 0 {
            col.iter()
                .enumerate()
                .map(|(r, c)| c * (r as f64 * theta).cos())
                .sum()
        } else {
            col[..n]
                .iter()
                .enumerate()
                .map(|(r, c)| c * ((r + 1) as f64 * theta).sin())
                .sum()
        };
        let lon = if j == 0 {
            inv_sqrt_pi / 2.0f64.sqrt()
        } else if j % 2 == 1 {
            (co.abs_m as f64 * phi).sin() * inv_sqrt_pi
        } else {
            (co.abs_m as f64 * phi).cos() * inv_sqrt_pi
        };
        total += lat * lon;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandlimit_zero_is_a_scaling() {
        let plan = SphPlan::new(0, f64::EPSILON, PlanMode::DenseGivens).unwrap();
        let mut f = CoeffMatrix::zeros(0, CoeffKind::SphericalHarmonic);
        f.set(0, 0, 3.0);
        let g = plan.sph2fourier(&f).unwrap();
        assert!((g.get(0, 0) - 3.0 / 2.0f64.sqrt()).abs() < 1e-15);
        let back = plan.fourier2sph(&g).unwrap();
        assert!((back.get(0, 0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn constant_function_unit_impulse() {
        let n = 9;
        let plan = SphPlan::new(n, f64::EPSILON, PlanMode::DenseGivens).unwrap();
        let mut f = CoeffMatrix::zeros(n, CoeffKind::SphericalHarmonic);
        f.set(0, 0, 1.0);
        let g = plan.sph2fourier(&f).unwrap();
        assert!((g.get(0, 0) - 0.5f64.sqrt()).abs() < 1e-15);
        let rest: f64 = g.data().iter().map(|v| v.abs()).sum::<f64>() - g.get(0, 0).abs();
        assert_eq!(rest, 0.0);
    }

    #[test]
    fn degree_one_impulse_lands_on_cos_theta() {
        // P̃₁⁰ = √(3/2)·cosθ
        let n = 9;
        let plan = SphPlan::new(n, f64::EPSILON, PlanMode::DenseGivens).unwrap();
        let mut f = CoeffMatrix::zeros(n, CoeffKind::SphericalHarmonic);
        f.set(1, 0, 1.0);
        let g = plan.sph2fourier(&f).unwrap();
        assert!((g.get(1, 0) - 1.5f64.sqrt()).abs() < 1e-14);
        for row in [0usize, 2, 3, 4] {
            assert!(g.get(row, 0).abs() < 1e-15);
        }
    }

    #[test]
    fn kind_and_bandlimit_mismatches_error() {
        let plan = SphPlan::new(4, f64::EPSILON, PlanMode::DenseGivens).unwrap();
        let wrong_kind = CoeffMatrix::zeros(4, CoeffKind::Fourier);
        assert!(matches!(
            plan.sph2fourier(&wrong_kind),
            Err(Error::KindMismatch { .. })
        ));
        let wrong_n = CoeffMatrix::zeros(5, CoeffKind::SphericalHarmonic);
        assert!(matches!(
            plan.sph2fourier(&wrong_n),
            Err(Error::BandlimitMismatch { .. })
        ));
    }

    #[test]
    fn zero_matrix_maps_to_zero() {
        let plan = SphPlan::new(12, f64::EPSILON, PlanMode::DenseGivens).unwrap();
        let g = plan
            .fourier2sph(&CoeffMatrix::zeros(12, CoeffKind::Fourier))
            .unwrap();
        assert!(g.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ptilde_recurrence_closed_forms() {
        // P̃₁⁰(x) = √(3/2)·x at θ = π/3
        let x = (std::f64::consts::PI / 3.0).cos();
        let vals = ptilde_values(0, 3, x);
        assert!((vals[1] - 1.5f64.sqrt() * 0.5).abs() < 1e-15);
        // P̃₁¹(cosθ) = (√3/2)·sinθ
        let vals = ptilde_values(1, 3, x);
        let sin_theta = (std::f64::consts::PI / 3.0).sin();
        assert!((vals[0] - 3.0f64.sqrt() / 2.0 * sin_theta).abs() < 1e-15);
    }

    #[test]
    fn eval_sph_point_constant() {
        let n = 5;
        let mut f = CoeffMatrix::zeros(n, CoeffKind::SphericalHarmonic);
        f.set(0, 0, 1.0);
        let expect = 0.5f64.sqrt() / (2.0 * std::f64::consts::PI).sqrt();
        for &(theta, phi) in &[(0.3, 1.2), (2.1, 4.4), (1.0, 0.0)] {
            assert!((eval_sph_point(&f, theta, phi) - expect).abs() < 1e-15);
        }
    }
}
