//! Littlewood-Paley decomposition and nonhomogeneous Besov norms.
//!
//! The low-pass symbol chi is the classical smooth step: 1 on |xi| <= 3/4,
//! 0 on |xi| >= 4/3. The annular symbols are telescoped differences
//! theta_j(xi) = chi(2^{-j-1} xi) - chi(2^{-j} xi), so the partition of unity
//! chi + sum_j theta_j = chi(2^{-j_max-1} xi) = 1 holds to round-off at every
//! lattice point by construction.
//!
//! `j_max` is the smallest J for which the telescoped sum closes at the
//! lattice corner, i.e. (3/4) 2^{J+1} >= max |xi|. Rings with larger j than
//! the last fully-resolved annulus are still stored; they act on the
//! (dealiased) corner region and are required for the partition to close.
//! Experiment feasibility (a wave packet's band fitting inside the dealiased
//! lattice) is checked separately by the profile builder.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec;
use crate::field::{SpectralField, VectorField};
use crate::grid::{Grid, MAX_DIM};
use crate::step::SmoothStep;

/// The chi plateau edge and support edge.
pub const CHI_PLATEAU: f64 = 0.75;
pub const CHI_SUPPORT: f64 = 4.0 / 3.0;

/// A Fourier symbol stored sparsely: strictly increasing flat lattice
/// indices and the symbol value at each.
pub struct SparseSym {
    pub idx: Vec<u32>,
    pub val: Vec<f64>,
}

impl SparseSym {
    fn new() -> Self {
        SparseSym { idx: Vec::new(), val: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    /// sum over entries of val^2 |c(idx)|^2 (deterministic chunked).
    fn weighted_l2sq(&self, c: &[Complex64]) -> f64 {
        exec::sum_ranges(self.len(), |range| {
            let mut s = 0.0;
            let mut comp = 0.0;
            for e in range {
                let v = self.val[e];
                let x = v * v * c[self.idx[e] as usize].norm_sqr();
                let t = s + x;
                comp += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
                s = t;
            }
            s + comp
        })
    }

    /// out(idx) = val * u(idx), everything else zero.
    fn apply(&self, u: &SpectralField) -> SpectralField {
        let mut out = SpectralField::zero(u.grid.clone());
        // Scattered writes at strictly increasing indices; sequential is
        // simple and this path only materializes a handful of blocks per
        // experiment (the p=2 norm path never calls it).
        for e in 0..self.len() {
            let i = self.idx[e] as usize;
            out.c[i] = self.val[e] * u.c[i];
        }
        out
    }
}

/// Littlewood-Paley symbol set for one grid.
pub struct LpSymbols {
    pub grid: Arc<Grid>,
    /// chi(xi) at scale 0 (the j = -1 block).
    pub chi: SparseSym,
    /// theta_j for j = 0..=j_max.
    pub rings: Vec<SparseSym>,
    pub j_max: i32,
}

/// The chi step shared by every symbol evaluation.
fn chi_step() -> SmoothStep {
    SmoothStep { a: CHI_PLATEAU, b: CHI_SUPPORT, sharpness: 1.0 }
}

/// Evaluate chi(2^{-j} xi) at radius r = |xi|.
fn chi_at(r: f64, j: i32) -> f64 {
    chi_step().eval(r * 2f64.powi(-j))
}

/// Build the symbol set: one pass over the lattice, assigning each point
/// its chi value and its (at most two) nonzero ring values.
pub fn build_lp_symbols(grid: &Arc<Grid>) -> Result<LpSymbols> {
    let j_max = grid.j_top;
    if j_max < 1 {
        return Err(Error::InvalidGrid(format!(
            "grid too coarse for a Littlewood-Paley decomposition (j_max = {j_max})"
        )));
    }
    let dim = grid.dim();
    let mut chi = SparseSym::new();
    let mut rings: Vec<SparseSym> = (0..=j_max).map(|_| SparseSym::new()).collect();

    let mut idx = [0usize; MAX_DIM];
    for flat in 0..grid.total() {
        grid.decode(flat, &mut idx);
        let mut r2 = 0.0;
        for a in 0..dim {
            r2 += grid.xi2[a][idx[a]];
        }
        let r = r2.sqrt();
        let c0 = chi_at(r, 0);
        if c0 != 0.0 {
            chi.idx.push(flat as u32);
            chi.val.push(c0);
        }
        // theta_j = chi(2^{-j-1} xi) - chi(2^{-j} xi) is nonzero only for
        // 3/4  2^j < r < 4/3 2^{j+1}.
        for j in 0..=j_max {
            let lo = CHI_PLATEAU * 2f64.powi(j);
            let hi = CHI_SUPPORT * 2f64.powi(j + 1);
            if r > lo && r < hi {
                let v = chi_at(r, j + 1) - chi_at(r, j);
                if v != 0.0 {
                    rings[j as usize].idx.push(flat as u32);
                    rings[j as usize].val.push(v);
                }
            }
        }
    }
    Ok(LpSymbols { grid: grid.clone(), chi, rings, j_max })
}

impl LpSymbols {
    fn check_grid(&self, g: &Grid, what: &str) -> Result<()> {
        self.grid.check_same(g, what)
    }

    /// Delta_j u. j <= -2 gives the zero field; j = -1 applies chi;
    /// 0 <= j <= j_max applies theta_j; larger j is an error.
    pub fn dyadic_block(&self, u: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check_grid(&u.grid, "dyadic_block")?;
        if j <= -2 {
            return Ok(SpectralField::zero(u.grid.clone()));
        }
        if j == -1 {
            return Ok(self.chi.apply(u));
        }
        if j > self.j_max {
            return Err(Error::JRange(format!("j = {j} exceeds j_max = {}", self.j_max)));
        }
        Ok(self.rings[j as usize].apply(u))
    }

    /// S_j u = sum_{j' < j} Delta_{j'} u, realized as the multiplier
    /// chi(2^{-j} xi). j <= -1 gives the zero field (empty sum);
    /// 0 <= j <= j_max + 1 applies the dilated chi; larger j is an error.
    pub fn low_freq_cutoff(&self, u: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check_grid(&u.grid, "low_freq_cutoff")?;
        if j <= -1 {
            return Ok(SpectralField::zero(u.grid.clone()));
        }
        if j > self.j_max + 1 {
            return Err(Error::JRange(format!(
                "S_j index {j} exceeds j_max + 1 = {}",
                self.j_max + 1
            )));
        }
        Ok(u.apply_multiplier(|xi: &[f64]| {
            let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
            chi_at(r, j)
        }))
    }

    /// ||Delta_j u||_{L^2} by Parseval on the sparse symbol (no field
    /// materialization).
    pub fn block_l2(&self, u: &SpectralField, j: i32) -> f64 {
        let v = self.grid.volume();
        let s = match j {
            j if j <= -2 => 0.0,
            -1 => self.chi.weighted_l2sq(&u.c),
            _ => {
                debug_assert!(j <= self.j_max);
                self.rings[j as usize].weighted_l2sq(&u.c)
            }
        };
        (v * s).sqrt()
    }

    /// Vector version: sqrt(sum_i ||Delta_j u_i||^2).
    pub fn block_l2_vec(&self, u: &VectorField, j: i32) -> f64 {
        let v = self.grid.volume();
        let s: f64 = u
            .comps
            .iter()
            .map(|c| match j {
                j if j <= -2 => 0.0,
                -1 => self.chi.weighted_l2sq(&c.c),
                _ => self.rings[j as usize].weighted_l2sq(&c.c),
            })
            .sum();
        (v * s).sqrt()
    }
}

/// Nonhomogeneous Besov index (s, p, r). `p` and `r` may be
/// `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovIndex {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, r: f64) -> Self {
        BesovIndex { s, p, r }
    }

    /// The well/ill-posedness threshold condition on (s, p, r) in dimension
    /// d: s > max{1 + d/p, 3/2}, or the endpoint p < 2d, r = 1,
    /// s = 1 + d/p. Returns an error naming the violated inequality.
    pub fn admissible(&self, d: usize) -> Result<()> {
        if !(self.p >= 1.0) || !(self.r >= 1.0) {
            return Err(Error::Inadmissible(format!(
                "p and r must lie in [1, inf]; got p = {}, r = {}",
                self.p, self.r
            )));
        }
        let dp = d as f64 / self.p; // d/p, 0 when p = inf
        let threshold = (1.0 + dp).max(1.5);
        if self.s > threshold {
            return Ok(());
        }
        if self.p < 2.0 * d as f64 && self.r == 1.0 && self.s == 1.0 + dp {
            return Ok(());
        }
        Err(Error::Inadmissible(format!(
            "need s > max(1 + d/p, 3/2) = {} or (p < {}, r = 1, s = {}); got (s, p, r) = ({}, {}, {})",
            threshold,
            2 * d,
            1.0 + dp,
            self.s,
            self.p,
            self.r
        )))
    }
}

/// ell^r aggregation of the weighted block norms 2^{js} t_j.
/// `ell^r` aggregation of weighted block terms (`r = inf` takes the sup).
pub fn lr_aggregate(terms: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        return terms.iter().copied().fold(0.0, f64::max);
    }
    if (r - 1.0).abs() < 1e-14 {
        return exec::kahan_sum(terms.iter().copied());
    }
    if (r - 2.0).abs() < 1e-14 {
        return exec::kahan_sum(terms.iter().map(|t| t * t)).sqrt();
    }
    exec::kahan_sum(terms.iter().map(|t| t.powf(r))).powf(1.0 / r)
}

/// Per-block weighted norms 2^{js} ||Delta_j u||_{L^p} for j = -1..=j_max.
pub fn block_terms(u: &SpectralField, idx: &BesovIndex, sym: &LpSymbols) -> Result<Vec<f64>> {
    sym.grid.check_same(&u.grid, "besov_norm")?;
    let mut terms = Vec::with_capacity((sym.j_max + 2) as usize);
    let two_sided = (idx.p - 2.0).abs() < 1e-14;
    for j in -1..=sym.j_max {
        let lp = if two_sided {
            sym.block_l2(u, j)
        } else {
            let blk = sym.dyadic_block(u, j)?;
            blk.lp_norm(idx.p)
        };
        terms.push(2f64.powf(j as f64 * idx.s) * lp);
    }
    Ok(terms)
}

/// Vector-field version of [`block_terms`].
pub fn block_terms_vec(u: &VectorField, idx: &BesovIndex, sym: &LpSymbols) -> Result<Vec<f64>> {
    sym.grid.check_same(u.grid(), "besov_norm")?;
    let mut terms = Vec::with_capacity((sym.j_max + 2) as usize);
    let two_sided = (idx.p - 2.0).abs() < 1e-14;
    for j in -1..=sym.j_max {
        let lp = if two_sided {
            sym.block_l2_vec(u, j)
        } else {
            let comps: Result<Vec<_>> =
                u.comps.iter().map(|c| sym.dyadic_block(c, j)).collect();
            VectorField { comps: comps? }.lp_norm(idx.p)
        };
        terms.push(2f64.powf(j as f64 * idx.s) * lp);
    }
    Ok(terms)
}

/// Nonhomogeneous Besov norm of a scalar field.
pub fn besov_norm(u: &SpectralField, idx: &BesovIndex, sym: &LpSymbols) -> Result<f64> {
    Ok(lr_aggregate(&block_terms(u, idx, sym)?, idx.r))
}

/// Nonhomogeneous Besov norm of a vector field.
pub fn besov_norm_vec(u: &VectorField, idx: &BesovIndex, sym: &LpSymbols) -> Result<f64> {
    Ok(lr_aggregate(&block_terms_vec(u, idx, sym)?, idx.r))
}

/// Commutator [Delta_j, v] . grad f = Delta_j(v . grad f) - v . Delta_j grad f,
/// with every product dealiased.
pub fn commutator(
    v: &VectorField,
    f: &SpectralField,
    j: i32,
    sym: &LpSymbols,
) -> Result<SpectralField> {
    sym.grid.check_same(v.grid(), "commutator")?;
    sym.grid.check_same(&f.grid, "commutator")?;
    let grad = f.gradient()?;
    let mut conv = SpectralField::zero(f.grid.clone());
    let mut blocked = SpectralField::zero(f.grid.clone());
    for a in 0..v.dim() {
        let t1 = v.comps[a].pointwise_product(&grad.comps[a])?;
        conv = conv.add(&t1)?;
        let t2 = v.comps[a].pointwise_product(&sym.dyadic_block(&grad.comps[a], j)?)?;
        blocked = blocked.add(&t2)?;
    }
    sym.dyadic_block(&conv, j)?.sub(&blocked)
}

/// Axis-aligned sub-box in physical coordinates (inclusive bounds).
#[derive(Debug, Clone)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// L^p norm by uniform-grid quadrature, optionally restricted to a sub-box.
/// `p = f64::INFINITY` returns the grid max of |u| (over the region).
pub fn lp_norm(u: &SpectralField, p: f64, region: Option<&Region>) -> Result<f64> {
    let Some(reg) = region else {
        return Ok(u.lp_norm(p));
    };
    let grid = &u.grid;
    let dim = grid.dim();
    if reg.lo.len() != dim || reg.hi.len() != dim {
        return Err(Error::InvalidGrid(format!(
            "region has {} bounds, grid has dim {dim}",
            reg.lo.len()
        )));
    }
    // Per-axis index ranges [start, end) with coord in [lo, hi].
    let mut starts = vec![0usize; dim];
    let mut ends = vec![0usize; dim];
    for a in 0..dim {
        let n = grid.sizes[a];
        let mut s = n;
        let mut e = 0;
        for i in 0..n {
            let x = grid.coord(a, i);
            if x >= reg.lo[a] && x <= reg.hi[a] {
                if i < s {
                    s = i;
                }
                e = i + 1;
            }
        }
        if s >= e {
            return Err(Error::InvalidGrid(format!(
                "empty region on axis {a}: [{}, {}] contains no lattice point",
                reg.lo[a], reg.hi[a]
            )));
        }
        starts[a] = s;
        ends[a] = e;
    }
    let phys = u.to_physical_complex();
    let mut idx = [0usize; MAX_DIM];
    let mut acc: Vec<f64> = Vec::new();
    // Region volumes are small in practice; a sequential walk in flat order
    // keeps the reduction deterministic.
    let total = grid.total();
    let mut sup = 0.0f64;
    for flat in 0..total {
        grid.decode(flat, &mut idx);
        let mut inside = true;
        for a in 0..dim {
            if idx[a] < starts[a] || idx[a] >= ends[a] {
                inside = false;
                break;
            }
        }
        if !inside {
            continue;
        }
        let m = phys[flat].re.abs();
        if p.is_infinite() {
            if m > sup {
                sup = m;
            }
        } else if (p - 2.0).abs() < 1e-14 {
            acc.push(m * m);
        } else if (p - 1.0).abs() < 1e-14 {
            acc.push(m);
        } else {
            acc.push(m.powf(p));
        }
    }
    if p.is_infinite() {
        return Ok(sup);
    }
    let dv = grid.cell_volume();
    Ok((dv * exec::kahan_sum(acc.into_iter())).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    fn test_grid() -> Arc<Grid> {
        // 2*pi box: integer frequencies, corner at |xi| ~ 45, j_max = 5..6
        make_grid(2, &[2.0 * PI, 2.0 * PI], &[64, 64]).unwrap()
    }

    #[test]
    fn partition_of_unity_closes() {
        let g = test_grid();
        let sym = build_lp_symbols(&g).unwrap();
        let mut sums = vec![0.0f64; g.total()];
        for e in 0..sym.chi.len() {
            sums[sym.chi.idx[e] as usize] += sym.chi.val[e];
        }
        for ring in &sym.rings {
            for e in 0..ring.len() {
                sums[ring.idx[e] as usize] += ring.val[e];
            }
        }
        let worst = sums.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-14, "partition residual {worst}");
    }

    #[test]
    fn rings_vanish_outside_their_annulus_and_are_one_on_plateau() {
        let g = test_grid();
        let sym = build_lp_symbols(&g).unwrap();
        // j = 3: plateau for 4/3*8 <= r <= 3/2*8
        let j = 3usize;
        let mut idx = [0usize; MAX_DIM];
        let mut dense = vec![0.0f64; g.total()];
        for e in 0..sym.rings[j].len() {
            dense[sym.rings[j].idx[e] as usize] = sym.rings[j].val[e];
        }
        for flat in 0..g.total() {
            g.decode(flat, &mut idx);
            let r = (g.xi2[0][idx[0]] + g.xi2[1][idx[1]]).sqrt();
            let v = dense[flat];
            let lo = 0.75 * 8.0;
            let hi = 8.0 / 3.0 * 8.0;
            if r < lo - 1e-12 || r > hi + 1e-12 {
                assert_eq!(v, 0.0, "ring leaks at r = {r}");
            }
            if r >= 4.0 / 3.0 * 8.0 && r <= 1.5 * 8.0 {
                assert!((v - 1.0).abs() < 1e-15, "plateau miss at r = {r}: {v}");
            }
        }
    }

    #[test]
    fn almost_orthogonality() {
        let g = test_grid();
        let sym = build_lp_symbols(&g).unwrap();
        // theta_j * theta_j' = 0 for |j - j'| >= 2; chi * theta_j = 0 for j >= 1
        let mut dense: Vec<Vec<f64>> = Vec::new();
        for ring in &sym.rings {
            let mut d = vec![0.0f64; g.total()];
            for e in 0..ring.len() {
                d[ring.idx[e] as usize] = ring.val[e];
            }
            dense.push(d);
        }
        let mut chi_dense = vec![0.0f64; g.total()];
        for e in 0..sym.chi.len() {
            chi_dense[sym.chi.idx[e] as usize] = sym.chi.val[e];
        }
        for j in 0..dense.len() {
            for jp in 0..dense.len() {
                if (j as i32 - jp as i32).abs() >= 2 {
                    let overlap: f64 =
                        dense[j].iter().zip(&dense[jp]).map(|(a, b)| (a * b).abs()).sum();
                    assert_eq!(overlap, 0.0, "rings {j} and {jp} overlap");
                }
            }
            if j >= 1 {
                let overlap: f64 =
                    chi_dense.iter().zip(&dense[j]).map(|(a, b)| (a * b).abs()).sum();
                assert_eq!(overlap, 0.0, "chi overlaps ring {j}");
            }
        }
    }

    #[test]
    fn blocks_reconstruct_band_limited_fields() {
        let g = test_grid();
        let sym = build_lp_symbols(&g).unwrap();
        let mut u = SpectralField::zero(g.clone());
        // scatter some Hermitian content inside the dealias cutoff
        let put = |u: &mut SpectralField, k0: i64, k1: i64, re: f64, im: f64| {
            let n0 = g.sizes[0] as i64;
            let n1 = g.sizes[1] as i64;
            let i0 = k0.rem_euclid(n0) as usize;
            let i1 = k1.rem_euclid(n1) as usize;
            let j0 = (-k0).rem_euclid(n0) as usize;
            let j1 = (-k1).rem_euclid(n1) as usize;
            u.c[i0 + g.sizes[0] * i1] = Complex64::new(re, im);
            u.c[j0 + g.sizes[0] * j1] = Complex64::new(re, -im);
        };
        put(&mut u, 1, 0, 0.3, 0.1);
        put(&mut u, 5, 2, -0.2, 0.05);
        put(&mut u, 12, -7, 0.07, -0.3);
        put(&mut u, 19, 3, 0.11, 0.0);
        let mut sum = SpectralField::zero(g.clone());
        for j in -1..=sym.j_max {
            sum = sum.add(&sym.dyadic_block(&u, j).unwrap()).unwrap();
        }
        let err = sum.sub(&u).unwrap().l2_norm() / u.l2_norm();
        assert!(err < 1e-14, "reconstruction error {err}");
        // S_{j_max+1} = identity on band-limited u
        let s_top = sym.low_freq_cutoff(&u, sym.j_max + 1).unwrap();
        let err2 = s_top.sub(&u).unwrap().l2_norm() / u.l2_norm();
        assert!(err2 < 1e-14, "S_top error {err2}");
        // S_0 = Delta_{-1}
        let s0 = sym.low_freq_cutoff(&u, 0).unwrap();
        let dm1 = sym.dyadic_block(&u, -1).unwrap();
        let err3 = s0.sub(&dm1).unwrap().l2_norm();
        assert!(err3 < 1e-15);
        // j <= -2 blocks vanish; S_{-1} vanishes
        assert_eq!(sym.dyadic_block(&u, -2).unwrap().l2_norm(), 0.0);
        assert_eq!(sym.low_freq_cutoff(&u, -1).unwrap().l2_norm(), 0.0);
        // out-of-range errors
        assert!(sym.dyadic_block(&u, sym.j_max + 1).is_err());
        assert!(sym.low_freq_cutoff(&u, sym.j_max + 2).is_err());
    }

    #[test]
    fn block_l2_fast_path_matches_materialized_blocks() {
        let g = test_grid();
        let sym = build_lp_symbols(&g).unwrap();
        let mut u = SpectralField::zero(g.clone());
        for (i, z) in u.c.iter_mut().enumerate() {
            let x = ((i * 2654435761) % 97) as f64 / 97.0 - 0.5;
            *z = Complex64::new(x, 0.3 * x * x);
        }
        for j in -1..=sym.j_max {
            let fast = sym.block_l2(&u, j);
            let slow = sym.dyadic_block(&u, j).unwrap().l2_norm();
            assert!(
                (fast - slow).abs() <= 1e-12 * slow.max(1e-300),
                "j = {j}: {fast} vs {slow}"
            );
        }
    }

    #[test]
    fn besov_norm_basics() {
        let g = test_grid();
        let sym = build_lp_symbols(&g).unwrap();
        let idx = BesovIndex::new(2.5, 2.0, 2.0);
        let zero = SpectralField::zero(g.clone());
        assert_eq!(besov_norm(&zero, &idx, &sym).unwrap(), 0.0);

        // single plane wave at |k| = 11 lands on ring 3's plateau
        // [32/3, 12]; its Besov norm is 2^{3s} times its L2 norm
        let mut u = SpectralField::zero(g.clone());
        let n0 = g.sizes[0];
        u.c[11] = Complex64::new(0.5, 0.0);
        u.c[n0 - 11] = Complex64::new(0.5, 0.0);
        let bn = besov_norm(&u, &idx, &sym).unwrap();
        let l2 = u.l2_norm();
        let expect = 2f64.powf(3.0 * idx.s) * l2;
        assert!((bn - expect).abs() < 1e-12 * expect, "{bn} vs {expect}");

        // homogeneity
        let u3 = u.scale(-3.0);
        let bn3 = besov_norm(&u3, &idx, &sym).unwrap();
        assert!((bn3 - 3.0 * bn).abs() < 1e-12 * bn3);

        // monotonicity in s (the comparison constant is 1 for s1 <= s2 since
        // all weights 2^{js} with j >= -1 differ by at most 2^{s2 - s1})
        let lo = BesovIndex::new(1.5, 2.0, 2.0);
        let bl = besov_norm(&u, &lo, &sym).unwrap();
        assert!(bl <= 2f64.powf(idx.s - lo.s) * bn * (1.0 + 1e-13));
    }

    #[test]
    fn admissibility_matches_condition() {
        // d = 2: threshold max(1 + 2/p, 3/2)
        assert!(BesovIndex::new(2.5, 2.0, 2.0).admissible(2).is_ok());
        assert!(BesovIndex::new(1.9, 2.0, 2.0).admissible(2).is_err()); // 1.9 < 2 = 1 + 2/2... wait 1+1 = 2
        assert!(BesovIndex::new(2.1, 2.0, 2.0).admissible(2).is_ok());
        assert!(BesovIndex::new(1.6, f64::INFINITY, 2.0).admissible(2).is_ok()); // threshold 3/2
        assert!(BesovIndex::new(1.4, f64::INFINITY, 2.0).admissible(2).is_err());
        // endpoint: p < 2d, r = 1, s = 1 + d/p
        assert!(BesovIndex::new(2.0, 2.0, 1.0).admissible(2).is_ok());
        assert!(BesovIndex::new(2.0, 2.0, 2.0).admissible(2).is_err());
        assert!(BesovIndex::new(1.5, 4.0, 1.0).admissible(2).is_err()); // p = 4 = 2d not < 2d
        // bad exponents
        assert!(BesovIndex::new(2.5, 0.5, 2.0).admissible(2).is_err());
    }

    #[test]
    fn region_lp_norm_restricts_support() {
        let g = make_grid(1, &[2.0 * PI], &[64]).unwrap();
        // constant 1: L2 over the whole box = sqrt(2 pi); over half the box
        // = sqrt(pi)
        let ones = vec![1.0; 64];
        let u = SpectralField::to_spectral(g.clone(), &ones).unwrap();
        let full = lp_norm(&u, 2.0, None).unwrap();
        assert!((full - (2.0 * PI).sqrt()).abs() < 1e-12);
        let half = Region { lo: vec![-PI], hi: vec![-0.5 * g.dx[0]] };
        let hn = lp_norm(&u, 2.0, Some(&half)).unwrap();
        assert!((hn - PI.sqrt()).abs() < 1e-12, "{hn}");
        // empty region errors
        let empty = Region { lo: vec![0.001], hi: vec![0.002] };
        assert!(lp_norm(&u, 2.0, Some(&empty)).is_err());
        // sup norm
        let sup = lp_norm(&u, f64::INFINITY, None).unwrap();
        assert!((sup - 1.0).abs() < 1e-13);
    }

    #[test]
    fn commutator_vanishes_for_constant_v() {
        let g = test_grid();
        let sym = build_lp_symbols(&g).unwrap();
        // v = (2, -1) constant; f random band-limited
        let mut vx = SpectralField::zero(g.clone());
        vx.c[0] = Complex64::new(2.0, 0.0);
        let mut vy = SpectralField::zero(g.clone());
        vy.c[0] = Complex64::new(-1.0, 0.0);
        let v = VectorField { comps: vec![vx, vy] };
        let mut f = SpectralField::zero(g.clone());
        let n0 = g.sizes[0];
        f.c[3 + n0 * 2] = Complex64::new(0.4, 0.1);
        f.c[(n0 - 3) + n0 * (g.sizes[1] - 2)] = Complex64::new(0.4, -0.1);
        f.c[7] = Complex64::new(-0.2, 0.0);
        f.c[n0 - 7] = Complex64::new(-0.2, 0.0);
        for j in -1..=4 {
            let c = commutator(&v, &f, j, &sym).unwrap();
            let norm = c.l2_norm();
            assert!(norm < 1e-14, "j = {j}: commutator of constant v has norm {norm}");
        }
        // f = 0 gives 0
        let zf = SpectralField::zero(g.clone());
        let c0 = commutator(&v, &zf, 2, &sym).unwrap();
        assert_eq!(c0.l2_norm(), 0.0);
    }
}
