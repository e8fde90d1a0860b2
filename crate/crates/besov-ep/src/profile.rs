//! The bump profile phi, the oscillating wave packets f_n, and the initial
//! datum u_0 = (f, 0, ..., 0) with f = sum_n n^{-2} 2^{-ns} f_n.
//!
//! Everything is built directly in frequency space. phi is prescribed by its
//! Fourier transform phi_hat (1 on |xi| <= 1/4, 0 on |xi| >= 1/2, smooth and
//! monotone between); the packet f_n = phi(x_1) cos(omega_n x_1) prod_a
//! phi(x_a) with omega_n = (17/12) 2^n has the exact spectral representation
//! f_n_hat(xi) = [phi_hat(xi_1 - omega_n) + phi_hat(xi_1 + omega_n)]/2
//! times the transverse factors, so band localization is exact on the
//! lattice rather than approximate.
//!
//! On boxes whose side length is a multiple of 48 pi the lattice spacing is
//! a divisor of 1/24, every omega_n sits on the lattice, and the packet
//! coefficient pattern is the same integer-offset stencil for every n; block
//! norms of f_n are then n-uniform to the last bit.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{for_modes_mut, SpectralField, VectorField};
use crate::grid::{make_grid, Grid, MAX_DIM};
use crate::lp::BesovIndex;
use crate::step::Transition;

/// Packet carrier frequency omega_n = (17/12) 2^n.
pub fn omega(n: u32) -> f64 {
    (17.0 / 12.0) * 2f64.powi(n as i32)
}

/// Inner plateau edge and support edge of phi_hat.
pub const BUMP_PLATEAU: f64 = 0.25;
pub const BUMP_SUPPORT: f64 = 0.5;

/// Fraction of the box counted as "boundary" for the decay check: the
/// outermost 5% (|x| >= 0.475 L).
pub const BOUNDARY_FRACTION: f64 = 0.05;

/// Periodization tolerance: the bump must decay below this at the boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// The bump profile on one axis.
pub struct BumpProfile {
    // (fields below; Debug is implemented by hand to avoid dumping the
    // sample arrays)
    /// 1-D grid the profile was built on.
    pub axis_grid: Arc<Grid>,
    /// phi_hat at the axis frequencies (FFT order).
    pub hat_samples: Vec<f64>,
    /// phi at the axis sample points (centered box).
    pub phys_samples: Vec<f64>,
    /// max |phi| over the outermost 5% of the box.
    pub boundary_decay: f64,
    /// phi(0) = (1/2 pi) integral of phi_hat > 0.
    pub phi0: f64,
    /// Transition family used on 1/4 < |xi| < 1/2.
    pub transition: Transition,
}

impl std::fmt::Debug for BumpProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BumpProfile")
            .field("axis_grid", &self.axis_grid)
            .field("phi0", &self.phi0)
            .field("boundary_decay", &self.boundary_decay)
            .field("transition", &self.transition)
            .finish()
    }
}

/// Build the bump from its prescribed Fourier transform on a 1-D grid.
pub fn build_bump(axis_grid: &Arc<Grid>, transition: Transition) -> Result<BumpProfile> {
    if axis_grid.dim() != 1 {
        return Err(Error::InvalidGrid(format!(
            "build_bump expects a 1-D grid, got dim {}",
            axis_grid.dim()
        )));
    }
    if axis_grid.cutoff(0) < BUMP_SUPPORT {
        return Err(Error::InvalidGrid(format!(
            "axis does not resolve frequency 1/2: dealiased cutoff is {}",
            axis_grid.cutoff(0)
        )));
    }
    let n = axis_grid.sizes[0];
    let l = axis_grid.lengths[0];
    let hat_samples: Vec<f64> =
        (0..n).map(|i| transition.eval(axis_grid.xi[0][i].abs())).collect();
    // Periodized profile: Fourier coefficients phi_hat(xi_k) / L.
    let coeffs: Vec<Complex64> =
        hat_samples.iter().map(|&h| Complex64::new(h / l, 0.0)).collect();
    let field = SpectralField::from_coeffs(axis_grid.clone(), coeffs)?;
    let phys_samples = field.to_physical();
    let phi0 = phys_samples[n / 2];
    if !(phi0 > 0.0) {
        return Err(Error::InvalidGrid(format!("bump center value {phi0} is not positive")));
    }
    let edge = (0.5 - BOUNDARY_FRACTION / 2.0) * l;
    let mut boundary_decay = 0.0f64;
    for (i, &v) in phys_samples.iter().enumerate() {
        if axis_grid.coord(0, i).abs() >= edge {
            boundary_decay = boundary_decay.max(v.abs());
        }
    }
    if boundary_decay >= BOUNDARY_TOL {
        return Err(Error::BoundaryDecay(format!(
            "max |phi| = {boundary_decay:.3e} on the outer 5% of a box of length {l}; \
             need < {BOUNDARY_TOL:.0e} (enlarge the box or use the tabulated transition)"
        )));
    }
    Ok(BumpProfile {
        axis_grid: axis_grid.clone(),
        hat_samples,
        phys_samples,
        boundary_decay,
        phi0,
        transition,
    })
}

/// Which n make up the datum.
#[derive(Debug, Clone, PartialEq)]
pub struct DatumSpec {
    pub idx: BesovIndex,
    /// Smallest packet index (the paper starts at 3).
    pub n_min: u32,
    /// Truncation of the infinite sum.
    pub n_max: u32,
    /// Spacing between consecutive packet indices. 1 reproduces the paper's
    /// datum; 2 with odd n avoids the exact dyadic resonances
    /// 2 omega_m = omega_{m+1} that contaminate block measurements at
    /// desk-reachable n (see the lipschitz experiment).
    pub stride: u32,
    /// Restrict the datum to a single term.
    pub single_n: Option<u32>,
}

impl DatumSpec {
    pub fn new(idx: BesovIndex, n_min: u32, n_max: u32) -> Self {
        DatumSpec { idx, n_min, n_max, stride: 1, single_n: None }
    }

    /// The packet indices included in the datum.
    pub fn terms(&self) -> Vec<u32> {
        if let Some(n) = self.single_n {
            return vec![n];
        }
        (self.n_min..=self.n_max).step_by(self.stride.max(1) as usize).collect()
    }

    /// Amplitude of the n-th packet: n^{-2} 2^{-ns}.
    pub fn amplitude(&self, n: u32) -> f64 {
        (n as f64).powi(-2) * 2f64.powf(-(n as f64) * self.idx.s)
    }

    /// Check the invariants against a target grid.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.n_min < 3 {
            return Err(Error::InfeasibleBand(format!(
                "n_min = {} but the packet ring inclusion needs n >= 3",
                self.n_min
            )));
        }
        if self.n_min > self.n_max {
            return Err(Error::InfeasibleBand(format!(
                "empty datum: n_min = {} > n_max = {}",
                self.n_min, self.n_max
            )));
        }
        if self.stride == 0 {
            return Err(Error::InfeasibleBand("datum stride must be >= 1".into()));
        }
        if let Some(n) = self.single_n {
            if n < self.n_min || n > self.n_max {
                return Err(Error::InfeasibleBand(format!(
                    "single_n = {n} outside [{}, {}]",
                    self.n_min, self.n_max
                )));
            }
        }
        if self.n_max as i32 > grid.j_top {
            return Err(Error::InfeasibleBand(format!(
                "n_max = {} exceeds the grid's largest block j_max = {}",
                self.n_max, grid.j_top
            )));
        }
        for &n in &self.terms() {
            band_fits(grid, n)?;
        }
        Ok(())
    }
}

/// The packet band omega_n +- 1/2 must sit inside the dealiased axis-0
/// lattice.
pub fn band_fits(grid: &Grid, n: u32) -> Result<()> {
    let hi = omega(n) + BUMP_SUPPORT;
    let cut = grid.cutoff(0);
    if hi > cut {
        return Err(Error::InfeasibleBand(format!(
            "packet n = {n} needs axis-0 frequencies up to {hi}, \
             dealiased cutoff is {cut}"
        )));
    }
    Ok(())
}

/// Build f_n = phi(x_1) cos(omega_n x_1) prod_{a>0} phi(x_a) spectrally.
///
/// When the carrier omega_n sits on the axis-0 frequency lattice (it does on
/// every 48-pi-multiple box), phi_hat is evaluated at the integer frequency
/// offset times the lattice spacing. The offset pattern is then the same for
/// every n, which makes packet norms n-uniform to the last bit; evaluating
/// `xi - omega` directly would re-round per n and leak ulp-level
/// n-dependence into the scaling experiments.
pub fn make_fn(grid: &Arc<Grid>, n: u32, bump: &BumpProfile) -> Result<SpectralField> {
    band_fits(grid, n)?;
    let dim = grid.dim();
    let w = omega(n);
    let dxi0 = grid.dxi[0];
    let kw = w / dxi0;
    let kw_int = kw.round() as i64;
    let on_lattice = (kw - kw_int as f64).abs() <= 1e-6;
    let mut out = SpectralField::zero(grid.clone());
    let tr = bump.transition.clone();
    let g = grid.clone();
    for_modes_mut(grid, &mut out.c, |_flat, idx, c| {
        let axis0 = if on_lattice {
            let k = g.kint[0][idx[0]];
            tr.eval((k - kw_int).abs() as f64 * dxi0) + tr.eval((k + kw_int).abs() as f64 * dxi0)
        } else {
            let xi0 = g.xi[0][idx[0]];
            tr.eval((xi0 - w).abs()) + tr.eval((xi0 + w).abs())
        };
        if axis0 == 0.0 {
            return;
        }
        let mut v = axis0 / (2.0 * g.lengths[0]);
        for a in 1..dim {
            let h = tr.eval(g.xi[a][idx[a]].abs());
            if h == 0.0 {
                *c = Complex64::default();
                return;
            }
            v *= h / g.lengths[a];
        }
        *c = Complex64::new(v, 0.0);
    });
    Ok(out)
}

/// Build the initial datum u_0 = (f, 0, ..., 0).
pub fn make_u0(grid: &Arc<Grid>, spec: &DatumSpec, bump: &BumpProfile) -> Result<VectorField> {
    spec.validate(grid)?;
    let mut f = SpectralField::zero(grid.clone());
    for &n in &spec.terms() {
        let packet = make_fn(grid, n, bump)?;
        crate::field::axpy_mut(&mut f, spec.amplitude(n), &packet);
    }
    crate::field::dealias_mut(&mut f);
    let mut comps = vec![f];
    for _ in 1..grid.dim() {
        comps.push(SpectralField::zero(grid.clone()));
    }
    Ok(VectorField { comps })
}

/// The center lower bound of the datum's first component: c_0 = |f(0)|/2,
/// and the largest grid-resolved delta with |f(x_1, 0, ...)| >= c_0 for all
/// |x_1| <= delta.
pub fn center_value_bound(
    u0_component: &SpectralField,
    bump: &BumpProfile,
    spec: &DatumSpec,
) -> Result<(f64, f64)> {
    let grid = &u0_component.grid;
    let dim = grid.dim();
    let amp_sum: f64 = spec.terms().iter().map(|&n| spec.amplitude(n)).sum();
    let c0 = 0.5 * (bump.phi0.powi(dim as i32) * amp_sum).abs();

    // Collapse the transverse axes at x_perp = 0: every transverse phase is
    // 1 there, so the axis-0 line spectrum is the plain sum over transverse
    // modes.
    let n0 = grid.sizes[0];
    let mut line = vec![Complex64::default(); n0];
    let mut idx = [0usize; MAX_DIM];
    for (flat, z) in u0_component.c.iter().enumerate() {
        if z.re == 0.0 && z.im == 0.0 {
            continue;
        }
        grid.decode(flat, &mut idx);
        line[idx[0]] += z;
    }
    let axis = make_grid(1, &grid.lengths[..1], &grid.sizes[..1])?;
    let f_line = SpectralField::from_coeffs(axis.clone(), line)?.to_physical();

    let jc = n0 / 2; // x = 0
    if f_line[jc].abs() < c0 {
        return Err(Error::InvalidGrid(format!(
            "center value |f(0)| = {} fell below c0 = {c0}; construction is inconsistent",
            f_line[jc].abs()
        )));
    }
    let mut m = 0usize;
    while m + 1 <= jc.min(n0 - 1 - jc) {
        let t = m + 1;
        if f_line[jc - t].abs() >= c0 && f_line[jc + t].abs() >= c0 {
            m = t;
        } else {
            break;
        }
    }
    if m == 0 {
        return Err(Error::InvalidGrid(
            "no positive delta: |f| drops below c0 at the first off-center sample".into(),
        ));
    }
    Ok((c0, m as f64 * grid.dx[0]))
}
