//! Anisotropic periodic grids and their frequency lattices.
//!
//! A grid is a d-dimensional periodic box, centered at the origin, with
//! per-axis point counts `N_a` (powers of two) and side lengths `L_a`.
//! Physical sample points along axis `a` sit at `x_j = -L_a/2 + j * L_a/N_a`.
//! The frequency lattice along axis `a` is `xi_k = k * 2*pi/L_a` with the
//! integer wavenumber `k` stored in FFT order `0, 1, ..., N/2-1, -N/2, ..., -1`.
//!
//! Oscillation lives on axis 0 by convention, so axis 0 is the fastest-varying
//! (contiguous) axis in the flat storage ("Fortran" layout): long FFT lanes
//! are contiguous and the short transverse transforms are tiled.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;

/// Per-axis FFT plans (forward / inverse), shared by all fields on the grid.
pub(crate) struct AxisPlans {
    pub fwd: Arc<dyn Fft<f64>>,
    pub inv: Arc<dyn Fft<f64>>,
}

/// A periodic, centered, anisotropic spectral grid.
pub struct Grid {
    /// Number of points per axis; each a power of two and >= 4.
    pub sizes: Vec<usize>,
    /// Box side length per axis.
    pub lengths: Vec<f64>,
    /// Frequency spacing per axis: 2*pi / L_a.
    pub dxi: Vec<f64>,
    /// Physical spacing per axis: L_a / N_a.
    pub dx: Vec<f64>,
    /// Largest kept integer wavenumber per axis under the 2/3-rule:
    /// coefficients with |k_a| > floor(N_a/3) are zeroed by dealiasing.
    pub dealias_keep: Vec<usize>,
    /// Signed integer wavenumbers in FFT order, per axis.
    pub kint: Vec<Vec<i64>>,
    /// Frequencies xi = k * dxi in FFT order, per axis.
    pub xi: Vec<Vec<f64>>,
    /// xi^2 tables in FFT order, per axis.
    pub xi2: Vec<Vec<f64>>,
    /// Parity (-1)^k in FFT order, per axis (centered-box phase factor).
    pub parity: Vec<Vec<f64>>,
    /// Largest dyadic block index stored on this grid: the smallest J with
    /// (3/4) * 2^(J+1) >= |xi|_max over the lattice, so that the telescoped
    /// partition of unity closes exactly on every lattice point.
    pub j_top: i32,
    pub(crate) plans: Vec<AxisPlans>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid")
            .field("sizes", &self.sizes)
            .field("lengths", &self.lengths)
            .field("j_top", &self.j_top)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.sizes == other.sizes && self.lengths == other.lengths
    }
}

/// Validate shape parameters and build a grid with its FFT plans.
pub fn make_grid(dim: usize, lengths: &[f64], sizes: &[usize]) -> Result<Arc<Grid>> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidGrid(format!("dim must be in 1..={MAX_DIM}, got {dim}")));
    }
    if lengths.len() != dim || sizes.len() != dim {
        return Err(Error::InvalidGrid(format!(
            "need {dim} lengths and sizes, got {} and {}",
            lengths.len(),
            sizes.len()
        )));
    }
    for (a, &n) in sizes.iter().enumerate() {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "N_{a} = {n} must be a power of two and >= 4"
            )));
        }
    }
    for (a, &l) in lengths.iter().enumerate() {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidGrid(format!("L_{a} = {l} must be positive and finite")));
        }
    }
    let total: usize = sizes.iter().product();
    if total > u32::MAX as usize {
        return Err(Error::InvalidGrid(format!(
            "lattice has {total} points; sparse symbol indices require < 2^32"
        )));
    }

    let mut dxi = Vec::with_capacity(dim);
    let mut dx = Vec::with_capacity(dim);
    let mut dealias_keep = Vec::with_capacity(dim);
    let mut kint = Vec::with_capacity(dim);
    let mut xi = Vec::with_capacity(dim);
    let mut xi2 = Vec::with_capacity(dim);
    let mut parity = Vec::with_capacity(dim);
    let mut planner = FftPlanner::<f64>::new();
    let mut plans = Vec::with_capacity(dim);

    for a in 0..dim {
        let n = sizes[a];
        let l = lengths[a];
        let d = 2.0 * std::f64::consts::PI / l;
        dxi.push(d);
        dx.push(l / n as f64);
        dealias_keep.push(n / 3);
        let mut ks = Vec::with_capacity(n);
        let mut xs = Vec::with_capacity(n);
        let mut x2 = Vec::with_capacity(n);
        let mut pr = Vec::with_capacity(n);
        for i in 0..n {
            let k = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
            ks.push(k);
            let x = k as f64 * d;
            xs.push(x);
            x2.push(x * x);
            pr.push(if k % 2 == 0 { 1.0 } else { -1.0 });
        }
        kint.push(ks);
        xi.push(xs);
        xi2.push(x2);
        parity.push(pr);
        plans.push(AxisPlans {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        });
    }

    // Lattice corner: max |xi| over the lattice (the -N/2 Nyquist mode).
    let corner2: f64 = (0..dim)
        .map(|a| {
            let m = (sizes[a] / 2) as f64 * dxi[a];
            m * m
        })
        .sum();
    let corner = corner2.sqrt();
    let mut j_top = 0i32;
    while 0.75 * 2f64.powi(j_top + 1) < corner {
        j_top += 1;
    }

    Ok(Arc::new(Grid {
        sizes: sizes.to_vec(),
        lengths: lengths.to_vec(),
        dxi,
        dx,
        dealias_keep,
        kint,
        xi,
        xi2,
        parity,
        j_top,
        plans,
    }))
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    /// Total number of lattice points.
    pub fn total(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Cell volume: product of dx_a.
    pub fn cell_volume(&self) -> f64 {
        self.dx.iter().product()
    }

    /// Box volume: product of L_a.
    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Flat stride of axis `a` in the Fortran-ordered storage.
    pub fn stride(&self, a: usize) -> usize {
        self.sizes[..a].iter().product()
    }

    /// Physical coordinate of index i along axis a: x = -L/2 + i*dx.
    pub fn coord(&self, a: usize, i: usize) -> f64 {
        -0.5 * self.lengths[a] + i as f64 * self.dx[a]
    }

    /// Frequency cutoff (in xi units) kept by dealiasing on axis a.
    pub fn cutoff(&self, a: usize) -> f64 {
        self.dealias_keep[a] as f64 * self.dxi[a]
    }

    /// Decompose a flat (Fortran-order) index into per-axis indices.
    pub fn decode(&self, mut flat: usize, out: &mut [usize; MAX_DIM]) {
        for a in 0..self.dim() {
            out[a] = flat % self.sizes[a];
            flat /= self.sizes[a];
        }
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self == other
    }

    /// Ensure two fields can be combined.
    pub fn check_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: {:?}x{:?} vs {:?}x{:?}",
                self.sizes, self.lengths, other.sizes, other.lengths
            )))
        }
    }
}
