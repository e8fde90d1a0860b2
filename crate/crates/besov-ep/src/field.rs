//! Spectral fields on a [`Grid`]: transforms, multipliers, derivatives,
//! the inverse Helmholtz operator, dealiasing, and pointwise products.
//!
//! Coefficient convention: a field with coefficients `c_k` represents
//! `u(x) = sum_k c_k exp(i xi_k . x)` at the centered sample points
//! `x_j = -L/2 + j dx`. The centering is absorbed into a per-axis parity
//! factor `(-1)^k` applied around the raw FFT, so coefficients are indexed
//! by true frequency, not by shifted sample phase.
//!
//! All public operations are pure (inputs are never mutated). Hot paths are
//! chunked through [`crate::exec`], which makes every reduction a fixed-shape
//! chunk tree: results are bit-identical no matter how many threads run.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{self, CHUNK};
use crate::grid::{Grid, MAX_DIM};

/// A scalar field stored as spectral coefficients in FFT order,
/// flattened with axis 0 fastest (Fortran layout).
#[derive(Clone)]
pub struct SpectralField {
    pub grid: Arc<Grid>,
    pub c: Vec<Complex64>,
}

/// A d-component vector field; all components share one grid.
#[derive(Clone)]
pub struct VectorField {
    pub comps: Vec<SpectralField>,
}

impl std::fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralField")
            .field("sizes", &self.grid.sizes)
            .field("lengths", &self.grid.lengths)
            .finish_non_exhaustive()
    }
}

impl std::fmt::Debug for VectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorField").field("dim", &self.comps.len()).finish_non_exhaustive()
    }
}

// ---------------------------------------------------------------------------
// transforms
// ---------------------------------------------------------------------------

/// FFT every contiguous axis-0 lane of `data`, in parallel chunks.
fn transform_axis0(grid: &Grid, data: &mut [Complex64], forward: bool) {
    let n0 = grid.sizes[0];
    let plan = if forward { &grid.plans[0].fwd } else { &grid.plans[0].inv };
    let lanes_per_chunk = (CHUNK / n0).max(1);
    let chunk = lanes_per_chunk * n0;
    exec::for_chunks_mut(data, chunk, |_ci, part| {
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(part, &mut scratch);
    });
}

/// FFT along axis `a > 0` by gathering strided lanes into a lane-major
/// scratch buffer, transforming contiguously, and scattering back.
fn transform_axis_gt0(
    grid: &Grid,
    data: &mut [Complex64],
    lanebuf: &mut [Complex64],
    a: usize,
    forward: bool,
) {
    let n = grid.sizes[a];
    let s = grid.stride(a);
    let plan = if forward { &grid.plans[a].fwd } else { &grid.plans[a].inv };

    // Gather: lane l = (outer o, inner i), physical flat = o*s*n + i + j*s,
    // scratch layout lanebuf[l*n + j]. Chunks of whole lanes; consecutive
    // lanes read consecutive memory for each fixed j.
    let lanes_per_chunk = (CHUNK / n).max(1);
    let chunk = lanes_per_chunk * n;
    {
        let src: &[Complex64] = data;
        exec::for_chunks_mut(lanebuf, chunk, |f0, part| {
            let l0 = f0 / n;
            let lanes = part.len() / n;
            let base: Vec<usize> =
                (0..lanes).map(|t| ((l0 + t) / s) * s * n + (l0 + t) % s).collect();
            for j in 0..n {
                let off = j * s;
                for t in 0..lanes {
                    part[t * n + j] = src[base[t] + off];
                }
            }
        });
    }

    exec::for_chunks_mut(lanebuf, chunk, |_ci, part| {
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(part, &mut scratch);
    });

    // Scatter back, parallel over destination chunks.
    {
        let src: &[Complex64] = lanebuf;
        exec::for_chunks_mut(data, CHUNK, |f0, part| {
            for (e, slot) in part.iter_mut().enumerate() {
                let flat = f0 + e;
                let i = flat % s;
                let j = (flat / s) % n;
                let o = flat / (s * n);
                *slot = src[(o * s + i) * n + j];
            }
        });
    }
}

fn fft_all_axes(grid: &Grid, data: &mut [Complex64], forward: bool) {
    transform_axis0(grid, data, forward);
    if grid.dim() > 1 {
        let mut lanebuf = vec![Complex64::default(); data.len()];
        for a in 1..grid.dim() {
            transform_axis_gt0(grid, data, &mut lanebuf, a, forward);
        }
    }
}

/// Multiply by the centered-box parity factor prod_a (-1)^{k_a}, and
/// optionally by a uniform scale, in one pass.
fn apply_parity_scale(grid: &Grid, data: &mut [Complex64], scale: f64) {
    for_modes_mut(grid, data, |_flat, idx, c| {
        let mut p = scale;
        for a in 0..grid.dim() {
            p *= grid.parity[a][idx[a]];
        }
        *c *= p;
    });
}

/// Walk all modes in parallel chunks, handing each closure call the flat
/// index and the per-axis FFT-storage indices.
pub(crate) fn for_modes_mut(
    grid: &Grid,
    data: &mut [Complex64],
    f: impl Fn(usize, &[usize; MAX_DIM], &mut Complex64) + Sync,
) {
    let dim = grid.dim();
    let sizes: Vec<usize> = grid.sizes.clone();
    exec::for_chunks_mut(data, CHUNK, |f0, part| {
        let mut idx = [0usize; MAX_DIM];
        let mut rem = f0;
        for a in 0..dim {
            idx[a] = rem % sizes[a];
            rem /= sizes[a];
        }
        for (e, slot) in part.iter_mut().enumerate() {
            f(f0 + e, &idx, slot);
            // increment with carry
            for a in 0..dim {
                idx[a] += 1;
                if idx[a] < sizes[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
    });
}

impl SpectralField {
    pub fn zero(grid: Arc<Grid>) -> Self {
        let n = grid.total();
        SpectralField { grid, c: vec![Complex64::default(); n] }
    }

    pub fn from_coeffs(grid: Arc<Grid>, c: Vec<Complex64>) -> Result<Self> {
        if c.len() != grid.total() {
            return Err(Error::InvalidGrid(format!(
                "coefficient vector has {} entries, grid has {}",
                c.len(),
                grid.total()
            )));
        }
        Ok(SpectralField { grid, c })
    }

    /// Forward transform of real samples (Fortran order, centered box).
    pub fn to_spectral(grid: Arc<Grid>, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.total() {
            return Err(Error::InvalidGrid(format!(
                "sample array has {} entries, grid has {}",
                samples.len(),
                grid.total()
            )));
        }
        let mut c: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft_all_axes(&grid, &mut c, true);
        let scale = 1.0 / grid.total() as f64;
        apply_parity_scale(&grid, &mut c, scale);
        Ok(SpectralField { grid, c })
    }

    /// Forward transform of complex samples (diagnostics and oracles).
    pub fn to_spectral_complex(grid: Arc<Grid>, samples: &[Complex64]) -> Result<Self> {
        if samples.len() != grid.total() {
            return Err(Error::InvalidGrid("sample/grid size mismatch".into()));
        }
        let mut c = samples.to_vec();
        fft_all_axes(&grid, &mut c, true);
        let scale = 1.0 / grid.total() as f64;
        apply_parity_scale(&grid, &mut c, scale);
        Ok(SpectralField { grid, c })
    }

    /// Inverse transform; returns complex samples (imaginary part is the
    /// aliasing/symmetry leak for fields representing real functions).
    pub fn to_physical_complex(&self) -> Vec<Complex64> {
        let mut buf = self.c.clone();
        apply_parity_scale(&self.grid, &mut buf, 1.0);
        fft_all_axes(&self.grid, &mut buf, false);
        buf
    }

    /// Inverse transform, real part only.
    pub fn to_physical(&self) -> Vec<f64> {
        self.to_physical_complex().iter().map(|z| z.re).collect()
    }

    /// Largest |Im| over physical samples (should be ~machine epsilon times
    /// the field size for Hermitian coefficient sets).
    pub fn imag_leak(&self) -> f64 {
        let phys = self.to_physical_complex();
        exec::max_map(&phys, |z| z.im.abs())
    }

    /// Largest Hermitian-symmetry defect max |c(-k) - conj(c(k))|.
    pub fn hermitian_defect(&self) -> f64 {
        let grid = &self.grid;
        let dim = grid.dim();
        let c = &self.c;
        let mut worst = 0.0f64;
        let mut idx = [0usize; MAX_DIM];
        for (flat, z) in c.iter().enumerate() {
            grid.decode(flat, &mut idx);
            let mut flat_neg = 0usize;
            let mut stride = 1usize;
            for a in 0..dim {
                let n = grid.sizes[a];
                let neg = (n - idx[a]) % n;
                flat_neg += neg * stride;
                stride *= n;
            }
            let d = (c[flat_neg] - z.conj()).norm();
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    /// Apply a real symbol evaluated at the lattice frequency, exactly per mode.
    pub fn apply_multiplier<F>(&self, symbol: F) -> SpectralField
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let mut out = self.clone();
        let grid = self.grid.clone();
        let dim = grid.dim();
        for_modes_mut(&self.grid, &mut out.c, |_flat, idx, c| {
            let mut xi = [0.0f64; MAX_DIM];
            for a in 0..dim {
                xi[a] = grid.xi[a][idx[a]];
            }
            *c *= symbol(&xi[..dim]);
        });
        out
    }

    /// Spectral derivative along `axis`: multiplier `i xi_axis`.
    pub fn partial_derivative(&self, axis: usize) -> Result<SpectralField> {
        if axis >= self.grid.dim() {
            return Err(Error::InvalidGrid(format!(
                "axis {axis} out of range for dim {}",
                self.grid.dim()
            )));
        }
        let mut out = self.clone();
        let grid = self.grid.clone();
        for_modes_mut(&self.grid, &mut out.c, |_flat, idx, c| {
            let xi = grid.xi[axis][idx[axis]];
            let z = *c;
            *c = Complex64::new(-xi * z.im, xi * z.re);
        });
        Ok(out)
    }

    pub fn gradient(&self) -> Result<VectorField> {
        let comps: Result<Vec<_>> =
            (0..self.grid.dim()).map(|a| self.partial_derivative(a)).collect();
        Ok(VectorField { comps: comps? })
    }

    /// Multiplier (1+|xi|^2)^{-1}.
    pub fn helmholtz_inverse(&self) -> SpectralField {
        let mut out = self.clone();
        let grid = self.grid.clone();
        let dim = grid.dim();
        for_modes_mut(&self.grid, &mut out.c, |_flat, idx, c| {
            let mut r2 = 0.0;
            for a in 0..dim {
                r2 += grid.xi2[a][idx[a]];
            }
            *c *= 1.0 / (1.0 + r2);
        });
        out
    }

    /// Multiplier (1+|xi|^2): the operator (1 - Laplace).
    pub fn helmholtz_forward(&self) -> SpectralField {
        let mut out = self.clone();
        let grid = self.grid.clone();
        let dim = grid.dim();
        for_modes_mut(&self.grid, &mut out.c, |_flat, idx, c| {
            let mut r2 = 0.0;
            for a in 0..dim {
                r2 += grid.xi2[a][idx[a]];
            }
            *c *= 1.0 + r2;
        });
        out
    }

    /// Zero every coefficient with |k_a| > floor(N_a/3) on any axis.
    pub fn dealias(&self) -> SpectralField {
        let mut out = self.clone();
        dealias_mut(&mut out);
        out
    }

    /// Physical-space product, then dealias.
    pub fn pointwise_product(&self, other: &SpectralField) -> Result<SpectralField> {
        self.grid.check_same(&other.grid, "pointwise_product")?;
        let a = self.to_physical_complex();
        let b = other.to_physical_complex();
        let prod: Vec<Complex64> = {
            let mut p = a;
            exec::for_chunks_mut(&mut p, CHUNK, |f0, part| {
                for (e, slot) in part.iter_mut().enumerate() {
                    // real-part product: fields represent real functions and
                    // the imaginary parts are rounding leak
                    let x = slot.re * b[f0 + e].re;
                    *slot = Complex64::new(x, 0.0);
                }
            });
            p
        };
        let mut out = SpectralField::to_spectral_complex(self.grid.clone(), &prod)?;
        dealias_mut(&mut out);
        Ok(out)
    }

    /// Grid L2 norm via Parseval: sqrt(V * sum |c|^2) with V the box volume.
    pub fn l2_norm(&self) -> f64 {
        let v = self.grid.volume();
        (v * exec::sum_map(&self.c, |z| z.norm_sqr())).sqrt()
    }

    /// L^p norm by uniform-grid quadrature on |Re u|; `p = f64::INFINITY`
    /// gives the sup norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let phys = self.to_physical_complex();
        lp_of_magnitudes(&self.grid, p, &phys, |z| z.re.abs())
    }

    // ---- small arithmetic helpers (pure) ----

    pub fn scale(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        scale_mut(&mut out, a);
        out
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.grid.check_same(&other.grid, "add")?;
        let mut out = self.clone();
        axpy_mut(&mut out, 1.0, other);
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.grid.check_same(&other.grid, "sub")?;
        let mut out = self.clone();
        axpy_mut(&mut out, -1.0, other);
        Ok(out)
    }
}

/// Quadrature of a pointwise magnitude functional over physical samples.
fn lp_of_magnitudes<T: Sync>(
    grid: &Grid,
    p: f64,
    samples: &[T],
    mag: impl Fn(&T) -> f64 + Sync,
) -> f64 {
    if p.is_infinite() {
        return exec::max_map(samples, mag);
    }
    let dv = grid.cell_volume();
    let total = if (p - 2.0).abs() < 1e-14 {
        exec::sum_map(samples, |x| {
            let m = mag(x);
            m * m
        })
    } else if (p - 1.0).abs() < 1e-14 {
        exec::sum_map(samples, &mag)
    } else {
        exec::sum_map(samples, |x| mag(x).powf(p))
    };
    (dv * total).powf(1.0 / p)
}

pub(crate) fn dealias_mut(f: &mut SpectralField) {
    let grid = f.grid.clone();
    let dim = grid.dim();
    for_modes_mut(&grid, &mut f.c, |_flat, idx, c| {
        for a in 0..dim {
            if grid.kint[a][idx[a]].unsigned_abs() as usize > grid.dealias_keep[a] {
                *c = Complex64::default();
                return;
            }
        }
    });
}

pub(crate) fn scale_mut(f: &mut SpectralField, a: f64) {
    exec::for_chunks_mut(&mut f.c, CHUNK, |_ci, part| {
        for z in part.iter_mut() {
            *z *= a;
        }
    });
}

/// y += a * x, elementwise over coefficients.
pub(crate) fn axpy_mut(y: &mut SpectralField, a: f64, x: &SpectralField) {
    debug_assert!(y.grid.same_as(&x.grid));
    let xs = &x.c;
    exec::for_chunks_mut(&mut y.c, CHUNK, |f0, part| {
        for (e, z) in part.iter_mut().enumerate() {
            *z += a * xs[f0 + e];
        }
    });
}

impl VectorField {
    pub fn zero(grid: Arc<Grid>, dim: usize) -> Self {
        VectorField { comps: (0..dim).map(|_| SpectralField::zero(grid.clone())).collect() }
    }

    pub fn from_components(comps: Vec<SpectralField>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::InvalidGrid("vector field needs at least one component".into()));
        }
        for c in &comps[1..] {
            comps[0].grid.check_same(&c.grid, "vector components")?;
        }
        Ok(VectorField { comps })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.comps[0].grid
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn divergence(&self) -> Result<SpectralField> {
        let mut out = self.comps[0].partial_derivative(0)?;
        for (a, comp) in self.comps.iter().enumerate().skip(1) {
            let d = comp.partial_derivative(a)?;
            axpy_mut(&mut out, 1.0, &d);
        }
        Ok(out)
    }

    /// L2 norm of the vector field: sqrt(sum_i ||u_i||^2).
    pub fn l2_norm(&self) -> f64 {
        let v = self.grid().volume();
        let s: f64 = self.comps.iter().map(|c| exec::sum_map(&c.c, |z| z.norm_sqr())).sum();
        (v * s).sqrt()
    }

    /// L^p norm of the pointwise Euclidean magnitude |u(x)|.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let phys: Vec<Vec<Complex64>> = self.comps.iter().map(|c| c.to_physical_complex()).collect();
        let n = phys[0].len();
        let mut mags = vec![0.0f64; n];
        exec::for_chunks_mut(&mut mags, CHUNK, |f0, part| {
            for (e, m) in part.iter_mut().enumerate() {
                let mut s = 0.0;
                for comp in &phys {
                    let x = comp[f0 + e].re;
                    s += x * x;
                }
                *m = s.sqrt();
            }
        });
        lp_of_magnitudes(self.grid(), p, &mags, |&m| m)
    }

    /// Largest pointwise |Re u_i| over all components and samples
    /// (used by the CFL monitor).
    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| {
                let phys = c.to_physical_complex();
                exec::max_map(&phys, |z| z.re.abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, a: f64) -> VectorField {
        VectorField { comps: self.comps.iter().map(|c| c.scale(a)).collect() }
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        let comps: Result<Vec<_>> =
            self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect();
        Ok(VectorField { comps: comps? })
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        let comps: Result<Vec<_>> =
            self.comps.iter().zip(&other.comps).map(|(a, b)| a.sub(b)).collect();
        Ok(VectorField { comps: comps? })
    }

    pub fn dealias(&self) -> VectorField {
        VectorField { comps: self.comps.iter().map(|c| c.dealias()).collect() }
    }
}
