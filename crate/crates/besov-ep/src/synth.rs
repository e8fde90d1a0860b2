//! Deterministic synthetic fields for self-checks, audits, and tests.
//!
//! Fields are generated by filling a small frequency cube in a fixed
//! iteration order from a seeded ChaCha stream and then Hermitian-
//! symmetrizing, so the same (seed, max_k, dim) spec produces the same
//! function regardless of grid size or thread count.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{SpectralField, VectorField};
use crate::grid::Grid;

/// Random real band-limited scalar field: Hermitian spectrum supported in
/// the cube |k_a| <= max_k, coefficient magnitudes decaying like
/// exp(-decay |k|_1), overall amplitude `amp`.
pub fn random_band_limited(
    grid: &Arc<Grid>,
    max_k: i64,
    seed: u64,
    amp: f64,
    decay: f64,
) -> SpectralField {
    let dim = grid.dim();
    assert!(max_k >= 0);
    for a in 0..dim {
        assert!(
            (max_k as usize) < grid.sizes[a] / 2,
            "max_k {max_k} does not fit axis {a} of size {}",
            grid.sizes[a]
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SpectralField::zero(grid.clone());
    let side = (2 * max_k + 1) as usize;
    let cube: usize = side.pow(dim as u32);
    // raw draws in a fixed lexicographic order over the cube
    let mut raw: Vec<(Vec<i64>, Complex64)> = Vec::with_capacity(cube);
    for flat in 0..cube {
        let mut rem = flat;
        let mut k = vec![0i64; dim];
        let mut l1 = 0i64;
        for ka in k.iter_mut() {
            *ka = (rem % side) as i64 - max_k;
            rem /= side;
            l1 += ka.abs();
        }
        let mag = amp * (-decay * l1 as f64).exp();
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        raw.push((k, Complex64::new(mag * re, mag * im)));
    }
    // Hermitian symmetrization: c(k) = (a(k) + conj(a(-k))) / 2
    let lookup = |k: &[i64]| -> Complex64 {
        let mut flat = 0usize;
        let mut stride = 1usize;
        for &ka in k {
            flat += (ka + max_k) as usize * stride;
            stride *= side;
        }
        raw[flat].1
    };
    for (k, _) in &raw {
        let neg: Vec<i64> = k.iter().map(|&x| -x).collect();
        let c = 0.5 * (lookup(k) + lookup(&neg).conj());
        let mut flat = 0usize;
        let mut stride = 1usize;
        for (a, &ka) in k.iter().enumerate() {
            let n = grid.sizes[a] as i64;
            flat += ka.rem_euclid(n) as usize * stride;
            stride *= grid.sizes[a];
        }
        out.c[flat] = c;
    }
    out
}

/// Random real band-limited vector field; component seeds are derived from
/// `seed` so the components are independent streams.
pub fn random_vector(
    grid: &Arc<Grid>,
    max_k: i64,
    seed: u64,
    amp: f64,
    decay: f64,
) -> VectorField {
    let comps = (0..grid.dim())
        .map(|i| random_band_limited(grid, max_k, seed.wrapping_add(1 + i as u64), amp, decay))
        .collect();
    VectorField { comps }
}
