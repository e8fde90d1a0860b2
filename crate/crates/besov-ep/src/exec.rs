//! Parallel/sequential execution helpers with deterministic results.
//!
//! The crate is data-parallel over lattice chunks via rayon when the
//! `parallel` feature (default) is enabled, and runs the same fixed chunk
//! decomposition sequentially otherwise. All reductions are performed over
//! a fixed chunk grid with the partial results combined in chunk order, so
//! norms and sums are bit-identical regardless of thread count or feature
//! selection.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fixed chunk length used for elementwise passes and reductions.
pub const CHUNK: usize = 1 << 15;

/// Apply `f` to consecutive chunks of `data`. `f` receives the flat start
/// index of the chunk and the chunk slice.
pub fn for_chunks_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    debug_assert!(chunk > 0);
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i * chunk, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, c) in data.chunks_mut(chunk).enumerate() {
            f(i * chunk, c);
        }
    }
}

/// Map every fixed-size chunk of `data` to an f64 partial result, then
/// combine the partials in chunk order with compensated summation.
pub fn sum_chunks<T, F>(data: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&[T]) -> f64 + Sync,
{
    let partials: Vec<f64>;
    #[cfg(feature = "parallel")]
    {
        partials = data.par_chunks(CHUNK).map(|c| f(c)).collect();
    }
    #[cfg(not(feature = "parallel"))]
    {
        partials = data.chunks(CHUNK).map(|c| f(c)).collect();
    }
    kahan_sum(partials.iter().copied())
}

/// Map every fixed-size chunk to a partial maximum and combine.
pub fn max_chunks<T, F>(data: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&[T]) -> f64 + Sync,
{
    let partials: Vec<f64>;
    #[cfg(feature = "parallel")]
    {
        partials = data.par_chunks(CHUNK).map(|c| f(c)).collect();
    }
    #[cfg(not(feature = "parallel"))]
    {
        partials = data.chunks(CHUNK).map(|c| f(c)).collect();
    }
    partials.into_iter().fold(0.0_f64, f64::max)
}

/// Deterministic chunked reduction over an index range: `f` maps each
/// fixed-size subrange to a partial sum; partials are combined in order.
pub fn sum_ranges<F>(len: usize, f: F) -> f64
where
    F: Fn(std::ops::Range<usize>) -> f64 + Sync,
{
    let n_chunks = len.div_ceil(CHUNK);
    let partials: Vec<f64>;
    #[cfg(feature = "parallel")]
    {
        partials = (0..n_chunks)
            .into_par_iter()
            .map(|i| f(i * CHUNK..((i + 1) * CHUNK).min(len)))
            .collect();
    }
    #[cfg(not(feature = "parallel"))]
    {
        partials = (0..n_chunks).map(|i| f(i * CHUNK..((i + 1) * CHUNK).min(len))).collect();
    }
    kahan_sum(partials.into_iter())
}

/// Per-element map + deterministic chunked compensated sum.
pub fn sum_map<T, F>(data: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync,
{
    sum_chunks(data, |c| kahan_sum(c.iter().map(&f)))
}

/// Per-element map + max over all elements (0.0 for empty data).
pub fn max_map<T, F>(data: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync,
{
    max_chunks(data, |c| c.iter().map(&f).fold(0.0_f64, f64::max))
}

/// Neumaier-compensated sum; deterministic for a fixed iteration order.
pub fn kahan_sum<I: Iterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Run an indexed task list in parallel (or sequentially), collecting the
/// outputs in index order. Used for per-lane FFT passes.
pub fn run_indexed<F>(count: usize, f: F)
where
    F: Fn(usize) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().for_each(f);
    }
    #[cfg(not(feature = "parallel"))]
    {
        for i in 0..count {
            f(i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_cancellation() {
        // 1 + 1e-16 repeated: naive sum loses the tail, compensated keeps it.
        let xs: Vec<f64> = std::iter::repeat(1e-16).take(1_000_000).collect();
        let s = kahan_sum(xs.iter().copied().chain(std::iter::once(1.0)));
        assert!((s - (1.0 + 1e-10)).abs() < 1e-22);
    }

    #[test]
    fn sum_chunks_matches_kahan() {
        let xs: Vec<f64> = (0..100_000).map(|i| ((i * 2654435761_usize) % 1000) as f64 * 1e-7).collect();
        let a = sum_chunks(&xs, |c| kahan_sum(c.iter().copied()));
        let b = kahan_sum(xs.iter().copied());
        assert!((a - b).abs() <= 1e-12 * b.abs());
    }
}
