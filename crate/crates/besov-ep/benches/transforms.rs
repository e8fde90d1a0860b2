//! Hot-path benches: spectral round trip, Besov norm, and one RHS
//! evaluation, on a long 1-D axis and an anisotropic planar grid.
//!
//! With the default `parallel` feature the same workload is timed inside
//! rayon pools of different sizes (1 vs. all cores), so the data-parallel
//! dispatch can be compared against its sequential schedule directly:
//!
//! ```text
//! cargo bench -p besov-ep
//! cargo bench -p besov-ep --no-default-features   # compiled-out rayon
//! ```
//!
//! Reductions are chunk-ordered and compensated, so the measured results
//! are bit-identical across pool sizes and feature selections.

use std::f64::consts::PI;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use besov_ep::dynamics;
use besov_ep::field::VectorField;
use besov_ep::grid::{make_grid, Grid};
use besov_ep::lp::{besov_norm_vec, build_lp_symbols, BesovIndex, LpSymbols};
use besov_ep::synth::random_vector;

struct Case {
    label: &'static str,
    grid: Arc<Grid>,
    sym: LpSymbols,
    u: VectorField,
    samples: Vec<Vec<f64>>,
}

fn cases() -> Vec<Case> {
    let mut out = Vec::new();
    for (label, lengths, sizes) in [
        ("axis-65536", vec![48.0 * PI], vec![65536usize]),
        ("plane-2048x64", vec![48.0 * PI, 48.0 * PI], vec![2048, 64]),
    ] {
        let grid = make_grid(lengths.len(), &lengths, &sizes).unwrap();
        let sym = build_lp_symbols(&grid).unwrap();
        let max_k = (grid.dealias_keep.iter().min().unwrap() / 2).max(1) as i64;
        let u = random_vector(&grid, max_k, 7, 0.3, 0.4);
        let samples = u.comps.iter().map(|c| c.to_physical()).collect();
        out.push(Case { label, grid, sym, u, samples });
    }
    out
}

fn round_trip(case: &Case) -> f64 {
    let mut acc = 0.0;
    for s in &case.samples {
        let f = besov_ep::field::SpectralField::to_spectral(case.grid.clone(), s).unwrap();
        acc += f.to_physical()[0];
    }
    acc
}

fn norm(case: &Case) -> f64 {
    let idx = BesovIndex::new(2.5, 2.0, 2.0);
    besov_norm_vec(&case.u, &idx, &case.sym).unwrap()
}

fn rhs(case: &Case) -> f64 {
    dynamics::rhs(&case.u).unwrap().comps[0].l2_norm()
}

fn bench_workloads(c: &mut Criterion) {
    let cases = cases();
    let workloads: [(&str, fn(&Case) -> f64); 3] =
        [("round_trip", round_trip), ("besov_norm", norm), ("rhs", rhs)];

    #[cfg(feature = "parallel")]
    {
        let max_threads = std::thread::available_parallelism().map_or(1, |n| n.get());
        let mut pool_sizes = vec![1usize];
        if max_threads > 1 {
            pool_sizes.push(max_threads);
        }
        for (name, work) in workloads {
            let mut group = c.benchmark_group(name);
            group.sample_size(10);
            for case in &cases {
                for &threads in &pool_sizes {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(threads)
                        .build()
                        .unwrap();
                    group.bench_function(
                        BenchmarkId::new(case.label, format!("{threads}thr")),
                        |b| pool.install(|| b.iter(|| std::hint::black_box(work(case)))),
                    );
                }
            }
            group.finish();
        }
    }

    #[cfg(not(feature = "parallel"))]
    {
        for (name, work) in workloads {
            let mut group = c.benchmark_group(name);
            group.sample_size(10);
            for case in &cases {
                group.bench_function(BenchmarkId::new(case.label, "seq"), |b| {
                    b.iter(|| std::hint::black_box(work(case)))
                });
            }
            group.finish();
        }
    }
}

criterion_group!(benches, bench_workloads);
criterion_main!(benches);
