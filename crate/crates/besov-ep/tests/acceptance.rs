//! Acceptance suite: eight criteria, one test and one printed PASS/FAIL
//! line each (run with `--nocapture` to see the lines for passing tests).
//!
//! Planar criteria (3, 6, 7) run on the default anisotropic grid: 65536 x 64
//! points on a (48 pi)^2 torus, indices (s, p, r) = (2.5, 2, 2), datum bands
//! 3..9.  Expensive shared state (symbols, bump, datum) is built once per
//! process.
//!
//! The time-stepping criteria (4, 5, 8) use the same 48 pi axis and the same
//! bands-3..9 datum in one dimension.  The rates under test are
//! dimension-free, and the planar datum's extra transverse factor shrinks
//! the physical amplitude to ~1e-5, which parks the second-order defect
//! `w = S_t(u0) - u0 - t u'(0)` at ~1e-19 — close enough to the
//! double-precision floor that per-step roundoff (not truncation) moves it
//! by ~1e-4 under dt halving.  The 1-D datum keeps three extra orders of
//! headroom, so the same measurements are conditioned well inside the
//! pinned tolerances.
//!
//! Criterion 5 probes the odd bands {5, 7, 9} of a stride-2 datum: the
//! carriers satisfy 2 omega_{n-1} = omega_n exactly, so a contiguous datum
//! parks band-(n-1) self-interaction inside ring n and drowns the linear
//! transport rate that the experiment measures; dropping even bands keeps
//! every probed ring clean, and the lowest band is excluded because no
//! slower packet exists to transport it (its linear rate vanishes).

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use besov_ep::dynamics;
use besov_ep::estimates;
use besov_ep::field::VectorField;
use besov_ep::grid::{make_grid, Grid};
use besov_ep::lp::{build_lp_symbols, BesovIndex, LpSymbols};
use besov_ep::profile::{build_bump, make_fn, make_u0, BumpProfile, DatumSpec};
use besov_ep::step::Transition;
use besov_ep::synth;

const PI: f64 = std::f64::consts::PI;
const SEED: u64 = 20260825;

// pinned tolerances
const TOL_RESIDUAL: f64 = 1e-10; // criterion 1
const TOL_LOCALIZATION: f64 = 1e-12; // criterion 2
const TOL_SLOPE_LEMMA31: f64 = 0.1; // criterion 3
const TOL_DEV_LEMMA31: f64 = 0.15;
const TOL_SLOPE_DIFF: f64 = 0.1; // criterion 4
const TOL_SLOPE_W: f64 = 0.15;
const TOL_SLOPE_LIPSCHITZ: f64 = 0.15; // criterion 5
const TOL_COMMUTATOR: f64 = 1e-12; // criterion 7
const TOL_CONSTANT_SPREAD: f64 = 10.0;
const RICHARDSON_LO: f64 = 13.0; // criterion 8
const RICHARDSON_HI: f64 = 19.0;
const TOL_DT_SENSITIVITY: f64 = 1e-6;

/// Print the criterion's single verdict line, then enforce it.
fn verdict(criterion: &str, pass: bool, detail: String) {
    println!("{} {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{criterion}: {detail}");
}

/// Shared experiment bench on the default box.
struct Bench {
    grid: Arc<Grid>,
    bump: BumpProfile,
    sym: LpSymbols,
    idx: BesovIndex,
    /// Contiguous datum, bands 3..9.
    u0: VectorField,
}

static BENCH: OnceLock<Bench> = OnceLock::new();
static BENCH1: OnceLock<Bench> = OnceLock::new();

fn bench() -> &'static Bench {
    BENCH.get_or_init(|| {
        let grid = make_grid(2, &[48.0 * PI, 48.0 * PI], &[65536, 64]).expect("bench grid");
        let axis0 = make_grid(1, &[48.0 * PI], &[65536]).expect("axis grid");
        let bump = build_bump(&axis0, Transition::Tabulated).expect("bump");
        let sym = build_lp_symbols(&grid).expect("symbols");
        let idx = BesovIndex::new(2.5, 2.0, 2.0);
        let datum = DatumSpec::new(idx, 3, 9);
        let u0 = make_u0(&grid, &datum, &bump).expect("datum");
        Bench { grid, bump, sym, idx, u0 }
    })
}

/// 1-D bench for the time-stepping criteria (see module doc).
fn bench1() -> &'static Bench {
    BENCH1.get_or_init(|| {
        let grid = make_grid(1, &[48.0 * PI], &[65536]).expect("bench grid");
        let bump = build_bump(&grid, Transition::Tabulated).expect("bump");
        let sym = build_lp_symbols(&grid).expect("symbols");
        let idx = BesovIndex::new(2.5, 2.0, 2.0);
        let datum = DatumSpec::new(idx, 3, 9);
        let u0 = make_u0(&grid, &datum, &bump).expect("datum");
        Bench { grid, bump, sym, idx, u0 }
    })
}

struct LipOutcome {
    slope: f64,
    max_dev: f64,
    rows: Vec<(u32, f64)>,
    pass: bool,
}

static LIP: OnceLock<LipOutcome> = OnceLock::new();

/// Criterion 5's measurement, shared with criterion 6's substitution clause.
fn lip_outcome() -> &'static LipOutcome {
    LIP.get_or_init(|| {
        let b = bench1();
        let mut datum = DatumSpec::new(b.idx, 3, 9);
        datum.stride = 2; // bands {3, 5, 7, 9}
        let rep = estimates::lipschitz_constant_growth(
            &b.grid,
            &b.bump,
            &datum,
            &b.sym,
            &[5, 7, 9],
            &[1e-4, 1e-3, 1e-2],
            None,
            4.0,
        )
        .expect("lipschitz experiment");
        let pass = (rep.fit.slope - 1.0).abs() <= TOL_SLOPE_LIPSCHITZ;
        LipOutcome { slope: rep.fit.slope, max_dev: rep.fit.max_dev, rows: rep.rows, pass }
    })
}

#[test]
fn criterion1_momentum_residual() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for (d, n) in [(2usize, 32usize), (3, 16)] {
        let grid = make_grid(d, &vec![2.0 * PI; d], &vec![n; d]).unwrap();
        let max_k = (grid.dealias_keep[0] / 2).max(1) as i64;
        for trial in 0..10u64 {
            let u = synth::random_vector(&grid, max_k, SEED ^ (d as u64) << 32 ^ trial, 0.4, 0.35);
            let r = dynamics::momentum_residual(&u).unwrap();
            worst = worst.max(r);
        }
    }
    verdict(
        "criterion 1 (reformulation identity)",
        worst < TOL_RESIDUAL,
        format!(
            "max relative momentum residual {worst:.3e} over 20 random band-limited fields, \
             d in {{2,3}} (tolerance {TOL_RESIDUAL:.0e}) [{:.1?}]",
            t0.elapsed()
        ),
    );
}

#[test]
fn criterion2_packet_localization() {
    let t0 = Instant::now();
    // band 10 needs frequencies ~1452; a 131072-point axis on 48 pi keeps
    // up to ~1820 after dealiasing
    let grid = make_grid(1, &[48.0 * PI], &[131072]).unwrap();
    let axis = grid.clone();
    let bump = build_bump(&axis, Transition::Tabulated).unwrap();
    let sym = build_lp_symbols(&grid).unwrap();
    let mut worst_leak = 0.0f64;
    let mut worst_own = 0.0f64;
    for n in 4..=10u32 {
        let f = make_fn(&grid, n, &bump).unwrap();
        let norm = f.l2_norm();
        assert!(norm > 0.0);
        for j in -1..=sym.j_max {
            if j == n as i32 {
                continue;
            }
            worst_leak = worst_leak.max(sym.block_l2(&f, j) / norm);
        }
        let own = sym.dyadic_block(&f, n as i32).unwrap().sub(&f).unwrap().l2_norm() / norm;
        worst_own = worst_own.max(own);
    }
    verdict(
        "criterion 2 (spectral localization)",
        worst_leak < TOL_LOCALIZATION && worst_own < TOL_LOCALIZATION,
        format!(
            "n in 4..10: max off-band leak {worst_leak:.3e}, max on-band defect \
             {worst_own:.3e} (tolerance {TOL_LOCALIZATION:.0e}) [{:.1?}]",
            t0.elapsed()
        ),
    );
}

#[test]
fn criterion3_lemma31_exponent() {
    let t0 = Instant::now();
    let b = bench();
    let datum = DatumSpec::new(b.idx, 3, 9);
    let rep = estimates::lemma31_lower_bound(&b.grid, &b.bump, &datum, &b.sym, 4..=9).unwrap();
    let slope_ok = (rep.fit.slope - (1.0 - b.idx.s)).abs() <= TOL_SLOPE_LEMMA31;
    let dev_ok = rep.fit.max_dev < TOL_DEV_LEMMA31;
    verdict(
        "criterion 3 (Lemma 3.1 exponent)",
        slope_ok && dev_ok,
        format!(
            "slope {:.4} vs predicted {:.1} (tolerance +-{TOL_SLOPE_LEMMA31}), max_dev {:.4} \
             (< {TOL_DEV_LEMMA31}), n in 4..9 at (d,p,s) = (2,2,2.5) [{:.1?}]",
            rep.fit.slope,
            1.0 - b.idx.s,
            rep.fit.max_dev,
            t0.elapsed()
        ),
    );
}

#[test]
fn criterion4_prop31_slopes() {
    let t0 = Instant::now();
    let b = bench1();
    let window: Vec<f64> = (0..5).map(|i| 1e-4 * 10f64.powf(i as f64 / 2.0)).collect();
    let rep = estimates::prop31_slopes(&b.u0, &b.idx, &b.sym, &window, None, 4.0).unwrap();
    let diff_ok = (rep.fit_diff.slope - 1.0).abs() <= TOL_SLOPE_DIFF;
    let w_ok = (rep.fit_w.slope - 2.0).abs() <= TOL_SLOPE_W;
    verdict(
        "criterion 4 (Proposition 3.1 slopes)",
        diff_ok && w_ok,
        format!(
            "|S_t(u0)-u0|_(s-1) slope {:.4} (1 +- {TOL_SLOPE_DIFF}), |w|_(s-2) slope {:.4} \
             (2 +- {TOL_SLOPE_W}) over t in [1e-4, 1e-2], n_max = 9 datum [{:.1?}]",
            rep.fit_diff.slope,
            rep.fit_w.slope,
            t0.elapsed()
        ),
    );
}

#[test]
fn criterion5_lipschitz_coefficient() {
    let t0 = Instant::now();
    let lip = lip_outcome();
    let rows: Vec<String> =
        lip.rows.iter().map(|(n, r)| format!("r_{n} = {r:.3e}")).collect();
    verdict(
        "criterion 5 (divergent Lipschitz coefficient)",
        lip.pass,
        format!(
            "slope of log2(n^2 r_n) vs n = {:.4} (1 +- {TOL_SLOPE_LIPSCHITZ}), max_dev {:.4}; \
             {} over stride-2 datum probes {{5,7,9}} [{:.1?}]",
            lip.slope,
            lip.max_dev,
            rows.join(", "),
            t0.elapsed()
        ),
    );
}

#[test]
fn criterion6_hoelder_ratio_window() {
    let t0 = Instant::now();
    let b = bench();
    let datum = DatumSpec::new(b.idx, 3, 9);
    let sweep = estimates::hoelder_ratio_sweep(
        &b.grid, &b.bump, &datum, &b.sym, 0.5, 3..=16, 1e-2, None, 4.0,
    )
    .unwrap();
    if sweep.records.len() >= 3 {
        let slope = sweep.fit.as_ref().map_or(f64::NAN, |f| f.slope);
        verdict(
            "criterion 6 (Hoelder ratio monotonicity)",
            sweep.monotone && slope > 0.0,
            format!(
                "{} feasible bands, Q strictly increasing: {}, fit slope {:.4} [{:.1?}]",
                sweep.records.len(),
                sweep.monotone,
                slope,
                t0.elapsed()
            ),
        );
    } else {
        // Substitution clause: fewer than 3 feasible n on this hardware —
        // report the subset and let criterion 5 carry the theorem-level
        // check.  On this box the bands need n <= 9 while the validated
        // horizon needs t_n = (n^3 2^-n)^2 <= 1e-2, i.e. n >= 16: empty.
        let horizon_blocked =
            sweep.infeasible.iter().filter(|(_, why)| why.contains("horizon")).count();
        let band_blocked = sweep.infeasible.len() - horizon_blocked;
        verdict(
            "criterion 6 (Hoelder ratio monotonicity)",
            lip_outcome().pass,
            format!(
                "feasible subset has {} bands ({} horizon-blocked, {} beyond the lattice) — \
                 criterion 5 substitutes per the acceptance clause and it {} [{:.1?}]",
                sweep.records.len(),
                horizon_blocked,
                band_blocked,
                if lip_outcome().pass { "passed" } else { "failed" },
                t0.elapsed()
            ),
        );
    }
}

#[test]
fn criterion7_commutator_identity_and_constant() {
    let t0 = Instant::now();
    let b = bench();
    // exact decomposition on the datum, mid-band
    let check = estimates::commutator_decomposition_check(&b.u0, 6, b.idx.p, &b.sym).unwrap();
    // Lemma 2.3 constant across field scales 2^4..2^9 (1-D box, 2 pi)
    let audit_grid = make_grid(1, &[2.0 * PI], &[2048]).unwrap();
    let audit_sym = build_lp_symbols(&audit_grid).unwrap();
    let audit = estimates::commutator_constant_audit(
        &audit_grid,
        &audit_sym,
        b.idx.s,
        b.idx.p,
        &[16, 32, 64, 128, 256, 512],
        SEED,
    )
    .unwrap();
    let spread = audit.spread();
    verdict(
        "criterion 7 (commutator identity + Lemma 2.3 constant)",
        check.defect < TOL_COMMUTATOR && spread < TOL_CONSTANT_SPREAD,
        format!(
            "decomposition defect {:.3e} (< {TOL_COMMUTATOR:.0e}); measured constants \
             {:?} across scales 2^4..2^9, max/min {spread:.3} (< {TOL_CONSTANT_SPREAD}) [{:.1?}]",
            check.defect,
            audit.constants.iter().map(|c| (c * 1e3).round() / 1e3).collect::<Vec<_>>(),
            t0.elapsed()
        ),
    );
}

#[test]
fn criterion8_integrator_order() {
    let t0 = Instant::now();
    // Richardson ratio on smooth data
    let grid = make_grid(2, &[2.0 * PI, 2.0 * PI], &[32, 32]).unwrap();
    let u = synth::random_vector(&grid, 5, SEED ^ 0x8, 0.3, 0.4);
    let ratio = dynamics::richardson_ratio(&u, 1e-2).unwrap();
    // dt halving on the criterion-4 norms at the top of its window; the
    // base step sits at the truncation/roundoff crossover for w
    let b = bench1();
    let sens = estimates::dt_sensitivity(&b.u0, &b.idx, &b.sym, 1e-2, 1e-3).unwrap();
    verdict(
        "criterion 8 (integrator order)",
        (RICHARDSON_LO..=RICHARDSON_HI).contains(&ratio) && sens < TOL_DT_SENSITIVITY,
        format!(
            "Richardson ratio {ratio:.3} (in [{RICHARDSON_LO}, {RICHARDSON_HI}]); halving dt \
             moves criterion-4 norms by {sens:.3e} relative (< {TOL_DT_SENSITIVITY:.0e}) [{:.1?}]",
            t0.elapsed()
        ),
    );
}
