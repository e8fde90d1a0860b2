//! `besov-ep <command> --config <path> [--set section.key=value ...]`
//!
//! Exit codes: 0 pass, 1 experiment infeasible, 2 property failure,
//! 3 configuration or input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use besov_ep::config::{parse_config, Config};
use besov_ep::harness::{self, CommandKind};

#[derive(Parser)]
#[command(
    name = "besov-ep",
    about = "Wave-packet experiments for the Euler-Poincare equations in Besov spaces",
    long_about = "Runs the harmonic-analysis experiment suite: spectral self-checks, \
                  the convective lower bound, short-time solution asymptotics, the \
                  Hoelder-ratio sweep, the divergent Lipschitz coefficient, plain \
                  time integration, and Besov norms of dumped fields."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Configuration file (key = value with [section] headers); defaults
    /// apply when omitted.
    #[arg(long, global = false)]
    config: Option<PathBuf>,
    /// Override one configuration entry, e.g. --set grid.sizes=8192,64
    /// (repeatable; applied after the file).
    #[arg(long = "set", value_name = "section.key=value")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the property suite (transforms, partition of unity, packet
    /// localization, commutator identity, momentum residual, RK4 order).
    Selfcheck(Common),
    /// Lower bound n^2 |u0 . grad Delta_n u0|_Lp ~ 2^{n(1-s)} per band.
    Lemma31(Common),
    /// Short-time slopes: |S_t(u0)-u0|_{s-1} ~ t and |w|_{s-2} ~ t^2.
    Prop31(Common),
    /// Hoelder ratio Q_n = t_n^{-alpha} |S_{t_n}(u0)-u0|_s over feasible n.
    Hoelder(Common),
    /// Divergent Lipschitz coefficient: per-band linear rates r_n.
    Lipschitz(Common),
    /// Integrate the datum to the horizon, dumping trace and fields.
    Solve(Common),
    /// Besov norm and per-block profile of dumped BEPF field files.
    Norms(Common),
}

impl Cmd {
    fn split(&self) -> (CommandKind, &Common) {
        match self {
            Cmd::Selfcheck(c) => (CommandKind::Selfcheck, c),
            Cmd::Lemma31(c) => (CommandKind::Lemma31, c),
            Cmd::Prop31(c) => (CommandKind::Prop31, c),
            Cmd::Hoelder(c) => (CommandKind::Hoelder, c),
            Cmd::Lipschitz(c) => (CommandKind::Lipschitz, c),
            Cmd::Solve(c) => (CommandKind::Solve, c),
            Cmd::Norms(c) => (CommandKind::Norms, c),
        }
    }
}

fn configure_threads(cfg: &Config) {
    #[cfg(feature = "parallel")]
    if cfg.threads > 0 {
        // Ignore the error: the global pool can only be built once (e.g.
        // when embedded in a process that already initialized rayon).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = cfg;
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = cli.command.split();

    let cfg = match parse_config(common.config.as_deref(), &common.set) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("besov-ep {}: {e}", kind.name());
            return ExitCode::from(3);
        }
    };
    configure_threads(&cfg);

    match harness::run(kind, &cfg) {
        Ok(report) => {
            print!("{}", report.text());
            ExitCode::from(report.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("besov-ep {}: {e}", kind.name());
            ExitCode::from(harness::exit_code_for(&e) as u8)
        }
    }
}
