//! Experiment configuration: a flat, diff-friendly `key = value` format
//! with `[section]` headers, `#` comments, `pi`-suffixed reals (`48pi`),
//! and comma-separated lists.  Command-line `--set section.key=value`
//! overrides take precedence over the file, which takes precedence over
//! the built-in defaults.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lp::BesovIndex;
use crate::profile::{omega, DatumSpec};

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct Config {
    // [grid]
    pub dim: usize,
    pub sizes: Vec<usize>,
    pub lengths: Vec<f64>,
    // [besov]
    pub s: f64,
    pub p: f64,
    pub r: f64,
    // [datum]
    pub n_min: u32,
    pub n_max: u32,
    pub stride: u32,
    pub single_n: Option<u32>,
    // [solver]
    pub horizon: f64,
    pub dt: Option<f64>,
    pub growth_guard: f64,
    // [lemma31]
    pub lemma31_probe: Vec<u32>,
    // [prop31]
    pub prop31_window: Vec<f64>,
    // [lipschitz]
    pub lipschitz_stride: u32,
    pub lipschitz_probe: Vec<u32>,
    pub lipschitz_window: Vec<f64>,
    // [hoelder]
    pub hoelder_alpha: Vec<f64>,
    pub hoelder_n_lo: u32,
    pub hoelder_n_hi: u32,
    // [solve]
    pub solve_samples: usize,
    // [norms]
    pub norms_input: Vec<String>,
    // [run]
    pub out_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
    pub seed: u64,
    pub threads: usize,
}

impl Default for Config {
    /// Preset A: a 2-D anisotropic 65536 x 64 box of side 48 pi (the
    /// canonical box on which the packet carriers sit exactly on lattice
    /// frequencies and the bump certifies 1e-12 boundary decay), indices
    /// (s, p, r) = (2.5, 2, 2), datum bands 3..9.
    fn default() -> Self {
        Config {
            dim: 2,
            sizes: vec![65536, 64],
            lengths: vec![48.0 * PI, 48.0 * PI],
            s: 2.5,
            p: 2.0,
            r: 2.0,
            n_min: 3,
            n_max: 9,
            stride: 1,
            single_n: None,
            horizon: 1e-2,
            dt: None,
            growth_guard: 4.0,
            lemma31_probe: vec![4, 5, 6, 7, 8, 9],
            prop31_window: (0..5).map(|i| 1e-4 * 10f64.powf(i as f64 / 2.0)).collect(),
            lipschitz_stride: 2,
            lipschitz_probe: vec![5, 7, 9],
            lipschitz_window: vec![1e-4, 1e-3, 1e-2],
            hoelder_alpha: vec![0.5],
            hoelder_n_lo: 3,
            hoelder_n_hi: 16,
            solve_samples: 8,
            norms_input: Vec::new(),
            out_dir: PathBuf::from("out"),
            cache_dir: None,
            seed: 20260825,
            threads: 0,
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parse a real, accepting a `pi` suffix: `48pi` = 48*pi, `pi` = pi.
fn parse_real(raw: &str, what: &str) -> Result<f64> {
    let t = raw.trim();
    let (body, factor) = match t.strip_suffix("pi") {
        Some(rest) => (rest.trim(), PI),
        None => (t, 1.0),
    };
    let base: f64 = if body.is_empty() {
        1.0
    } else {
        body.parse().map_err(|_| cfg_err(format!("{what}: cannot parse real '{raw}'")))?
    };
    Ok(base * factor)
}

fn parse_int<T: std::str::FromStr>(raw: &str, what: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| cfg_err(format!("{what}: cannot parse integer '{raw}'")))
}

fn parse_list<T>(raw: &str, what: &str, f: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    raw.split(',').map(|item| f(item, what)).collect()
}

impl Config {
    /// Apply one `section.key = value` assignment.
    fn assign(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let what = format!("[{section}] {key}");
        match (section, key) {
            ("grid", "dim") => self.dim = parse_int(value, &what)?,
            ("grid", "sizes") => self.sizes = parse_list(value, &what, parse_int)?,
            ("grid", "lengths") => self.lengths = parse_list(value, &what, parse_real)?,
            ("besov", "s") => self.s = parse_real(value, &what)?,
            ("besov", "p") => {
                self.p = if value.trim() == "inf" { f64::INFINITY } else { parse_real(value, &what)? }
            }
            ("besov", "r") => {
                self.r = if value.trim() == "inf" { f64::INFINITY } else { parse_real(value, &what)? }
            }
            ("datum", "n_min") => self.n_min = parse_int(value, &what)?,
            ("datum", "n_max") => self.n_max = parse_int(value, &what)?,
            ("datum", "stride") => self.stride = parse_int(value, &what)?,
            ("datum", "single_n") => {
                self.single_n = if value.trim() == "none" {
                    None
                } else {
                    Some(parse_int(value, &what)?)
                }
            }
            ("solver", "horizon") => self.horizon = parse_real(value, &what)?,
            ("solver", "dt") => {
                self.dt = if value.trim() == "auto" { None } else { Some(parse_real(value, &what)?) }
            }
            ("solver", "growth_guard") => self.growth_guard = parse_real(value, &what)?,
            ("lemma31", "probe") => self.lemma31_probe = parse_list(value, &what, parse_int)?,
            ("prop31", "window") => self.prop31_window = parse_list(value, &what, parse_real)?,
            ("lipschitz", "stride") => self.lipschitz_stride = parse_int(value, &what)?,
            ("lipschitz", "probe") => self.lipschitz_probe = parse_list(value, &what, parse_int)?,
            ("lipschitz", "window") => self.lipschitz_window = parse_list(value, &what, parse_real)?,
            ("hoelder", "alpha") => self.hoelder_alpha = parse_list(value, &what, parse_real)?,
            ("hoelder", "n_lo") => self.hoelder_n_lo = parse_int(value, &what)?,
            ("hoelder", "n_hi") => self.hoelder_n_hi = parse_int(value, &what)?,
            ("solve", "samples") => self.solve_samples = parse_int(value, &what)?,
            ("norms", "input") => {
                self.norms_input = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            }
            ("run", "out_dir") => self.out_dir = PathBuf::from(value.trim()),
            ("run", "cache_dir") => {
                self.cache_dir = if value.trim() == "none" {
                    None
                } else {
                    Some(PathBuf::from(value.trim()))
                }
            }
            ("run", "seed") => self.seed = parse_int(value, &what)?,
            ("run", "threads") => self.threads = parse_int(value, &what)?,
            _ => return Err(cfg_err(format!("unknown key [{section}] {key}"))),
        }
        Ok(())
    }

    fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            cfg_err(format!("cannot read config file {}: {e}", path.display()))
        })?;
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(cfg_err(format!(
                    "{}:{}: expected 'key = value', got '{line}'",
                    path.display(),
                    lineno + 1
                )));
            };
            if section.is_empty() {
                return Err(cfg_err(format!(
                    "{}:{}: key '{}' before any [section]",
                    path.display(),
                    lineno + 1,
                    key.trim()
                )));
            }
            self.assign(&section, key.trim(), value.trim())?;
        }
        Ok(())
    }

    fn apply_set(&mut self, set: &str) -> Result<()> {
        let Some((path, value)) = set.split_once('=') else {
            return Err(cfg_err(format!("--set needs 'section.key=value', got '{set}'")));
        };
        let Some((section, key)) = path.split_once('.') else {
            return Err(cfg_err(format!("--set key must be 'section.key', got '{path}'")));
        };
        self.assign(section.trim(), key.trim(), value.trim())
    }

    /// Consistency validation; every reported violation names the offending
    /// quantity or inequality.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > 4 {
            return Err(cfg_err(format!("grid.dim must lie in 1..=4, got {}", self.dim)));
        }
        if self.sizes.len() != self.dim || self.lengths.len() != self.dim {
            return Err(cfg_err(format!(
                "grid.sizes ({}) and grid.lengths ({}) must both have dim = {} entries",
                self.sizes.len(),
                self.lengths.len(),
                self.dim
            )));
        }
        self.besov_index().admissible(self.dim)?;
        if self.n_min < 3 {
            return Err(cfg_err(format!("datum.n_min must be >= 3, got {}", self.n_min)));
        }
        if self.n_min > self.n_max {
            return Err(cfg_err(format!(
                "datum.n_min = {} exceeds datum.n_max = {}",
                self.n_min, self.n_max
            )));
        }
        if self.stride == 0 || self.lipschitz_stride == 0 {
            return Err(cfg_err("datum/lipschitz stride must be >= 1"));
        }
        // band feasibility of the top datum band on axis 0
        let n0 = self.sizes[0];
        let l0 = self.lengths[0];
        if n0 == 0 || !(l0 > 0.0) {
            return Err(cfg_err("grid axis 0 must have positive size and length"));
        }
        let cutoff = (n0 / 3) as f64 * (2.0 * PI / l0);
        let need = omega(self.n_max) + 0.5;
        if need > cutoff {
            return Err(cfg_err(format!(
                "datum.n_max = {}: packet needs |xi| up to {need:.3} but the dealiased band \
                 on axis 0 ends at {cutoff:.3}; enlarge grid.sizes[0] or lower n_max",
                self.n_max
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(cfg_err(format!("solver.horizon must be positive, got {}", self.horizon)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(cfg_err(format!("solver.dt must be positive or 'auto', got {dt}")));
            }
        }
        if !(self.growth_guard > 1.0) {
            return Err(cfg_err(format!(
                "solver.growth_guard must exceed 1, got {}",
                self.growth_guard
            )));
        }
        for &a in &self.hoelder_alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(cfg_err(format!("hoelder.alpha entries must lie in (0,1), got {a}")));
            }
        }
        if self.hoelder_n_lo > self.hoelder_n_hi {
            return Err(cfg_err(format!(
                "hoelder.n_lo = {} exceeds hoelder.n_hi = {}",
                self.hoelder_n_lo, self.hoelder_n_hi
            )));
        }
        for (name, window) in
            [("prop31.window", &self.prop31_window), ("lipschitz.window", &self.lipschitz_window)]
        {
            for &t in window {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(cfg_err(format!("{name} times must be positive, got {t}")));
                }
                if t > self.horizon * (1.0 + 1e-12) {
                    return Err(cfg_err(format!(
                        "{name} time {t} exceeds the validated solver horizon {}",
                        self.horizon
                    )));
                }
            }
        }
        if self.solve_samples == 0 {
            return Err(cfg_err("solve.samples must be >= 1"));
        }
        Ok(())
    }

    pub fn besov_index(&self) -> BesovIndex {
        BesovIndex::new(self.s, self.p, self.r)
    }

    /// Datum for lemma31/prop31/hoelder/solve.
    pub fn datum(&self) -> DatumSpec {
        let mut d = DatumSpec::new(self.besov_index(), self.n_min, self.n_max);
        d.stride = self.stride;
        d.single_n = self.single_n;
        d
    }

    /// Datum for the Lipschitz experiment (defaults to odd bands, which keep
    /// the exact 2 omega_m = omega_{m+1} coincidences out of the probed
    /// rings).
    pub fn lipschitz_datum(&self) -> DatumSpec {
        let mut d = DatumSpec::new(self.besov_index(), self.n_min, self.n_max);
        d.stride = self.lipschitz_stride;
        d
    }

    /// Canonical `key = value` rendering (the effective-config echo).
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let fmt_real = |v: f64| -> String {
            if v.is_infinite() {
                "inf".into()
            } else {
                format!("{v:?}")
            }
        };
        let fmt_reals =
            |vs: &[f64]| vs.iter().map(|&v| fmt_real(v)).collect::<Vec<_>>().join(", ");
        let fmt_ints = |vs: &[u32]| {
            vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
        };
        let _ = write!(
            s,
            "[grid]\ndim = {}\nsizes = {}\nlengths = {}\n\n",
            self.dim,
            self.sizes.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "),
            fmt_reals(&self.lengths),
        );
        let _ = write!(
            s,
            "[besov]\ns = {}\np = {}\nr = {}\n\n",
            fmt_real(self.s),
            fmt_real(self.p),
            fmt_real(self.r),
        );
        let _ = write!(
            s,
            "[datum]\nn_min = {}\nn_max = {}\nstride = {}\nsingle_n = {}\n\n",
            self.n_min,
            self.n_max,
            self.stride,
            self.single_n.map_or("none".into(), |v| v.to_string()),
        );
        let _ = write!(
            s,
            "[solver]\nhorizon = {}\ndt = {}\ngrowth_guard = {}\n\n",
            fmt_real(self.horizon),
            self.dt.map_or("auto".into(), fmt_real),
            fmt_real(self.growth_guard),
        );
        let _ = write!(s, "[lemma31]\nprobe = {}\n\n", fmt_ints(&self.lemma31_probe));
        let _ = write!(s, "[prop31]\nwindow = {}\n\n", fmt_reals(&self.prop31_window));
        let _ = write!(
            s,
            "[lipschitz]\nstride = {}\nprobe = {}\nwindow = {}\n\n",
            self.lipschitz_stride,
            fmt_ints(&self.lipschitz_probe),
            fmt_reals(&self.lipschitz_window),
        );
        let _ = write!(
            s,
            "[hoelder]\nalpha = {}\nn_lo = {}\nn_hi = {}\n\n",
            fmt_reals(&self.hoelder_alpha),
            self.hoelder_n_lo,
            self.hoelder_n_hi,
        );
        let _ = write!(s, "[solve]\nsamples = {}\n\n", self.solve_samples);
        let _ = write!(s, "[norms]\ninput = {}\n\n", self.norms_input.join(", "));
        let _ = write!(
            s,
            "[run]\nout_dir = {}\ncache_dir = {}\nseed = {}\nthreads = {}\n",
            self.out_dir.display(),
            self.cache_dir.as_ref().map_or("none".into(), |p| p.display().to_string()),
            self.seed,
            self.threads,
        );
        s
    }
}

/// Build the effective configuration: defaults, then the file (if given),
/// then `--set` overrides, then validation.
pub fn parse_config(path: Option<&Path>, sets: &[String]) -> Result<Config> {
    let mut cfg = Config::default();
    if let Some(p) = path {
        cfg.apply_file(p)?;
    }
    for set in sets {
        cfg.apply_set(set)?;
    }
    cfg.validate()?;
    Ok(cfg)
}
