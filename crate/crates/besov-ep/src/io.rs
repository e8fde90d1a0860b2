//! On-disk formats: the BEPF binary field dump, provenance sidecars,
//! CSV / gnuplot table emission, and the precomputation cache.
//!
//! # BEPF field dump
//!
//! A self-describing little-endian binary format for one complex scalar
//! field:
//!
//! ```text
//! offset  size  value
//! 0       4     magic bytes "BEPF"
//! 4       8     version (u64, currently 1)
//! 12      8     dim d (u64)
//! 20      16*d  per-axis pairs: N_i (u64) then L_i (f64)
//! ...           2 * prod N_i  f64 values: interleaved re/im coefficients
//! ```
//!
//! Coefficients are stored in **row-major** order (last axis fastest) in FFT
//! frequency order per axis; the in-memory layout is column-major (axis 0
//! fastest), so dump/load transpose.  A dump carries spectral coefficients as
//! produced by [`SpectralField`]'s forward transform.
//!
//! # Cache
//!
//! Bump profiles and Littlewood-Paley symbol tables are content-addressed by
//! a SHA-256 key over their construction inputs and stored under a cache
//! directory resolved as: `BESOV_EP_CACHE` environment variable, else the
//! configured `run.cache_dir`, else `<tmp>/besov-ep-cache`.  Cache files are
//! an internal versioned format; any malformed or stale entry is silently
//! recomputed and rewritten, so deleting the directory is always safe.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{make_grid, Grid};
use crate::lp::{build_lp_symbols, LpSymbols, SparseSym};
use crate::profile::{build_bump, BumpProfile};
use crate::step::Transition;

pub const BEPF_MAGIC: &[u8; 4] = b"BEPF";
pub const BEPF_VERSION: u64 = 1;

const CACHE_MAGIC: &[u8; 4] = b"BEPC";
const CACHE_VERSION: u64 = 1;
const KIND_BUMP: u64 = 1;
const KIND_SYMBOLS: u64 = 2;

// ---------------------------------------------------------------------------
// little-endian primitives
// ---------------------------------------------------------------------------

fn put_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get_u64(r: &mut impl Read, what: &str) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| Error::Format(format!("truncated reading {what}")))?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64(r: &mut impl Read, what: &str) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| Error::Format(format!("truncated reading {what}")))?;
    Ok(f64::from_le_bytes(b))
}

fn put_f64_slice(w: &mut impl Write, vs: &[f64]) -> Result<()> {
    put_u64(w, vs.len() as u64)?;
    let mut buf = Vec::with_capacity(vs.len() * 8);
    for &v in vs {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn get_f64_slice(r: &mut impl Read, what: &str) -> Result<Vec<f64>> {
    let len = get_u64(r, what)? as usize;
    let mut buf = vec![0u8; len * 8];
    r.read_exact(&mut buf).map_err(|_| Error::Format(format!("truncated reading {what}")))?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

fn put_u32_slice(w: &mut impl Write, vs: &[u32]) -> Result<()> {
    put_u64(w, vs.len() as u64)?;
    let mut buf = Vec::with_capacity(vs.len() * 4);
    for &v in vs {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn get_u32_slice(r: &mut impl Read, what: &str) -> Result<Vec<u32>> {
    let len = get_u64(r, what)? as usize;
    let mut buf = vec![0u8; len * 4];
    r.read_exact(&mut buf).map_err(|_| Error::Format(format!("truncated reading {what}")))?;
    Ok(buf.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect())
}

// ---------------------------------------------------------------------------
// BEPF field dump
// ---------------------------------------------------------------------------

/// Row-major (last axis fastest) strides for a shape.
fn row_major_strides(sizes: &[usize]) -> Vec<usize> {
    let d = sizes.len();
    let mut st = vec![1usize; d];
    for a in (0..d.saturating_sub(1)).rev() {
        st[a] = st[a + 1] * sizes[a + 1];
    }
    st
}

/// Column-major (axis 0 fastest) strides — the in-memory layout.
fn col_major_strides(sizes: &[usize]) -> Vec<usize> {
    let d = sizes.len();
    let mut st = vec![1usize; d];
    for a in 1..d {
        st[a] = st[a - 1] * sizes[a - 1];
    }
    st
}

/// Write one spectral field as a BEPF v1 file.
pub fn dump_field(path: &Path, f: &SpectralField) -> Result<()> {
    let grid = &f.grid;
    let d = grid.dim();
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(BEPF_MAGIC)?;
    put_u64(&mut w, BEPF_VERSION)?;
    put_u64(&mut w, d as u64)?;
    for a in 0..d {
        put_u64(&mut w, grid.sizes[a] as u64)?;
        put_f64(&mut w, grid.lengths[a])?;
    }
    let rm = row_major_strides(&grid.sizes);
    let cm = col_major_strides(&grid.sizes);
    let total = grid.total();
    let mut buf = Vec::with_capacity(16 * 8192);
    for pos in 0..total {
        // decode the row-major position, accumulate the column-major index
        let mut rem = pos;
        let mut flat = 0usize;
        for a in 0..d {
            let idx = rem / rm[a];
            rem %= rm[a];
            flat += idx * cm[a];
        }
        let c = f.c[flat];
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
        if buf.len() >= 16 * 8192 {
            w.write_all(&buf)?;
            buf.clear();
        }
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

/// Read a BEPF v1 file, reconstructing its grid from the header.
pub fn load_field(path: &Path) -> Result<SpectralField> {
    let mut r = BufReader::new(fs::File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| Error::Format("truncated BEPF header".into()))?;
    if &magic != BEPF_MAGIC {
        return Err(Error::Format(format!(
            "{}: bad magic {:?}, expected \"BEPF\"",
            path.display(),
            magic
        )));
    }
    let version = get_u64(&mut r, "BEPF version")?;
    if version != BEPF_VERSION {
        return Err(Error::Format(format!(
            "{}: unsupported BEPF version {version}",
            path.display()
        )));
    }
    let d = get_u64(&mut r, "BEPF dim")? as usize;
    if d == 0 || d > crate::grid::MAX_DIM {
        return Err(Error::Format(format!("{}: dim {d} out of range", path.display())));
    }
    let mut sizes = Vec::with_capacity(d);
    let mut lengths = Vec::with_capacity(d);
    for a in 0..d {
        sizes.push(get_u64(&mut r, &format!("N_{a}"))? as usize);
        lengths.push(get_f64(&mut r, &format!("L_{a}"))?);
    }
    let grid = make_grid(d, &lengths, &sizes)?;
    let total = grid.total();
    let mut data = vec![0u8; total * 16];
    r.read_exact(&mut data)
        .map_err(|_| Error::Format(format!("{}: truncated coefficient block", path.display())))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format(format!(
            "{}: trailing bytes after {total} coefficients",
            path.display()
        )));
    }
    let rm = row_major_strides(&sizes);
    let cm = col_major_strides(&sizes);
    let mut c = vec![Complex64::new(0.0, 0.0); total];
    for (pos, chunk) in data.chunks_exact(16).enumerate() {
        let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
        let mut rem = pos;
        let mut flat = 0usize;
        for a in 0..d {
            let idx = rem / rm[a];
            rem %= rm[a];
            flat += idx * cm[a];
        }
        c[flat] = Complex64::new(re, im);
    }
    Ok(SpectralField::from_coeffs(grid, c)?)
}

// ---------------------------------------------------------------------------
// provenance sidecar
// ---------------------------------------------------------------------------

/// Serde adapter: JSON has no infinity literal, so `p = inf` (and friends)
/// round-trip through the string `"inf"`.
mod maybe_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, ser: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            ser.serialize_f64(*v)
        } else if v.is_nan() {
            ser.serialize_str("nan")
        } else {
            ser.serialize_str("inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) if s == "nan" => Ok(f64::NAN),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad float '{s}'"))),
        }
    }
}

/// Everything needed to re-derive a dumped artifact: problem indices, datum
/// truncation, grid shape, and the certified bump boundary decay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub d: usize,
    pub s: f64,
    #[serde(with = "maybe_inf")]
    pub p: f64,
    #[serde(with = "maybe_inf")]
    pub r: f64,
    pub n_min: u32,
    pub n_max: u32,
    pub grid: GridShape,
    pub boundary_decay: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridShape {
    pub sizes: Vec<usize>,
    pub lengths: Vec<f64>,
}

impl GridShape {
    pub fn of(grid: &Grid) -> Self {
        GridShape { sizes: grid.sizes.clone(), lengths: grid.lengths.clone() }
    }
}

pub fn write_provenance(path: &Path, p: &Provenance) -> Result<()> {
    let json = serde_json::to_string_pretty(p)
        .map_err(|e| Error::Format(format!("provenance serialization: {e}")))?;
    fs::write(path, json + "\n")?;
    Ok(())
}

pub fn read_provenance(path: &Path) -> Result<Provenance> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: bad provenance JSON: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// tables: CSV + gnuplot .dat
// ---------------------------------------------------------------------------

/// Shortest round-trip decimal rendering; deterministic across runs.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

/// A rectangular table destined for CSV and .dat emission.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Gnuplot-friendly rendering: `#`-prefixed header, whitespace-aligned
    /// columns (gnuplot's `using` indexes columns by position).
    pub fn to_dat(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::from("#");
        for (w, c) in widths.iter().zip(&self.columns) {
            out.push(' ');
            out.push_str(&format!("{c:>w$}", w = w));
        }
        out.push('\n');
        for row in &self.rows {
            out.push(' '); // align data under the "# " header prefix
            for (w, cell) in widths.iter().zip(row) {
                out.push(' ');
                out.push_str(&format!("{cell:>w$}", w = w));
            }
            out.push('\n');
        }
        out
    }
}

/// Write `<dir>/<stem>.csv` and `<dir>/<stem>.dat`; returns the CSV path.
pub fn emit_table(dir: &Path, stem: &str, table: &Table) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    fs::write(&csv, table.to_csv())?;
    fs::write(dir.join(format!("{stem}.dat")), table.to_dat())?;
    Ok(csv)
}

// ---------------------------------------------------------------------------
// precomputation cache
// ---------------------------------------------------------------------------

fn hex_digest(desc: &str) -> String {
    let digest = Sha256::digest(desc.as_bytes());
    let mut s = String::with_capacity(64);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

fn transition_from_tag(tag: &str) -> Option<Transition> {
    if tag == "tabulated:v1" {
        return Some(Transition::Tabulated);
    }
    tag.strip_prefix("classic:")
        .and_then(|rest| rest.parse().ok())
        .map(|sharpness| Transition::Classic { sharpness })
}

/// Disk cache for bump profiles and LP symbol tables.
#[derive(Debug, Clone)]
pub struct Cache {
    /// `None` disables on-disk caching (everything is recomputed).
    pub dir: Option<PathBuf>,
}

impl Cache {
    /// Resolution order: `BESOV_EP_CACHE` env var, configured directory,
    /// `<system tmp>/besov-ep-cache`.
    pub fn resolve(configured: Option<&Path>) -> Cache {
        Self::resolve_with(std::env::var_os("BESOV_EP_CACHE"), configured)
    }

    pub fn resolve_with(env: Option<std::ffi::OsString>, configured: Option<&Path>) -> Cache {
        let dir = match env {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => match configured {
                Some(d) => d.to_path_buf(),
                None => std::env::temp_dir().join("besov-ep-cache"),
            },
        };
        Cache { dir: Some(dir) }
    }

    pub fn disabled() -> Cache {
        Cache { dir: None }
    }

    fn path_for(&self, key: &str, ext: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.{ext}")))
    }

    /// Best-effort atomic store: write a temp file, then rename into place.
    fn store(&self, path: &Path, payload: &[u8]) {
        let Some(dir) = path.parent() else { return };
        if fs::create_dir_all(dir).is_err() {
            return;
        }
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        if fs::write(&tmp, payload).is_ok() && fs::rename(&tmp, path).is_err() {
            let _ = fs::remove_file(&tmp);
        }
    }

    /// Bump profile for a 1-D axis grid, cached by (N, L, transition).
    pub fn bump(&self, axis_grid: &Arc<Grid>, transition: Transition) -> Result<BumpProfile> {
        let key = hex_digest(&format!(
            "bump|v{CACHE_VERSION}|N={}|Lbits={:016x}|tr={}",
            axis_grid.sizes[0],
            axis_grid.lengths[0].to_bits(),
            transition.cache_tag()
        ));
        let path = self.path_for(&key, "bump");
        if let Some(p) = &path {
            if let Ok(b) = load_bump_blob(p, axis_grid) {
                return Ok(b);
            }
        }
        let bump = build_bump(axis_grid, transition)?;
        if let Some(p) = &path {
            if let Ok(payload) = bump_blob(&bump) {
                self.store(p, &payload);
            }
        }
        Ok(bump)
    }

    /// LP symbol table for a grid, cached by (sizes, length bits).
    pub fn symbols(&self, grid: &Arc<Grid>) -> Result<LpSymbols> {
        let mut desc = format!("symbols|v{CACHE_VERSION}");
        for a in 0..grid.dim() {
            desc.push_str(&format!("|{}x{:016x}", grid.sizes[a], grid.lengths[a].to_bits()));
        }
        let key = hex_digest(&desc);
        let path = self.path_for(&key, "lps");
        if let Some(p) = &path {
            if let Ok(sym) = load_symbols_blob(p, grid) {
                return Ok(sym);
            }
        }
        let sym = build_lp_symbols(grid)?;
        if let Some(p) = &path {
            if let Ok(payload) = symbols_blob(&sym) {
                self.store(p, &payload);
            }
        }
        Ok(sym)
    }
}

fn blob_header(w: &mut impl Write, kind: u64) -> Result<()> {
    w.write_all(CACHE_MAGIC)?;
    put_u64(w, CACHE_VERSION)?;
    put_u64(w, kind)?;
    Ok(())
}

fn check_blob_header(r: &mut impl Read, kind: u64) -> Result<()> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| Error::Format("truncated cache header".into()))?;
    if &magic != CACHE_MAGIC {
        return Err(Error::Format("bad cache magic".into()));
    }
    if get_u64(r, "cache version")? != CACHE_VERSION {
        return Err(Error::Format("cache version mismatch".into()));
    }
    if get_u64(r, "cache kind")? != kind {
        return Err(Error::Format("cache kind mismatch".into()));
    }
    Ok(())
}

fn bump_blob(bump: &BumpProfile) -> Result<Vec<u8>> {
    let mut w = Vec::new();
    blob_header(&mut w, KIND_BUMP)?;
    put_u64(&mut w, bump.axis_grid.sizes[0] as u64)?;
    put_f64(&mut w, bump.axis_grid.lengths[0])?;
    let tag = bump.transition.cache_tag();
    put_u64(&mut w, tag.len() as u64)?;
    w.extend_from_slice(tag.as_bytes());
    put_f64_slice(&mut w, &bump.hat_samples)?;
    put_f64_slice(&mut w, &bump.phys_samples)?;
    put_f64(&mut w, bump.boundary_decay)?;
    put_f64(&mut w, bump.phi0)?;
    Ok(w)
}

fn load_bump_blob(path: &Path, axis_grid: &Arc<Grid>) -> Result<BumpProfile> {
    let mut r = BufReader::new(fs::File::open(path)?);
    check_blob_header(&mut r, KIND_BUMP)?;
    let n = get_u64(&mut r, "bump N")? as usize;
    let l = get_f64(&mut r, "bump L")?;
    if n != axis_grid.sizes[0] || l.to_bits() != axis_grid.lengths[0].to_bits() {
        return Err(Error::Format("cached bump grid mismatch".into()));
    }
    let tag_len = get_u64(&mut r, "bump tag len")? as usize;
    let mut tag = vec![0u8; tag_len];
    r.read_exact(&mut tag).map_err(|_| Error::Format("truncated bump tag".into()))?;
    let tag = String::from_utf8(tag).map_err(|_| Error::Format("bump tag not utf-8".into()))?;
    let transition =
        transition_from_tag(&tag).ok_or_else(|| Error::Format("unknown bump tag".into()))?;
    let hat_samples = get_f64_slice(&mut r, "bump hat samples")?;
    let phys_samples = get_f64_slice(&mut r, "bump phys samples")?;
    if hat_samples.len() != n || phys_samples.len() != n {
        return Err(Error::Format("cached bump sample count mismatch".into()));
    }
    let boundary_decay = get_f64(&mut r, "bump boundary decay")?;
    let phi0 = get_f64(&mut r, "bump phi0")?;
    Ok(BumpProfile {
        axis_grid: Arc::clone(axis_grid),
        hat_samples,
        phys_samples,
        boundary_decay,
        phi0,
        transition,
    })
}

fn put_sparse(w: &mut impl Write, s: &SparseSym) -> Result<()> {
    put_u32_slice(w, &s.idx)?;
    put_f64_slice(w, &s.val)?;
    Ok(())
}

fn get_sparse(r: &mut impl Read, what: &str) -> Result<SparseSym> {
    let idx = get_u32_slice(r, what)?;
    let val = get_f64_slice(r, what)?;
    if idx.len() != val.len() {
        return Err(Error::Format(format!("{what}: index/value length mismatch")));
    }
    Ok(SparseSym { idx, val })
}

fn symbols_blob(sym: &LpSymbols) -> Result<Vec<u8>> {
    let mut w = Vec::new();
    blob_header(&mut w, KIND_SYMBOLS)?;
    let grid = &sym.grid;
    put_u64(&mut w, grid.dim() as u64)?;
    for a in 0..grid.dim() {
        put_u64(&mut w, grid.sizes[a] as u64)?;
        put_f64(&mut w, grid.lengths[a])?;
    }
    put_u64(&mut w, sym.j_max as u64)?;
    put_sparse(&mut w, &sym.chi)?;
    put_u64(&mut w, sym.rings.len() as u64)?;
    for ring in &sym.rings {
        put_sparse(&mut w, ring)?;
    }
    Ok(w)
}

fn load_symbols_blob(path: &Path, grid: &Arc<Grid>) -> Result<LpSymbols> {
    let mut r = BufReader::new(fs::File::open(path)?);
    check_blob_header(&mut r, KIND_SYMBOLS)?;
    let d = get_u64(&mut r, "symbols dim")? as usize;
    if d != grid.dim() {
        return Err(Error::Format("cached symbols dim mismatch".into()));
    }
    for a in 0..d {
        let n = get_u64(&mut r, "symbols N")? as usize;
        let l = get_f64(&mut r, "symbols L")?;
        if n != grid.sizes[a] || l.to_bits() != grid.lengths[a].to_bits() {
            return Err(Error::Format("cached symbols grid mismatch".into()));
        }
    }
    let j_max = get_u64(&mut r, "symbols j_max")? as i32;
    if j_max != grid.j_top {
        return Err(Error::Format("cached symbols j_max mismatch".into()));
    }
    let chi = get_sparse(&mut r, "chi symbol")?;
    let n_rings = get_u64(&mut r, "ring count")? as usize;
    if n_rings != (j_max + 1) as usize {
        return Err(Error::Format("cached symbols ring count mismatch".into()));
    }
    let mut rings = Vec::with_capacity(n_rings);
    for j in 0..n_rings {
        rings.push(get_sparse(&mut r, &format!("ring {j}"))?);
    }
    Ok(LpSymbols { grid: Arc::clone(grid), chi, rings, j_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::synth::random_band_limited;

    #[test]
    fn bepf_round_trip_is_bit_exact_and_row_major() {
        let dir = tempfile::tempdir().unwrap();
        let grid = make_grid(2, &[1.0, 2.0], &[8, 4]).unwrap();
        let f = random_band_limited(&grid, 1, 99, 1.0, 0.3);
        let path = dir.path().join("f.bepf");
        dump_field(&path, &f).unwrap();
        let g = load_field(&path).unwrap();
        assert!(g.grid.same_as(&f.grid));
        for (a, b) in f.c.iter().zip(&g.c) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }

        // header layout and row-major data order, byte for byte
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[0..4], b"BEPF");
        assert_eq!(u64::from_le_bytes(bytes[4..12].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[12..20].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[20..28].try_into().unwrap()), 8); // N_0
        assert_eq!(f64::from_le_bytes(bytes[28..36].try_into().unwrap()), 1.0); // L_0
        assert_eq!(u64::from_le_bytes(bytes[36..44].try_into().unwrap()), 4); // N_1
        assert_eq!(f64::from_le_bytes(bytes[44..52].try_into().unwrap()), 2.0); // L_1
        assert_eq!(bytes.len(), 52 + 8 * 4 * 16);
        // row-major: the record at (k0, k1) sits at position k0 * N_1 + k1;
        // in-memory (column-major) the same entry is c[k1 * N_0 + k0].
        let (k0, k1) = (3usize, 2usize);
        let off = 52 + (k0 * 4 + k1) * 16;
        let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
        let c = f.c[k1 * 8 + k0];
        assert_eq!(re.to_bits(), c.re.to_bits());
        assert_eq!(im.to_bits(), c.im.to_bits());
    }

    #[test]
    fn bepf_rejects_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let grid = make_grid(1, &[1.0], &[8]).unwrap();
        let f = SpectralField::zero(Arc::clone(&grid));
        let path = dir.path().join("f.bepf");
        dump_field(&path, &f).unwrap();

        let mut bytes = fs::read(&path).unwrap();
        bytes[0] = b'X';
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_field(&path), Err(Error::Format(_))));

        dump_field(&path, &f).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(load_field(&path), Err(Error::Format(_))));

        dump_field(&path, &f).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes.extend_from_slice(&[0u8; 4]);
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_field(&path), Err(Error::Format(_))));
    }

    #[test]
    fn provenance_round_trips_including_infinite_indices() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("prov.json");
        let p = Provenance {
            d: 2,
            s: 2.5,
            p: f64::INFINITY,
            r: 2.0,
            n_min: 3,
            n_max: 9,
            grid: GridShape { sizes: vec![64, 8], lengths: vec![48.0, 48.0] },
            boundary_decay: 6.2e-13,
        };
        write_provenance(&path, &p).unwrap();
        let q = read_provenance(&path).unwrap();
        assert_eq!(q.d, 2);
        assert!(q.p.is_infinite());
        assert_eq!(q.r, 2.0);
        assert_eq!(q.grid.sizes, vec![64, 8]);
        assert_eq!(q.boundary_decay, 6.2e-13);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"inf\""));
    }

    #[test]
    fn tables_render_deterministically() {
        let mut t = Table::new(&["n", "value"]);
        t.push(vec!["4".into(), fmt_f64(0.1 + 0.2)]);
        t.push(vec!["5".into(), fmt_f64(1.0)]);
        assert_eq!(t.to_csv(), "n,value\n4,0.30000000000000004\n5,1.0\n");
        let dat = t.to_dat();
        assert!(dat.starts_with("# n"));
        assert_eq!(dat.lines().count(), 3);
        // aligned columns: every line has the same width
        let widths: Vec<usize> = dat.lines().map(|l| l.len()).collect();
        assert_eq!(widths[0], widths[1]);
    }

    #[test]
    fn cache_round_trips_bump_and_symbols_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache { dir: Some(dir.path().to_path_buf()) };
        let axis = make_grid(1, &[48.0 * std::f64::consts::PI], &[512]).unwrap();

        let fresh = cache.bump(&axis, Transition::Tabulated).unwrap(); // miss: builds + stores
        let cached = cache.bump(&axis, Transition::Tabulated).unwrap(); // hit
        assert_eq!(fresh.hat_samples, cached.hat_samples);
        assert_eq!(fresh.phys_samples, cached.phys_samples);
        assert_eq!(fresh.boundary_decay.to_bits(), cached.boundary_decay.to_bits());
        assert_eq!(fresh.phi0.to_bits(), cached.phi0.to_bits());

        let grid = make_grid(2, &[48.0, 48.0], &[32, 16]).unwrap();
        let fresh = cache.symbols(&grid).unwrap();
        let cached = cache.symbols(&grid).unwrap();
        assert_eq!(fresh.j_max, cached.j_max);
        assert_eq!(fresh.chi.idx, cached.chi.idx);
        assert_eq!(fresh.chi.val, cached.chi.val);
        assert_eq!(fresh.rings.len(), cached.rings.len());
        for (a, b) in fresh.rings.iter().zip(&cached.rings) {
            assert_eq!(a.idx, b.idx);
            assert_eq!(a.val, b.val);
        }

        // corrupt every cache entry: loads fail silently and rebuild
        for entry in fs::read_dir(dir.path()).unwrap() {
            let p = entry.unwrap().path();
            fs::write(&p, b"garbage").unwrap();
        }
        let rebuilt = cache.bump(&axis, Transition::Tabulated).unwrap();
        assert_eq!(rebuilt.phi0.to_bits(), fresh_phi0(&cache, &axis));
        let rebuilt_sym = cache.symbols(&grid).unwrap();
        assert_eq!(rebuilt_sym.j_max, fresh.j_max);
    }

    fn fresh_phi0(cache: &Cache, axis: &Arc<Grid>) -> u64 {
        cache.bump(axis, Transition::Tabulated).unwrap().phi0.to_bits()
    }

    #[test]
    fn cache_resolution_order() {
        let env = Some(std::ffi::OsString::from("/env/dir"));
        let cfg = PathBuf::from("/cfg/dir");
        assert_eq!(
            Cache::resolve_with(env, Some(&cfg)).dir,
            Some(PathBuf::from("/env/dir"))
        );
        assert_eq!(
            Cache::resolve_with(None, Some(&cfg)).dir,
            Some(PathBuf::from("/cfg/dir"))
        );
        let fallback = Cache::resolve_with(None, None).dir.unwrap();
        assert!(fallback.ends_with("besov-ep-cache"));
        // empty env var falls through to the configured directory
        assert_eq!(
            Cache::resolve_with(Some(std::ffi::OsString::new()), Some(&cfg)).dir,
            Some(PathBuf::from("/cfg/dir"))
        );
    }
}
