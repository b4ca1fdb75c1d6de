//! CSV result tables and raw field dumps.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use helmsweep::{Complex64, GridSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Bumped whenever the CSV columns change.
pub const SCHEMA_VERSION: u32 = 1;

/// One line of a result table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub schema: u32,
    pub dim: usize,
    /// `omega / 2 pi`.
    pub freq: f64,
    pub n: usize,
    /// Total unknowns `N`.
    pub unknowns: usize,
    pub t_setup: f64,
    pub n_iter: usize,
    pub t_solve: f64,
    pub converged: bool,
    pub final_residual: f64,
    pub medium: String,
    pub force: String,
    pub config_hash: String,
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(CSV_HEADER).map_err(|e| CliError::Format(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Column names, written even for an empty table.
pub const CSV_HEADER: [&str; 13] = [
    "schema",
    "dim",
    "freq",
    "n",
    "unknowns",
    "t_setup",
    "n_iter",
    "t_solve",
    "converged",
    "final_residual",
    "medium",
    "force",
    "config_hash",
];

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    r.deserialize().map(|row| row.map_err(|e| CliError::Format(e.to_string()))).collect()
}

/// Sidecar metadata of a field dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    /// Extents of the stored array, fastest axis first.
    pub dims: Vec<usize>,
    pub h: f64,
    pub omega: f64,
    pub config_hash: String,
    /// Position of the slicing plane along the first axis, for slices of 3D fields.
    pub slice_x1: Option<f64>,
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Write `values` as little-endian `f64` pairs (re, im) to `path` and metadata to `path.json`.
pub fn dump_field(values: &[Complex64], meta: &FieldMeta, path: &Path) -> Result<()> {
    let expected: usize = meta.dims.iter().product();
    if expected != values.len() {
        return Err(CliError::Format(format!("field has {} values, dims {:?}", values.len(), meta.dims)));
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for v in values {
        w.write_all(&v.re.to_le_bytes()).map_err(|e| CliError::io(path, e))?;
        w.write_all(&v.im.to_le_bytes()).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    let side = sidecar(path);
    let json = serde_json::to_string_pretty(meta).map_err(|e| CliError::Format(e.to_string()))?;
    std::fs::write(&side, json).map_err(|e| CliError::io(&side, e))
}

pub fn read_field(path: &Path) -> Result<(Vec<Complex64>, FieldMeta)> {
    let side = sidecar(path);
    let text = std::fs::read_to_string(&side).map_err(|e| CliError::io(&side, e))?;
    let meta: FieldMeta = serde_json::from_str(&text).map_err(|e| CliError::Format(e.to_string()))?;
    let mut bytes = Vec::new();
    BufReader::new(File::open(path).map_err(|e| CliError::io(path, e))?)
        .read_to_end(&mut bytes)
        .map_err(|e| CliError::io(path, e))?;
    let expected: usize = meta.dims.iter().product();
    if bytes.len() != 16 * expected {
        return Err(CliError::Format(format!("{}: {} bytes for {expected} values", path.display(), bytes.len())));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok((values, meta))
}

/// The plane `x1 = x` of a 3D field (nearest grid plane), as an `n x n` array over `(x2, x3)`.
pub fn slice_x1(values: &[Complex64], grid: &GridSpec, x: f64) -> Result<(Vec<Complex64>, f64)> {
    if grid.dim() != 3 {
        return Err(CliError::Format("slices are taken from 3D fields".into()));
    }
    let n = grid.n();
    let i = ((x / grid.h()).round() as usize).clamp(1, n) - 1;
    let out = (0..n * n).map(|k| values[i + n * k]).collect();
    Ok((out, (i + 1) as f64 * grid.h()))
}

/// Dump a solution; 3D fields are reduced to their `x1 = 0.5` plane.
pub fn dump_solution(values: &[Complex64], grid: &GridSpec, config_hash: &str, path: &Path) -> Result<()> {
    let n = grid.n();
    let (data, dims, slice) = if grid.dim() == 3 {
        let (s, x) = slice_x1(values, grid, 0.5)?;
        (s, vec![n, n], Some(x))
    } else {
        (values.to_vec(), vec![n; grid.dim()], None)
    };
    let meta = FieldMeta { dims, h: grid.h(), omega: grid.omega(), config_hash: config_hash.to_string(), slice_x1: slice };
    dump_field(&data, &meta, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(freq: f64) -> ResultRow {
        ResultRow {
            schema: SCHEMA_VERSION,
            dim: 2,
            freq,
            n: 127,
            unknowns: 127 * 127,
            t_setup: 0.5,
            n_iter: 4,
            t_solve: 0.25,
            converged: true,
            final_residual: 4e-4,
            medium: "lens".into(),
            force: "point_source".into(),
            config_hash: "abc".into(),
        }
    }

    #[test]
    fn csv_round_trip_and_empty_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_csv(&p, &[row(16.0), row(32.0)]).unwrap();
        assert_eq!(read_csv(&p).unwrap(), vec![row(16.0), row(32.0)]);
        write_csv(&p, &[]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.trim_end(), CSV_HEADER.join(","));
        assert!(read_csv(&p).unwrap().is_empty());
    }

    #[test]
    fn field_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u.bin");
        let values: Vec<Complex64> = (0..12).map(|k| Complex64::new(k as f64 / 7.0, -(k as f64).sqrt())).collect();
        let meta = FieldMeta { dims: vec![4, 3], h: 0.2, omega: 3.0, config_hash: "x".into(), slice_x1: None };
        dump_field(&values, &meta, &p).unwrap();
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 16 * 12);
        let (back, m2) = read_field(&p).unwrap();
        assert_eq!(m2, meta);
        assert!(back.iter().zip(&values).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
        assert!(dump_field(&values[1..], &meta, &p).is_err());
    }

    #[test]
    fn three_d_slice_extent() {
        let grid = GridSpec::new(3, 39, 10.0 * std::f64::consts::PI).unwrap();
        let values: Vec<Complex64> = (0..grid.len()).map(|k| Complex64::new(k as f64, 0.0)).collect();
        let (s, x) = slice_x1(&values, &grid, 0.5).unwrap();
        assert_eq!(s.len(), 39 * 39);
        assert_eq!(x, 0.5);
        // the slice holds the points with first index 19
        assert_eq!(s[1].re, (19 + 39) as f64);
    }
}
