//! Bit-exact state persistence, format `QSS1`.
//!
//! Layout: 4-byte magic `QSS1`; little-endian `u32` header length; UTF-8 JSON
//! header `{"n", "points", "lengths", "gamma1", "gamma2", "beta", "omega",
//! "t"}`; then the `u` array followed by the `v` array, each as interleaved
//! `(re, im)` IEEE-754 binary64 little-endian in row-major order, last axis
//! fastest.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldPair;
use crate::grid::{Grid, PhysicsParams};

const MAGIC: &[u8; 4] = b"QSS1";
const MAX_HEADER_LEN: u32 = 1 << 20;

#[derive(Serialize, Deserialize)]
struct Header {
    n: usize,
    points: Vec<usize>,
    lengths: Vec<f64>,
    gamma1: f64,
    gamma2: f64,
    beta: f64,
    omega: f64,
    t: f64,
}

pub fn save_snapshot(
    fields: &FieldPair,
    grid: &Grid,
    params: &PhysicsParams,
    t: f64,
    path: impl AsRef<Path>,
) -> Result<()> {
    fields.check_grid(grid)?;
    let header = Header {
        n: grid.spatial_dim(),
        points: grid.points().to_vec(),
        lengths: grid.lengths().to_vec(),
        gamma1: params.gamma1,
        gamma2: params.gamma2,
        beta: params.beta,
        omega: params.omega,
        t,
    };
    let header_bytes = serde_json::to_vec(&header)
        .map_err(|e| Error::Snapshot(format!("header encoding failed: {e}")))?;

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
    w.write_all(&header_bytes)?;
    write_array(&mut w, &fields.u)?;
    write_array(&mut w, &fields.v)?;
    w.flush()?;
    Ok(())
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<(FieldPair, Grid, PhysicsParams, f64)> {
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Snapshot("file too short for magic".into()))?;
    if &magic != MAGIC {
        return Err(Error::Snapshot(format!(
            "bad magic {:?}, expected {:?}",
            magic, MAGIC
        )));
    }

    let mut len_bytes = [0u8; 4];
    r.read_exact(&mut len_bytes)
        .map_err(|_| Error::Snapshot("file too short for header length".into()))?;
    let header_len = u32::from_le_bytes(len_bytes);
    if header_len == 0 || header_len > MAX_HEADER_LEN {
        return Err(Error::Snapshot(format!(
            "implausible header length {header_len}"
        )));
    }

    let mut header_bytes = vec![0u8; header_len as usize];
    r.read_exact(&mut header_bytes)
        .map_err(|_| Error::Snapshot("truncated header".into()))?;
    let header: Header = serde_json::from_slice(&header_bytes)
        .map_err(|e| Error::Snapshot(format!("header parse failed: {e}")))?;

    if header.points.len() != header.n || header.lengths.len() != header.n {
        return Err(Error::Snapshot(format!(
            "header dims inconsistent: n = {}, points = {:?}, lengths = {:?}",
            header.n, header.points, header.lengths
        )));
    }
    let grid = Grid::new(header.n, &header.points, &header.lengths)?;
    let params = PhysicsParams::new(header.gamma1, header.gamma2, header.beta, header.omega)?;

    let total = grid.total_points();
    let u = read_array(&mut r, &header.points, total, "u")?;
    let v = read_array(&mut r, &header.points, total, "v")?;

    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Snapshot("trailing bytes after payload".into()));
    }

    Ok((FieldPair { u, v }, grid, params, header.t))
}

fn write_array(w: &mut impl Write, arr: &ArrayD<Complex64>) -> Result<()> {
    let slice = arr
        .as_slice_memory_order()
        .expect("field arrays are contiguous");
    let mut buf = Vec::with_capacity(slice.len() * 16);
    for c in slice {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_array(
    r: &mut impl Read,
    shape: &[usize],
    total: usize,
    name: &str,
) -> Result<ArrayD<Complex64>> {
    let mut bytes = vec![0u8; total * 16];
    r.read_exact(&mut bytes).map_err(|_| {
        Error::Snapshot(format!(
            "payload for {name} shorter than header dims {shape:?} require"
        ))
    })?;
    let mut data = Vec::with_capacity(total);
    for chunk in bytes.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
        data.push(Complex64::new(re, im));
    }
    ArrayD::from_shape_vec(IxDyn(shape), data)
        .map_err(|e| Error::Snapshot(format!("shape error for {name}: {e}")))
}
