//! File formats.
//!
//! Binary panel, little endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `BEKKPNL1` |
//! | 8     | `p` (u64) |
//! | 8     | `n` (u64) |
//! | 8     | seed (u64) |
//! | 8     | replication (u64) |
//! | 8     | pre-sample columns `L` (u64) |
//! | 8     | 1 if a paired i.i.d. block follows, else 0 (u64) |
//! | 8·p·n | returns, column-major f64 |
//! | 8·p·L | pre-sample returns, column-major f64 |
//! | 8·p·n | paired i.i.d. returns (optional) |
//!
//! Panel CSV has a header `t1,...,tn` and one row per coordinate. Matrix CSV
//! is headerless, one row per matrix row. Spectrum CSV has the header
//! `location,weight`. Floats are written with 17 significant digits.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::bekk::ReturnsPanel;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};
use crate::mplaw::DiscreteSpectrum;

pub const PANEL_MAGIC: &[u8; 8] = b"BEKKPNL1";

/// Round-trip float formatting with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn write_block(w: &mut impl Write, m: &Matrix) -> Result<()> {
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_block(r: &mut impl Read, p: usize, n: usize) -> Result<Matrix> {
    let mut bytes = vec![0u8; 8 * p * n];
    r.read_exact(&mut bytes)?;
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(Matrix::from_vec(p, n, data))
}

pub fn write_panel_bin(path: &Path, panel: &ReturnsPanel) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(PANEL_MAGIC)?;
    for v in [
        panel.p() as u64,
        panel.n() as u64,
        panel.seed,
        panel.replication,
        panel.presample.ncols() as u64,
        panel.paired_iid.is_some() as u64,
    ] {
        write_u64(&mut w, v)?;
    }
    write_block(&mut w, &panel.returns)?;
    write_block(&mut w, &panel.presample)?;
    if let Some(iid) = &panel.paired_iid {
        write_block(&mut w, iid)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_panel_bin(path: &Path) -> Result<ReturnsPanel> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != PANEL_MAGIC {
        return Err(Error::Format(format!("{} is not a panel file", path.display())));
    }
    let p = read_u64(&mut r)?;
    let n = read_u64(&mut r)?;
    let seed = read_u64(&mut r)?;
    let replication = read_u64(&mut r)?;
    let lags = read_u64(&mut r)?;
    let paired = read_u64(&mut r)?;
    // refuse headers that would allocate more than 2^28 values per block
    let limit = 1u64 << 28;
    if paired > 1 || p.checked_mul(n.max(lags)).is_none_or(|c| c > limit) {
        return Err(Error::Format("corrupt panel header".into()));
    }
    let (p, n, lags) = (p as usize, n as usize, lags as usize);
    let returns = read_block(&mut r, p, n)?;
    let presample = read_block(&mut r, p, lags)?;
    let paired_iid = if paired == 1 {
        Some(read_block(&mut r, p, n)?)
    } else {
        None
    };
    let mut panel = ReturnsPanel::from_returns(returns)?;
    panel.presample = presample;
    panel.paired_iid = paired_iid;
    panel.seed = seed;
    panel.replication = replication;
    Ok(panel)
}

pub fn write_panel_csv(path: &Path, returns: &Matrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record((1..=returns.ncols()).map(|t| format!("t{t}")))?;
    for row in returns.row_iter() {
        w.write_record(row.iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("not a number: {s:?}")))
}

pub fn read_panel_csv(path: &Path) -> Result<ReturnsPanel> {
    let mut r = csv::Reader::from_path(path)?;
    let n = r.headers()?.len();
    let mut data = Vec::new();
    let mut p = 0;
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != n {
            return Err(Error::Format(format!("row {p} has {} fields, expected {n}", rec.len())));
        }
        for field in rec.iter() {
            data.push(parse_f64(field)?);
        }
        p += 1;
    }
    ReturnsPanel::from_returns(Matrix::from_row_slice(p, n, &data))
}

pub fn write_matrix_csv(path: &Path, m: &Matrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in m.row_iter() {
        w.write_record(row.iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<Matrix> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut data = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for rec in r.records() {
        let rec = rec?;
        if *cols.get_or_insert(rec.len()) != rec.len() {
            return Err(Error::Format(format!("ragged matrix row {rows}")));
        }
        for field in rec.iter() {
            data.push(parse_f64(field)?);
        }
        rows += 1;
    }
    Ok(Matrix::from_row_slice(rows, cols.unwrap_or(0), &data))
}

pub fn read_sym_csv(path: &Path) -> Result<SymMatrix> {
    SymMatrix::new(read_matrix_csv(path)?)
}

pub fn write_spectrum_csv(path: &Path, s: &DiscreteSpectrum) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["location", "weight"])?;
    for (t, wt) in s.atoms() {
        w.write_record([fmt_f64(t), fmt_f64(wt)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_spectrum_csv(path: &Path) -> Result<DiscreteSpectrum> {
    let mut r = csv::Reader::from_path(path)?;
    let mut locs = Vec::new();
    let mut ws = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Format("spectrum rows need location and weight".into()));
        }
        locs.push(parse_f64(&rec[0])?);
        ws.push(parse_f64(&rec[1])?);
    }
    DiscreteSpectrum::new(locs, ws)
}

/// One value per line under a single header.
pub fn write_column_csv(path: &Path, header: &str, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([header])?;
    for &v in values {
        w.write_record([fmt_f64(v)])?;
    }
    w.flush()?;
    Ok(())
}
