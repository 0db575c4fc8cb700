//! CSV and JSON input/output.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64` exactly.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::histogram::Histogram;
use crate::market::{log_returns, ReturnsPanel, Stage};
use crate::spectral::DensityCurve;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_cell(cell: &str, line: usize, column: &str) -> Result<Option<f64>> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Input(format!("line {line}, column {column}: `{cell}` is not a number")))
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

/// Wide returns file: `timestamp,<ticker>,…`; empty cells are missing and
/// become 0.
pub fn read_wide_csv(path: &Path) -> Result<ReturnsPanel> {
    read_wide(File::open(path)?)
}

pub fn read_wide<R: Read>(input: R) -> Result<ReturnsPanel> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.len() < 2 || header.get(0) != Some("timestamp") {
        return Err(Error::Input("wide CSV must start with `timestamp,<ticker>,…`".into()));
    }
    let tickers: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut timestamps = Vec::new();
    let mut data = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != header.len() {
            return Err(Error::Input(format!(
                "line {line} has {} fields, expected {}",
                rec.len(),
                header.len()
            )));
        }
        timestamps.push(rec[0].to_owned());
        for (c, cell) in rec.iter().skip(1).enumerate() {
            data.push(parse_cell(cell, line, &tickers[c])?.unwrap_or(0.0));
        }
    }
    if timestamps.is_empty() {
        return Err(Error::Input("wide CSV has no rows".into()));
    }
    let values = DMatrix::from_row_slice(timestamps.len(), tickers.len(), &data);
    ReturnsPanel::new(values, tickers, timestamps, Stage::Raw)
}

/// Open/close prices pivoted to `T×S` matrices; missing cells are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    pub open: DMatrix<f64>,
    pub close: DMatrix<f64>,
    pub tickers: Vec<String>,
    pub timestamps: Vec<String>,
}

impl PriceTable {
    pub fn log_returns(&self) -> Result<ReturnsPanel> {
        log_returns(&self.open, &self.close, self.tickers.clone(), self.timestamps.clone())
    }
}

/// Long OHLC file `timestamp,ticker,open,close`. Timestamps and tickers keep
/// their order of first appearance.
pub fn read_ohlc_csv(path: &Path) -> Result<PriceTable> {
    read_ohlc(File::open(path)?)
}

pub fn read_ohlc<R: Read>(input: R) -> Result<PriceTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers()?.clone();
    let want = ["timestamp", "ticker", "open", "close"];
    if header.len() != 4 || header.iter().zip(want).any(|(a, b)| a != b) {
        return Err(Error::Input(
            "OHLC CSV header must be `timestamp,ticker,open,close`".into(),
        ));
    }
    let mut t_index: HashMap<String, usize> = HashMap::new();
    let mut s_index: HashMap<String, usize> = HashMap::new();
    let (mut timestamps, mut tickers) = (Vec::new(), Vec::new());
    let mut cells = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let t = *t_index.entry(rec[0].to_owned()).or_insert_with(|| {
            timestamps.push(rec[0].to_owned());
            timestamps.len() - 1
        });
        let s = *s_index.entry(rec[1].to_owned()).or_insert_with(|| {
            tickers.push(rec[1].to_owned());
            tickers.len() - 1
        });
        let open = parse_cell(&rec[2], line, "open")?.unwrap_or(f64::NAN);
        let close = parse_cell(&rec[3], line, "close")?.unwrap_or(f64::NAN);
        cells.push((t, s, open, close, line));
    }
    if cells.is_empty() {
        return Err(Error::Input("OHLC CSV has no rows".into()));
    }
    let mut open = DMatrix::from_element(timestamps.len(), tickers.len(), f64::NAN);
    let mut close = open.clone();
    let mut seen = vec![false; timestamps.len() * tickers.len()];
    for (t, s, o, c, line) in cells {
        let k = t * tickers.len() + s;
        if seen[k] {
            return Err(Error::Input(format!(
                "line {line}: duplicate entry for ({}, {})",
                timestamps[t], tickers[s]
            )));
        }
        seen[k] = true;
        open[(t, s)] = o;
        close[(t, s)] = c;
    }
    Ok(PriceTable {
        open,
        close,
        tickers,
        timestamps,
    })
}

/// One numeric column, with or without a header line.
pub fn read_column_csv(path: &Path) -> Result<Vec<f64>> {
    read_column(File::open(path)?)
}

pub fn read_column<R: Read>(input: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let cell = rec.get(0).unwrap_or("");
        match cell.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if i == 0 => continue,
            Err(_) if cell.is_empty() => continue,
            Err(_) => return Err(Error::Input(format!("line {}: `{cell}` is not a number", i + 1))),
        }
    }
    Ok(out)
}

pub fn write_panel_csv(panel: &ReturnsPanel, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["timestamp".to_owned()];
    header.extend(panel.tickers.iter().cloned());
    w.write_record(&header)?;
    for (t, row) in panel.values.row_iter().enumerate() {
        let mut rec = vec![panel.timestamps[t].clone()];
        rec.extend(row.iter().map(|v| fmt_f64(*v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `x,rho,method,y`.
pub fn write_density_csv(curve: &DensityCurve, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["x", "rho", "method", "y"])?;
    let y = fmt_f64(curve.y.value());
    for (x, rho) in curve.xs.iter().zip(&curve.rhos) {
        w.write_record([fmt_f64(*x), fmt_f64(*rho), curve.method.name().to_owned(), y.clone()])?;
    }
    w.flush()?;
    Ok(())
}

/// `lo,hi,count,height`.
pub fn write_histogram_csv(hist: &Histogram, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["lo", "hi", "count", "height"])?;
    for k in 0..hist.bins() {
        w.write_record([
            fmt_f64(hist.edges[k]),
            fmt_f64(hist.edges[k + 1]),
            hist.counts[k].to_string(),
            fmt_f64(hist.heights[k]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Rows of named columns.
pub fn write_table_csv(header: &[&str], rows: &[Vec<f64>], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::domain("row length does not match the header"));
        }
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

/// `x,y` scatter.
pub fn write_xy_csv(pairs: &[(f64, f64)], path: &Path) -> Result<()> {
    let rows: Vec<Vec<f64>> = pairs.iter().map(|&(x, y)| vec![x, y]).collect();
    write_table_csv(&["x", "y"], &rows, path)
}

/// Row-major matrix without header, for debugging with other tools.
pub fn write_matrix_csv(m: &DMatrix<f64>, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(File::create(path)?));
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}
