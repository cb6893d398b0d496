//! CSV readers and writers for interval data and matrices.
//!
//! Every file has a header row of variable names followed by numeric rows.
//! Numbers are written in the shortest form that parses back to the same
//! `f64`, so a write/read cycle is bit-exact.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::interval::IntervalMatrix;
use crate::matrix::SymMatrix;

/// Shortest round-trip decimal; scientific notation outside `[1e-5, 1e15)`.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `v1, v2, …, vp`.
pub fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("v{j}")).collect()
}

pub fn write_matrix_csv(path: &Path, names: &[String], values: ArrayView2<'_, f64>) -> Result<()> {
    if names.len() != values.ncols() {
        return Err(Error::invalid(format!(
            "{} column names for {} columns",
            names.len(),
            values.ncols()
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    let mut wtr = csv::Writer::from_writer(&mut w);
    wtr.write_record(names).map_err(|e| Error::io(path, e.into()))?;
    for row in values.rows() {
        wtr.write_record(row.iter().map(|&v| format_f64(v)))
            .map_err(|e| Error::io(path, e.into()))?;
    }
    wtr.flush().map_err(io_err)?;
    drop(wtr);
    w.flush().map_err(io_err)
}

pub fn read_matrix_csv(path: &Path) -> Result<(Vec<String>, Array2<f64>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let names: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(Error::EmptyInput);
    }
    let p = names.len();
    let mut values = Vec::new();
    let mut n = 0;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(k + 2, |pos| pos.line() as usize);
        if rec.len() != p {
            return Err(Error::Parse {
                line,
                message: format!("expected {p} fields, found {}", rec.len()),
            });
        }
        for field in rec.iter() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("not a number: {field:?}"),
            })?;
            values.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let arr = Array2::from_shape_vec((n, p), values).expect("row lengths checked");
    Ok((names, arr))
}

pub fn write_sym_matrix(path: &Path, names: &[String], m: &SymMatrix) -> Result<()> {
    write_matrix_csv(path, names, m.view())
}

pub fn read_sym_matrix(path: &Path) -> Result<(Vec<String>, SymMatrix)> {
    let (names, arr) = read_matrix_csv(path)?;
    Ok((names, SymMatrix::new(arr)?))
}

/// `<stem>.lower.csv` and `<stem>.upper.csv`.
pub fn interval_paths(stem: &Path) -> (PathBuf, PathBuf) {
    let with = |suffix: &str| {
        let mut s: OsString = stem.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with(".lower.csv"), with(".upper.csv"))
}

pub fn write_interval_pair(stem: &Path, names: &[String], data: &IntervalMatrix) -> Result<()> {
    let (lp, up) = interval_paths(stem);
    write_matrix_csv(&lp, names, data.lower())?;
    write_matrix_csv(&up, names, data.upper())
}

pub fn read_interval_pair(stem: &Path) -> Result<(Vec<String>, IntervalMatrix)> {
    let (lp, up) = interval_paths(stem);
    let (names, lower) = read_matrix_csv(&lp)?;
    let (unames, upper) = read_matrix_csv(&up)?;
    if names != unames {
        return Err(Error::invalid(format!(
            "{} and {} have different headers",
            lp.display(),
            up.display()
        )));
    }
    Ok((names, IntervalMatrix::new(lower, upper)?))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}
