//! CSV tables and JSON sidecars.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::LabError;

/// Shortest text that parses back to the same `f64`. Integral values print
/// without a fractional part.
pub fn format_float(v: f64) -> String {
    if v.is_finite() && v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

/// Writes `header` and `rows` as comma-separated text with `\n` line endings.
pub fn write_csv_to<W: Write>(out: W, header: &[impl AsRef<str>], rows: &[Vec<f64>]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header.iter().map(AsRef::as_ref))?;
    for row in rows {
        w.write_record(row.iter().map(|v| format_float(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, header: &[impl AsRef<str>], rows: &[Vec<f64>]) -> Result<(), LabError> {
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    write_csv_to(BufWriter::new(file), header, rows).map_err(|e| LabError::io(path, csv_io(e)))
}

fn csv_io(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => std::io::Error::other(format!("{other:?}")),
    }
}

/// Parses a table written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), LabError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| LabError::io(path, csv_io(e)))?;
    let header = r
        .headers()
        .map_err(|e| LabError::io(path, csv_io(e)))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| LabError::io(path, csv_io(e)))?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| LabError::Validation(format!("{}: bad number `{f}`: {e}", path.display()))))
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), LabError> {
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| LabError::io(path, e.into()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| LabError::io(path, e))
}

/// `out.csv` -> `out.csv.<suffix>`
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}
