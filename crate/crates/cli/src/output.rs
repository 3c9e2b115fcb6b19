//! Locale-independent CSV and JSON writers.
//!
//! Floats are written in scientific notation with 17 significant digits, so
//! every value reads back to the identical `f64`. Non-finite values are
//! written as `nan`, `inf` and `-inf`.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{CliError, Result};

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

/// Inverse of [`fmt_f64`].
pub fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        context: format!("writing {}", path.display()),
        source,
    }
}

/// A CSV file with a fixed header; rows are assembled from cells.
pub struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
    columns: usize,
    line: String,
}

pub enum Cell {
    Float(f64),
    Int(usize),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl CsvWriter {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let file = File::create(path).map_err(|e| io_err(path, e))?;
        let mut w = CsvWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
            columns: header.len(),
            line: String::new(),
        };
        w.write_line(&header.join(","))?;
        Ok(w)
    }

    pub fn row(&mut self, cells: &[Cell]) -> Result<()> {
        debug_assert_eq!(cells.len(), self.columns);
        let mut line = std::mem::take(&mut self.line);
        line.clear();
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            match c {
                Cell::Float(v) => line.push_str(&fmt_f64(*v)),
                Cell::Int(n) => {
                    let _ = write!(line, "{n}");
                }
            }
        }
        self.write_line(&line)?;
        self.line = line;
        Ok(())
    }

    fn write_line(&mut self, line: &str) -> Result<()> {
        self.out
            .write_all(line.as_bytes())
            .and_then(|_| self.out.write_all(b"\n"))
            .map_err(|e| io_err(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| io_err(&self.path, e))
    }
}

/// Pretty-printed JSON with a trailing newline. `NaN` becomes `null`.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io {
        context: format!("serializing {}", path.display()),
        source: e.into(),
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}
