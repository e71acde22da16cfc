//! CSV reading and writing for numeric matrices.
//!
//! Format: comma-separated, `.` decimal point, scientific notation accepted,
//! LF or CRLF line endings. Values are emitted with Rust's shortest
//! round-trip formatting, so writing and re-reading reproduces every f64
//! bit for bit. Row and column indices in error messages are 1-based.

use std::io::Read;
use std::path::Path;

use crate::batch::DenseMatrix;
use crate::error::{Error, Result};

/// Parses a matrix from CSV text. `skip_header` drops the first row.
pub fn read_matrix_csv(text: &str, skip_header: bool) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;

    for (line_index, raw_line) in text.lines().enumerate() {
        let row_number = line_index + 1;
        if skip_header && line_index == 0 {
            continue;
        }
        let line = raw_line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }

        let mut row = Vec::new();
        for (col_index, field) in line.split(',').enumerate() {
            let trimmed = field.trim();
            if trimmed.is_empty() {
                return Err(Error::CsvMalformed {
                    row: row_number,
                    col: col_index + 1,
                    detail: "empty field".into(),
                });
            }
            let value: f64 = trimmed.parse().map_err(|_| Error::CsvMalformed {
                row: row_number,
                col: col_index + 1,
                detail: format!("cannot parse {trimmed:?} as a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: row_number,
                    col: col_index + 1,
                });
            }
            row.push(value);
        }

        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::RaggedRow {
                    row: row_number,
                    expected: w,
                    got: row.len(),
                });
            }
            _ => {}
        }
        rows.push(row);
    }

    if rows.is_empty() {
        return Err(Error::CsvEmpty);
    }
    let n = rows.len();
    let d = width.unwrap();
    DenseMatrix::from_vec(n, d, rows.into_iter().flatten().collect())
}

pub fn read_matrix_csv_path(path: &Path, skip_header: bool) -> Result<DenseMatrix> {
    let mut text = String::new();
    std::fs::File::open(path)?.read_to_string(&mut text)?;
    read_matrix_csv(&text, skip_header)
}

/// Shortest decimal representation that parses back to the same f64.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

pub fn write_matrix_csv(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format_value(*v));
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv_path(path: &Path, m: &DenseMatrix) -> Result<()> {
    std::fs::write(path, write_matrix_csv(m))?;
    Ok(())
}
