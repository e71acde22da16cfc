//! Row-wise simplex projection of a dense matrix.

use crate::error::{Error, Result};
use crate::projection::{project_sort_core, SimplexSpec};

/// Row-major dense matrix of finite reals.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major data, rejecting wrong lengths and
    /// non-finite entries (reported with their row/column position).
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(Error::BadMatrixShape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from a list of equal-length rows; ragged input names the
    /// offending row.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let cols = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: cols,
                    got: row.len(),
                });
            }
        }
        let n = rows.len();
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_vec(n, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, row: usize) -> &mut [f64] {
        &mut self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Frobenius norm of the elementwise difference.
    pub fn frobenius_distance(&self, other: &DenseMatrix) -> f64 {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        crate::num::squared_distance(&self.data, &other.data).sqrt()
    }
}

/// Projects every row of `y` onto the simplex described by `spec`.
///
/// Rows are independent; row `n` of the output is exactly what
/// [`crate::projection::project_sort`] produces on row `n` of the input
/// (both call the same kernel).
pub fn project_rows(y: &DenseMatrix, spec: &SimplexSpec) -> Result<DenseMatrix> {
    if y.cols() != spec.dimension() {
        return Err(Error::DimensionMismatch {
            expected: spec.dimension(),
            got: y.cols(),
        });
    }
    let mut out = DenseMatrix::zeros(y.rows(), y.cols());
    for (n, row) in y.row_iter().enumerate() {
        let (x, _, _, _) = project_sort_core(row, spec.scale());
        out.row_mut(n).copy_from_slice(&x);
    }
    Ok(out)
}
