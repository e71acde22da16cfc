//! Pairwise Gaussian affinities and the graph Laplacian they induce.

use crate::batch::DenseMatrix;
use crate::error::{Error, Result};
use crate::num::{kahan_sum, squared_distance, KahanSum};

/// A dataset of N points in R^D, one per row.
#[derive(Clone, Debug)]
pub struct Dataset {
    points: DenseMatrix,
}

impl Dataset {
    pub fn new(points: DenseMatrix) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn point(&self, n: usize) -> &[f64] {
        self.points.row(n)
    }

    pub fn points(&self) -> &DenseMatrix {
        &self.points
    }
}

/// Parameters for Gaussian graph construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphConfig {
    /// Gaussian bandwidth of the pairwise affinity.
    pub bandwidth: f64,
    /// Optional symmetrized k-nearest-neighbor sparsification.
    pub knn: Option<usize>,
}

/// Symmetric nonnegative affinities W with zero diagonal, the degree vector
/// and the Laplacian `L = diag(W 1) - W`.
///
/// L annihilates constant vectors and is positive semidefinite, which is
/// what makes the downstream assignment QP convex.
#[derive(Clone, Debug)]
pub struct AffinityGraph {
    weights: DenseMatrix,
    laplacian: DenseMatrix,
    degree: Vec<f64>,
}

impl AffinityGraph {
    /// Wraps an explicit affinity matrix, enforcing symmetry, nonnegativity
    /// and a zero diagonal, and derives the degree vector and Laplacian.
    pub fn from_weights(weights: DenseMatrix) -> Result<Self> {
        let n = weights.rows();
        if weights.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: weights.cols(),
            });
        }
        for m in 0..n {
            if weights.get(m, m) != 0.0 {
                return Err(Error::NonzeroSelfAffinity(m));
            }
            for k in 0..n {
                let w = weights.get(m, k);
                if w < 0.0 {
                    return Err(Error::NegativeAffinity {
                        row: m,
                        col: k,
                        value: w,
                    });
                }
                if w != weights.get(k, m) {
                    return Err(Error::AsymmetricAffinity { row: m, col: k });
                }
            }
        }
        Ok(Self::from_checked_weights(weights))
    }

    fn from_checked_weights(weights: DenseMatrix) -> Self {
        let n = weights.rows();
        let degree: Vec<f64> = (0..n)
            .map(|m| kahan_sum(weights.row(m).iter().copied()))
            .collect();
        let mut laplacian = DenseMatrix::zeros(n, n);
        for m in 0..n {
            for k in 0..n {
                let v = if m == k {
                    degree[m]
                } else {
                    -weights.get(m, k)
                };
                laplacian.set(m, k, v);
            }
        }
        Self {
            weights,
            laplacian,
            degree,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.rows() == 0
    }

    pub fn weights(&self) -> &DenseMatrix {
        &self.weights
    }

    pub fn laplacian(&self) -> &DenseMatrix {
        &self.laplacian
    }

    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    /// `L z` for a length-N vector.
    pub(crate) fn laplacian_matvec(&self, z: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for m in 0..n {
            let row = self.laplacian.row(m);
            let mut acc = 0.0;
            for k in 0..n {
                acc += row[k] * z[k];
            }
            out[m] = acc;
        }
        out
    }

    /// `L Z` for an N x K matrix.
    pub(crate) fn laplacian_matmul(&self, z: &DenseMatrix) -> DenseMatrix {
        let n = self.len();
        let k = z.cols();
        let mut out = DenseMatrix::zeros(n, k);
        for m in 0..n {
            let lrow = self.laplacian.row(m);
            let orow = out.row_mut(m);
            for (j, &l) in lrow.iter().enumerate() {
                if l == 0.0 {
                    continue;
                }
                let zrow = z.row(j);
                for c in 0..k {
                    orow[c] += l * zrow[c];
                }
            }
        }
        out
    }
}

/// Builds the Gaussian affinity graph
/// `w_mn = exp(-||x_m - x_n||^2 / (2 bandwidth^2))` with zero diagonal,
/// optionally sparsified to the symmetrized k-nearest-neighbor graph (an
/// edge survives if either endpoint ranks the other among its k nearest).
pub fn gaussian_affinities(
    data: &Dataset,
    bandwidth: f64,
    knn: Option<usize>,
) -> Result<AffinityGraph> {
    let n = data.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(Error::InvalidBandwidth(bandwidth));
    }
    if let Some(k) = knn {
        if k == 0 || k >= n {
            return Err(Error::KnnOutOfRange { knn: k, points: n });
        }
    }

    let denom = 2.0 * bandwidth * bandwidth;
    let mut dist2 = DenseMatrix::zeros(n, n);
    for m in 0..n {
        for k in (m + 1)..n {
            let d2 = squared_distance(data.point(m), data.point(k));
            dist2.set(m, k, d2);
            dist2.set(k, m, d2);
        }
    }

    let mut weights = DenseMatrix::zeros(n, n);
    for m in 0..n {
        for k in (m + 1)..n {
            let w = (-dist2.get(m, k) / denom).exp();
            weights.set(m, k, w);
            weights.set(k, m, w);
        }
    }

    if let Some(k) = knn {
        // Mark each point's k nearest (ties broken by index), then keep the
        // union so the mask stays symmetric.
        let mut keep = vec![false; n * n];
        for m in 0..n {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != m).collect();
            others.sort_by(|&a, &b| {
                dist2
                    .get(m, a)
                    .partial_cmp(&dist2.get(m, b))
                    .expect("finite distances")
                    .then(a.cmp(&b))
            });
            for &j in others.iter().take(k) {
                keep[m * n + j] = true;
                keep[j * n + m] = true;
            }
        }
        for m in 0..n {
            for j in 0..n {
                if !keep[m * n + j] {
                    weights.set(m, j, 0.0);
                }
            }
        }
    }

    Ok(AffinityGraph::from_checked_weights(weights))
}

/// The smoothness quadratic `tr(Z' L Z)`.
///
/// Equal (up to roundoff) to half the affinity-weighted sum of squared row
/// differences `0.5 * sum_{m,n} w_mn ||z_m - z_n||^2`; the identity is
/// exercised by the test suite rather than assumed.
pub fn laplacian_quadratic(graph: &AffinityGraph, z: &DenseMatrix) -> Result<f64> {
    if z.rows() != graph.len() {
        return Err(Error::DimensionMismatch {
            expected: graph.len(),
            got: z.rows(),
        });
    }
    let lz = graph.laplacian_matmul(z);
    let mut acc = KahanSum::default();
    for (zr, lzr) in z.row_iter().zip(lz.row_iter()) {
        for (a, b) in zr.iter().zip(lzr) {
            acc.add(a * b);
        }
    }
    Ok(acc.value())
}
