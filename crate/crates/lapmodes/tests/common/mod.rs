//! Shared oracles and generators for the integration suites.
//!
//! Everything here is deliberately independent of the library's solution
//! paths: the QP oracle enumerates active sets and solves dense linear
//! systems, the spectrum check runs cyclic Jacobi, and the out-of-sample
//! oracle is a plain grid search.

#![allow(dead_code)]

use lapmodes::{AffinityGraph, AssignmentMatrix, DenseMatrix, SimilarityMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let mut w = vec![0.0; n * n];
    for m in 0..n {
        for k in (m + 1)..n {
            let v = rng.gen_range(0.0..1.0);
            w[m * n + k] = v;
            w[k * n + m] = v;
        }
    }
    DenseMatrix::from_vec(n, n, w).unwrap()
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> AffinityGraph {
    AffinityGraph::from_weights(random_weights(rng, n)).unwrap()
}

pub fn random_similarities(rng: &mut ChaCha8Rng, n: usize, k: usize) -> SimilarityMatrix {
    SimilarityMatrix::new(
        DenseMatrix::from_vec(n, k, (0..n * k).map(|_| rng.gen_range(0.0..1.0)).collect())
            .unwrap(),
    )
}

pub fn random_assignments(rng: &mut ChaCha8Rng, n: usize, k: usize) -> AssignmentMatrix {
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        rows.push(raw.into_iter().map(|v| v / sum).collect());
    }
    AssignmentMatrix::new(DenseMatrix::from_rows(rows).unwrap()).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Gaussian elimination with partial pivoting. Returns `None` when the
/// system is (numerically) singular.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = a.len();
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if pivot_abs < 1e-10 * scale {
            return None;
        }
        a.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for r in (col + 1)..n {
            let factor = a[r][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= factor * a[col][c];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for c in (row + 1)..n {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Reference solution of `min lambda tr(Z'LZ) - tr(B'Z)` over row-stochastic
/// nonnegative Z, by exhaustive active-set enumeration: for every pattern of
/// per-row supports, solve the stationarity + row-sum linear system, keep
/// the candidates that satisfy primal and dual feasibility, and return the
/// best objective among them.
pub struct QpSolution {
    pub objective: f64,
    pub z: DenseMatrix,
}

pub fn qp_oracle(graph: &AffinityGraph, b: &SimilarityMatrix, lambda: f64) -> Option<QpSolution> {
    let n = graph.len();
    let k = b.clusters();
    let l = graph.laplacian();

    // nonempty subsets of {0..k-1}
    let subsets: Vec<Vec<usize>> = (1u32..(1 << k))
        .map(|mask| (0..k).filter(|&j| mask & (1 << j) != 0).collect())
        .collect();

    let mut best: Option<QpSolution> = None;
    let mut pattern = vec![0usize; n];
    loop {
        if let Some(candidate) = try_pattern(graph, b, lambda, l, &subsets, &pattern, n, k) {
            match &best {
                Some(cur) if cur.objective <= candidate.objective => {}
                _ => best = Some(candidate),
            }
        }

        // mixed-radix increment over patterns
        let mut digit = 0;
        loop {
            if digit == n {
                return best;
            }
            pattern[digit] += 1;
            if pattern[digit] < subsets.len() {
                break;
            }
            pattern[digit] = 0;
            digit += 1;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn try_pattern(
    graph: &AffinityGraph,
    b: &SimilarityMatrix,
    lambda: f64,
    l: &DenseMatrix,
    subsets: &[Vec<usize>],
    pattern: &[usize],
    n: usize,
    k: usize,
) -> Option<QpSolution> {
    // variable ids for supported entries
    let mut var_id = vec![usize::MAX; n * k];
    let mut vars = Vec::new();
    for (row, &s) in pattern.iter().enumerate() {
        for &col in &subsets[s] {
            var_id[row * k + col] = vars.len();
            vars.push((row, col));
        }
    }
    let nv = vars.len();
    let size = nv + n;

    let mut a = vec![vec![0.0; size]; size];
    let mut rhs = vec![0.0; size];

    // stationarity on the support: 2*lambda*(LZ)_nk - mu_n = b_nk
    for (eq, &(row, col)) in vars.iter().enumerate() {
        for m in 0..n {
            let vid = var_id[m * k + col];
            if vid != usize::MAX {
                a[eq][vid] += 2.0 * lambda * l.get(row, m);
            }
        }
        a[eq][nv + row] = -1.0;
        rhs[eq] = b.as_matrix().get(row, col);
    }
    // unit row sums over the support
    for row in 0..n {
        let eq = nv + row;
        for &col in &subsets[pattern[row]] {
            a[eq][var_id[row * k + col]] = 1.0;
        }
        rhs[eq] = 1.0;
    }

    let solution = solve_linear(a, rhs)?;

    let mut z = DenseMatrix::from_vec(n, k, vec![0.0; n * k]).unwrap();
    for (vid, &(row, col)) in vars.iter().enumerate() {
        if solution[vid] < -1e-8 {
            return None; // primal infeasible
        }
        z.set(row, col, solution[vid].max(0.0));
    }
    // dual feasibility off the support: 2*lambda*(LZ)_nk - b_nk - mu_n >= 0
    for row in 0..n {
        let mu = solution[nv + row];
        for col in 0..k {
            if var_id[row * k + col] != usize::MAX {
                continue;
            }
            let mut lz = 0.0;
            for m in 0..n {
                lz += l.get(row, m) * z.get(m, col);
            }
            let beta = 2.0 * lambda * lz - b.as_matrix().get(row, col) - mu;
            if beta < -1e-8 {
                return None;
            }
        }
    }

    let objective = qp_objective(graph, b, lambda, &z);
    Some(QpSolution { objective, z })
}

/// Direct evaluation of the QP objective, independent of the library.
pub fn qp_objective(graph: &AffinityGraph, b: &SimilarityMatrix, lambda: f64, z: &DenseMatrix) -> f64 {
    let n = graph.len();
    let k = z.cols();
    let l = graph.laplacian();
    let mut quad = 0.0;
    for row in 0..n {
        for m in 0..n {
            let lv = l.get(row, m);
            if lv == 0.0 {
                continue;
            }
            for col in 0..k {
                quad += z.get(row, col) * lv * z.get(m, col);
            }
        }
    }
    let mut inner = 0.0;
    for row in 0..n {
        for col in 0..k {
            inner += b.as_matrix().get(row, col) * z.get(row, col);
        }
    }
    lambda * quad - inner
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending.
pub fn jacobi_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() < 1e-12 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = a[p][i];
                    let aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// Brute-force minimizer of `0.5 ||z - target||^2` over the 2-simplex grid
/// with the given step.
pub fn grid_projection_k2(target: &[f64], step: f64) -> [f64; 2] {
    assert_eq!(target.len(), 2);
    let cells = (1.0 / step).round() as usize;
    let mut best = [0.0, 1.0];
    let mut best_d = f64::INFINITY;
    for i in 0..=cells {
        let p = i as f64 * step;
        let z = [p, 1.0 - p];
        let d = (z[0] - target[0]).powi(2) + (z[1] - target[1]).powi(2);
        if d < best_d {
            best_d = d;
            best = z;
        }
    }
    best
}
