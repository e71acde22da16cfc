//! Laplacian K-modes clustering: alternating minimization of
//!
//! `(lambda/2) * sum_{m,n} w_mn ||z_m - z_n||^2
//!     - sum_{n,k} z_nk G(||(x_n - c_k)/sigma||^2)`
//!
//! over soft assignments Z (a convex QP solved exactly by
//! [`crate::lass::solve_lass`]) and cluster modes C (kernel density ascent
//! via weighted mean-shift steps). The kernel is `G(t) = exp(-t/2)`, which
//! makes `G(||(x - c)/sigma||^2)` the standard Gaussian with bandwidth
//! `sigma`.
//!
//! Out-of-sample points are assigned by solving the reduced QP
//! `min 0.5 ||z - (zbar + gamma g)||^2` over the simplex, with
//! `zbar = Z' w / sum(w)` and `gamma = 1 / (2 lambda sum(w))` — a single
//! simplex projection.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::batch::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::{gaussian_affinities, AffinityGraph, Dataset, GraphConfig};
use crate::lass::{solve_lass, AssignmentMatrix, SimilarityMatrix, SolverConfig};
use crate::num::{kahan_sum, squared_distance, KahanSum};
use crate::projection::{project_sort, DenseVector, SimplexSpec};

/// Schema tag carried by serialized models.
pub const MODEL_SCHEMA: &str = "lass-model/1";

/// A trained clustering: modes, kernel bandwidth, smoothing weight, the
/// training assignments and everything needed to map new points.
#[derive(Clone, Debug)]
pub struct ClusterModel {
    data: Dataset,
    graph: AffinityGraph,
    graph_config: GraphConfig,
    z: AssignmentMatrix,
    modes: DenseMatrix,
    sigma: f64,
    lambda_reg: f64,
}

impl ClusterModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        data: Dataset,
        graph: AffinityGraph,
        graph_config: GraphConfig,
        z: AssignmentMatrix,
        modes: DenseMatrix,
        sigma: f64,
        lambda_reg: f64,
    ) -> Result<Self> {
        if graph.len() != data.len() {
            return Err(Error::DimensionMismatch {
                expected: data.len(),
                got: graph.len(),
            });
        }
        if z.rows() != data.len() {
            return Err(Error::DimensionMismatch {
                expected: data.len(),
                got: z.rows(),
            });
        }
        if modes.rows() != z.clusters() {
            return Err(Error::DimensionMismatch {
                expected: z.clusters(),
                got: modes.rows(),
            });
        }
        if modes.cols() != data.dim() {
            return Err(Error::DimensionMismatch {
                expected: data.dim(),
                got: modes.cols(),
            });
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidSigma(sigma));
        }
        if !(lambda_reg.is_finite() && lambda_reg >= 0.0) {
            return Err(Error::InvalidFitConfig("lambda_reg must be nonnegative"));
        }
        Ok(Self {
            data,
            graph,
            graph_config,
            z,
            modes,
            sigma,
            lambda_reg,
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn graph(&self) -> &AffinityGraph {
        &self.graph
    }

    pub fn graph_config(&self) -> GraphConfig {
        self.graph_config
    }

    pub fn assignments(&self) -> &AssignmentMatrix {
        &self.z
    }

    pub fn modes(&self) -> &DenseMatrix {
        &self.modes
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn lambda_reg(&self) -> f64 {
        self.lambda_reg
    }

    pub fn clusters(&self) -> usize {
        self.modes.rows()
    }

    /// Affinity vectors for a new point: `w_n` Gaussian to each training
    /// point at the training graph bandwidth, `g_k` kernel to each mode.
    pub fn query_affinities(&self, point: &[f64]) -> Result<OosQuery> {
        if point.len() != self.data.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.data.dim(),
                got: point.len(),
            });
        }
        if let Some(index) = point.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let bw = self.graph_config.bandwidth;
        let denom = 2.0 * bw * bw;
        let w: Vec<f64> = (0..self.data.len())
            .map(|n| (-squared_distance(point, self.data.point(n)) / denom).exp())
            .collect();
        let s2 = self.sigma * self.sigma;
        let g: Vec<f64> = (0..self.clusters())
            .map(|k| kernel_value(squared_distance(point, self.modes.row(k)) / s2))
            .collect::<Result<_>>()?;
        OosQuery::new(w, g)
    }
}

/// Affinities of one query point: `w` to the training points, `g` to the
/// modes. `sum(w)` must be positive for the mapping to be defined.
#[derive(Clone, Debug)]
pub struct OosQuery {
    w: Vec<f64>,
    g: Vec<f64>,
}

impl OosQuery {
    pub fn new(w: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        for (index, &value) in w.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidAffinity { index, value });
            }
        }
        if let Some(index) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { w, g })
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }
}

/// Gaussian profile `G(t) = exp(-t/2)`, strictly decreasing with `G(0) = 1`.
pub fn kernel_value(t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::NegativeKernelArgument(t));
    }
    Ok((-0.5 * t).exp())
}

/// Point-to-mode similarities `b_nk = G(||x_n - c_k||^2 / sigma^2)`.
pub fn similarity_matrix(
    data: &Dataset,
    modes: &DenseMatrix,
    sigma: f64,
) -> Result<SimilarityMatrix> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidSigma(sigma));
    }
    if modes.cols() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: modes.cols(),
        });
    }
    let s2 = sigma * sigma;
    let mut b = DenseMatrix::zeros(data.len(), modes.rows());
    for n in 0..data.len() {
        for k in 0..modes.rows() {
            let t = squared_distance(data.point(n), modes.row(k)) / s2;
            b.set(n, k, kernel_value(t)?);
        }
    }
    Ok(SimilarityMatrix::new(b))
}

/// Full clustering objective in its pairwise form,
/// `(lambda/2) sum_{m,n} w_mn ||z_m - z_n||^2 - sum_{n,k} z_nk b_nk`.
///
/// Agrees with `lambda * tr(Z' L Z) - tr(B' Z)` to roundoff; the test suite
/// checks the two forms against each other.
pub fn kmodes_objective(model: &ClusterModel) -> Result<f64> {
    let b = similarity_matrix(&model.data, &model.modes, model.sigma)?;
    objective_parts(
        &model.graph,
        model.z.as_matrix(),
        &b,
        model.lambda_reg,
    )
}

fn objective_parts(
    graph: &AffinityGraph,
    z: &DenseMatrix,
    b: &SimilarityMatrix,
    lambda_reg: f64,
) -> Result<f64> {
    if z.rows() != graph.len() {
        return Err(Error::DimensionMismatch {
            expected: graph.len(),
            got: z.rows(),
        });
    }
    let n = graph.len();
    let mut penalty = KahanSum::default();
    for m in 0..n {
        for j in 0..n {
            let w = graph.weights().get(m, j);
            if w != 0.0 {
                penalty.add(w * squared_distance(z.row(m), z.row(j)));
            }
        }
    }
    let mut density = KahanSum::default();
    for (zr, br) in z.row_iter().zip(b.as_matrix().row_iter()) {
        for (zv, bv) in zr.iter().zip(br) {
            density.add(zv * bv);
        }
    }
    Ok(0.5 * lambda_reg * penalty.value() - density.value())
}

/// Empty-cluster threshold: a column with total responsibility below this
/// keeps its previous mode instead of dividing by ~0.
const EMPTY_CLUSTER_MASS: f64 = 1e-12;

/// One round of mode finding: for each cluster k, `steps` weighted
/// mean-shift iterations `c <- sum_n q_n x_n / sum_n q_n` with
/// `q_n = z_nk * exp(-||x_n - c||^2 / (2 sigma^2))`, started from the
/// current mode. Each iteration is an ascent step on the cluster's kernel
/// density term.
pub fn update_modes(model: &ClusterModel, steps: usize) -> Result<DenseMatrix> {
    if steps == 0 {
        return Err(Error::InvalidFitConfig("mode update needs steps >= 1"));
    }
    update_modes_parts(
        &model.data,
        model.z.as_matrix(),
        &model.modes,
        model.sigma,
        steps,
    )
}

fn update_modes_parts(
    data: &Dataset,
    z: &DenseMatrix,
    modes: &DenseMatrix,
    sigma: f64,
    steps: usize,
) -> Result<DenseMatrix> {
    let n = data.len();
    let d = data.dim();
    let k_count = modes.rows();
    let denom = 2.0 * sigma * sigma;

    let mut out = modes.clone();
    for k in 0..k_count {
        let responsibility = kahan_sum((0..n).map(|m| z.get(m, k)));
        if responsibility < EMPTY_CLUSTER_MASS {
            continue; // empty cluster keeps its previous mode
        }
        let mut center: Vec<f64> = out.row(k).to_vec();
        for _ in 0..steps {
            let mut mass = KahanSum::default();
            let mut weighted = vec![0.0; d];
            for m in 0..n {
                let q = z.get(m, k) * (-squared_distance(data.point(m), &center) / denom).exp();
                if q == 0.0 {
                    continue;
                }
                mass.add(q);
                for (acc, &xv) in weighted.iter_mut().zip(data.point(m)) {
                    *acc += q * xv;
                }
            }
            let total = mass.value();
            if total <= f64::MIN_POSITIVE {
                break; // all kernels underflowed; the mode is stranded
            }
            for v in &mut weighted {
                *v /= total;
            }
            center = weighted;
        }
        out.row_mut(k).copy_from_slice(&center);
    }
    Ok(out)
}

/// Configuration for [`fit`].
#[derive(Clone, Debug)]
pub struct FitConfig {
    pub k: usize,
    pub sigma: f64,
    pub lambda_reg: f64,
    pub graph: GraphConfig,
    pub solver: SolverConfig,
    pub outer_iters: usize,
    /// Mean-shift steps per outer iteration.
    pub mode_steps: usize,
    /// Seeds the choice of initial modes (k distinct data points).
    pub seed: u64,
}

impl FitConfig {
    pub fn new(k: usize, sigma: f64, lambda_reg: f64, bandwidth: f64) -> Self {
        Self {
            k,
            sigma,
            lambda_reg,
            graph: GraphConfig {
                bandwidth,
                knn: None,
            },
            solver: SolverConfig {
                lambda_reg,
                ..SolverConfig::default()
            },
            outer_iters: 50,
            mode_steps: 10,
            seed: 0,
        }
    }
}

/// Objective values across the outer loop (initial point included).
#[derive(Clone, Debug)]
pub struct FitTrace {
    pub objective_per_iter: Vec<f64>,
    pub outer_iterations: usize,
    pub converged: bool,
}

/// Outer-loop stop: objective decrease below this, or `outer_iters` reached.
const OUTER_DECREASE_TOLERANCE: f64 = 1e-8;

/// Trains a model by alternating the exact assignment solve (Z-step) with
/// kernel density ascent on the modes (C-step). The Z-step starts from the
/// previous assignments, so the overall objective never increases.
pub fn fit(data: &Dataset, cfg: &FitConfig) -> Result<(ClusterModel, FitTrace)> {
    if cfg.k == 0 {
        return Err(Error::InvalidFitConfig("k must be at least 1"));
    }
    if cfg.k > data.len() {
        return Err(Error::InvalidFitConfig("k exceeds the number of points"));
    }
    if cfg.outer_iters == 0 {
        return Err(Error::InvalidFitConfig("outer_iters must be at least 1"));
    }
    if cfg.mode_steps == 0 {
        return Err(Error::InvalidFitConfig("mode_steps must be at least 1"));
    }
    if !(cfg.sigma.is_finite() && cfg.sigma > 0.0) {
        return Err(Error::InvalidSigma(cfg.sigma));
    }
    if !(cfg.lambda_reg.is_finite() && cfg.lambda_reg >= 0.0) {
        return Err(Error::InvalidFitConfig("lambda_reg must be nonnegative"));
    }
    let mut solver_cfg = cfg.solver.clone();
    solver_cfg.lambda_reg = cfg.lambda_reg;
    solver_cfg.validate()?;

    let graph = gaussian_affinities(data, cfg.graph.bandwidth, cfg.graph.knn)?;

    // Initial modes: farthest-first traversal over the data points. The
    // seed picks the starting point; the rest is the deterministic maximin
    // rule (ties to the lowest index), so well-separated groups always
    // receive distinct seeds.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut chosen = vec![rng.gen_range(0..data.len())];
    while chosen.len() < cfg.k {
        let mut best_index = usize::MAX;
        let mut best_dist = f64::NEG_INFINITY;
        for i in 0..data.len() {
            if chosen.contains(&i) {
                continue;
            }
            let nearest = chosen
                .iter()
                .map(|&c| squared_distance(data.point(i), data.point(c)))
                .fold(f64::INFINITY, f64::min);
            if nearest > best_dist {
                best_dist = nearest;
                best_index = i;
            }
        }
        chosen.push(best_index);
    }
    let mut modes = DenseMatrix::zeros(cfg.k, data.dim());
    for (slot, &idx) in chosen.iter().enumerate() {
        modes.row_mut(slot).copy_from_slice(data.point(idx));
    }

    let mut z = AssignmentMatrix::uniform(data.len(), cfg.k)?;
    let b0 = similarity_matrix(data, &modes, cfg.sigma)?;
    let mut f_prev = objective_parts(&graph, z.as_matrix(), &b0, cfg.lambda_reg)?;
    let mut objectives = vec![f_prev];
    let mut converged = false;
    let mut outer_iterations = 0;

    for _ in 0..cfg.outer_iters {
        let b = similarity_matrix(data, &modes, cfg.sigma)?;
        let (z_next, _) = solve_lass(&z, &graph, &b, &solver_cfg)?;
        z = z_next;
        modes = update_modes_parts(data, z.as_matrix(), &modes, cfg.sigma, cfg.mode_steps)?;

        let b_new = similarity_matrix(data, &modes, cfg.sigma)?;
        let f = objective_parts(&graph, z.as_matrix(), &b_new, cfg.lambda_reg)?;
        objectives.push(f);
        outer_iterations += 1;
        if f_prev - f < OUTER_DECREASE_TOLERANCE {
            converged = true;
            break;
        }
        f_prev = f;
    }

    let model = ClusterModel::new(
        data.clone(),
        graph,
        cfg.graph,
        z,
        modes,
        cfg.sigma,
        cfg.lambda_reg,
    )?;
    Ok((
        model,
        FitTrace {
            objective_per_iter: objectives,
            outer_iterations,
            converged,
        },
    ))
}

/// The point the out-of-sample QP projects: `zbar = Z' w / sum(w)` and
/// `gamma = 1 / (2 lambda sum(w))`. Exposed separately so the two
/// quantities can be inspected and tested on their own.
pub fn out_of_sample_target(model: &ClusterModel, query: &OosQuery) -> Result<(DenseVector, f64)> {
    let n = model.data.len();
    let k = model.clusters();
    if query.w.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: query.w.len(),
        });
    }
    if query.g.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: query.g.len(),
        });
    }
    let mass = kahan_sum(query.w.iter().copied());
    if mass <= 0.0 {
        return Err(Error::ZeroAffinityMass);
    }
    if model.lambda_reg <= 0.0 {
        return Err(Error::NonPositiveSmoothing(model.lambda_reg));
    }

    let mut zbar = vec![0.0; k];
    for (wn, zrow) in query.w.iter().zip(model.z.as_matrix().row_iter()) {
        if *wn == 0.0 {
            continue;
        }
        for (acc, &zv) in zbar.iter_mut().zip(zrow) {
            *acc += wn * zv;
        }
    }
    for v in &mut zbar {
        *v /= mass;
    }
    debug_assert!(
        (kahan_sum(zbar.iter().copied()) - 1.0).abs() <= 1e-8,
        "zbar is a convex combination of simplex rows"
    );

    let gamma = 1.0 / (2.0 * model.lambda_reg * mass);
    Ok((DenseVector::new(zbar)?, gamma))
}

/// Assigns a new point: the solution of the reduced QP is the simplex
/// projection of `zbar + gamma * g`.
pub fn out_of_sample(model: &ClusterModel, query: &OosQuery) -> Result<DenseVector> {
    let (zbar, gamma) = out_of_sample_target(model, query)?;
    let target: Vec<f64> = zbar
        .as_slice()
        .iter()
        .zip(&query.g)
        .map(|(zb, gk)| zb + gamma * gk)
        .collect();
    let spec = SimplexSpec::unit(model.clusters())?;
    Ok(project_sort(&DenseVector::new(target)?, &spec)?.x)
}

// ---------------------------------------------------------------------------
// Model serialization ("lass-model/1")
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GraphSection {
    bandwidth: f64,
    knn: Option<usize>,
}

#[derive(Serialize, Deserialize)]
enum DataSection {
    #[serde(rename = "inline")]
    Inline(Vec<Vec<f64>>),
    #[serde(rename = "path")]
    Path(String),
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema: String,
    n: usize,
    d: usize,
    k: usize,
    sigma: f64,
    lambda_reg: f64,
    graph: GraphSection,
    modes: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    data: DataSection,
}

fn matrix_to_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.to_vec()).collect()
}

impl ClusterModel {
    /// Serializes the model (dataset inline) as a single JSON document.
    pub fn to_json_string(&self) -> Result<String> {
        let file = ModelFile {
            schema: MODEL_SCHEMA.to_string(),
            n: self.data.len(),
            d: self.data.dim(),
            k: self.clusters(),
            sigma: self.sigma,
            lambda_reg: self.lambda_reg,
            graph: GraphSection {
                bandwidth: self.graph_config.bandwidth,
                knn: self.graph_config.knn,
            },
            modes: matrix_to_rows(&self.modes),
            z: matrix_to_rows(self.z.as_matrix()),
            data: DataSection::Inline(matrix_to_rows(self.data.points())),
        };
        let mut out = serde_json::to_string_pretty(&file)?;
        out.push('\n');
        Ok(out)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_json_string()?.as_bytes())?;
        Ok(())
    }

    /// Loads a model, rebuilding the affinity graph from the stored dataset
    /// and graph parameters. A `path` data reference is resolved relative
    /// to the model file's directory.
    pub fn load_json(path: &Path) -> Result<Self> {
        let mut buf = String::new();
        std::fs::File::open(path)?.read_to_string(&mut buf)?;
        let file: ModelFile = serde_json::from_str(&buf)?;
        if file.schema != MODEL_SCHEMA {
            return Err(Error::ModelSchemaMismatch {
                expected: MODEL_SCHEMA.to_string(),
                found: file.schema,
            });
        }

        let points = match file.data {
            DataSection::Inline(rows) => DenseMatrix::from_rows(rows)?,
            DataSection::Path(rel) => {
                let base = path.parent().unwrap_or_else(|| Path::new("."));
                crate::io::read_matrix_csv_path(&base.join(rel), false)?
            }
        };
        if points.rows() != file.n || points.cols() != file.d {
            return Err(Error::ModelInconsistent(format!(
                "dataset is {}x{}, header says {}x{}",
                points.rows(),
                points.cols(),
                file.n,
                file.d
            )));
        }
        let modes = DenseMatrix::from_rows(file.modes)?;
        if modes.rows() != file.k || modes.cols() != file.d {
            return Err(Error::ModelInconsistent(
                "modes do not match the declared dimensions".into(),
            ));
        }
        let z = AssignmentMatrix::new(DenseMatrix::from_rows(file.z)?)?;
        if z.rows() != file.n || z.clusters() != file.k {
            return Err(Error::ModelInconsistent(
                "assignments do not match the declared dimensions".into(),
            ));
        }

        let data = Dataset::new(points);
        let graph_config = GraphConfig {
            bandwidth: file.graph.bandwidth,
            knn: file.graph.knn,
        };
        let graph = gaussian_affinities(&data, graph_config.bandwidth, graph_config.knn)?;
        ClusterModel::new(
            data,
            graph,
            graph_config,
            z,
            modes,
            file.sigma,
            file.lambda_reg,
        )
    }
}
