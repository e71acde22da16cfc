//! Command implementations behind the `lapmodes` binary.
//!
//! Each command reads/writes files and returns a process exit code:
//!
//! | code | meaning                                             |
//! |------|-----------------------------------------------------|
//! | 0    | success                                             |
//! | 1    | `check` found residuals above the tolerance         |
//! | 2    | malformed input (CSV, shapes, schema, bad options)  |
//! | 3    | non-finite values in numeric input                  |
//! | 4    | `cluster` did not converge within the iteration cap |
//! | 5    | `assign` query affinities underflowed to zero       |
//!
//! The commands are thin shells over the library: outputs equal library
//! outputs bit for bit.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::batch::{project_rows, DenseMatrix};
use crate::error::Error;
use crate::graph::{Dataset, GraphConfig};
use crate::io::{read_matrix_csv_path, write_matrix_csv_path};
use crate::kmodes::{fit, out_of_sample, ClusterModel, FitConfig};
use crate::lass::SolverConfig;
use crate::projection::{kkt_check, project_sort, DenseVector, ProjectionReport, SimplexSpec};

/// Failure with the exit code the process should report.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    fn new(exit_code: i32, message: impl Into<String>) -> Self {
        Self {
            exit_code,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NonFinite { .. } | Error::NonFiniteEntry { .. } => 3,
            Error::ZeroAffinityMass => 5,
            _ => 2,
        };
        CliError::new(code, e.to_string())
    }
}

type CliResult = Result<i32, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

fn write_rows(path: &Path, m: &DenseMatrix, format: OutputFormat) -> Result<(), CliError> {
    match format {
        OutputFormat::Csv => write_matrix_csv_path(path, m)?,
        OutputFormat::Json => {
            let mut out = String::new();
            for row in m.row_iter() {
                out.push_str(&serde_json::to_string(row).map_err(Error::from)?);
                out.push('\n');
            }
            std::fs::write(path, out).map_err(Error::from)?;
        }
    }
    Ok(())
}

pub struct ProjectOptions {
    pub input: PathBuf,
    pub output: PathBuf,
    pub scale: f64,
    pub skip_header: bool,
    pub report: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Serialize)]
struct RowReport {
    row: usize,
    rho: usize,
    lambda: f64,
}

/// Projects every row of the input CSV onto the simplex with mass `a`.
/// With `--report`, also writes one JSON line `{row, rho, lambda}` per row
/// (rows are 0-based).
pub fn cmd_project(opts: &ProjectOptions) -> CliResult {
    let y = read_matrix_csv_path(&opts.input, opts.skip_header)?;
    let spec = SimplexSpec::new(y.cols(), opts.scale)?;

    let x = project_rows(&y, &spec)?;
    write_rows(&opts.output, &x, opts.format)?;

    if let Some(report_path) = &opts.report {
        let mut lines = String::new();
        for (row, values) in y.row_iter().enumerate() {
            let report = project_sort(&DenseVector::from_slice(values)?, &spec)?;
            let entry = RowReport {
                row,
                rho: report.rho,
                lambda: report.lambda,
            };
            lines.push_str(&serde_json::to_string(&entry).map_err(Error::from)?);
            lines.push('\n');
        }
        std::fs::write(report_path, lines).map_err(Error::from)?;
    }
    Ok(0)
}

pub struct ClusterOptions {
    pub input: PathBuf,
    pub output: PathBuf,
    pub report: Option<PathBuf>,
    pub k: usize,
    pub sigma: f64,
    pub lambda_reg: f64,
    pub bandwidth: f64,
    pub knn: Option<usize>,
    pub max_iter: usize,
    pub outer_iters: usize,
    pub tol: f64,
    pub seed: u64,
    pub skip_header: bool,
}

#[derive(Serialize)]
struct ClusterReport {
    converged: bool,
    outer_iterations: usize,
    objective_per_iter: Vec<f64>,
    wall_time_seconds: f64,
}

/// Fits a model and writes it as JSON. The run report (objective trace,
/// iteration count, wall time) goes to `--report` or stdout. Exit code 4
/// flags non-convergence; the model is still written.
pub fn cmd_cluster(opts: &ClusterOptions) -> CliResult {
    let points = read_matrix_csv_path(&opts.input, opts.skip_header)?;
    let data = Dataset::new(points);

    let cfg = FitConfig {
        k: opts.k,
        sigma: opts.sigma,
        lambda_reg: opts.lambda_reg,
        graph: GraphConfig {
            bandwidth: opts.bandwidth,
            knn: opts.knn,
        },
        solver: SolverConfig {
            lambda_reg: opts.lambda_reg,
            max_iter: opts.max_iter,
            grad_tol: opts.tol,
            accelerated: true,
            step_size: None,
        },
        outer_iters: opts.outer_iters,
        mode_steps: 10,
        seed: opts.seed,
    };

    let started = Instant::now();
    let (model, trace) = fit(&data, &cfg)?;
    let wall = started.elapsed().as_secs_f64();

    model.save_json(&opts.output)?;

    let report = ClusterReport {
        converged: trace.converged,
        outer_iterations: trace.outer_iterations,
        objective_per_iter: trace.objective_per_iter.clone(),
        wall_time_seconds: wall,
    };
    let report_json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    match &opts.report {
        Some(path) => std::fs::write(path, report_json + "\n").map_err(Error::from)?,
        None => println!("{report_json}"),
    }

    Ok(if trace.converged { 0 } else { 4 })
}

pub struct AssignOptions {
    pub model: PathBuf,
    pub input: PathBuf,
    pub output: PathBuf,
    pub skip_header: bool,
    pub format: OutputFormat,
}

/// Assigns each query row using the stored model: Gaussian affinities to
/// the training points at the model's graph bandwidth, kernel affinities to
/// the modes, then the reduced-QP projection.
pub fn cmd_assign(opts: &AssignOptions) -> CliResult {
    let model = ClusterModel::load_json(&opts.model)?;
    let queries = read_matrix_csv_path(&opts.input, opts.skip_header)?;
    if queries.cols() != model.dataset().dim() {
        return Err(CliError::new(
            2,
            format!(
                "query dimension {} does not match the model dimension {}",
                queries.cols(),
                model.dataset().dim()
            ),
        ));
    }

    let mut out = DenseMatrix::zeros(queries.rows(), model.clusters());
    for (row, point) in queries.row_iter().enumerate() {
        let query = model.query_affinities(point)?;
        let z = out_of_sample(&model, &query).map_err(|e| match e {
            Error::ZeroAffinityMass => CliError::new(
                5,
                format!(
                    "query row {row}: affinities to every training point underflowed to zero; \
                     try a larger graph bandwidth"
                ),
            ),
            other => CliError::from(other),
        })?;
        out.row_mut(row).copy_from_slice(z.as_slice());
    }
    write_rows(&opts.output, &out, opts.format)?;
    Ok(0)
}

pub struct CheckOptions {
    pub y: PathBuf,
    pub x: PathBuf,
    pub scale: f64,
    pub tol: f64,
    pub skip_header: bool,
}

/// Re-certifies projected rows: for each (y, x) pair the multiplier is
/// recovered as the mean of `x_i - y_i` over the positive support, and the
/// KKT residuals are checked against the tolerance. Prints the worst
/// residuals; exit 0 iff all pass.
pub fn cmd_check(opts: &CheckOptions) -> CliResult {
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::InvalidTolerance(opts.tol).into());
    }
    let y = read_matrix_csv_path(&opts.y, opts.skip_header)?;
    let x = read_matrix_csv_path(&opts.x, opts.skip_header)?;
    if y.rows() != x.rows() || y.cols() != x.cols() {
        return Err(CliError::new(
            2,
            format!(
                "shape mismatch: y is {}x{}, x is {}x{}",
                y.rows(),
                y.cols(),
                x.rows(),
                x.cols()
            ),
        ));
    }
    let spec = SimplexSpec::new(y.cols(), opts.scale)?;

    let mut worst_stationarity = 0.0f64;
    let mut worst_primal = 0.0f64;
    let mut worst_dual = 0.0f64;
    let mut worst_complementarity = 0.0f64;
    for n in 0..y.rows() {
        let y_row = DenseVector::from_slice(y.row(n))?;
        let x_row = DenseVector::from_slice(x.row(n))?;

        let active: Vec<bool> = x_row.as_slice().iter().map(|&v| v > 0.0).collect();
        let rho = active.iter().filter(|&&b| b).count();
        let lambda = if rho > 0 {
            let mut sum = 0.0;
            for i in 0..x_row.len() {
                if active[i] {
                    sum += x_row[i] - y_row[i];
                }
            }
            sum / rho as f64
        } else {
            0.0
        };

        let report = ProjectionReport {
            x: x_row,
            rho,
            lambda,
            active,
        };
        let kkt = kkt_check(&y_row, &report, &spec)?;
        worst_stationarity = worst_stationarity.max(kkt.stationarity_residual);
        worst_primal = worst_primal.max(kkt.primal_feasibility_violation);
        worst_dual = worst_dual.max(kkt.dual_feasibility_violation);
        worst_complementarity = worst_complementarity.max(kkt.complementarity_residual);
    }

    let worst = worst_stationarity
        .max(worst_primal)
        .max(worst_dual)
        .max(worst_complementarity);
    let mut stdout = std::io::stdout();
    let _ = writeln!(
        stdout,
        "worst residuals over {} rows: stationarity {:e}, primal {:e}, dual {:e}, complementarity {:e}",
        y.rows(),
        worst_stationarity,
        worst_primal,
        worst_dual,
        worst_complementarity
    );
    if worst <= opts.tol {
        let _ = writeln!(stdout, "OK (tolerance {:e})", opts.tol);
        Ok(0)
    } else {
        let _ = writeln!(stdout, "FAILED (tolerance {:e})", opts.tol);
        Ok(1)
    }
}
