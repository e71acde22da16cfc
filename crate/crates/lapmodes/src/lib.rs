//! Exact Euclidean projection onto the probability simplex, and the
//! Laplacian K-modes / LASS clustering stack built on top of it.
//!
//! # What's here
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`projection`] | Sort-based simplex projection, early-exit variant, bisection and Michelot cross-checks, KKT certification, brute-force oracle |
//! | [`batch`]      | Row-wise projection of an N x D matrix |
//! | [`graph`]      | Gaussian affinities, optional kNN sparsification, graph Laplacian |
//! | [`lass`]       | The assignment QP `min lambda tr(Z'LZ) - tr(B'Z)` solved by (accelerated) gradient projection |
//! | [`kmodes`]     | Alternating minimization over assignments and kernel-density modes, out-of-sample mapping, model JSON |
//! | [`cli`]        | File-level commands behind the `lapmodes` binary |
//!
//! # Quick start
//!
//! ```
//! use lapmodes::{project_sort, DenseVector, SimplexSpec};
//!
//! let y = DenseVector::new(vec![2.0, 1.0]).unwrap();
//! let spec = SimplexSpec::unit(2).unwrap();
//! let report = project_sort(&y, &spec).unwrap();
//! assert_eq!(report.x.as_slice(), &[1.0, 0.0]);
//! assert_eq!(report.rho, 1);
//! assert_eq!(report.lambda, -1.0);
//! ```
//!
//! Every runnable capability has a matching example under `examples/`; see
//! the README for the list.
//!
//! # Concurrency
//!
//! All operations are pure functions of their inputs. Reports, models and
//! graphs are plain value types; share them freely across threads.

pub mod batch;
pub mod cli;
pub mod error;
pub mod graph;
pub mod io;
pub mod kmodes;
pub mod lass;
mod num;
pub mod projection;

pub use batch::{project_rows, DenseMatrix};
pub use error::{Error, Result};
pub use graph::{gaussian_affinities, laplacian_quadratic, AffinityGraph, Dataset, GraphConfig};
pub use kmodes::{
    fit, kernel_value, kmodes_objective, out_of_sample, out_of_sample_target, similarity_matrix,
    update_modes, ClusterModel, FitConfig, FitTrace, OosQuery,
};
pub use lass::{
    lass_gradient, lass_objective, projected_gradient_norm, solve_lass, AssignmentMatrix,
    SimilarityMatrix, SolveTrace, SolverConfig,
};
pub use projection::{
    brute_force_oracle, kkt_check, project_bisection, project_michelot, project_sort,
    project_sort_early_exit, DenseVector, KktReport, ProjectionReport, SimplexSpec,
};
