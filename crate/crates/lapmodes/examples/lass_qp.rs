//! Solve the Laplacian-regularized assignment QP by gradient projection
//! and watch the certificates: monotone objective, shrinking natural
//! residual, feasible iterates.
//!
//! ```bash
//! cargo run --example lass_qp
//! ```

use lapmodes::{
    lass_objective, projected_gradient_norm, solve_lass, AffinityGraph, AssignmentMatrix,
    DenseMatrix, SimilarityMatrix, SolverConfig,
};
use rand::{Rng, SeedableRng};

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let n = 12;
    let k = 3;

    let mut w = DenseMatrix::zeros(n, n);
    for m in 0..n {
        for j in (m + 1)..n {
            let v = rng.gen_range(0.0..1.0);
            w.set(m, j, v);
            w.set(j, m, v);
        }
    }
    let graph = AffinityGraph::from_weights(w).unwrap();
    let b = SimilarityMatrix::new(
        DenseMatrix::from_vec(n, k, (0..n * k).map(|_| rng.gen_range(0.0..1.0)).collect())
            .unwrap(),
    );

    let z0 = AssignmentMatrix::uniform(n, k).unwrap();
    for accelerated in [false, true] {
        let cfg = SolverConfig {
            lambda_reg: 0.5,
            max_iter: 20_000,
            grad_tol: 1e-9,
            accelerated,
            step_size: None,
        };
        let (z, trace) = solve_lass(&z0, &graph, &b, &cfg).unwrap();
        let label = if accelerated { "accelerated" } else { "plain" };
        println!(
            "{label:>11}: {} iterations, converged = {}, final residual {:.2e}",
            trace.iterations, trace.converged, trace.final_projected_gradient_norm
        );
        println!(
            "             objective {:.9} -> {:.9}",
            trace.objective_per_iter.first().unwrap(),
            trace.objective_per_iter.last().unwrap()
        );
        assert!(trace
            .objective_per_iter
            .windows(2)
            .all(|p| p[1] <= p[0] + 1e-12));

        let residual = projected_gradient_norm(&z, &graph, &b, &cfg).unwrap();
        let f = lass_objective(z.as_matrix(), &graph, &b, cfg.lambda_reg).unwrap();
        println!("             re-checked: f = {f:.9}, residual = {residual:.2e}");
    }
}
