//! Fit the full clustering on two separated blobs and print the learned
//! soft assignments and modes.
//!
//! ```bash
//! cargo run --example kmodes_two_blobs
//! ```

use lapmodes::{fit, kmodes_objective, Dataset, DenseMatrix, FitConfig};
use rand::{Rng, SeedableRng};

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut rows = Vec::new();
    for _ in 0..8 {
        rows.push(vec![rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)]);
    }
    for _ in 0..8 {
        rows.push(vec![4.0 + rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)]);
    }
    let data = Dataset::new(DenseMatrix::from_rows(rows).unwrap());

    let cfg = FitConfig::new(2, 0.8, 0.2, 0.8);
    let (model, trace) = fit(&data, &cfg).unwrap();

    println!(
        "converged = {} after {} outer iterations",
        trace.converged, trace.outer_iterations
    );
    println!("objective trace: {:?}", trace.objective_per_iter);
    println!("final objective: {}", kmodes_objective(&model).unwrap());

    println!("\nmodes:");
    for k in 0..model.clusters() {
        println!("  c_{k} = {:?}", model.modes().row(k));
    }

    println!("\nsoft assignments:");
    for n in 0..data.len() {
        println!(
            "  x_{n:<2} = {:>18.3?}  ->  z = {:.4?}",
            data.point(n),
            model.assignments().row(n)
        );
    }
}
