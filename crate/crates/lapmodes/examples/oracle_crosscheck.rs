//! Four independent routes to the same projection: descending sort,
//! early-exit scan, bisection on the multiplier, and Michelot's
//! alternating method — plus exhaustive enumeration at small dimension.
//!
//! ```bash
//! cargo run --example oracle_crosscheck
//! ```

use lapmodes::{
    brute_force_oracle, project_bisection, project_michelot, project_sort,
    project_sort_early_exit, DenseVector, SimplexSpec,
};
use rand::{Rng, SeedableRng};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);

    let d = 10;
    let spec = SimplexSpec::unit(d).unwrap();
    let mut worst = [0.0f64; 4];
    for _ in 0..200 {
        let y = DenseVector::new((0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
        let sort = project_sort(&y, &spec).unwrap();
        let early = project_sort_early_exit(&y, &spec).unwrap();
        let bisect = project_bisection(&y, &spec, 1e-12).unwrap();
        let michelot = project_michelot(&y, &spec).unwrap();
        let exhaustive = brute_force_oracle(&y, &spec).unwrap();

        worst[0] = worst[0].max(max_diff(sort.x.as_slice(), early.x.as_slice()));
        worst[1] = worst[1].max(max_diff(sort.x.as_slice(), bisect.x.as_slice()));
        worst[2] = worst[2].max(max_diff(sort.x.as_slice(), michelot.x.as_slice()));
        worst[3] = worst[3].max(max_diff(sort.x.as_slice(), exhaustive.as_slice()));
    }

    println!("200 random vectors at D = {d}, worst disagreement with the sort route:");
    println!("  early exit       {:.3e}", worst[0]);
    println!("  bisection        {:.3e}", worst[1]);
    println!("  michelot         {:.3e}", worst[2]);
    println!("  exhaustive       {:.3e}", worst[3]);

    // the sort route scales; the others are kept for cross-validation
    let d = 100_000;
    let spec = SimplexSpec::unit(d).unwrap();
    let y = DenseVector::new((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let started = std::time::Instant::now();
    let r = project_sort(&y, &spec).unwrap();
    println!(
        "\nD = {d}: rho = {}, lambda = {:.6}, {:.2} ms",
        r.rho,
        r.lambda,
        started.elapsed().as_secs_f64() * 1e3
    );
}
