//! Build a Gaussian affinity graph and inspect the Laplacian: zero row
//! sums, nonnegative quadratic form, and the trace identity used by the
//! clustering objective.
//!
//! ```bash
//! cargo run --example graph_laplacian
//! ```

use lapmodes::{gaussian_affinities, laplacian_quadratic, Dataset, DenseMatrix};
use rand::{Rng, SeedableRng};

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let n = 30;
    let points = DenseMatrix::from_vec(
        n,
        2,
        (0..n * 2).map(|_| rng.gen_range(-3.0..3.0)).collect(),
    )
    .unwrap();
    let data = Dataset::new(points);

    let dense = gaussian_affinities(&data, 1.0, None).unwrap();
    let sparse = gaussian_affinities(&data, 1.0, Some(5)).unwrap();

    for (name, graph) in [("dense", &dense), ("knn=5", &sparse)] {
        let worst_row_sum = (0..n)
            .map(|m| graph.laplacian().row(m).iter().sum::<f64>().abs())
            .fold(0.0, f64::max)
;
        let edges = (0..n)
            .flat_map(|m| (0..n).map(move |k| (m, k)))
            .filter(|&(m, k)| m < k && graph.weights().get(m, k) > 0.0)
            .count();
        println!(
            "{name:>6}: {edges} edges, max |row sum of L| = {worst_row_sum:.2e}, degree[0] = {:.4}",
            graph.degree()[0]
        );
    }

    // quadratic form is nonnegative and vanishes on constants
    let z_const = DenseMatrix::from_rows(vec![vec![0.5, 0.5]; n]).unwrap();
    println!(
        "\ntr(Z'LZ) on constant rows: {:.3e}",
        laplacian_quadratic(&dense, &z_const).unwrap()
    );

    let z_rand = DenseMatrix::from_vec(
        n,
        2,
        (0..n * 2).map(|_| rng.gen_range(0.0..1.0)).collect(),
    )
    .unwrap();
    let trace_form = laplacian_quadratic(&dense, &z_rand).unwrap();

    // the same number from the pairwise sum
    let mut pairwise = 0.0;
    for m in 0..n {
        for k in 0..n {
            let w = dense.weights().get(m, k);
            let d2: f64 = z_rand
                .row(m)
                .iter()
                .zip(z_rand.row(k))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            pairwise += w * d2;
        }
    }
    println!("tr(Z'LZ) on random Z:      {trace_form:.6}");
    println!("0.5 * sum w ||zm - zn||^2: {:.6}", 0.5 * pairwise);
}
