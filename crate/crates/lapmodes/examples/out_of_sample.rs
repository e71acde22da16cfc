//! Train on two blobs, save the model to JSON, reload it, and assign
//! held-out points — the mapping is a single simplex projection per query.
//!
//! ```bash
//! cargo run --example out_of_sample
//! ```

use lapmodes::{fit, out_of_sample, out_of_sample_target, ClusterModel, Dataset, DenseMatrix, FitConfig};

fn main() {
    let data = Dataset::new(
        DenseMatrix::from_rows(vec![
            vec![0.0, 0.0],
            vec![0.1, 0.1],
            vec![0.2, 0.0],
            vec![3.0, 0.0],
            vec![3.1, 0.1],
            vec![3.2, 0.0],
        ])
        .unwrap(),
    );
    let cfg = FitConfig::new(2, 0.5, 0.1, 0.6);
    let (model, _) = fit(&data, &cfg).unwrap();

    let dir = std::env::temp_dir().join("lapmodes_example_model.json");
    model.save_json(&dir).unwrap();
    let reloaded = ClusterModel::load_json(&dir).unwrap();
    println!("model round-tripped through {}", dir.display());

    for point in [[0.05, 0.05], [3.05, 0.0], [1.5, 0.0], [2.2, 0.0]] {
        let query = reloaded.query_affinities(&point).unwrap();
        let (zbar, gamma) = out_of_sample_target(&reloaded, &query).unwrap();
        let z = out_of_sample(&reloaded, &query).unwrap();
        println!(
            "query {point:?}: zbar = {:.3?}, gamma = {gamma:.3}, z = {:.4?}",
            zbar.as_slice(),
            z.as_slice()
        );
    }

    std::fs::remove_file(dir).ok();
}
