//! Row-wise projection of a matrix, as used for soft-assignment updates.
//!
//! ```bash
//! cargo run --example batch_projection
//! ```

use lapmodes::{project_rows, DenseMatrix, SimplexSpec};

fn main() {
    let y = DenseMatrix::from_rows(vec![
        vec![0.3, 0.7, 0.0],
        vec![2.0, 1.0, -3.0],
        vec![-1.0, -1.0, -1.0],
        vec![10.0, 10.1, 9.9],
    ])
    .unwrap();

    let spec = SimplexSpec::unit(y.cols()).unwrap();
    let x = project_rows(&y, &spec).unwrap();

    for (yr, xr) in y.row_iter().zip(x.row_iter()) {
        println!("{yr:6.2?}  ->  {xr:6.3?}");
    }

    println!();
    for (n, row) in x.row_iter().enumerate() {
        let sum: f64 = row.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9);
        println!("row {n}: sum = {sum}");
    }
}
