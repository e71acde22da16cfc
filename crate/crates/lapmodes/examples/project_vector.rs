//! Project a single vector onto the probability simplex and certify the
//! result against the optimality conditions.
//!
//! ```bash
//! cargo run --example project_vector
//! ```

use lapmodes::{kkt_check, project_sort, DenseVector, SimplexSpec};

fn main() {
    let y = DenseVector::new(vec![2.0, 1.0, -0.5, 0.3]).unwrap();
    let spec = SimplexSpec::unit(y.len()).unwrap();

    let report = project_sort(&y, &spec).unwrap();
    println!("y        = {:?}", y.as_slice());
    println!("x        = {:?}", report.x.as_slice());
    println!("rho      = {} (positive components)", report.rho);
    println!("lambda   = {}", report.lambda);
    println!("active   = {:?}", report.active);
    println!("sum(x)   = {}", report.x.sum());

    let kkt = kkt_check(&y, &report, &spec).unwrap();
    println!("\noptimality certificate:");
    println!("  stationarity    {:.3e}", kkt.stationarity_residual);
    println!("  primal          {:.3e}", kkt.primal_feasibility_violation);
    println!("  dual            {:.3e}", kkt.dual_feasibility_violation);
    println!("  complementarity {:.3e}", kkt.complementarity_residual);

    // a scaled simplex only changes the target mass
    let scaled = SimplexSpec::new(y.len(), 10.0).unwrap();
    let big = project_sort(&y, &scaled).unwrap();
    println!("\nwith mass a = 10: x = {:?}", big.x.as_slice());
}
