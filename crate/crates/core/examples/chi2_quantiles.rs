//! Chi-square quantiles and the Poisson interval they produce.
//!
//! `cargo run --example chi2_quantiles`

use pedrate::estimator::poisson_estimate;
use pedrate::stats::{chi2_cdf, chi2_quantile};

fn main() {
    println!("dof       p=0.05      p=0.5       p=0.95");
    for dof in [1.0, 2.0, 20.0, 22.0, 100.0] {
        let q: Vec<String> = [0.05, 0.5, 0.95]
            .iter()
            .map(|&p| format!("{:10.6}", chi2_quantile(p, dof)))
            .collect();
        println!("{dof:5}  {}", q.join("  "));
    }
    let x = chi2_quantile(0.95, 22.0);
    println!("\ncdf(quantile(0.95, 22)) = {:.12}", chi2_cdf(x, 22.0));

    // ten pedestrians seen over ten projected minutes
    let e = poisson_estimate(0, 10, 600.0, 0.1).expect("valid period");
    println!(
        "10 arrivals in 600 s: {:.3}/min, 90% interval [{:.3}, {:.3}]",
        e.lambda_hat, e.lambda_lo, e.lambda_hi
    );
}
