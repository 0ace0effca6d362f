//! Single-link visits sweep and rate sweep on the triangle loop.
//!
//! `cargo run --release --example visits_sweep [reps]`

use pedrate::experiment::{run_rate_sweep, run_visits_sweep, ExperimentKind, ExperimentSpec};

fn main() {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let mut spec = ExperimentSpec::new(ExperimentKind::SingleLinkVisitsSweep);
    spec.reps = reps;
    spec.visits = vec![0, 1, 2, 5, 10, 20];
    let sweep = run_visits_sweep(&spec).expect("visits sweep");
    println!("visits  mean_hat  mean_width  coverage  estimated");
    for p in &sweep.points {
        println!(
            "{:6}  {:>8}  {:>10}  {:>8}  {:>9}",
            p.visits,
            fmt(p.mean_hat),
            fmt(p.mean_width),
            fmt(p.coverage),
            p.estimated
        );
    }

    spec.kind = ExperimentKind::RateSweep;
    spec.rates = vec![0.0, 0.5, 1.0, 1.62, 3.0];
    let sweep = run_rate_sweep(&spec).expect("rate sweep");
    println!("\nrate  mean_hat  rel_err  rel_width  coverage");
    for p in &sweep.points {
        let rel_width = p.mean_width.zip(p.mean_hat).map(|(w, m)| w / m);
        println!(
            "{:4}  {:>8}  {:>7}  {:>9}  {:>8}",
            p.rate_per_min,
            fmt(p.mean_hat),
            fmt(p.relative_error()),
            fmt(rel_width),
            fmt(p.coverage)
        );
    }
}

fn fmt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.3}"))
}
