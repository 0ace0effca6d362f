//! Moving observer against stationary counters on the benchmark network.
//!
//! `cargo run --release --example full_network [reps]`

use pedrate::experiment::{run_full_network, ExperimentKind, ExperimentSpec};

fn main() {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let mut spec = ExperimentSpec::new(ExperimentKind::FullNetwork);
    spec.reps = reps;
    let r = run_full_network(&spec).expect("full network");
    println!("link  length  truth  mean_hat  [mean_lo, mean_hi]  coverage  counter");
    for l in &r.links {
        println!(
            "{:4}  {:6.1}  {:5.2}  {:>8}  [{:>5}, {:>5}]  {:>8}  {:.3}",
            l.link,
            l.length,
            l.truth,
            fmt(l.mean_hat),
            fmt(l.mean_lo),
            fmt(l.mean_hi),
            fmt(l.coverage),
            l.counter_mean_hat
        );
    }
    println!("active links: {}", r.active().count());
    println!("every active link estimated in every rep: {}", r.all_active_estimated(reps));
    println!("active links with truth in mean CI: {:.3}", r.mean_interval_coverage());
    println!("pooled per-run coverage: {:.3}", r.pooled_coverage());
    println!("spearman(length, mean width): {}", fmt(r.length_width_correlation()));
}

fn fmt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.3}"))
}
