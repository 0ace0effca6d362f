//! A parked vehicle against a counter at the near edge of its view, over the
//! whole run and over the spans its accepted windows saw.
//!
//! `cargo run --release --example parked_vehicle [reps] [speed-std]`

use pedrate::experiment::{run_parked, ExperimentKind, ExperimentSpec};

fn main() {
    let mut args = std::env::args().skip(1);
    let reps: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let mut spec = ExperimentSpec::new(ExperimentKind::FullNetwork);
    spec.reps = reps;
    if let Some(std) = args.next().and_then(|s| s.parse().ok()) {
        spec.scenario.pedestrian_speed.std = std;
    }
    let r = run_parked(&spec).expect("parked run");
    let (x2, x1) = r.runs[0].window;
    println!("pedestrian speed std: {} m/s", spec.scenario.pedestrian_speed.std);
    println!("covered stretch: {x2:.1} m to {x1:.1} m");
    println!("moving observer mean: {:.4}/min", r.mean_moving());
    println!("stationary counter mean: {:.4}/min", r.mean_counter());
    println!("relative difference: {:.4}", r.relative_difference());
    println!("counter over the observed spans: {:.4}/min", r.mean_matched_counter());
    println!("relative difference: {:.4}", r.matched_relative_difference());
}
