//! A street whose arrival rate triples half way through the hour, driven up
//! and down by the vehicle; the moving-average profile picks up the step.
//!
//! `cargo run --release --example rate_profile_step [seed]`

use pedrate::estimator::{eval_grid, write_profile_csv, EstimatorConfig};
use pedrate::experiment::{estimate_log, single_link_graph};
use pedrate::simkit::{simulate, RateStep, ScenarioConfig};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let graph = single_link_graph(3.0).expect("graph");
    let cfg = ScenarioConfig {
        seed,
        rate_schedule: vec![RateStep { from_s: 1800.0, scale: 3.0 }],
        ..ScenarioConfig::default()
    };
    let out = simulate(&graph, &cfg).expect("simulation");
    let r = estimate_log(&out.log, Some(&graph), EstimatorConfig::default(), 120.0).expect("replay");
    let profile: Vec<_> = r.profiles.iter().filter(|p| p.outcome.link() == 0).copied().collect();
    println!("{} evaluation times over {:?}", eval_grid(r.span.0, r.span.1, 120.0).len(), r.span);
    write_profile_csv(std::io::stdout().lock(), &profile).expect("stdout");
}
