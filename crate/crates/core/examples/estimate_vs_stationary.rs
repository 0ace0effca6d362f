//! One simulated hour: moving-observer estimates next to stationary counters
//! on every active link.
//!
//! `cargo run --release --example estimate_vs_stationary [seed]`

use pedrate::estimator::{link_arrival_times, stationary_counter, EstimatorConfig, MovingObserver};
use pedrate::network::NetworkGraph;
use pedrate::simkit::{simulate, ScenarioConfig};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let graph = NetworkGraph::benchmark();
    let cfg = ScenarioConfig { seed, ..ScenarioConfig::default() };
    let out = simulate(&graph, &cfg).expect("simulation");
    let est = EstimatorConfig::default();
    let mut obs = MovingObserver::new(est).expect("estimator config");
    obs.observe_all(&out.log.snapshots).expect("well-formed snapshots");
    let times = link_arrival_times(&graph, &out.log.arrivals).expect("known routes");
    println!("link  truth   moving [90% CI]           counter [90% CI]");
    for (&link, &truth) in out.true_link_rates.iter().filter(|(_, &r)| r > 0.0) {
        let sc = stationary_counter(link, &times[&link], 0.0, cfg.duration_s, est.alpha).expect("positive span");
        let mo = match obs.estimate(link).expect("estimate").estimate() {
            Some(e) => format!("{:5.2} [{:4.2}, {:4.2}] {:3} s", e.lambda_hat, e.lambda_lo, e.lambda_hi, e.period_s as u64),
            None => "no data".into(),
        };
        println!(
            "{link:4}  {truth:4.2}   {mo:24}  {:4.2} [{:4.2}, {:4.2}]",
            sc.lambda_hat, sc.lambda_lo, sc.lambda_hi
        );
    }
    println!("{} windows accepted, {} rejected as overlapping", obs.ledger().links().map(|l| obs.accepted(l).len()).sum::<usize>(), obs.rejected().len());
}
