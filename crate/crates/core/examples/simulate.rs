//! One hour on the benchmark network; writes the event log to a directory.
//!
//! `cargo run --release --example simulate [out-dir] [seed]`

use pedrate::network::NetworkGraph;
use pedrate::simkit::{simulate, ScenarioConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = std::path::PathBuf::from(args.next().unwrap_or_else(|| "sim-out".into()));
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let graph = NetworkGraph::benchmark();
    let cfg = ScenarioConfig { seed, ..ScenarioConfig::default() };
    let out = simulate(&graph, &cfg).expect("simulation");
    let log = &out.log;
    println!(
        "{} arrivals, {} snapshots, {} link traversals by the vehicle",
        log.arrivals.len(),
        log.snapshots.len(),
        log.visits.len()
    );
    let seen: usize = log.snapshots.iter().map(|s| s.pedestrians.len()).sum();
    println!("{seen} pedestrian sightings");
    let least = out.visits.values().min().copied().unwrap_or(0);
    let most = out.visits.values().max().copied().unwrap_or(0);
    println!("traversals per link: {least} to {most}");
    std::fs::create_dir_all(&dir).expect("output directory");
    log.save(dir.join("events.csv")).expect("write log");
    std::fs::write(dir.join("graph.json"), graph.to_json()).expect("write graph");
    println!("wrote {}", dir.display());
}
