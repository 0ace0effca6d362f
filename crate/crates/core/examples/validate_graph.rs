//! Loads a graph (file path or builtin name) and lists any violations.
//!
//! `cargo run --example validate_graph [path|builtin:benchmark_27x74]`

use pedrate::experiment::load_graph;
use pedrate::network::NetworkGraph;

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "builtin:benchmark_27x74".into());
    let graph = if name.starts_with("builtin:") {
        load_graph(&name).expect("known builtin")
    } else {
        let text = std::fs::read_to_string(&name).expect("readable graph file");
        NetworkGraph::from_json(&text).expect("parsable graph file")
    };
    let violations = graph.validate();
    println!(
        "{name}: {} nodes, {} links, {} routes",
        graph.nodes().len(),
        graph.links().len(),
        graph.routes().len()
    );
    if violations.is_empty() {
        println!("valid");
    }
    for v in violations {
        println!("  {v}");
    }
}
