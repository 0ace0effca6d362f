//! Link arrival rates as the sum of the rates of routes using each link,
//! and a shortest route between two nodes.
//!
//! `cargo run --example link_rates`

use pedrate::network::NetworkGraph;

fn main() {
    let graph = NetworkGraph::benchmark();
    let rates = graph.link_rates();
    let active = rates.values().filter(|&&r| r > 0.0).count();
    println!("{active} of {} links carry pedestrians", rates.len());
    for l in graph.links().iter().take(12) {
        println!("link {:2} ({:2} -> {:2}, {:5.1} m): {:.2}/min", l.id, l.from, l.to, l.length, rates[&l.id]);
    }
    let route = graph.shortest_route(0, 26).expect("connected");
    println!("shortest 0 -> 26: links {:?}, {:.1} m", route, graph.path_length(&route));
}
