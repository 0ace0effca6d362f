//! Directed pedestrian network: nodes, paired links, minimum-length routes
//! and the superposition of route arrival rates onto links.

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point2;

pub type NodeId = u32;
pub type LinkId = u32;
pub type RouteId = u32;

/// Relative slack used when comparing path lengths.
const LENGTH_TOL: f64 = 1e-9;

const BENCHMARK_JSON: &str = include_str!("../data/benchmark_27x74.json");

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub position: Point2,
    pub is_origin: bool,
    pub is_destination: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub id: LinkId,
    pub from: NodeId,
    pub to: NodeId,
    /// Euclidean distance between the endpoint nodes, in meters. Zero when an
    /// endpoint is missing (reported by validation).
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Route {
    pub id: RouteId,
    pub links: Vec<LinkId>,
    pub origin: NodeId,
    pub destination: NodeId,
    /// Arrivals per minute.
    pub rate_per_min: f64,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("route {0} has no links")]
    EmptyRoute(RouteId),
    #[error("route {route} references unknown link {link}")]
    UnresolvedRoute { route: RouteId, link: LinkId },
    #[error("graph is invalid: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("failed to read graph file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed graph document at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Errors from [`NetworkGraph::shortest_route`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RouteError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("no path from node {origin} to node {destination}")]
    NoPath {
        origin: NodeId,
        destination: NodeId,
    },
}

/// One structural problem found by [`NetworkGraph::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    DuplicateNode(NodeId),
    NonFinitePosition(NodeId),
    DuplicateLink(LinkId),
    SelfLoop(LinkId),
    MissingEndpoint { link: LinkId, node: NodeId },
    NonPositiveLength(LinkId),
    ParallelLinks { from: NodeId, to: NodeId },
    MissingReverse { link: LinkId, from: NodeId, to: NodeId },
    DuplicateRoute(RouteId),
    UnknownRouteLink { route: RouteId, link: LinkId },
    DisconnectedRoute { route: RouteId, position: usize },
    RevisitsNode { route: RouteId, node: NodeId },
    OriginNotInSet { route: RouteId, node: NodeId },
    DestinationNotInSet { route: RouteId, node: NodeId },
    NotMinimal { route: RouteId, length: f64, shortest: f64 },
    InvalidRate { route: RouteId, rate: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNode(id) => write!(f, "duplicate node id {id}"),
            Violation::NonFinitePosition(id) => write!(f, "node {id} has a non-finite position"),
            Violation::DuplicateLink(id) => write!(f, "duplicate link id {id}"),
            Violation::SelfLoop(id) => write!(f, "link {id} starts and ends at the same node"),
            Violation::MissingEndpoint { link, node } => {
                write!(f, "link {link} references missing node {node}")
            }
            Violation::NonPositiveLength(id) => write!(f, "link {id} has non-positive length"),
            Violation::ParallelLinks { from, to } => {
                write!(f, "more than one directed link from node {from} to node {to}")
            }
            Violation::MissingReverse { link, from, to } => write!(
                f,
                "link {link} ({from} -> {to}) has no reverse link ({to} -> {from})"
            ),
            Violation::DuplicateRoute(id) => write!(f, "duplicate route id {id}"),
            Violation::UnknownRouteLink { route, link } => {
                write!(f, "route {route} references unknown link {link}")
            }
            Violation::DisconnectedRoute { route, position } => {
                write!(f, "route {route} is not a connected path at position {position}")
            }
            Violation::RevisitsNode { route, node } => {
                write!(f, "route {route} visits node {node} more than once")
            }
            Violation::OriginNotInSet { route, node } => {
                write!(f, "route {route} starts at node {node} which is not an origin")
            }
            Violation::DestinationNotInSet { route, node } => {
                write!(f, "route {route} ends at node {node} which is not a destination")
            }
            Violation::NotMinimal {
                route,
                length,
                shortest,
            } => write!(
                f,
                "route {route} has length {length:.3} m but the shortest path is {shortest:.3} m"
            ),
            Violation::InvalidRate { route, rate } => {
                write!(f, "route {route} has invalid rate {rate}")
            }
        }
    }
}

/// On-disk graph document.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub nodes: Vec<NodeRecord>,
    pub links: Vec<LinkRecord>,
    #[serde(default)]
    pub routes: Vec<RouteRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub origin: bool,
    #[serde(default)]
    pub destination: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LinkRecord {
    pub id: LinkId,
    pub from: NodeId,
    pub to: NodeId,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RouteRecord {
    pub id: RouteId,
    pub links: Vec<LinkId>,
    pub rate_per_min: f64,
}

/// Directed graph `(nodes, links)` plus the route set carried on it.
///
/// The graph is immutable once built; rate changes go through the consuming
/// `with_*` builders.
#[derive(Clone, Debug)]
pub struct NetworkGraph {
    nodes: Vec<Node>,
    links: Vec<Link>,
    routes: Vec<Route>,
    node_index: HashMap<NodeId, usize>,
    link_index: HashMap<LinkId, usize>,
    outgoing: HashMap<NodeId, Vec<LinkId>>,
}

impl NetworkGraph {
    /// Builds a graph without validating it. Link lengths are derived from
    /// node positions.
    pub fn new(
        nodes: Vec<Node>,
        links: Vec<LinkRecord>,
        routes: Vec<RouteRecord>,
    ) -> Result<Self, GraphError> {
        let mut node_index = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            node_index.entry(n.id).or_insert(i);
        }
        let links: Vec<Link> = links
            .into_iter()
            .map(|r| {
                let length = match (node_index.get(&r.from), node_index.get(&r.to)) {
                    (Some(&a), Some(&b)) => nodes[a].position.distance(nodes[b].position),
                    _ => 0.0,
                };
                Link {
                    id: r.id,
                    from: r.from,
                    to: r.to,
                    length,
                }
            })
            .collect();
        let mut link_index = HashMap::new();
        let mut outgoing: HashMap<NodeId, Vec<LinkId>> = HashMap::new();
        for (i, l) in links.iter().enumerate() {
            // first occurrence wins for duplicate ids
            if let Entry::Vacant(slot) = link_index.entry(l.id) {
                slot.insert(i);
                outgoing.entry(l.from).or_default().push(l.id);
            }
        }
        for out in outgoing.values_mut() {
            out.sort_unstable();
        }
        let mut built = Vec::with_capacity(routes.len());
        for r in routes {
            let first = *r.links.first().ok_or(GraphError::EmptyRoute(r.id))?;
            let last = *r.links.last().unwrap();
            let origin = link_index
                .get(&first)
                .map(|&i| links[i].from)
                .ok_or(GraphError::UnresolvedRoute {
                    route: r.id,
                    link: first,
                })?;
            let destination = link_index
                .get(&last)
                .map(|&i| links[i].to)
                .ok_or(GraphError::UnresolvedRoute {
                    route: r.id,
                    link: last,
                })?;
            built.push(Route {
                id: r.id,
                links: r.links,
                origin,
                destination,
                rate_per_min: r.rate_per_min,
            });
        }
        Ok(Self {
            nodes,
            links,
            routes: built,
            node_index,
            link_index,
            outgoing,
        })
    }

    pub fn from_file(file: GraphFile) -> Result<Self, GraphError> {
        let nodes = file
            .nodes
            .into_iter()
            .map(|n| Node {
                id: n.id,
                position: Point2::new(n.x, n.y),
                is_origin: n.origin,
                is_destination: n.destination,
            })
            .collect();
        Self::new(nodes, file.links, file.routes)
    }

    /// Parses a graph document. The result is not validated.
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| GraphError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_file(file)
    }

    /// Reads, parses and validates a graph document.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)?.into_validated()
    }

    /// The bundled 27-node, 74-link benchmark network.
    pub fn benchmark() -> Self {
        Self::from_json(BENCHMARK_JSON)
            .and_then(Self::into_validated)
            .expect("bundled benchmark graph is valid")
    }

    pub fn benchmark_json() -> &'static str {
        BENCHMARK_JSON
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.id,
                    x: n.position.x,
                    y: n.position.y,
                    origin: n.is_origin,
                    destination: n.is_destination,
                })
                .collect(),
            links: self
                .links
                .iter()
                .map(|l| LinkRecord {
                    id: l.id,
                    from: l.from,
                    to: l.to,
                })
                .collect(),
            routes: self
                .routes
                .iter()
                .map(|r| RouteRecord {
                    id: r.id,
                    links: r.links.clone(),
                    rate_per_min: r.rate_per_min,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("graph serializes")
    }

    pub fn into_validated(self) -> Result<Self, GraphError> {
        let report = self.validate();
        if report.is_empty() {
            Ok(self)
        } else {
            Err(GraphError::Invalid(report))
        }
    }

    /// Replaces the route set.
    pub fn with_routes(self, routes: Vec<RouteRecord>) -> Result<Self, GraphError> {
        Self::new(
            self.nodes,
            self.links
                .into_iter()
                .map(|l| LinkRecord {
                    id: l.id,
                    from: l.from,
                    to: l.to,
                })
                .collect(),
            routes,
        )
    }

    /// Sets every route to the same arrival rate (per minute).
    pub fn with_uniform_rate(mut self, rate_per_min: f64) -> Self {
        for r in &mut self.routes {
            r.rate_per_min = rate_per_min;
        }
        self
    }

    /// Multiplies every route rate by `factor`.
    pub fn with_scaled_rates(mut self, factor: f64) -> Self {
        for r in &mut self.routes {
            r.rate_per_min *= factor;
        }
        self
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.node_index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn link(&self, id: LinkId) -> Option<&Link> {
        self.link_index.get(&id).map(|&i| &self.links[i])
    }

    pub fn route(&self, id: RouteId) -> Option<&Route> {
        self.routes.iter().find(|r| r.id == id)
    }

    /// Outgoing link ids of a node, ascending.
    pub fn outgoing(&self, node: NodeId) -> &[LinkId] {
        self.outgoing.get(&node).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The link running the opposite way between the same two nodes.
    pub fn reverse_of(&self, link: LinkId) -> Option<LinkId> {
        let l = self.link(link)?;
        self.outgoing(l.to)
            .iter()
            .copied()
            .find(|&id| self.link(id).is_some_and(|r| r.to == l.from))
    }

    /// Start and end points of a link in the map frame.
    pub fn link_endpoints(&self, link: LinkId) -> Option<(Point2, Point2)> {
        let l = self.link(link)?;
        Some((self.node(l.from)?.position, self.node(l.to)?.position))
    }

    /// Total length of a sequence of links. Unknown links count as zero.
    pub fn path_length(&self, links: &[LinkId]) -> f64 {
        links
            .iter()
            .filter_map(|&id| self.link(id))
            .map(|l| l.length)
            .sum()
    }

    /// Every violation of the structural invariants; empty when the graph is
    /// valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        let mut seen = HashSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id) {
                out.push(Violation::DuplicateNode(n.id));
            }
            if !(n.position.x.is_finite() && n.position.y.is_finite()) {
                out.push(Violation::NonFinitePosition(n.id));
            }
        }

        let mut seen = HashSet::new();
        let mut pairs: HashMap<(NodeId, NodeId), usize> = HashMap::new();
        for l in &self.links {
            if !seen.insert(l.id) {
                out.push(Violation::DuplicateLink(l.id));
            }
            if l.from == l.to {
                out.push(Violation::SelfLoop(l.id));
            }
            let mut endpoints_ok = true;
            for node in [l.from, l.to] {
                if self.node(node).is_none() {
                    out.push(Violation::MissingEndpoint { link: l.id, node });
                    endpoints_ok = false;
                }
            }
            if endpoints_ok && l.from != l.to && !(l.length > 0.0) {
                out.push(Violation::NonPositiveLength(l.id));
            }
            *pairs.entry((l.from, l.to)).or_default() += 1;
        }
        let mut parallel: Vec<_> = pairs.iter().filter(|(_, &c)| c > 1).map(|(k, _)| *k).collect();
        parallel.sort_unstable();
        for (from, to) in parallel {
            out.push(Violation::ParallelLinks { from, to });
        }
        for l in &self.links {
            if l.from != l.to && !pairs.contains_key(&(l.to, l.from)) {
                out.push(Violation::MissingReverse {
                    link: l.id,
                    from: l.from,
                    to: l.to,
                });
            }
        }

        let mut seen = HashSet::new();
        for r in &self.routes {
            if !seen.insert(r.id) {
                out.push(Violation::DuplicateRoute(r.id));
            }
            if !(r.rate_per_min.is_finite() && r.rate_per_min >= 0.0) {
                out.push(Violation::InvalidRate {
                    route: r.id,
                    rate: r.rate_per_min,
                });
            }
            out.extend(self.route_violations(r));
        }
        out
    }

    fn route_violations(&self, r: &Route) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut resolved = Vec::with_capacity(r.links.len());
        for &id in &r.links {
            match self.link(id) {
                Some(l) => resolved.push(l),
                None => out.push(Violation::UnknownRouteLink {
                    route: r.id,
                    link: id,
                }),
            }
        }
        if !out.is_empty() {
            return out;
        }
        let mut connected = true;
        for (i, pair) in resolved.windows(2).enumerate() {
            if pair[0].to != pair[1].from {
                out.push(Violation::DisconnectedRoute {
                    route: r.id,
                    position: i + 1,
                });
                connected = false;
            }
        }
        if connected {
            let mut visited = HashSet::new();
            visited.insert(r.origin);
            for l in &resolved {
                if !visited.insert(l.to) {
                    out.push(Violation::RevisitsNode {
                        route: r.id,
                        node: l.to,
                    });
                }
            }
        }
        if !self.node(r.origin).is_some_and(|n| n.is_origin) {
            out.push(Violation::OriginNotInSet {
                route: r.id,
                node: r.origin,
            });
        }
        if !self.node(r.destination).is_some_and(|n| n.is_destination) {
            out.push(Violation::DestinationNotInSet {
                route: r.id,
                node: r.destination,
            });
        }
        if connected {
            let length = self.path_length(&r.links);
            if let Ok(best) = self.shortest_route(r.origin, r.destination) {
                let shortest = self.path_length(&best);
                if length > shortest + LENGTH_TOL * (1.0 + shortest) {
                    out.push(Violation::NotMinimal {
                        route: r.id,
                        length,
                        shortest,
                    });
                }
            }
        }
        out
    }

    /// Link arrival rates (per minute) by superposition of the route rates.
    /// Links on no route map to zero.
    pub fn link_rates(&self) -> BTreeMap<LinkId, f64> {
        let mut rates: BTreeMap<LinkId, f64> = self.links.iter().map(|l| (l.id, 0.0)).collect();
        for r in &self.routes {
            for id in &r.links {
                if let Some(rate) = rates.get_mut(id) {
                    *rate += r.rate_per_min;
                }
            }
        }
        rates
    }

    /// Minimum-length directed path from `origin` to `destination`.
    ///
    /// Among equally short paths the one with the lexicographically smallest
    /// link id sequence is returned.
    pub fn shortest_route(
        &self,
        origin: NodeId,
        destination: NodeId,
    ) -> Result<Vec<LinkId>, RouteError> {
        for node in [origin, destination] {
            if self.node(node).is_none() {
                return Err(RouteError::UnknownNode(node));
            }
        }
        if origin == destination {
            return Ok(Vec::new());
        }
        let to_dest = self.distances_to(destination);
        let no_path = RouteError::NoPath {
            origin,
            destination,
        };
        if !to_dest.contains_key(&origin) {
            return Err(no_path);
        }

        let mut path = Vec::new();
        let mut at = origin;
        while at != destination {
            if path.len() > self.nodes.len() {
                return Err(no_path);
            }
            let remaining = to_dest[&at];
            let next = self.outgoing(at).iter().copied().find(|&id| {
                let l = self.link(id).expect("outgoing link exists");
                to_dest.get(&l.to).is_some_and(|&d| {
                    l.length > 0.0 && l.length + d <= remaining + LENGTH_TOL * (1.0 + remaining)
                })
            });
            match next {
                Some(id) => {
                    path.push(id);
                    at = self.link(id).unwrap().to;
                }
                None => return Err(no_path),
            }
        }
        Ok(path)
    }

    // Dijkstra over reversed links: distance from every node to `target`.
    fn distances_to(&self, target: NodeId) -> HashMap<NodeId, f64> {
        let mut incoming: HashMap<NodeId, Vec<&Link>> = HashMap::new();
        for l in &self.links {
            incoming.entry(l.to).or_default().push(l);
        }
        let mut dist: HashMap<NodeId, f64> = HashMap::new();
        let mut heap = BinaryHeap::new();
        dist.insert(target, 0.0);
        heap.push(Frontier(0.0, target));
        while let Some(Frontier(d, node)) = heap.pop() {
            if d > dist[&node] {
                continue;
            }
            for l in incoming.get(&node).into_iter().flatten() {
                if !(l.length > 0.0) {
                    continue;
                }
                let nd = d + l.length;
                if dist.get(&l.from).is_none_or(|&old| nd < old) {
                    dist.insert(l.from, nd);
                    heap.push(Frontier(nd, l.from));
                }
            }
        }
        dist
    }
}

// Min-heap entry ordered by distance.
#[derive(PartialEq)]
struct Frontier(f64, NodeId);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Convenience constructor for graphs built in code: every pair in `edges`
/// becomes two directed links with consecutive ids `2i` and `2i + 1`.
pub fn paired_graph(
    positions: &[(f64, f64)],
    edges: &[(NodeId, NodeId)],
    routes: Vec<RouteRecord>,
) -> Result<NetworkGraph, GraphError> {
    let mut endpoints = HashSet::new();
    let mut links = Vec::with_capacity(edges.len() * 2);
    for (i, &(a, b)) in edges.iter().enumerate() {
        links.push(LinkRecord {
            id: 2 * i as LinkId,
            from: a,
            to: b,
        });
        links.push(LinkRecord {
            id: 2 * i as LinkId + 1,
            from: b,
            to: a,
        });
    }
    for r in &routes {
        if let (Some(first), Some(last)) = (r.links.first(), r.links.last()) {
            if let (Some(f), Some(l)) = (links.get(*first as usize), links.get(*last as usize)) {
                endpoints.insert(f.from);
                endpoints.insert(l.to);
            }
        }
    }
    let nodes = positions
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let id = i as NodeId;
            Node {
                id,
                position: Point2::new(x, y),
                is_origin: endpoints.contains(&id),
                is_destination: endpoints.contains(&id),
            }
        })
        .collect();
    NetworkGraph::new(nodes, links, routes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node() -> NetworkGraph {
        paired_graph(&[(0.0, 0.0), (50.0, 0.0)], &[(0, 1)], vec![]).unwrap()
    }

    #[test]
    fn minimal_pair_is_valid() {
        let g = two_node();
        assert!(g.validate().is_empty());
        assert_eq!(g.link(0).unwrap().length, 50.0);
        assert_eq!(g.reverse_of(0), Some(1));
        assert_eq!(g.reverse_of(1), Some(0));
    }

    #[test]
    fn missing_reverse_is_reported_once() {
        let nodes = vec![
            Node {
                id: 0,
                position: Point2::new(0.0, 0.0),
                is_origin: false,
                is_destination: false,
            },
            Node {
                id: 1,
                position: Point2::new(10.0, 0.0),
                is_origin: false,
                is_destination: false,
            },
        ];
        let g = NetworkGraph::new(
            nodes,
            vec![LinkRecord {
                id: 7,
                from: 0,
                to: 1,
            }],
            vec![],
        )
        .unwrap();
        assert_eq!(
            g.validate(),
            vec![Violation::MissingReverse {
                link: 7,
                from: 0,
                to: 1
            }]
        );
    }

    #[test]
    fn benchmark_graph_shape() {
        let g = NetworkGraph::benchmark();
        assert_eq!(g.nodes().len(), 27);
        assert_eq!(g.links().len(), 74);
        assert!(g.validate().is_empty());
        for l in g.links() {
            assert!((30.0..=150.0).contains(&l.length), "link {} = {}", l.id, l.length);
        }
        let active = g.link_rates().values().filter(|&&r| r > 0.0).count();
        assert_eq!(active, 34);
    }

    #[test]
    fn structural_violations_are_collected() {
        let nodes = vec![
            Node {
                id: 0,
                position: Point2::new(0.0, 0.0),
                is_origin: true,
                is_destination: false,
            },
            Node {
                id: 0,
                position: Point2::new(f64::NAN, 0.0),
                is_origin: false,
                is_destination: false,
            },
        ];
        let links = vec![
            LinkRecord { id: 1, from: 0, to: 0 },
            LinkRecord { id: 2, from: 0, to: 9 },
        ];
        let g = NetworkGraph::new(nodes, links, vec![]).unwrap();
        let report = g.validate();
        assert!(report.contains(&Violation::DuplicateNode(0)));
        assert!(report.contains(&Violation::NonFinitePosition(0)));
        assert!(report.contains(&Violation::SelfLoop(1)));
        assert!(report.contains(&Violation::MissingEndpoint { link: 2, node: 9 }));
    }

    #[test]
    fn route_checks() {
        // square 0-1-2-3 with a diagonal 0-2
        let pos = [(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)];
        let edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)];
        let routes = vec![
            // 0 -> 1 -> 2 is longer than the diagonal (link 8)
            RouteRecord { id: 0, links: vec![0, 2], rate_per_min: 1.0 },
            // 0 -> 1 then 2 -> 3: disconnected
            RouteRecord { id: 1, links: vec![0, 4], rate_per_min: 1.0 },
            RouteRecord { id: 2, links: vec![8], rate_per_min: -1.0 },
        ];
        let g = paired_graph(&pos, &edges, routes).unwrap();
        let report = g.validate();
        assert!(report.iter().any(|v| matches!(v, Violation::NotMinimal { route: 0, .. })));
        assert!(report.contains(&Violation::DisconnectedRoute { route: 1, position: 1 }));
        assert!(report.iter().any(|v| matches!(v, Violation::InvalidRate { route: 2, .. })));
        assert!(!report.iter().any(|v| matches!(v, Violation::NotMinimal { route: 2, .. })));
    }

    #[test]
    fn shared_link_rates_add() {
        let pos = [(0.0, 0.0), (10.0, 0.0), (20.0, 1.0)];
        let routes = vec![
            RouteRecord { id: 0, links: vec![0], rate_per_min: 1.0 },
            RouteRecord { id: 1, links: vec![0, 2], rate_per_min: 2.0 },
        ];
        let g = paired_graph(&pos, &[(0, 1), (1, 2)], routes).unwrap();
        let rates = g.link_rates();
        assert_eq!(rates[&0], 3.0);
        assert_eq!(rates[&2], 2.0);
        assert_eq!(rates[&1], 0.0);
        assert_eq!(rates[&3], 0.0);
    }

    #[test]
    fn shortest_route_edge_cases() {
        let g = two_node();
        assert_eq!(g.shortest_route(0, 0), Ok(vec![]));
        assert_eq!(g.shortest_route(0, 1), Ok(vec![0]));
        assert_eq!(g.shortest_route(0, 5), Err(RouteError::UnknownNode(5)));

        let g = paired_graph(
            &[(0.0, 0.0), (1.0, 0.0), (5.0, 5.0), (6.0, 5.0)],
            &[(0, 1), (2, 3)],
            vec![],
        )
        .unwrap();
        assert_eq!(
            g.shortest_route(0, 3),
            Err(RouteError::NoPath {
                origin: 0,
                destination: 3
            })
        );
    }

    #[test]
    fn ties_prefer_lowest_link_ids() {
        // diamond 0 -> {1, 2} -> 3, both branches equally long
        let pos = [(0.0, 0.0), (10.0, 10.0), (10.0, -10.0), (20.0, 0.0)];
        let edges = [(0, 2), (0, 1), (2, 3), (1, 3)];
        let g = paired_graph(&pos, &edges, vec![]).unwrap();
        // via node 2 uses links [0, 4], via node 1 uses [2, 6]
        assert_eq!(g.shortest_route(0, 3).unwrap(), vec![0, 4]);
    }

    #[test]
    fn parse_rejects_unknown_keys() {
        let err = NetworkGraph::from_json(r#"{"nodes": [], "links": [], "extra": 1}"#).unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn json_round_trip() {
        let g = NetworkGraph::benchmark();
        let again = NetworkGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(again.to_file(), g.to_file());
    }
}
