use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geom::Point2;
use crate::network::{LinkId, NetworkGraph, NodeId};

use super::SimError;

/// Where the sensing vehicle begins a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum VehicleStart {
    /// At a node; the first link is chosen by the traversal policy.
    Node(NodeId),
    /// Part way along a link.
    OnLink { link: LinkId, offset: f64 },
}

impl Default for VehicleStart {
    fn default() -> Self {
        VehicleStart::Node(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VehicleState {
    pub position: Point2,
    /// Radians, map frame.
    pub heading: f64,
    /// m/s, constant within a run.
    pub speed: f64,
    pub link: LinkId,
    /// Distance from the origin node of `link`, meters.
    pub offset: f64,
    pub visits: BTreeMap<LinkId, u64>,
}

impl VehicleState {
    /// Places the vehicle and records the first traversal.
    pub fn start(graph: &NetworkGraph, start: VehicleStart, speed: f64) -> Result<Self, SimError> {
        let (link, offset) = match start {
            VehicleStart::Node(node) => {
                if graph.node(node).is_none() {
                    return Err(SimError::UnknownNode(node));
                }
                let visits = BTreeMap::new();
                (pick_least_visited(graph, node, None, &visits)?, 0.0)
            }
            VehicleStart::OnLink { link, offset } => {
                let l = graph.link(link).ok_or(SimError::UnknownLink(link))?;
                (link, offset.clamp(0.0, l.length))
            }
        };
        let mut v = Self {
            position: Point2::default(),
            heading: 0.0,
            speed,
            link,
            offset,
            visits: graph.links().iter().map(|l| (l.id, 0)).collect(),
        };
        *v.visits.entry(link).or_default() += 1;
        v.update_pose(graph);
        Ok(v)
    }

    fn update_pose(&mut self, graph: &NetworkGraph) {
        let (a, b) = graph.link_endpoints(self.link).expect("vehicle link exists");
        let len = a.distance(b);
        let dir = Point2::new((b.x - a.x) / len, (b.y - a.y) / len);
        self.position = a.add_scaled(dir, self.offset);
        self.heading = dir.y.atan2(dir.x);
    }

    /// Moves `speed·dt` along the network, applying the traversal policy at
    /// every node reached. Returns `(seconds into the step, link)` for each
    /// traversal started during the step.
    pub fn advance(&mut self, graph: &NetworkGraph, dt: f64) -> Result<Vec<(f64, LinkId)>, SimError> {
        let mut started = Vec::new();
        if self.speed <= 0.0 {
            return Ok(started);
        }
        let mut remaining = self.speed * dt;
        loop {
            let len = graph.link(self.link).expect("vehicle link exists").length;
            let to_end = len - self.offset;
            if remaining <= to_end {
                self.offset += remaining;
                break;
            }
            remaining -= to_end;
            let elapsed = dt - remaining / self.speed;
            let next = next_link_policy(self, graph)?;
            *self.visits.entry(next).or_default() += 1;
            self.link = next;
            self.offset = 0.0;
            started.push((elapsed, next));
        }
        self.update_pose(graph);
        Ok(started)
    }
}

/// Chooses the outgoing link at the end of the vehicle's current link with
/// the fewest previous visits, lowest link id on ties. Turning straight back
/// onto the reverse link is only allowed when nothing else leaves the node.
pub fn next_link_policy(vehicle: &VehicleState, graph: &NetworkGraph) -> Result<LinkId, SimError> {
    let current = graph
        .link(vehicle.link)
        .ok_or(SimError::UnknownLink(vehicle.link))?;
    pick_least_visited(graph, current.to, Some(vehicle.link), &vehicle.visits)
}

fn pick_least_visited(
    graph: &NetworkGraph,
    node: NodeId,
    arrived_by: Option<LinkId>,
    visits: &BTreeMap<LinkId, u64>,
) -> Result<LinkId, SimError> {
    let outgoing = graph.outgoing(node);
    let back = arrived_by.and_then(|l| graph.reverse_of(l));
    let count = |id: &LinkId| visits.get(id).copied().unwrap_or(0);
    // outgoing is sorted, so min_by_key keeps the lowest id among ties
    outgoing
        .iter()
        .filter(|&&id| Some(id) != back)
        .min_by_key(|id| count(id))
        .or_else(|| outgoing.first())
        .copied()
        .ok_or(SimError::DeadEnd(node))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::paired_graph;

    fn ring(n: usize) -> NetworkGraph {
        let pos: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                (50.0 * a.cos(), 50.0 * a.sin())
            })
            .collect();
        let edges: Vec<(u32, u32)> = (0..n as u32).map(|i| (i, (i + 1) % n as u32)).collect();
        paired_graph(&pos, &edges, vec![]).unwrap()
    }

    fn at_end_of(graph: &NetworkGraph, link: LinkId, visits: &[(LinkId, u64)]) -> VehicleState {
        let mut v = VehicleState::start(graph, VehicleStart::OnLink { link, offset: 0.0 }, 1.0).unwrap();
        for (l, c) in visits {
            v.visits.insert(*l, *c);
        }
        v
    }

    #[test]
    fn unique_minimum_wins() {
        // star: node 0 in the middle, three spokes
        let g = paired_graph(
            &[(0.0, 0.0), (-40.0, 0.0), (40.0, 10.0), (40.0, -10.0)],
            &[(1, 0), (0, 2), (0, 3)],
            vec![],
        )
        .unwrap();
        // arrive at node 0 via link 0 (1 -> 0); options 2 (0->2) and 4 (0->3)
        let v = at_end_of(&g, 0, &[(2, 0), (4, 3)]);
        assert_eq!(next_link_policy(&v, &g).unwrap(), 2);
        let v = at_end_of(&g, 0, &[(2, 3), (4, 0)]);
        assert_eq!(next_link_policy(&v, &g).unwrap(), 4);
        let v = at_end_of(&g, 0, &[(2, 2), (4, 2)]);
        assert_eq!(next_link_policy(&v, &g).unwrap(), 2);
        // reverse link 1 (0 -> 1) is never chosen while others exist
        let v = at_end_of(&g, 0, &[(1, 0), (2, 5), (4, 5)]);
        assert_eq!(next_link_policy(&v, &g).unwrap(), 2);
    }

    #[test]
    fn dead_end_turns_back() {
        let g = paired_graph(&[(0.0, 0.0), (30.0, 0.0)], &[(0, 1)], vec![]).unwrap();
        let v = at_end_of(&g, 0, &[]);
        assert_eq!(next_link_policy(&v, &g).unwrap(), 1);
    }

    #[test]
    fn advance_crosses_nodes_exactly() {
        let g = paired_graph(&[(0.0, 0.0), (10.0, 0.0)], &[(0, 1)], vec![]).unwrap();
        let mut v = VehicleState::start(&g, VehicleStart::OnLink { link: 0, offset: 8.0 }, 4.0).unwrap();
        let started = v.advance(&g, 1.0).unwrap();
        assert_eq!(started, vec![(0.5, 1)]);
        assert!((v.offset - 2.0).abs() < 1e-12);
        assert!((v.position.x - 8.0).abs() < 1e-12);
        assert!((v.heading - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn ring_visits_stay_balanced() {
        // No U-turns on a ring, so the vehicle circulates one way; balance is
        // measured per street (both directions of a link pair together).
        let g = ring(4);
        let mut v = VehicleState::start(&g, VehicleStart::Node(0), 5.0).unwrap();
        let mut cycles = 0;
        for _ in 0..20_000 {
            let started = v.advance(&g, 0.5).unwrap();
            let street = |i: u32| v.visits[&(2 * i)] + v.visits[&(2 * i + 1)];
            let counts: Vec<u64> = (0..4).map(street).collect();
            let max = counts.iter().max().unwrap();
            let min = counts.iter().min().unwrap();
            assert!(max - min <= 1, "{counts:?}");
            if started.iter().any(|&(_, l)| l / 2 == 0) {
                cycles += 1;
            }
        }
        assert!(cycles > 100);
    }
}
