use std::collections::{HashMap, VecDeque};

use crate::network::{LinkId, NetworkGraph, RouteId};

use super::SimError;

pub type PedestrianId = u64;

/// A pedestrian walking its route at constant speed.
#[derive(Clone, Debug, PartialEq)]
pub struct Pedestrian {
    pub id: PedestrianId,
    pub route: RouteId,
    /// Time of arrival at the route origin, seconds.
    pub entry_time: f64,
    /// m/s, strictly positive.
    pub speed: f64,
    /// Index of the current link within the route.
    pub leg: usize,
    pub link: LinkId,
    /// Distance from the origin node of `link`, meters.
    pub offset: f64,
}

/// Scheduled arrival that has not entered the world yet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PendingArrival {
    pub id: PedestrianId,
    pub route: RouteId,
    pub time: f64,
    pub speed: f64,
}

#[derive(Clone, Debug)]
struct RouteLegs {
    links: Vec<LinkId>,
    lengths: Vec<f64>,
}

/// Ground-truth pedestrian state.
#[derive(Clone, Debug)]
pub struct World {
    time: f64,
    pedestrians: Vec<Pedestrian>,
    pending: VecDeque<PendingArrival>,
    legs: HashMap<RouteId, RouteLegs>,
}

impl World {
    /// Creates the world at `time`, placing every arrival with
    /// `entry_time <= time` at its current position. `arrivals` must be sorted
    /// by time.
    pub fn new(
        graph: &NetworkGraph,
        arrivals: Vec<PendingArrival>,
        time: f64,
    ) -> Result<Self, SimError> {
        let mut legs = HashMap::new();
        for r in graph.routes() {
            let lengths = r
                .links
                .iter()
                .map(|&id| graph.link(id).map(|l| l.length).ok_or(SimError::UnknownLink(id)))
                .collect::<Result<Vec<_>, _>>()?;
            legs.insert(
                r.id,
                RouteLegs {
                    links: r.links.clone(),
                    lengths,
                },
            );
        }
        for a in &arrivals {
            if !legs.contains_key(&a.route) {
                return Err(SimError::UnknownRoute(a.route));
            }
        }
        let mut world = Self {
            time,
            pedestrians: Vec::new(),
            pending: arrivals.into(),
            legs,
        };
        world.admit(time);
        Ok(world)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn pedestrians(&self) -> &[Pedestrian] {
        &self.pedestrians
    }

    /// Arrivals not yet in the world.
    pub fn pending(&self) -> impl Iterator<Item = &PendingArrival> {
        self.pending.iter()
    }

    /// Advances every pedestrian by `dt` seconds.
    pub fn step(&mut self, dt: f64) -> Result<Vec<PendingArrival>, SimError> {
        self.step_to(self.time + dt)
    }

    /// Advances to absolute time `t` and returns the arrivals admitted during
    /// the step. Link transitions are resolved exactly: distance left over at
    /// the end of a link carries onto the next route link.
    pub fn step_to(&mut self, t: f64) -> Result<Vec<PendingArrival>, SimError> {
        let dt = t - self.time;
        if !(dt > 0.0) {
            return Err(SimError::NonPositiveStep(dt));
        }
        let legs = &self.legs;
        self.pedestrians.retain_mut(|p| {
            p.offset += p.speed * dt;
            settle(p, &legs[&p.route])
        });
        self.time = t;
        Ok(self.admit(t))
    }

    fn admit(&mut self, t: f64) -> Vec<PendingArrival> {
        let mut admitted = Vec::new();
        while self.pending.front().is_some_and(|a| a.time <= t) {
            let a = self.pending.pop_front().unwrap();
            let legs = &self.legs[&a.route];
            let mut p = Pedestrian {
                id: a.id,
                route: a.route,
                entry_time: a.time,
                speed: a.speed,
                leg: 0,
                link: legs.links[0],
                offset: a.speed * (t - a.time),
            };
            if settle(&mut p, legs) {
                self.pedestrians.push(p);
            }
            admitted.push(a);
        }
        admitted
    }
}

// Carries overflow across link boundaries. Returns false once the pedestrian
// has walked past its destination.
fn settle(p: &mut Pedestrian, legs: &RouteLegs) -> bool {
    while p.offset > legs.lengths[p.leg] {
        p.offset -= legs.lengths[p.leg];
        p.leg += 1;
        if p.leg == legs.links.len() {
            return false;
        }
        p.link = legs.links[p.leg];
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{paired_graph, RouteRecord};

    fn line() -> NetworkGraph {
        paired_graph(
            &[(0.0, 0.0), (10.0, 0.0), (30.0, 0.0)],
            &[(0, 1), (1, 2)],
            vec![RouteRecord {
                id: 0,
                links: vec![0, 2],
                rate_per_min: 1.0,
            }],
        )
        .unwrap()
    }

    fn one(time: f64, speed: f64) -> Vec<PendingArrival> {
        vec![PendingArrival {
            id: 0,
            route: 0,
            time,
            speed,
        }]
    }

    #[test]
    fn constant_speed_kinematics() {
        let g = line();
        let mut w = World::new(&g, one(0.0, 2.0), 0.0).unwrap();
        assert_eq!(w.pedestrians()[0].offset, 0.0);
        w.step(5.0).unwrap();
        assert_eq!(w.pedestrians()[0].offset, 10.0);
        assert_eq!(w.pedestrians()[0].link, 0);
    }

    #[test]
    fn overflow_carries_to_next_link() {
        let g = line();
        let mut w = World::new(&g, one(-4.5, 2.0), 0.0).unwrap();
        assert_eq!(w.pedestrians()[0].offset, 9.0);
        w.step(1.0).unwrap();
        let p = &w.pedestrians()[0];
        assert_eq!((p.link, p.leg), (2, 1));
        assert!((p.offset - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exits_at_destination() {
        let g = line();
        let mut w = World::new(&g, one(0.0, 2.0), 0.0).unwrap();
        w.step(15.0).unwrap();
        assert_eq!(w.pedestrians().len(), 1);
        w.step(0.1).unwrap();
        assert!(w.pedestrians().is_empty());
    }

    #[test]
    fn zero_step_rejected() {
        let g = line();
        let mut w = World::new(&g, vec![], 0.0).unwrap();
        assert!(matches!(w.step(0.0), Err(SimError::NonPositiveStep(_))));
    }

    #[test]
    fn admits_mid_step_arrivals_at_exact_offset() {
        let g = line();
        let mut w = World::new(&g, one(0.25, 2.0), 0.0).unwrap();
        assert!(w.pedestrians().is_empty());
        let admitted = w.step_to(1.0).unwrap();
        assert_eq!(admitted.len(), 1);
        assert!((w.pedestrians()[0].offset - 1.5).abs() < 1e-12);
    }
}
