use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::geom::{Point2, Sector, BOUNDARY_EPS};
use crate::network::{LinkId, NetworkGraph};

use super::vehicle::VehicleState;
use super::world::{PedestrianId, World};
use super::SimError;

/// Shortest sensed stretch of a link that still yields a snapshot, meters.
pub const MIN_WINDOW_M: f64 = 1e-6;

/// Range and field of view of the onboard sensors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingRegion {
    /// Meters.
    pub range: f64,
    /// Degrees, centered on the vehicle heading.
    pub field_of_view: f64,
}

impl Default for SensingRegion {
    fn default() -> Self {
        Self {
            range: 20.0,
            field_of_view: 160.0,
        }
    }
}

impl SensingRegion {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.range > 0.0) || !(self.field_of_view > 0.0 && self.field_of_view <= 360.0) {
            return Err(SimError::InvalidSensing(*self));
        }
        Ok(())
    }

    pub fn sector(&self, apex: Point2, heading: f64) -> Sector {
        Sector {
            apex,
            heading,
            radius: self.range,
            opening: self.field_of_view.to_radians(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeenPedestrian {
    pub id: PedestrianId,
    /// Distance from the link origin, meters.
    pub position: f64,
    /// m/s.
    pub speed: f64,
}

/// Pedestrians seen on one link at one instant, with the sensed stretch
/// `[x2, x1]` of that link.
#[derive(Clone, Debug, PartialEq)]
pub struct SensingSnapshot {
    pub time: f64,
    pub link: LinkId,
    pub x1: f64,
    pub x2: f64,
    pub pedestrians: Vec<SeenPedestrian>,
}

impl SensingSnapshot {
    /// Length of the sensed stretch, `x1 - x2`.
    pub fn d_obs(&self) -> f64 {
        self.x1 - self.x2
    }
}

#[derive(Clone, Copy, Debug)]
struct LinkGeometry {
    id: LinkId,
    start: Point2,
    dir: Point2,
    length: f64,
}

/// Link geometry cached for repeated sensing against one graph.
#[derive(Clone, Debug)]
pub struct Sensor {
    region: SensingRegion,
    links: Vec<LinkGeometry>,
}

impl Sensor {
    pub fn new(graph: &NetworkGraph, region: SensingRegion) -> Result<Self, SimError> {
        region.validate()?;
        let mut links: Vec<LinkGeometry> = graph
            .links()
            .iter()
            .map(|l| {
                let (a, b) = graph.link_endpoints(l.id).ok_or(SimError::UnknownLink(l.id))?;
                Ok(LinkGeometry {
                    id: l.id,
                    start: a,
                    dir: Point2::new((b.x - a.x) / l.length, (b.y - a.y) / l.length),
                    length: l.length,
                })
            })
            .collect::<Result<_, SimError>>()?;
        links.sort_by_key(|g| g.id);
        Ok(Self { region, links })
    }

    pub fn region(&self) -> SensingRegion {
        self.region
    }

    /// One snapshot per link stretch inside the sensing sector, in link id
    /// order. Pedestrians on the boundary are included.
    pub fn sense(&self, vehicle: &VehicleState, world: &World) -> Vec<SensingSnapshot> {
        let sector = self.region.sector(vehicle.position, vehicle.heading);
        let mut by_link: HashMap<LinkId, Vec<SeenPedestrian>> = HashMap::new();
        for p in world.pedestrians() {
            by_link.entry(p.link).or_default().push(SeenPedestrian {
                id: p.id,
                position: p.offset,
                speed: p.speed,
            });
        }
        let mut out = Vec::new();
        for g in &self.links {
            if segment_distance(vehicle.position, g) > self.region.range + BOUNDARY_EPS {
                continue;
            }
            for (x2, x1) in sector.clip_segment(g.start, g.dir, g.length) {
                if x1 - x2 < MIN_WINDOW_M {
                    continue;
                }
                let pedestrians = by_link
                    .get(&g.id)
                    .map(|peds| {
                        peds.iter()
                            .filter(|p| p.position >= x2 - BOUNDARY_EPS && p.position <= x1 + BOUNDARY_EPS)
                            .copied()
                            .collect()
                    })
                    .unwrap_or_default();
                out.push(SensingSnapshot {
                    time: world.time(),
                    link: g.id,
                    x1,
                    x2,
                    pedestrians,
                });
            }
        }
        out
    }
}

fn segment_distance(p: Point2, g: &LinkGeometry) -> f64 {
    let s = (p - g.start).dot(g.dir).clamp(0.0, g.length);
    p.distance(g.start.add_scaled(g.dir, s))
}

/// Senses once against `graph`; see [`Sensor::sense`].
pub fn sense(
    vehicle: &VehicleState,
    world: &World,
    graph: &NetworkGraph,
    region: SensingRegion,
) -> Result<Vec<SensingSnapshot>, SimError> {
    Ok(Sensor::new(graph, region)?.sense(vehicle, world))
}
