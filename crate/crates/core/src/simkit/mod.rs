//! Fixed-step simulation of pedestrians walking the network and of a single
//! sensing vehicle driving it.
//!
//! A run is fully determined by its [`ScenarioConfig`] (seed included) and
//! produces an [`EventLog`]: route arrivals, link traversals by the vehicle
//! and sensing snapshots. The log is everything the estimator gets to see.

mod arrivals;
mod sensing;
mod vehicle;
mod world;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use arrivals::{generate_arrivals, ArrivalEvent, SpeedModel};
pub use sensing::{sense, SeenPedestrian, SensingRegion, SensingSnapshot, Sensor, MIN_WINDOW_M};
pub use vehicle::{next_link_policy, VehicleStart, VehicleState};
pub use world::{Pedestrian, PedestrianId, PendingArrival, World};

use crate::eventlog::{ArrivalRecord, EventLog, VisitRecord};
use crate::network::{LinkId, NetworkGraph, NodeId, RouteId};

pub const BENCHMARK_GRAPH: &str = "builtin:benchmark_27x74";

// Separate stream for measurement noise so that enabling it leaves the
// arrival process untouched.
const NOISE_STREAM: u64 = 0x05ee_d0f5_e115;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown route {0}")]
    UnknownRoute(RouteId),
    #[error("node {0} has no outgoing links")]
    DeadEnd(NodeId),
    #[error("invalid sensing region {0:?}")]
    InvalidSensing(SensingRegion),
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
}

/// Piecewise-constant multiplier on every route rate, effective from
/// `from_s` until the next step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateStep {
    pub from_s: f64,
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Graph file path, or `builtin:<name>`.
    #[serde(default = "default_graph")]
    pub graph: String,
    #[serde(default)]
    pub pedestrian_speed: SpeedModel,
    /// m/s; zero parks the vehicle.
    #[serde(default = "default_vehicle_speed")]
    pub vehicle_speed: f64,
    #[serde(default)]
    pub vehicle_start: VehicleStart,
    #[serde(default)]
    pub sensing: SensingRegion,
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    #[serde(default = "default_snapshot_hz")]
    pub snapshot_hz: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    /// Std-dev of additive noise on sensed speeds, m/s. Zero reports exact
    /// speeds.
    #[serde(default)]
    pub speed_noise_std: f64,
    #[serde(default)]
    pub rate_schedule: Vec<RateStep>,
}

fn default_graph() -> String {
    BENCHMARK_GRAPH.to_string()
}
fn default_vehicle_speed() -> f64 {
    3.5
}
fn default_duration() -> f64 {
    3600.0
}
fn default_snapshot_hz() -> f64 {
    10.0
}
fn default_dt() -> f64 {
    0.1
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            graph: default_graph(),
            pedestrian_speed: SpeedModel::default(),
            vehicle_speed: default_vehicle_speed(),
            vehicle_start: VehicleStart::default(),
            sensing: SensingRegion::default(),
            duration_s: default_duration(),
            snapshot_hz: default_snapshot_hz(),
            dt: default_dt(),
            seed: 0,
            speed_noise_std: 0.0,
            rate_schedule: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |what: &str| Err(SimError::InvalidConfig(what.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad("duration_s must be positive");
        }
        if !(self.snapshot_hz > 0.0 && self.snapshot_hz.is_finite()) {
            return bad("snapshot_hz must be positive");
        }
        if !(self.vehicle_speed >= 0.0 && self.vehicle_speed.is_finite()) {
            return bad("vehicle_speed must be non-negative");
        }
        let s = &self.pedestrian_speed;
        if !(s.mean > 0.0 && s.std >= 0.0 && s.floor > 0.0 && s.mean.is_finite() && s.std.is_finite()) {
            return bad("pedestrian_speed needs mean > 0, std >= 0, floor > 0");
        }
        if !(self.speed_noise_std >= 0.0) {
            return bad("speed_noise_std must be non-negative");
        }
        if self.rate_schedule.iter().any(|r| !(r.scale >= 0.0) || !r.from_s.is_finite()) {
            return bad("rate_schedule scales must be non-negative");
        }
        self.sensing.validate()
    }

    /// Rate multiplier in effect at time `t`.
    pub fn rate_scale_at(&self, t: f64) -> f64 {
        self.rate_schedule
            .iter()
            .filter(|r| r.from_s <= t)
            .max_by(|a, b| a.from_s.total_cmp(&b.from_s))
            .map_or(1.0, |r| r.scale)
    }

    pub fn steps(&self) -> u64 {
        (self.duration_s / self.dt).round() as u64
    }
}

/// Everything a run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct SimOutput {
    pub log: EventLog,
    /// Final traversal counts per link.
    pub visits: BTreeMap<LinkId, u64>,
    /// Ground-truth link arrival rates at rate scale 1, per minute.
    pub true_link_rates: BTreeMap<LinkId, f64>,
}

/// Seconds of pre-roll needed for the slowest pedestrian to cover the longest
/// route, so the network is in steady state when the vehicle starts.
pub fn warmup_seconds(graph: &NetworkGraph, speeds: &SpeedModel) -> f64 {
    let longest = graph
        .routes()
        .iter()
        .map(|r| graph.path_length(&r.links))
        .fold(0.0, f64::max);
    longest / speeds.min_speed()
}

/// Draws every route's arrivals on `[-warmup, duration)`, sorted by time and
/// numbered in that order.
pub fn schedule_arrivals(graph: &NetworkGraph, cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Vec<PendingArrival> {
    let start = -warmup_seconds(graph, &cfg.pedestrian_speed);
    let end = cfg.duration_s;
    let mut cuts: Vec<f64> = cfg
        .rate_schedule
        .iter()
        .map(|r| r.from_s)
        .filter(|&t| t > start && t < end)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut bounds = vec![start];
    bounds.extend(cuts);
    bounds.push(end);

    let mut routes: Vec<_> = graph.routes().iter().collect();
    routes.sort_by_key(|r| r.id);
    let mut all = Vec::new();
    for r in routes {
        for piece in bounds.windows(2) {
            let rate = r.rate_per_min * cfg.rate_scale_at(piece[0]);
            all.extend(arrivals::poisson_arrivals(
                r.id,
                rate,
                piece[0],
                piece[1],
                &cfg.pedestrian_speed,
                rng,
            ));
        }
    }
    all.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.route.cmp(&b.route)));
    all.into_iter()
        .enumerate()
        .map(|(i, a)| PendingArrival {
            id: i as PedestrianId,
            route: a.route,
            time: a.time,
            speed: a.speed,
        })
        .collect()
}

/// Runs one scenario on an already resolved graph.
pub fn simulate(graph: &NetworkGraph, cfg: &ScenarioConfig) -> Result<SimOutput, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ NOISE_STREAM);
    let noise = (cfg.speed_noise_std > 0.0)
        .then(|| Normal::new(0.0, cfg.speed_noise_std).expect("finite noise"));

    let pending = schedule_arrivals(graph, cfg, &mut rng);
    let record = |a: &PendingArrival| ArrivalRecord {
        time: a.time,
        ped_id: a.id,
        route_id: a.route,
        speed: a.speed,
    };
    let mut log = EventLog::default();
    log.arrivals
        .extend(pending.iter().take_while(|a| a.time <= 0.0).map(record));

    let mut world = World::new(graph, pending, 0.0)?;
    let mut vehicle = VehicleState::start(graph, cfg.vehicle_start, cfg.vehicle_speed)?;
    log.visits.push(VisitRecord {
        time: 0.0,
        link: vehicle.link,
    });
    let sensor = Sensor::new(graph, cfg.sensing)?;
    let per_snapshot = ((1.0 / (cfg.snapshot_hz * cfg.dt)).round() as u64).max(1);

    let mut emit = |snaps: Vec<SensingSnapshot>, log: &mut EventLog| {
        for mut s in snaps {
            if let Some(n) = &noise {
                for p in &mut s.pedestrians {
                    p.speed = (p.speed + n.sample(&mut noise_rng)).max(0.05);
                }
            }
            log.snapshots.push(s);
        }
    };
    emit(sensor.sense(&vehicle, &world), &mut log);

    for k in 1..=cfg.steps() {
        let t_prev = world.time();
        let t = k as f64 * cfg.dt;
        let admitted = world.step_to(t)?;
        log.arrivals.extend(admitted.iter().map(record));
        for (elapsed, link) in vehicle.advance(graph, t - t_prev)? {
            log.visits.push(VisitRecord {
                time: t_prev + elapsed,
                link,
            });
        }
        if k % per_snapshot == 0 {
            emit(sensor.sense(&vehicle, &world), &mut log);
        }
    }

    Ok(SimOutput {
        log,
        visits: vehicle.visits,
        true_link_rates: graph.link_rates(),
    })
}
