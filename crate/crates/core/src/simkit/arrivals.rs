use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::network::{Route, RouteId};

/// Normal pedestrian speed distribution, resampled until it clears `floor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedModel {
    pub mean: f64,
    pub std: f64,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_floor() -> f64 {
    0.3
}

impl Default for SpeedModel {
    fn default() -> Self {
        Self {
            mean: 1.5,
            std: 0.4,
            floor: 0.3,
        }
    }
}

impl SpeedModel {
    pub fn constant(speed: f64) -> Self {
        Self {
            mean: speed,
            std: 0.0,
            floor: speed.min(default_floor()),
        }
    }

    /// Lowest speed the model can produce.
    pub fn min_speed(&self) -> f64 {
        if self.std == 0.0 {
            self.mean
        } else {
            self.floor
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.std == 0.0 {
            return self.mean;
        }
        let normal = Normal::new(self.mean, self.std).expect("finite speed model");
        loop {
            let v = normal.sample(rng);
            if v >= self.floor {
                return v;
            }
        }
    }
}

/// A pedestrian entering the network at the origin of its route.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArrivalEvent {
    pub route: RouteId,
    pub time: f64,
    pub speed: f64,
}

/// Poisson arrivals on `[start, end)` for one route at its constant rate.
/// Each arrival carries an independently drawn walking speed.
pub fn generate_arrivals<R: Rng + ?Sized>(
    route: &Route,
    start: f64,
    end: f64,
    speeds: &SpeedModel,
    rng: &mut R,
) -> Vec<ArrivalEvent> {
    poisson_arrivals(route.id, route.rate_per_min, start, end, speeds, rng)
}

pub(crate) fn poisson_arrivals<R: Rng + ?Sized>(
    route: RouteId,
    rate_per_min: f64,
    start: f64,
    end: f64,
    speeds: &SpeedModel,
    rng: &mut R,
) -> Vec<ArrivalEvent> {
    let mut out = Vec::new();
    if !(rate_per_min > 0.0) || end <= start {
        return out;
    }
    let gaps = Exp::new(rate_per_min / 60.0).expect("positive rate");
    let mut t = start;
    loop {
        t += gaps.sample(rng);
        if t >= end {
            break;
        }
        out.push(ArrivalEvent {
            route,
            time: t,
            speed: speeds.sample(rng),
        });
    }
    out
}
