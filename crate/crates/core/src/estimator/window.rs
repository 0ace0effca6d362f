use std::collections::BTreeMap;

use crate::network::LinkId;
use crate::simkit::SensingSnapshot;

use super::{EstimatorConfig, EstimatorError};

/// Overlap below this many seconds is treated as touching endpoints.
pub const OVERLAP_EPS: f64 = 1e-9;

/// One moving-observer measurement: `count` pedestrians that entered `link`
/// during the projected interval `[t1, t2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservationWindow {
    pub link: LinkId,
    pub count: u64,
    pub t1: f64,
    pub t2: f64,
    /// Speed used for the projection, m/s.
    pub speed: f64,
    /// Time of the snapshot the window was projected from.
    pub time: f64,
}

impl ObservationWindow {
    /// Projected period `t2 - t1`, seconds.
    pub fn tau(&self) -> f64 {
        self.t2 - self.t1
    }
}

/// Harmonic mean of the observed speeds.
pub fn space_mean_speed(speeds: &[f64]) -> Result<f64, EstimatorError> {
    if speeds.is_empty() {
        return Err(EstimatorError::NoSpeeds);
    }
    let mut inv = 0.0;
    for &v in speeds {
        if !(v > 0.0 && v.is_finite()) {
            return Err(EstimatorError::NonPositiveSpeed(v));
        }
        inv += 1.0 / v;
    }
    Ok(speeds.len() as f64 / inv)
}

/// Projects a snapshot back to the link origin:
/// `t1 = t - x1/v`, `t2 = t - x2/v`, with `v` the space-mean speed of the
/// visible pedestrians or the fallback speed when none are visible.
pub fn window_from_snapshot(
    snapshot: &SensingSnapshot,
    config: &EstimatorConfig,
) -> Result<ObservationWindow, EstimatorError> {
    if !(snapshot.x1 > snapshot.x2 && snapshot.x2 >= 0.0) {
        return Err(EstimatorError::BadBounds {
            x1: snapshot.x1,
            x2: snapshot.x2,
        });
    }
    let speed = if snapshot.pedestrians.is_empty() {
        config.fallback_speed
    } else {
        let speeds: Vec<f64> = snapshot.pedestrians.iter().map(|p| p.speed).collect();
        space_mean_speed(&speeds)?
    };
    Ok(ObservationWindow {
        link: snapshot.link,
        count: snapshot.pedestrians.len() as u64,
        t1: snapshot.time - snapshot.x1 / speed,
        t2: snapshot.time - snapshot.x2 / speed,
        speed,
        time: snapshot.time,
    })
}

/// Accepted projected intervals per link. Every interval kept for a link has
/// an interior disjoint from all others on that link.
#[derive(Clone, Debug, Default)]
pub struct IndependenceLedger {
    // sorted by start time
    accepted: BTreeMap<LinkId, Vec<(f64, f64)>>,
}

impl IndependenceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Accepts the window and records it iff its interval does not overlap
    /// any interval already accepted for the same link. Shared endpoints are
    /// not an overlap.
    pub fn accept_if_independent(&mut self, window: &ObservationWindow) -> bool {
        let (a, b) = (window.t1, window.t2);
        let list = self.accepted.entry(window.link).or_default();
        let pos = list.partition_point(|iv| iv.0 < b);
        for &(c, d) in list[..pos].iter().rev() {
            if overlap(a, b, c, d) > OVERLAP_EPS {
                return false;
            }
            if d < a - 1e-6 {
                break;
            }
        }
        let at = list.partition_point(|iv| iv.0 < a);
        list.insert(at, (a, b));
        true
    }

    pub fn intervals(&self, link: LinkId) -> &[(f64, f64)] {
        self.accepted.get(&link).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn links(&self) -> impl Iterator<Item = LinkId> + '_ {
        self.accepted.keys().copied()
    }

    /// Brute-force check that no two accepted intervals on a link overlap.
    pub fn is_pairwise_disjoint(&self) -> bool {
        self.accepted.values().all(|list| {
            list.iter().enumerate().all(|(i, x)| {
                list[i + 1..]
                    .iter()
                    .all(|y| overlap(x.0, x.1, y.0, y.1) <= OVERLAP_EPS)
            })
        })
    }
}

fn overlap(a: f64, b: f64, c: f64, d: f64) -> f64 {
    b.min(d) - a.max(c)
}
