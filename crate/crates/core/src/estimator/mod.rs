//! Moving-observer arrival-rate estimation.
//!
//! Each sensing snapshot of a link is projected back to a window of arrival
//! times at the link origin. Windows whose projected intervals overlap an
//! earlier accepted one are discarded, and the remaining counts and periods
//! are pooled into a Poisson MLE with exact χ² confidence bounds.

mod observer;
mod output;
mod profile;
mod rate;
mod window;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use observer::MovingObserver;
pub use output::{write_estimates_csv, write_profile_csv, ESTIMATE_HEADER, PROFILE_HEADER};
pub use profile::{eval_grid, rate_profile, ProfilePoint};
pub use rate::{
    estimate_rate, link_arrival_times, poisson_estimate, stationary_counter, RateEstimate,
    RateOutcome,
};
pub use window::{
    space_mean_speed, window_from_snapshot, IndependenceLedger, ObservationWindow, OVERLAP_EPS,
};

use crate::network::RouteId;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("no speeds to average")]
    NoSpeeds,
    #[error("speeds must be positive, got {0}")]
    NonPositiveSpeed(f64),
    #[error("window bounds must satisfy x1 > x2 >= 0, got x1={x1}, x2={x2}")]
    BadBounds { x1: f64, x2: f64 },
    #[error("observation period must be positive, got {0}")]
    NonPositivePeriod(f64),
    #[error("alpha must lie in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error("fallback speed must be positive, got {0}")]
    BadFallback(f64),
    #[error("arrival references unknown route {0}")]
    UnknownRoute(RouteId),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Two-sided significance; 0.1 gives 90% intervals.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Speed assumed for snapshots with nobody visible, m/s.
    #[serde(default = "default_fallback")]
    pub fallback_speed: f64,
    /// Width of the moving-average window for profiles, seconds.
    #[serde(default = "default_window")]
    pub window_s: f64,
}

fn default_alpha() -> f64 {
    0.1
}
fn default_fallback() -> f64 {
    1.5
}
fn default_window() -> f64 {
    600.0
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            fallback_speed: default_fallback(),
            window_s: default_window(),
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(EstimatorError::BadAlpha(self.alpha));
        }
        if !(self.fallback_speed > 0.0 && self.fallback_speed.is_finite()) {
            return Err(EstimatorError::BadFallback(self.fallback_speed));
        }
        if !(self.window_s > 0.0) {
            return Err(EstimatorError::NonPositivePeriod(self.window_s));
        }
        Ok(())
    }
}
