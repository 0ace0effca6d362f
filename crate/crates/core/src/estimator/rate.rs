use std::collections::BTreeMap;

use crate::eventlog::ArrivalRecord;
use crate::network::{LinkId, NetworkGraph};
use crate::stats::chi2_quantile;

use super::{EstimatorConfig, EstimatorError, ObservationWindow};

/// Poisson maximum-likelihood rate with its two-sided confidence bounds.
/// Rates are per minute; the totals they came from are kept in raw units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    pub link: LinkId,
    pub lambda_hat: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    /// Total count `N_c`.
    pub counts: u64,
    /// Total observed period `T_c`, seconds.
    pub period_s: f64,
    pub eval_time: Option<f64>,
}

impl RateEstimate {
    pub fn width(&self) -> f64 {
        self.lambda_hi - self.lambda_lo
    }

    pub fn contains(&self, rate_per_min: f64) -> bool {
        self.lambda_lo <= rate_per_min && rate_per_min <= self.lambda_hi
    }
}

/// Result of an estimate over a set of windows. `NoData` means nothing was
/// observed; it is never the same as a zero rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateOutcome {
    Estimate(RateEstimate),
    NoData { link: LinkId, eval_time: Option<f64> },
}

impl RateOutcome {
    pub fn estimate(&self) -> Option<&RateEstimate> {
        match self {
            RateOutcome::Estimate(e) => Some(e),
            RateOutcome::NoData { .. } => None,
        }
    }

    pub fn link(&self) -> LinkId {
        match self {
            RateOutcome::Estimate(e) => e.link,
            RateOutcome::NoData { link, .. } => *link,
        }
    }
}

/// `λ̂ = N/T`, `λ_L = χ²_{α/2}(2N) / 2T`, `λ_U = χ²_{1-α/2}(2N+2) / 2T`,
/// computed in seconds and reported per minute.
pub fn poisson_estimate(
    link: LinkId,
    counts: u64,
    period_s: f64,
    alpha: f64,
) -> Result<RateEstimate, EstimatorError> {
    if !(period_s > 0.0 && period_s.is_finite()) {
        return Err(EstimatorError::NonPositivePeriod(period_s));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EstimatorError::BadAlpha(alpha));
    }
    let n = counts as f64;
    let per_min = 60.0 / period_s;
    Ok(RateEstimate {
        link,
        lambda_hat: n * per_min,
        lambda_lo: 0.5 * chi2_quantile(0.5 * alpha, 2.0 * n) * per_min,
        lambda_hi: 0.5 * chi2_quantile(1.0 - 0.5 * alpha, 2.0 * n + 2.0) * per_min,
        counts,
        period_s,
        eval_time: None,
    })
}

/// Pools accepted windows of one link into a single estimate.
pub fn estimate_rate(
    link: LinkId,
    windows: &[ObservationWindow],
    config: &EstimatorConfig,
) -> Result<RateOutcome, EstimatorError> {
    if windows.is_empty() {
        return Ok(RateOutcome::NoData {
            link,
            eval_time: None,
        });
    }
    let counts = windows.iter().map(|w| w.count).sum();
    let period: f64 = windows.iter().map(ObservationWindow::tau).sum();
    poisson_estimate(link, counts, period, config.alpha).map(RateOutcome::Estimate)
}

/// A fixed counter at the link origin: every arrival in `[start, end)`
/// counts and the whole span is observed.
pub fn stationary_counter(
    link: LinkId,
    arrival_times: &[f64],
    start: f64,
    end: f64,
    alpha: f64,
) -> Result<RateEstimate, EstimatorError> {
    let n = arrival_times.iter().filter(|&&t| t >= start && t < end).count() as u64;
    poisson_estimate(link, n, end - start, alpha)
}

/// Times at which each pedestrian in the arrival log reaches the origin of
/// every link on its route, grouped by link and sorted.
pub fn link_arrival_times(
    graph: &NetworkGraph,
    arrivals: &[ArrivalRecord],
) -> Result<BTreeMap<LinkId, Vec<f64>>, EstimatorError> {
    let mut out: BTreeMap<LinkId, Vec<f64>> = graph.links().iter().map(|l| (l.id, Vec::new())).collect();
    for a in arrivals {
        let route = graph
            .route(a.route_id)
            .ok_or(EstimatorError::UnknownRoute(a.route_id))?;
        let mut walked = 0.0;
        for &id in &route.links {
            out.entry(id).or_default().push(a.time + walked / a.speed);
            walked += graph.link(id).map_or(0.0, |l| l.length);
        }
    }
    for times in out.values_mut() {
        times.sort_by(f64::total_cmp);
    }
    Ok(out)
}
