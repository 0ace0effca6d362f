use crate::network::LinkId;

use super::{estimate_rate, EstimatorConfig, EstimatorError, ObservationWindow, RateOutcome};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfilePoint {
    pub eval_time: f64,
    pub outcome: RateOutcome,
    /// The averaging window ran past the start or end of the data.
    pub shortened: bool,
}

/// Moving-average rate profile: at each evaluation time, pools the windows
/// whose snapshot time lies within half the averaging window on either side.
/// `span` is the time range covered by the data.
pub fn rate_profile(
    link: LinkId,
    windows: &[ObservationWindow],
    eval_times: &[f64],
    span: (f64, f64),
    config: &EstimatorConfig,
) -> Result<Vec<ProfilePoint>, EstimatorError> {
    if !(config.window_s > 0.0) {
        return Err(EstimatorError::NonPositivePeriod(config.window_s));
    }
    let half = 0.5 * config.window_s;
    let mut sorted: Vec<ObservationWindow> = windows.iter().filter(|w| w.link == link).copied().collect();
    sorted.sort_by(|a, b| a.time.total_cmp(&b.time));
    eval_times
        .iter()
        .map(|&t| {
            let lo = sorted.partition_point(|w| w.time < t - half);
            let hi = sorted.partition_point(|w| w.time <= t + half);
            let mut outcome = estimate_rate(link, &sorted[lo..hi], config)?;
            match &mut outcome {
                RateOutcome::Estimate(e) => e.eval_time = Some(t),
                RateOutcome::NoData { eval_time, .. } => *eval_time = Some(t),
            }
            Ok(ProfilePoint {
                eval_time: t,
                outcome,
                shortened: t - half < span.0 || t + half > span.1,
            })
        })
        .collect()
}

/// Evaluation grid `start, start + step, ...` up to and including `end`.
pub fn eval_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(time: f64, count: u64) -> ObservationWindow {
        ObservationWindow {
            link: 0,
            count,
            t1: time - 10.0,
            t2: time,
            speed: 1.5,
            time,
        }
    }

    #[test]
    fn gaps_and_shortened_windows() {
        let cfg = EstimatorConfig {
            window_s: 100.0,
            ..EstimatorConfig::default()
        };
        let windows = [w(10.0, 1), w(20.0, 0), w(400.0, 2)];
        let p = rate_profile(0, &windows, &[0.0, 200.0, 400.0], (0.0, 420.0), &cfg).unwrap();
        assert!(p[0].shortened);
        let e = p[0].outcome.estimate().unwrap();
        assert_eq!((e.counts, e.period_s, e.eval_time), (1, 20.0, Some(0.0)));
        assert_eq!(
            p[1].outcome,
            RateOutcome::NoData {
                link: 0,
                eval_time: Some(200.0)
            }
        );
        assert!(!p[1].shortened);
        assert!(p[2].shortened);
        assert_eq!(p[2].outcome.estimate().unwrap().counts, 2);
    }

    #[test]
    fn window_edges_are_inclusive() {
        let cfg = EstimatorConfig {
            window_s: 20.0,
            ..EstimatorConfig::default()
        };
        let p = rate_profile(0, &[w(90.0, 1), w(110.0, 1)], &[100.0], (0.0, 1000.0), &cfg).unwrap();
        assert_eq!(p[0].outcome.estimate().unwrap().counts, 2);
    }

    #[test]
    fn grid() {
        assert_eq!(eval_grid(0.0, 180.0, 60.0), vec![0.0, 60.0, 120.0, 180.0]);
        assert_eq!(eval_grid(0.0, 170.0, 60.0), vec![0.0, 60.0, 120.0]);
    }
}
