use std::collections::BTreeSet;
use std::path::Path;

use serde_json::json;

use crate::estimator::{eval_grid, write_estimates_csv, write_profile_csv, EstimatorConfig, MovingObserver, ProfilePoint, RateOutcome};
use crate::eventlog::EventLog;
use crate::network::{LinkId, NetworkGraph};

use super::{ExperimentError, ExperimentSpec, Report};

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayResult {
    /// Whole-log estimate per link.
    pub estimates: Vec<RateOutcome>,
    /// Profile points, link by link.
    pub profiles: Vec<ProfilePoint>,
    /// First and last snapshot times.
    pub span: (f64, f64),
    pub snapshots: usize,
    pub accepted: usize,
    pub rejected: usize,
}

impl ReplayResult {
    pub fn estimates_csv(&self) -> String {
        let mut buf = Vec::new();
        write_estimates_csv(&mut buf, &self.estimates).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn profile_csv(&self) -> String {
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &self.profiles).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn report(&self, spec: &ExperimentSpec) -> Report {
        Report {
            spec: spec.clone(),
            summary: json!({
                "links": self.estimates.len(),
                "links_estimated": self.estimates.iter().filter(|e| e.estimate().is_some()).count(),
                "span_s": [self.span.0, self.span.1],
                "snapshots": self.snapshots,
                "accepted": self.accepted,
                "rejected": self.rejected,
            }),
            tables: vec![
                ("estimates.csv".into(), self.estimates_csv()),
                ("profile.csv".into(), self.profile_csv()),
            ],
        }
    }
}

/// Runs the moving observer over a recorded log. Links come from `graph`
/// when given, else from the snapshots themselves. Profiles are evaluated
/// every `step_s` seconds over the snapshot span.
pub fn estimate_log(
    log: &EventLog,
    graph: Option<&NetworkGraph>,
    config: EstimatorConfig,
    step_s: f64,
) -> Result<ReplayResult, ExperimentError> {
    let mut obs = MovingObserver::new(config)?;
    obs.observe_all(&log.snapshots)?;
    let mut links: BTreeSet<LinkId> = log.snapshots.iter().map(|s| s.link).collect();
    if let Some(g) = graph {
        links.extend(g.links().iter().map(|l| l.id));
    }
    let span = log
        .snapshots
        .iter()
        .fold(None, |acc: Option<(f64, f64)>, s| {
            Some(acc.map_or((s.time, s.time), |(a, b)| (a.min(s.time), b.max(s.time))))
        })
        .unwrap_or((0.0, 0.0));
    let grid = eval_grid(span.0, span.1, step_s);
    let mut estimates = Vec::new();
    let mut profiles = Vec::new();
    for &link in &links {
        estimates.push(obs.estimate(link)?);
        profiles.extend(obs.profile(link, &grid, span)?);
    }
    let accepted = links.iter().map(|&l| obs.accepted(l).len()).sum();
    Ok(ReplayResult {
        estimates,
        profiles,
        span,
        snapshots: log.snapshots.len(),
        accepted,
        rejected: obs.rejected().len(),
    })
}

/// Replays `dir/events.csv`, using `dir/graph.json` for the link list if
/// present.
pub fn replay(dir: &Path, spec: &ExperimentSpec) -> Result<ReplayResult, ExperimentError> {
    spec.estimator.validate()?;
    if !(spec.profile_step_s > 0.0) {
        return Err(ExperimentError::Invalid("profile_step_s must be positive".into()));
    }
    let events = dir.join("events.csv");
    if !events.is_file() {
        return Err(ExperimentError::io(
            &events,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no events.csv"),
        ));
    }
    let log = EventLog::load(&events)?;
    let graph_path = dir.join("graph.json");
    let graph = if graph_path.is_file() {
        Some(NetworkGraph::load(&graph_path)?)
    } else {
        None
    };
    estimate_log(&log, graph.as_ref(), spec.estimator, spec.profile_step_s)
}
