use std::collections::BTreeMap;

use crate::network::LinkId;
use crate::simkit::SensingSnapshot;

use super::{
    estimate_rate, rate_profile, window_from_snapshot, EstimatorConfig, EstimatorError,
    IndependenceLedger, ObservationWindow, ProfilePoint, RateOutcome,
};

/// Streaming moving-observer pipeline: snapshots in, independent windows
/// kept per link, overlapping ones set aside.
#[derive(Clone, Debug)]
pub struct MovingObserver {
    config: EstimatorConfig,
    ledger: IndependenceLedger,
    accepted: BTreeMap<LinkId, Vec<ObservationWindow>>,
    rejected: Vec<ObservationWindow>,
}

impl MovingObserver {
    pub fn new(config: EstimatorConfig) -> Result<Self, EstimatorError> {
        config.validate()?;
        Ok(Self {
            config,
            ledger: IndependenceLedger::new(),
            accepted: BTreeMap::new(),
            rejected: Vec::new(),
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    /// Projects the snapshot and keeps it if independent. Returns whether
    /// it was accepted.
    pub fn observe(&mut self, snapshot: &SensingSnapshot) -> Result<bool, EstimatorError> {
        let window = window_from_snapshot(snapshot, &self.config)?;
        let ok = self.ledger.accept_if_independent(&window);
        if ok {
            self.accepted.entry(window.link).or_default().push(window);
        } else {
            self.rejected.push(window);
        }
        Ok(ok)
    }

    pub fn observe_all<'a>(
        &mut self,
        snapshots: impl IntoIterator<Item = &'a SensingSnapshot>,
    ) -> Result<(), EstimatorError> {
        for s in snapshots {
            self.observe(s)?;
        }
        Ok(())
    }

    pub fn accepted(&self, link: LinkId) -> &[ObservationWindow] {
        self.accepted.get(&link).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn rejected(&self) -> &[ObservationWindow] {
        &self.rejected
    }

    pub fn ledger(&self) -> &IndependenceLedger {
        &self.ledger
    }

    pub fn estimate(&self, link: LinkId) -> Result<RateOutcome, EstimatorError> {
        estimate_rate(link, self.accepted(link), &self.config)
    }

    /// Whole-run estimate for each of `links`.
    pub fn estimates(
        &self,
        links: impl IntoIterator<Item = LinkId>,
    ) -> Result<BTreeMap<LinkId, RateOutcome>, EstimatorError> {
        links
            .into_iter()
            .map(|l| Ok((l, self.estimate(l)?)))
            .collect()
    }

    pub fn profile(
        &self,
        link: LinkId,
        eval_times: &[f64],
        span: (f64, f64),
    ) -> Result<Vec<ProfilePoint>, EstimatorError> {
        rate_profile(link, self.accepted(link), eval_times, span, &self.config)
    }
}
