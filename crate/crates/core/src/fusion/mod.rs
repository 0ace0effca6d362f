//! Camera/LIDAR detection fusion for pedestrian classification.
//!
//! LIDAR clusters carry ids and map-frame positions; camera detections arrive
//! as three bearing vectors (left edge, middle, right edge). Every detection
//! hands out score to the clusters near its middle vector:
//!
//! - distributed fusion (DF) gives each gated cluster `exp(-d²/2σ)`, where
//!   `d` sums the absolute angular distances from the cluster bearing to the
//!   three vectors;
//! - maximum-likelihood fusion (MLF) gives a single unit hit to the
//!   best-aligned cluster.
//!
//! Clusters whose accumulated score reaches a threshold are labelled
//! pedestrians. Sweeping the threshold over a labelled corpus yields a ROC
//! curve.

mod corpus;
mod roc;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{angle_between, Point2};

pub use corpus::{generate_detection_corpus, CorpusConfig, DetectionCorpus};
pub use roc::{
    dominance, interpolate_hit_rate, roc_curve, roc_sweep, write_roc_csv, Dominance, RocPoint,
    ROC_HEADER,
};

pub type ClusterId = u32;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("sigma must be positive and finite, got {0}")]
    NonPositiveSigma(f64),
    #[error("alignment distance must be non-negative, got {0}")]
    NegativeDistance(f64),
    #[error("gate must lie in (0, π], got {0}")]
    BadGate(f64),
    #[error("threshold must be non-negative, got {0}")]
    NegativeThreshold(f64),
    #[error("corpus duration must be positive, got {0} s")]
    ZeroDuration(f64),
    #[error("invalid corpus config: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackLabel {
    Pedestrian,
    Clutter,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackSample {
    pub time: f64,
    pub position: Point2,
}

/// A LIDAR cluster followed over time. The label is ground truth and is
/// never read by the scorers.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterTrack {
    pub id: ClusterId,
    pub samples: Vec<TrackSample>,
    pub truth: TrackLabel,
}

/// One camera detection projected into the map frame. Angles in radians,
/// `left <= middle <= right`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBoxVectorSet {
    pub time: f64,
    pub camera: u32,
    pub left: f64,
    pub middle: f64,
    pub right: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusterFix {
    pub id: ClusterId,
    pub position: Point2,
}

/// Everything seen at one instant.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Frame {
    pub time: f64,
    pub observer: Point2,
    pub clusters: Vec<ClusterFix>,
    pub detections: Vec<BBoxVectorSet>,
    /// Generator ground truth: the cluster each detection came from, if any.
    /// Empty for corpora read from disk.
    pub sources: Vec<Option<ClusterId>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Df,
    Mlf,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Df => "df",
            Method::Mlf => "mlf",
        }
    }
}

/// Which gated clusters take part in DF scoring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assignment {
    AllInGate,
    /// Only the best-aligned cluster (MLF's choice) is scored.
    WinnerTakeAll,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionParams {
    /// Variance of the alignment kernel, rad².
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Largest middle-vector distance at which a cluster is scored, rad.
    #[serde(default = "default_gate")]
    pub gate: f64,
    #[serde(default = "default_assignment")]
    pub assignment: Assignment,
}

fn default_sigma() -> f64 {
    2f64.to_radians().powi(2)
}
fn default_gate() -> f64 {
    10f64.to_radians()
}
fn default_assignment() -> Assignment {
    Assignment::AllInGate
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            sigma: default_sigma(),
            gate: default_gate(),
            assignment: default_assignment(),
        }
    }
}

impl FusionParams {
    /// Kernel that reaches `e⁻¹` when the middle vector of a narrow box is
    /// `deg` off the cluster. All three vectors then sit about `deg` away,
    /// so `d ≈ 3·deg` and `σ = (3·deg)² / 2`.
    pub fn for_misalignment(deg: f64) -> Self {
        Self {
            sigma: (3.0 * deg.to_radians()).powi(2) / 2.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(FusionError::NonPositiveSigma(self.sigma));
        }
        if !(self.gate > 0.0 && self.gate <= std::f64::consts::PI) {
            return Err(FusionError::BadGate(self.gate));
        }
        Ok(())
    }
}

/// `h = exp(-d² / 2σ)`.
pub fn partial_hit(d: f64, sigma: f64) -> Result<f64, FusionError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(FusionError::NonPositiveSigma(sigma));
    }
    if !(d >= 0.0) {
        return Err(FusionError::NegativeDistance(d));
    }
    Ok((-d * d / (2.0 * sigma)).exp())
}

/// Sum of absolute angular distances from `bearing` to the three vectors.
pub fn alignment_distance(bearing: f64, det: &BBoxVectorSet) -> f64 {
    angle_between(bearing, det.left) + angle_between(bearing, det.middle) + angle_between(bearing, det.right)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HitEvent {
    pub time: f64,
    pub cluster: ClusterId,
    /// Alignment distance, rad.
    pub d: f64,
    /// Score added, in `[0, 1]`.
    pub h: f64,
}

/// Accumulated hit scores per cluster. Totals only grow.
#[derive(Clone, Debug, PartialEq)]
pub struct HitLedger {
    params: FusionParams,
    totals: BTreeMap<ClusterId, f64>,
    events: Vec<HitEvent>,
}

impl HitLedger {
    pub fn new(params: FusionParams) -> Result<Self, FusionError> {
        params.validate()?;
        Ok(Self {
            params,
            totals: BTreeMap::new(),
            events: Vec::new(),
        })
    }

    pub fn params(&self) -> &FusionParams {
        &self.params
    }

    pub fn sigma(&self) -> f64 {
        self.params.sigma
    }

    pub fn total(&self, id: ClusterId) -> Option<f64> {
        self.totals.get(&id).copied()
    }

    pub fn totals(&self) -> &BTreeMap<ClusterId, f64> {
        &self.totals
    }

    pub fn events(&self) -> &[HitEvent] {
        &self.events
    }

    fn add(&mut self, time: f64, cluster: ClusterId, d: f64, h: f64) {
        *self.totals.entry(cluster).or_insert(0.0) += h;
        self.events.push(HitEvent { time, cluster, d, h });
    }

    /// Clusters within the gate of `det`, with bearings from the observer,
    /// in frame order.
    fn gated<'a>(&self, frame: &'a Frame, det: &'a BBoxVectorSet) -> impl Iterator<Item = (ClusterId, f64)> + 'a {
        let gate = self.params.gate;
        frame.clusters.iter().filter_map(move |c| {
            let bearing = frame.observer.bearing_to(c.position);
            (angle_between(bearing, det.middle) <= gate).then(|| (c.id, alignment_distance(bearing, det)))
        })
    }
}

/// Best-aligned candidate; ties go to the lowest id.
fn argmin(candidates: impl Iterator<Item = (ClusterId, f64)>) -> Option<(ClusterId, f64)> {
    candidates.min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
}

/// Distributed fusion over one frame.
pub fn score_frame_df(frame: &Frame, ledger: &mut HitLedger) {
    let sigma = ledger.params.sigma;
    for det in &frame.detections {
        let gated: Vec<(ClusterId, f64)> = match ledger.params.assignment {
            Assignment::AllInGate => ledger.gated(frame, det).collect(),
            Assignment::WinnerTakeAll => argmin(ledger.gated(frame, det)).into_iter().collect(),
        };
        for (id, d) in gated {
            let h = (-d * d / (2.0 * sigma)).exp();
            ledger.add(frame.time, id, d, h);
        }
    }
}

/// Maximum-likelihood fusion over one frame: one unit hit per detection.
pub fn score_frame_mlf(frame: &Frame, ledger: &mut HitLedger) {
    for det in &frame.detections {
        if let Some((id, d)) = argmin(ledger.gated(frame, det)) {
            ledger.add(frame.time, id, d, 1.0);
        }
    }
}

pub fn score_frame(method: Method, frame: &Frame, ledger: &mut HitLedger) {
    match method {
        Method::Df => score_frame_df(frame, ledger),
        Method::Mlf => score_frame_mlf(frame, ledger),
    }
}

/// Folds every frame, in time order, into a fresh ledger.
pub fn score_frames(frames: &[Frame], method: Method, params: FusionParams) -> Result<HitLedger, FusionError> {
    let mut ledger = HitLedger::new(params)?;
    let mut order: Vec<&Frame> = frames.iter().collect();
    order.sort_by(|a, b| a.time.total_cmp(&b.time));
    for f in order {
        score_frame(method, f, &mut ledger);
    }
    Ok(ledger)
}

/// Clusters whose total has reached `threshold`.
pub fn classify(ledger: &HitLedger, threshold: f64) -> Result<BTreeSet<ClusterId>, FusionError> {
    if !(threshold >= 0.0) {
        return Err(FusionError::NegativeThreshold(threshold));
    }
    Ok(ledger
        .totals
        .iter()
        .filter(|(_, &t)| t >= threshold)
        .map(|(&id, _)| id)
        .collect())
}
