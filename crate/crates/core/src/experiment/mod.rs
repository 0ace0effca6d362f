//! Batch experiments: Monte Carlo runs of the simulator and estimator, ROC
//! studies of the fusion scorers, and replay of recorded logs.
//!
//! Every experiment is described by an [`ExperimentSpec`] and returns a
//! typed result that converts into a [`Report`]: a JSON summary that embeds
//! the resolved spec, plus CSV tables. Repetition `i` runs with seed
//! `scenario.seed + i`, so a report's embedded spec reproduces it exactly.

mod monte_carlo;
mod replay;
mod roc;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimator::{EstimatorConfig, EstimatorError};
use crate::eventlog::LogError;
use crate::fusion::{CorpusConfig, FusionError, FusionParams};
use crate::network::{paired_graph, GraphError, LinkId, NetworkGraph, RouteRecord};
use crate::simkit::{ScenarioConfig, SimError, BENCHMARK_GRAPH};

pub use monte_carlo::{
    duration_for_visits, run_full_network, run_pacing, run_parked, run_rate_sweep, run_visits_sweep, FullNetworkResult,
    LinkRun, LinkSummary, PacingResult, PacingRun, ParkedResult, ParkedRun, SweepPoint, SweepResult, SweepRun,
};
pub use replay::{estimate_log, replay, ReplayResult};
pub use roc::{best_hit_at, run_roc, RocResult, OPERATING_POINTS};

/// Triangle with 100 m sides; the target link is 0.
pub const LOOP_GRAPH: &str = "builtin:single_link_loop";
/// One 100 m street.
pub const SINGLE_LINK_GRAPH: &str = "builtin:single_link";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Config {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("simulation: {0}")]
    Sim(#[from] SimError),
    #[error("estimator: {0}")]
    Estimator(#[from] EstimatorError),
    #[error("fusion: {0}")]
    Fusion(#[from] FusionError),
    #[error("log: {0}")]
    Log(#[from] LogError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl ExperimentError {
    /// Bad input files or data, as opposed to a bad configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            ExperimentError::Log(_)
                | ExperimentError::Io { .. }
                | ExperimentError::Fusion(FusionError::Malformed { .. } | FusionError::Csv(_) | FusionError::Io(_))
                | ExperimentError::Graph(GraphError::Invalid(_) | GraphError::Parse { .. } | GraphError::Io { .. })
        )
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    #[default]
    FullNetwork,
    SingleLinkVisitsSweep,
    RateSweep,
    Roc,
    HardwareReplay,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FullNetwork => "full-network",
            ExperimentKind::SingleLinkVisitsSweep => "single-link-visits-sweep",
            ExperimentKind::RateSweep => "rate-sweep",
            ExperimentKind::Roc => "roc",
            ExperimentKind::HardwareReplay => "hardware-replay",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Set by the CLI subcommand when run from there.
    #[serde(default)]
    pub kind: ExperimentKind,
    /// `scenario.seed` is the base seed; `scenario.graph` is replaced by the
    /// loop graph for sweeps unless `graph` is set.
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    /// Overrides the scenario graph.
    #[serde(default)]
    pub graph: Option<String>,
    /// Uniform route rate, per minute.
    #[serde(default = "default_rate")]
    pub rate_per_min: f64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_visits")]
    pub visits: Vec<u32>,
    #[serde(default = "default_rates")]
    pub rates: Vec<f64>,
    #[serde(default = "default_nominal_visits")]
    pub nominal_visits: u32,
    /// Link studied by the sweeps.
    #[serde(default)]
    pub target_link: LinkId,
    #[serde(default)]
    pub corpus: CorpusConfig,
    /// Defaults to a kernel matched to a 2° misalignment.
    #[serde(default)]
    pub fusion: Option<FusionParams>,
    /// Recorded corpus to score instead of generating one per seed.
    #[serde(default)]
    pub corpus_file: Option<PathBuf>,
    #[serde(default = "default_roc_seeds")]
    pub roc_seeds: usize,
    /// Directory holding `events.csv` for replay.
    #[serde(default)]
    pub log_dir: Option<PathBuf>,
    /// Spacing of replay profile points, seconds.
    #[serde(default = "default_profile_step")]
    pub profile_step_s: f64,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
}

fn default_rate() -> f64 {
    1.62
}
fn default_reps() -> usize {
    100
}
fn default_visits() -> Vec<u32> {
    vec![1, 2, 5, 10, 20]
}
fn default_rates() -> Vec<f64> {
    vec![0.5, 1.0, 1.62, 3.0]
}
fn default_nominal_visits() -> u32 {
    10
}
fn default_roc_seeds() -> usize {
    20
}
fn default_profile_step() -> f64 {
    60.0
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            scenario: ScenarioConfig::default(),
            estimator: EstimatorConfig::default(),
            graph: None,
            rate_per_min: default_rate(),
            reps: default_reps(),
            visits: default_visits(),
            rates: default_rates(),
            nominal_visits: default_nominal_visits(),
            target_link: 0,
            corpus: CorpusConfig::default(),
            fusion: None,
            corpus_file: None,
            roc_seeds: default_roc_seeds(),
            log_dir: None,
            profile_step_s: default_profile_step(),
            out_dir: default_out(),
        }
    }

    /// Parses JSON; errors carry the line and column.
    pub fn from_json(text: &str, origin: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| ExperimentError::Config {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Reads a spec file. Relative paths inside it are taken relative to the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        let mut spec = Self::from_json(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new(""));
        spec.rebase(base);
        Ok(spec)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for g in [Some(&mut self.scenario.graph), self.graph.as_mut()].into_iter().flatten() {
            if !g.starts_with("builtin:") && Path::new(g.as_str()).is_relative() {
                *g = base.join(&*g).display().to_string();
            }
        }
        if let Some(p) = self.corpus_file.as_mut() {
            fix(p);
        }
        if let Some(p) = self.log_dir.as_mut() {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Invalid(m.to_string()));
        if self.reps == 0 {
            return bad("reps must be at least 1");
        }
        if !(self.rate_per_min >= 0.0 && self.rate_per_min.is_finite()) {
            return bad("rate_per_min must be non-negative");
        }
        match self.kind {
            ExperimentKind::SingleLinkVisitsSweep if self.visits.is_empty() => return bad("visits must not be empty"),
            ExperimentKind::RateSweep if self.rates.is_empty() => return bad("rates must not be empty"),
            ExperimentKind::RateSweep if self.rates.iter().any(|r| !(*r >= 0.0)) => {
                return bad("rates must be non-negative")
            }
            ExperimentKind::Roc if self.roc_seeds == 0 && self.corpus_file.is_none() => {
                return bad("roc_seeds must be at least 1")
            }
            ExperimentKind::HardwareReplay if self.log_dir.is_none() => return bad("replay needs log_dir"),
            _ => {}
        }
        if !(self.profile_step_s > 0.0) {
            return bad("profile_step_s must be positive");
        }
        self.estimator.validate()?;
        self.scenario.validate()?;
        if let Some(f) = &self.fusion {
            f.validate()?;
        }
        self.corpus.validate()?;
        Ok(())
    }

    pub fn fusion_params(&self) -> FusionParams {
        self.fusion.unwrap_or_else(|| FusionParams::for_misalignment(2.0))
    }

    /// Graph used by this experiment, before rates are applied.
    pub fn graph_name(&self) -> &str {
        match (&self.graph, self.kind) {
            (Some(g), _) => g,
            (None, ExperimentKind::SingleLinkVisitsSweep | ExperimentKind::RateSweep) => LOOP_GRAPH,
            (None, _) => &self.scenario.graph,
        }
    }

    /// Seed of repetition `rep`.
    pub fn seed_for(&self, rep: usize) -> u64 {
        self.scenario.seed.wrapping_add(rep as u64)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

/// Resolves `builtin:` names and graph files.
pub fn load_graph(name: &str) -> Result<NetworkGraph, ExperimentError> {
    match name {
        BENCHMARK_GRAPH => Ok(NetworkGraph::benchmark()),
        LOOP_GRAPH => Ok(loop_graph(1.62)?),
        SINGLE_LINK_GRAPH => Ok(single_link_graph(1.62)?),
        other if other.starts_with("builtin:") => Err(ExperimentError::Invalid(format!("unknown builtin graph {other:?}"))),
        path => Ok(NetworkGraph::load(path)?),
    }
}

/// Equilateral triangle, 100 m sides, one route on link 0 (node 0 to 1).
pub fn loop_graph(rate_per_min: f64) -> Result<NetworkGraph, GraphError> {
    paired_graph(
        &[(0.0, 0.0), (100.0, 0.0), (50.0, 50.0 * 3f64.sqrt())],
        &[(0, 1), (1, 2), (2, 0)],
        vec![RouteRecord {
            id: 0,
            links: vec![0],
            rate_per_min,
        }],
    )
}

/// A single 100 m street with one route on link 0.
pub fn single_link_graph(rate_per_min: f64) -> Result<NetworkGraph, GraphError> {
    paired_graph(
        &[(0.0, 0.0), (100.0, 0.0)],
        &[(0, 1)],
        vec![RouteRecord {
            id: 0,
            links: vec![0],
            rate_per_min,
        }],
    )
}

/// JSON summary plus named CSV tables.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub spec: ExperimentSpec,
    pub summary: serde_json::Value,
    pub tables: Vec<(String, String)>,
}

const PLOT_STUB: &str = "\
# Minimal plotting stub; edit to taste.
import csv, sys
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open(sys.argv[1])))
x, y = sys.argv[2], sys.argv[3]
plt.plot([float(r[x]) for r in rows], [float(r[y]) for r in rows], \"o-\")
plt.xlabel(x)
plt.ylabel(y)
plt.show()
";

impl Report {
    pub fn table(&self, name: &str) -> Option<&str> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t.as_str())
    }

    /// `report.json` with the spec and summary.
    pub fn json(&self) -> String {
        let doc = serde_json::json!({
            "kind": self.spec.kind,
            "spec": self.spec,
            "summary": self.summary,
        });
        serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
    }

    /// Writes `report.json`, every table and `plot.py` into `dir` and nowhere
    /// else. Returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
        std::fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
        let mut files = vec![("report.json".to_string(), self.json())];
        files.extend(self.tables.iter().cloned());
        files.push(("plot.py".to_string(), PLOT_STUB.to_string()));
        let mut written = Vec::new();
        for (name, body) in files {
            if Path::new(&name).components().count() != 1 {
                return Err(ExperimentError::Invalid(format!("table name {name:?} is not a plain file name")));
            }
            let path = dir.join(&name);
            std::fs::write(&path, body).map_err(|e| ExperimentError::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Runs whatever `spec.kind` names.
pub fn run(spec: &ExperimentSpec) -> Result<Report, ExperimentError> {
    match spec.kind {
        ExperimentKind::FullNetwork => Ok(run_full_network(spec)?.report(spec)),
        ExperimentKind::SingleLinkVisitsSweep => Ok(run_visits_sweep(spec)?.report(spec)),
        ExperimentKind::RateSweep => Ok(run_rate_sweep(spec)?.report(spec)),
        ExperimentKind::Roc => Ok(run_roc(spec)?.report(spec)),
        ExperimentKind::HardwareReplay => {
            let dir = spec.log_dir.as_deref().ok_or_else(|| ExperimentError::Invalid("replay needs log_dir".into()))?;
            Ok(replay(dir, spec)?.report(spec))
        }
    }
}

/// Spearman rank correlation with mid-ranks for ties. `None` when either
/// side is constant or the inputs are shorter than two.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = mid;
        }
        i = j + 1;
    }
    out
}

pub(crate) fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(crate) fn mean(v: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut s, mut n) = (0.0, 0usize);
    for x in v {
        s += x;
        n += 1;
    }
    (n > 0).then(|| s / n as f64)
}
