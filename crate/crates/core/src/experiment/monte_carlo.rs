use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::estimator::{link_arrival_times, poisson_estimate, stationary_counter, MovingObserver, RateEstimate, RateOutcome};
use crate::network::{LinkId, NetworkGraph};
use crate::simkit::{simulate, ScenarioConfig, SpeedModel, VehicleStart, VehicleState};

use super::{load_graph, mean, opt, single_link_graph, spearman, ExperimentError, ExperimentSpec, Report};

fn estimate_cols(e: Option<&RateEstimate>) -> String {
    match e {
        Some(e) => format!("{},{},{},{},{}", e.lambda_hat, e.lambda_lo, e.lambda_hi, e.counts, e.period_s),
        None => ",,,,".to_string(),
    }
}

/// One link in one repetition of the full-network experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkRun {
    pub rep: usize,
    pub seed: u64,
    pub link: LinkId,
    pub length: f64,
    pub truth: f64,
    pub moving: RateOutcome,
    pub counter: RateEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkSummary {
    pub link: LinkId,
    pub length: f64,
    pub truth: f64,
    pub active: bool,
    pub reps_estimated: usize,
    pub mean_hat: Option<f64>,
    pub mean_lo: Option<f64>,
    pub mean_hi: Option<f64>,
    pub mean_width: Option<f64>,
    /// Fraction of estimated repetitions whose interval holds the truth.
    pub coverage: Option<f64>,
    pub counter_mean_hat: f64,
    pub counter_mean_lo: f64,
    pub counter_mean_hi: f64,
    pub counter_coverage: f64,
}

impl LinkSummary {
    /// Whether the repetition-averaged interval holds the truth.
    pub fn mean_interval_covers(&self) -> bool {
        matches!((self.mean_lo, self.mean_hi), (Some(lo), Some(hi)) if lo <= self.truth && self.truth <= hi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FullNetworkResult {
    pub runs: Vec<LinkRun>,
    pub links: Vec<LinkSummary>,
}

impl FullNetworkResult {
    pub fn active(&self) -> impl Iterator<Item = &LinkSummary> {
        self.links.iter().filter(|l| l.active)
    }

    /// Every active link got an estimate in every repetition.
    pub fn all_active_estimated(&self, reps: usize) -> bool {
        self.active().all(|l| l.reps_estimated == reps)
    }

    /// Share of active links whose averaged interval holds the truth.
    pub fn mean_interval_coverage(&self) -> f64 {
        let active: Vec<_> = self.active().collect();
        active.iter().filter(|l| l.mean_interval_covers()).count() as f64 / active.len().max(1) as f64
    }

    /// Share of (active link, repetition) pairs whose interval holds the truth.
    pub fn pooled_coverage(&self) -> f64 {
        let active: BTreeMap<LinkId, f64> = self.active().map(|l| (l.link, l.truth)).collect();
        let hits: Vec<bool> = self
            .runs
            .iter()
            .filter(|r| active.contains_key(&r.link))
            .filter_map(|r| r.moving.estimate().map(|e| e.contains(r.truth)))
            .collect();
        hits.iter().filter(|&&h| h).count() as f64 / hits.len().max(1) as f64
    }

    /// Rank correlation between link length and mean interval width over
    /// active links.
    pub fn length_width_correlation(&self) -> Option<f64> {
        let (len, width): (Vec<f64>, Vec<f64>) =
            self.active().filter_map(|l| l.mean_width.map(|w| (l.length, w))).unzip();
        spearman(&len, &width)
    }

    pub fn report(&self, spec: &ExperimentSpec) -> Report {
        let mut runs = String::from(
            "rep,seed,link,length_m,truth_per_min,lambda_hat,lambda_lo,lambda_hi,Nc,Tc_seconds,\
             counter_lambda_hat,counter_lambda_lo,counter_lambda_hi,counter_Nc\n",
        );
        for r in &self.runs {
            let c = &r.counter;
            let _ = writeln!(
                runs,
                "{},{},{},{},{},{},{},{},{},{}",
                r.rep,
                r.seed,
                r.link,
                r.length,
                r.truth,
                estimate_cols(r.moving.estimate()),
                c.lambda_hat,
                c.lambda_lo,
                c.lambda_hi,
                c.counts
            );
        }
        let mut links = String::from(
            "link,length_m,truth_per_min,active,reps_estimated,mean_lambda_hat,mean_lambda_lo,mean_lambda_hi,\
             mean_width,coverage,counter_mean_lambda_hat,counter_mean_lambda_lo,counter_mean_lambda_hi,counter_coverage\n",
        );
        for l in &self.links {
            let _ = writeln!(
                links,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                l.link,
                l.length,
                l.truth,
                l.active,
                l.reps_estimated,
                opt(l.mean_hat),
                opt(l.mean_lo),
                opt(l.mean_hi),
                opt(l.mean_width),
                opt(l.coverage),
                l.counter_mean_hat,
                l.counter_mean_lo,
                l.counter_mean_hi,
                l.counter_coverage
            );
        }
        let inactive_max = self
            .links
            .iter()
            .filter(|l| !l.active)
            .filter_map(|l| l.mean_hat)
            .fold(0.0, f64::max);
        Report {
            spec: spec.clone(),
            summary: json!({
                "active_links": self.active().count(),
                "all_active_links_estimated": self.all_active_estimated(spec.reps),
                "mean_interval_coverage": self.mean_interval_coverage(),
                "pooled_coverage": self.pooled_coverage(),
                "length_width_spearman": self.length_width_correlation(),
                "inactive_max_mean_lambda_hat": inactive_max,
                "seeds": (0..spec.reps).map(|i| spec.seed_for(i)).collect::<Vec<_>>(),
            }),
            tables: vec![("runs.csv".into(), runs), ("links.csv".into(), links)],
        }
    }
}

fn observe(graph: &NetworkGraph, cfg: &ScenarioConfig, spec: &ExperimentSpec) -> Result<(MovingObserver, crate::simkit::SimOutput), ExperimentError> {
    let out = simulate(graph, cfg)?;
    let mut obs = MovingObserver::new(spec.estimator)?;
    obs.observe_all(&out.log.snapshots)?;
    Ok((obs, out))
}

/// Moving observer against stationary counters on every link of the
/// scenario graph, with every route at `rate_per_min`.
pub fn run_full_network(spec: &ExperimentSpec) -> Result<FullNetworkResult, ExperimentError> {
    spec.validate()?;
    let graph = load_graph(spec.graph_name())?
        .with_uniform_rate(spec.rate_per_min)
        .into_validated()?;
    let truth = graph.link_rates();
    let per_rep: Vec<Vec<LinkRun>> = (0..spec.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = spec.seed_for(rep);
            let cfg = ScenarioConfig {
                seed,
                ..spec.scenario.clone()
            };
            let (obs, out) = observe(&graph, &cfg, spec)?;
            let times = link_arrival_times(&graph, &out.log.arrivals)?;
            graph
                .links()
                .iter()
                .map(|l| {
                    let counter =
                        stationary_counter(l.id, &times[&l.id], 0.0, cfg.duration_s, spec.estimator.alpha)?;
                    Ok(LinkRun {
                        rep,
                        seed,
                        link: l.id,
                        length: l.length,
                        truth: truth.get(&l.id).copied().unwrap_or(0.0),
                        moving: obs.estimate(l.id)?,
                        counter,
                    })
                })
                .collect()
        })
        .collect::<Result<_, ExperimentError>>()?;
    let runs: Vec<LinkRun> = per_rep.into_iter().flatten().collect();
    let links = graph
        .links()
        .iter()
        .map(|l| {
            let rows: Vec<&LinkRun> = runs.iter().filter(|r| r.link == l.id).collect();
            let est: Vec<&RateEstimate> = rows.iter().filter_map(|r| r.moving.estimate()).collect();
            let t = truth.get(&l.id).copied().unwrap_or(0.0);
            LinkSummary {
                link: l.id,
                length: l.length,
                truth: t,
                active: t > 0.0,
                reps_estimated: est.len(),
                mean_hat: mean(est.iter().map(|e| e.lambda_hat)),
                mean_lo: mean(est.iter().map(|e| e.lambda_lo)),
                mean_hi: mean(est.iter().map(|e| e.lambda_hi)),
                mean_width: mean(est.iter().map(|e| e.width())),
                coverage: mean(est.iter().map(|e| f64::from(u8::from(e.contains(t))))),
                counter_mean_hat: mean(rows.iter().map(|r| r.counter.lambda_hat)).unwrap_or(0.0),
                counter_mean_lo: mean(rows.iter().map(|r| r.counter.lambda_lo)).unwrap_or(0.0),
                counter_mean_hi: mean(rows.iter().map(|r| r.counter.lambda_hi)).unwrap_or(0.0),
                counter_coverage: mean(rows.iter().map(|r| f64::from(u8::from(r.counter.contains(t))))).unwrap_or(0.0),
            }
        })
        .collect();
    Ok(FullNetworkResult { runs, links })
}

/// Time at which the vehicle begins its `visits + 1`-th traversal of
/// `link`, i.e. the length of a run that completes `visits` full cycles.
pub fn duration_for_visits(
    graph: &NetworkGraph,
    scenario: &ScenarioConfig,
    link: LinkId,
    visits: u32,
) -> Result<f64, ExperimentError> {
    if visits == 0 {
        return Ok(0.0);
    }
    if !(scenario.vehicle_speed > 0.0) {
        return Err(ExperimentError::Invalid("a visits sweep needs a moving vehicle".into()));
    }
    let mut v = VehicleState::start(graph, scenario.vehicle_start, scenario.vehicle_speed)?;
    let mut count = u32::from(v.link == link);
    let step = 10.0;
    let limit = 1e8 / scenario.vehicle_speed;
    let mut t = 0.0;
    while t < limit {
        for (elapsed, l) in v.advance(graph, step)? {
            if l == link {
                count += 1;
                if count == visits + 1 {
                    return Ok(t + elapsed);
                }
            }
        }
        t += step;
    }
    Err(ExperimentError::Invalid(format!("the vehicle never returns to link {link}")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRun {
    pub visits: u32,
    pub rate_per_min: f64,
    pub rep: usize,
    pub seed: u64,
    pub outcome: RateOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub visits: u32,
    pub rate_per_min: f64,
    pub reps: usize,
    pub estimated: usize,
    pub mean_hat: Option<f64>,
    pub mean_lo: Option<f64>,
    pub mean_hi: Option<f64>,
    pub mean_width: Option<f64>,
    pub coverage: Option<f64>,
}

impl SweepPoint {
    pub fn relative_error(&self) -> Option<f64> {
        let m = self.mean_hat?;
        if self.rate_per_min == 0.0 {
            Some(m.abs())
        } else {
            Some((m - self.rate_per_min).abs() / self.rate_per_min)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub runs: Vec<SweepRun>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn report(&self, spec: &ExperimentSpec) -> Report {
        let mut runs = String::from("visits,rate_per_min,rep,seed,lambda_hat,lambda_lo,lambda_hi,Nc,Tc_seconds\n");
        for r in &self.runs {
            let _ = writeln!(
                runs,
                "{},{},{},{},{}",
                r.visits,
                r.rate_per_min,
                r.rep,
                r.seed,
                estimate_cols(r.outcome.estimate())
            );
        }
        let mut points = String::from(
            "visits,rate_per_min,reps,estimated,mean_lambda_hat,mean_lambda_lo,mean_lambda_hi,mean_width,coverage\n",
        );
        for p in &self.points {
            let _ = writeln!(
                points,
                "{},{},{},{},{},{},{},{},{}",
                p.visits,
                p.rate_per_min,
                p.reps,
                p.estimated,
                opt(p.mean_hat),
                opt(p.mean_lo),
                opt(p.mean_hi),
                opt(p.mean_width),
                opt(p.coverage)
            );
        }
        Report {
            spec: spec.clone(),
            summary: json!({
                "points": self.points,
                "seeds": (0..spec.reps).map(|i| spec.seed_for(i)).collect::<Vec<_>>(),
            }),
            tables: vec![("runs.csv".into(), runs), ("sweep.csv".into(), points)],
        }
    }
}

fn sweep(spec: &ExperimentSpec, cases: &[(u32, f64)]) -> Result<SweepResult, ExperimentError> {
    spec.validate()?;
    let base = load_graph(spec.graph_name())?;
    let jobs: Vec<(u32, f64, usize)> = cases
        .iter()
        .flat_map(|&(v, r)| (0..spec.reps).map(move |rep| (v, r, rep)))
        .collect();
    let mut durations = BTreeMap::new();
    for &(v, _) in cases {
        let d = duration_for_visits(&base, &spec.scenario, spec.target_link, v)?;
        // stop just short of the next traversal
        durations.insert(v, (d / spec.scenario.dt - 1e-9).floor() * spec.scenario.dt);
    }
    let runs: Vec<SweepRun> = jobs
        .into_par_iter()
        .map(|(visits, rate, rep)| {
            let seed = spec.seed_for(rep);
            let duration = durations[&visits];
            let outcome = if duration <= 0.0 {
                RateOutcome::NoData {
                    link: spec.target_link,
                    eval_time: None,
                }
            } else {
                let graph = base.clone().with_uniform_rate(rate);
                let cfg = ScenarioConfig {
                    seed,
                    duration_s: duration,
                    ..spec.scenario.clone()
                };
                let (obs, _) = observe(&graph, &cfg, spec)?;
                obs.estimate(spec.target_link)?
            };
            Ok(SweepRun {
                visits,
                rate_per_min: rate,
                rep,
                seed,
                outcome,
            })
        })
        .collect::<Result<_, ExperimentError>>()?;
    let points = cases
        .iter()
        .map(|&(visits, rate)| {
            let est: Vec<&RateEstimate> = runs
                .iter()
                .filter(|r| r.visits == visits && r.rate_per_min == rate)
                .filter_map(|r| r.outcome.estimate())
                .collect();
            SweepPoint {
                visits,
                rate_per_min: rate,
                reps: spec.reps,
                estimated: est.len(),
                mean_hat: mean(est.iter().map(|e| e.lambda_hat)),
                mean_lo: mean(est.iter().map(|e| e.lambda_lo)),
                mean_hi: mean(est.iter().map(|e| e.lambda_hi)),
                mean_width: mean(est.iter().map(|e| e.width())),
                coverage: mean(est.iter().map(|e| f64::from(u8::from(e.contains(rate))))),
            }
        })
        .collect();
    Ok(SweepResult { runs, points })
}

/// Estimates on the target link for each visit count at `rate_per_min`.
pub fn run_visits_sweep(spec: &ExperimentSpec) -> Result<SweepResult, ExperimentError> {
    let cases: Vec<(u32, f64)> = spec.visits.iter().map(|&v| (v, spec.rate_per_min)).collect();
    sweep(spec, &cases)
}

/// Estimates on the target link for each true rate at `nominal_visits`.
pub fn run_rate_sweep(spec: &ExperimentSpec) -> Result<SweepResult, ExperimentError> {
    let cases: Vec<(u32, f64)> = spec.rates.iter().map(|&r| (spec.nominal_visits, r)).collect();
    sweep(spec, &cases)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParkedRun {
    pub seed: u64,
    pub moving: RateOutcome,
    /// Counter at the near edge of the view over the whole run.
    pub counter: RateEstimate,
    /// Same counter, counting only during the spans the accepted windows
    /// saw; its period equals the moving observer's.
    pub matched_counter: RateEstimate,
    /// Covered stretch `(x2, x1)` of the link.
    pub window: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParkedResult {
    pub runs: Vec<ParkedRun>,
}

impl ParkedResult {
    pub fn mean_moving(&self) -> f64 {
        mean(self.runs.iter().filter_map(|r| r.moving.estimate().map(|e| e.lambda_hat))).unwrap_or(0.0)
    }

    pub fn mean_counter(&self) -> f64 {
        mean(self.runs.iter().map(|r| r.counter.lambda_hat)).unwrap_or(0.0)
    }

    pub fn mean_matched_counter(&self) -> f64 {
        mean(self.runs.iter().map(|r| r.matched_counter.lambda_hat)).unwrap_or(0.0)
    }

    /// Against the whole-run counter.
    pub fn relative_difference(&self) -> f64 {
        let c = self.mean_counter();
        (self.mean_moving() - c).abs() / c
    }

    /// Against the counter restricted to the observed spans.
    pub fn matched_relative_difference(&self) -> f64 {
        let c = self.mean_matched_counter();
        (self.mean_moving() - c).abs() / c
    }
}

/// A vehicle parked on one street, compared with a counter at the near end
/// of the stretch it sees. Uses the scenario's on-link start if it has one,
/// else 40 m into the target link.
pub fn run_parked(spec: &ExperimentSpec) -> Result<ParkedResult, ExperimentError> {
    spec.validate()?;
    let graph = single_link_graph(spec.rate_per_min)?;
    let start = match spec.scenario.vehicle_start {
        s @ VehicleStart::OnLink { .. } => s,
        VehicleStart::Node(_) => VehicleStart::OnLink {
            link: spec.target_link,
            offset: 40.0,
        },
    };
    let link = match start {
        VehicleStart::OnLink { link, .. } => link,
        VehicleStart::Node(_) => unreachable!(),
    };
    let runs = (0..spec.reps)
        .into_par_iter()
        .map(|rep| {
            let cfg = ScenarioConfig {
                seed: spec.seed_for(rep),
                vehicle_speed: 0.0,
                vehicle_start: start,
                ..spec.scenario.clone()
            };
            let out = simulate(&graph, &cfg)?;
            let mut obs = MovingObserver::new(spec.estimator)?;
            let own: Vec<_> = out.log.snapshots.iter().filter(|s| s.link == link).cloned().collect();
            obs.observe_all(&own)?;
            let first = own
                .first()
                .ok_or_else(|| ExperimentError::Invalid("the parked vehicle sees nothing of its link".into()))?;
            let x2 = first.x2;
            let mut times: Vec<f64> = out
                .log
                .arrivals
                .iter()
                .filter(|a| graph.route(a.route_id).is_some_and(|r| r.links.first() == Some(&link)))
                .map(|a| a.time + x2 / a.speed)
                .collect();
            times.sort_by(f64::total_cmp);
            let counter = stationary_counter(link, &times, 0.0, cfg.duration_s, spec.estimator.alpha)?;
            // someone passing x2 during [t - tau, t] is in view at t
            let (mut n, mut period) = (0u64, 0.0);
            for w in obs.accepted(link) {
                let lo = times.partition_point(|&x| x < w.time - w.tau());
                let hi = times.partition_point(|&x| x <= w.time);
                n += (hi - lo) as u64;
                period += w.tau();
            }
            let matched_counter = poisson_estimate(link, n, period, spec.estimator.alpha)?;
            Ok(ParkedRun {
                seed: cfg.seed,
                moving: obs.estimate(link)?,
                counter,
                matched_counter,
                window: (x2, first.x1),
            })
        })
        .collect::<Result<_, ExperimentError>>()?;
    Ok(ParkedResult { runs })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PacingRun {
    pub seed: u64,
    /// Snapshots of the vehicle's own link.
    pub snapshots: usize,
    pub accepted: usize,
    pub rejected: usize,
    /// Accepted intervals pairwise interior-disjoint on every link.
    pub ledger_disjoint: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PacingResult {
    pub runs: Vec<PacingRun>,
}

/// Vehicle and pedestrians all moving at the fallback speed along one
/// street, for a single traversal.
pub fn run_pacing(spec: &ExperimentSpec) -> Result<PacingResult, ExperimentError> {
    spec.validate()?;
    let v = spec.estimator.fallback_speed;
    let graph = single_link_graph(spec.rate_per_min)?;
    let length = graph.link(0).map_or(0.0, |l| l.length);
    let dt = spec.scenario.dt;
    let runs = (0..spec.reps)
        .into_par_iter()
        .map(|rep| {
            let cfg = ScenarioConfig {
                seed: spec.seed_for(rep),
                vehicle_speed: v,
                vehicle_start: VehicleStart::Node(0),
                pedestrian_speed: SpeedModel::constant(v),
                duration_s: (length / v / dt - 1e-9).floor() * dt,
                ..spec.scenario.clone()
            };
            let out = simulate(&graph, &cfg)?;
            let mut obs = MovingObserver::new(spec.estimator)?;
            let mut snapshots = 0;
            for s in &out.log.snapshots {
                obs.observe(s)?;
                snapshots += usize::from(s.link == 0);
            }
            Ok(PacingRun {
                seed: cfg.seed,
                snapshots,
                accepted: obs.accepted(0).len(),
                rejected: obs.rejected().iter().filter(|w| w.link == 0).count(),
                ledger_disjoint: obs.ledger().is_pairwise_disjoint(),
            })
        })
        .collect::<Result<_, ExperimentError>>()?;
    Ok(PacingResult { runs })
}
