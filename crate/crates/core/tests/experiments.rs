use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pedrate::estimator::{poisson_estimate, EstimatorConfig, RateOutcome};
use pedrate::experiment::{
    self, estimate_log, replay, run_full_network, run_parked, run_rate_sweep, run_visits_sweep, single_link_graph,
    ExperimentKind, ExperimentSpec, SINGLE_LINK_GRAPH,
};
use pedrate::fusion::{generate_detection_corpus, roc_sweep, CorpusConfig, FusionParams, Method, TrackLabel};
use pedrate::geom::angle_between;
use pedrate::simkit::{simulate, RateStep, ScenarioConfig, SpeedModel};

fn rows(csv: &str) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records()
        .map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(String::from)).collect())
        .collect()
}

fn num(row: &BTreeMap<String, String>, key: &str) -> Option<f64> {
    row[key].parse().ok()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn full_network_summary_matches_the_run_table() {
    let mut spec = ExperimentSpec::new(ExperimentKind::FullNetwork);
    spec.reps = 4;
    spec.scenario.duration_s = 900.0;
    let report = run_full_network(&spec).unwrap().report(&spec);
    let runs = rows(report.table("runs.csv").unwrap());
    let links = rows(report.table("links.csv").unwrap());
    assert_eq!(runs.len(), 4 * 74);
    for l in &links {
        let id = &l["link"];
        let truth = num(l, "truth_per_min").unwrap();
        let mine: Vec<_> = runs.iter().filter(|r| &r["link"] == id).collect();
        let est: Vec<_> = mine.iter().filter(|r| num(r, "lambda_hat").is_some()).collect();
        assert_eq!(num(l, "reps_estimated").unwrap() as usize, est.len());
        if est.is_empty() {
            assert_eq!(l["mean_lambda_hat"], "");
            continue;
        }
        let n = est.len() as f64;
        let mean = |k: &str| est.iter().map(|r| num(r, k).unwrap()).sum::<f64>() / n;
        assert!(close(num(l, "mean_lambda_hat").unwrap(), mean("lambda_hat")));
        assert!(close(num(l, "mean_lambda_lo").unwrap(), mean("lambda_lo")));
        assert!(close(num(l, "mean_lambda_hi").unwrap(), mean("lambda_hi")));
        let covered = est
            .iter()
            .filter(|r| num(r, "lambda_lo").unwrap() <= truth && truth <= num(r, "lambda_hi").unwrap())
            .count() as f64;
        assert!(close(num(l, "coverage").unwrap(), covered / n));
        let counter = mine.iter().map(|r| num(r, "counter_lambda_hat").unwrap()).sum::<f64>() / mine.len() as f64;
        assert!(close(num(l, "counter_mean_lambda_hat").unwrap(), counter));
    }
}

#[test]
fn sweep_summary_matches_the_run_table() {
    let mut spec = ExperimentSpec::new(ExperimentKind::SingleLinkVisitsSweep);
    spec.reps = 6;
    spec.visits = vec![0, 1, 3];
    let report = run_visits_sweep(&spec).unwrap().report(&spec);
    let runs = rows(report.table("runs.csv").unwrap());
    for p in rows(report.table("sweep.csv").unwrap()) {
        let est: Vec<_> = runs
            .iter()
            .filter(|r| r["visits"] == p["visits"] && num(r, "lambda_hat").is_some())
            .collect();
        assert_eq!(num(&p, "estimated").unwrap() as usize, est.len());
        if p["visits"] == "0" {
            assert!(est.is_empty());
            assert_eq!(p["mean_lambda_hat"], "");
            continue;
        }
        let n = est.len() as f64;
        let width = est
            .iter()
            .map(|r| num(r, "lambda_hi").unwrap() - num(r, "lambda_lo").unwrap())
            .sum::<f64>()
            / n;
        assert!(close(num(&p, "mean_width").unwrap(), width));
    }
}

#[test]
fn zero_visits_report_no_data() {
    let mut spec = ExperimentSpec::new(ExperimentKind::SingleLinkVisitsSweep);
    spec.reps = 3;
    spec.visits = vec![0];
    let r = run_visits_sweep(&spec).unwrap();
    assert!(r.runs.iter().all(|run| matches!(run.outcome, RateOutcome::NoData { .. })));
    assert_eq!(r.points[0].mean_hat, None);
}

#[test]
fn single_visit_still_covers_the_truth() {
    let mut spec = ExperimentSpec::new(ExperimentKind::SingleLinkVisitsSweep);
    spec.visits = vec![1];
    let p = run_visits_sweep(&spec).unwrap().points[0].clone();
    assert_eq!(p.estimated, spec.reps);
    assert!(p.coverage.unwrap() >= 0.85, "{p:?}");
    assert!(p.mean_width.unwrap() > 2.0 * 1.62, "{p:?}");
}

#[test]
fn rate_sweep_tracks_the_truth() {
    let mut spec = ExperimentSpec::new(ExperimentKind::RateSweep);
    spec.rates = vec![0.0, 0.5, 1.0, 1.62, 3.0];
    let r = run_rate_sweep(&spec).unwrap();
    for p in &r.points {
        if p.rate_per_min == 0.0 {
            assert_eq!(p.mean_hat, Some(0.0));
            assert!(p.mean_hi.unwrap() > 0.0);
        } else {
            assert!(p.relative_error().unwrap() <= 0.15, "{p:?}");
        }
    }
}

#[test]
fn doubling_the_rate_shrinks_relative_width_by_root_two() {
    // width grows like sqrt(N) at a fixed period, so width / estimate
    // falls like 1 / sqrt(N)
    for n in [50, 100, 400] {
        let one = poisson_estimate(0, n, 3600.0, 0.1).unwrap();
        let two = poisson_estimate(0, 2 * n, 3600.0, 0.1).unwrap();
        let ratio = (two.width() / two.lambda_hat) / (one.width() / one.lambda_hat);
        assert!((ratio - 0.5f64.sqrt()).abs() < 0.01, "n={n}: {ratio}");
    }
}

#[test]
fn silent_network_estimates_zero_with_positive_bounds() {
    let mut spec = ExperimentSpec::new(ExperimentKind::FullNetwork);
    spec.graph = Some(SINGLE_LINK_GRAPH.into());
    spec.rate_per_min = 0.0;
    spec.reps = 3;
    spec.scenario.duration_s = 600.0;
    let r = run_full_network(&spec).unwrap();
    for run in &r.runs {
        let e = run.moving.estimate().expect("the vehicle sees both links");
        assert_eq!(e.lambda_hat, 0.0);
        assert!(e.lambda_hi > 0.0);
        assert_eq!(run.counter.lambda_hat, 0.0);
    }
}

#[test]
fn parked_vehicle_matches_counter_with_uniform_speeds() {
    let mut spec = ExperimentSpec::new(ExperimentKind::FullNetwork);
    spec.reps = 10;
    spec.rate_per_min = 4.0;
    spec.scenario.duration_s = 1800.0;
    spec.scenario.pedestrian_speed = SpeedModel::constant(1.5);
    let r = run_parked(&spec).unwrap();
    for run in &r.runs {
        let m = run.moving.estimate().unwrap();
        assert_eq!(m.counts, run.matched_counter.counts, "seed {}", run.seed);
        assert!(close(m.period_s, run.matched_counter.period_s));
    }
    assert!(r.relative_difference() < 0.05);
}

#[test]
fn replay_is_deterministic_and_stays_in_its_directory() {
    let logs = tempfile::tempdir().unwrap();
    let graph = single_link_graph(3.0).unwrap();
    let cfg = ScenarioConfig {
        seed: 4,
        duration_s: 900.0,
        ..ScenarioConfig::default()
    };
    simulate(&graph, &cfg).unwrap().log.save(logs.path().join("events.csv")).unwrap();
    let mut spec = ExperimentSpec::new(ExperimentKind::HardwareReplay);
    spec.log_dir = Some(logs.path().to_path_buf());

    let out = tempfile::tempdir().unwrap();
    let (a, b) = (out.path().join("a"), out.path().join("b"));
    experiment::run(&spec).unwrap().write(&a).unwrap();
    experiment::run(&spec).unwrap().write(&b).unwrap();
    let names = |d: &std::path::Path| {
        let mut v: Vec<String> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        v.sort();
        v
    };
    assert_eq!(names(&a), ["estimates.csv", "plot.py", "profile.csv", "report.json"]);
    assert_eq!(names(out.path()), ["a", "b"]);
    for f in names(&a) {
        assert_eq!(std::fs::read(a.join(&f)).unwrap(), std::fs::read(b.join(&f)).unwrap(), "{f}");
    }
    assert_eq!(names(logs.path()), ["events.csv"]);
}

#[test]
fn malformed_logs_are_rejected_with_a_line_number() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("events.csv"), "arrival,0.5,1,0,1.4\nsnapshot,1.0,0,twenty,0,,,\n").unwrap();
    let mut spec = ExperimentSpec::new(ExperimentKind::HardwareReplay);
    spec.log_dir = Some(dir.path().to_path_buf());
    let err = replay(dir.path(), &spec).unwrap_err();
    assert!(err.is_data_error());
    assert!(err.to_string().contains("line 2"), "{err}");
}

#[test]
fn profile_picks_up_a_rate_step() {
    let graph = single_link_graph(3.0).unwrap();
    let mut before = 0.0;
    let mut after = 0.0;
    for seed in 0..8 {
        let cfg = ScenarioConfig {
            seed,
            rate_schedule: vec![RateStep {
                from_s: 1800.0,
                scale: 3.0,
            }],
            ..ScenarioConfig::default()
        };
        let log = simulate(&graph, &cfg).unwrap().log;
        let r = estimate_log(&log, Some(&graph), EstimatorConfig::default(), 60.0).unwrap();
        let at = |t: f64| {
            r.profiles
                .iter()
                .find(|p| p.outcome.link() == 0 && (p.eval_time - t).abs() < 1e-9)
                .and_then(|p| p.outcome.estimate())
                .map(|e| e.lambda_hat)
                .unwrap()
        };
        // one full window before and after the step
        before += at(1800.0 - 300.0 - 60.0);
        after += at(1800.0 + 300.0 + 60.0);
    }
    assert!(after / before > 2.0, "before {before}, after {after}");
}

#[test]
fn calibration_bias_shifts_true_detections() {
    for bias in [0.0, 2.0] {
        let cfg = CorpusConfig {
            calibration_bias_deg: bias,
            duration_s: 300.0,
            ..CorpusConfig::default()
        };
        let corpus = generate_detection_corpus(&cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let (mut sum, mut n) = (0.0, 0);
        for f in &corpus.frames {
            for (det, src) in f.detections.iter().zip(&f.sources) {
                let Some(id) = src else { continue };
                if corpus.labels[id] != TrackLabel::Pedestrian {
                    continue;
                }
                let c = f.clusters.iter().find(|c| c.id == *id).unwrap();
                let bearing = f.observer.bearing_to(c.position);
                let signed = (det.middle - bearing + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU)
                    - std::f64::consts::PI;
                assert!(angle_between(det.middle, bearing) < 10f64.to_radians());
                sum += signed;
                n += 1;
            }
        }
        let mean_deg = (sum / n as f64).to_degrees();
        assert!((mean_deg - bias).abs() < 0.05, "bias {bias}: mean shift {mean_deg}");
    }
}

#[test]
fn separable_corpus_is_classified_perfectly() {
    let cfg = CorpusConfig {
        duration_s: 300.0,
        pedestrians: 60,
        ..CorpusConfig::noiseless()
    };
    let corpus = generate_detection_corpus(&cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    for method in [Method::Df, Method::Mlf] {
        let pts = roc_sweep(&corpus, method, FusionParams::default()).unwrap();
        assert!(
            pts.iter().any(|p| p.hit_rate == 1.0 && p.false_positives_per_minute == 0.0),
            "{method:?}"
        );
    }
}
