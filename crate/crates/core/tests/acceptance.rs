//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pedrate::estimator::stationary_counter;
use pedrate::experiment::{
    self, run_full_network, run_pacing, run_parked, run_roc, run_visits_sweep, single_link_graph, ExperimentKind,
    ExperimentSpec, Report,
};
use pedrate::fusion::{FusionParams, Method};
use pedrate::simkit::{generate_arrivals, simulate, ScenarioConfig, SpeedModel};
use pedrate::stats::chi2_quantile;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Closed-form CDF for even degrees of freedom: one minus a Poisson tail.
fn even_dof_cdf(x: f64, dof: u32) -> f64 {
    let k = dof / 2;
    let h = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..k {
        term *= h / j as f64;
        sum += term;
    }
    1.0 - (-h).exp() * sum
}

fn bisect_quantile(p: f64, dof: u32) -> f64 {
    let (mut lo, mut hi) = (0.0, 1000.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if even_dof_cdf(mid, dof) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn quantile_oracle() -> Outcome {
    let mut closed = 0.0_f64;
    for p in [0.05, 0.5, 0.95] {
        closed = closed.max((chi2_quantile(p, 2.0) - (-2.0 * (1.0 - p).ln())).abs());
    }
    let mut bisect = 0.0_f64;
    for dof in [2, 20, 22, 100] {
        for p in [0.01, 0.05, 0.5, 0.95, 0.99] {
            bisect = bisect.max((chi2_quantile(p, dof as f64) - bisect_quantile(p, dof)).abs());
        }
    }
    check(
        closed <= 1e-8 && bisect <= 1e-6,
        format!("closed-form error {closed:.1e} (<= 1e-8), bisection error {bisect:.1e} (<= 1e-6)"),
    )
}

fn counter_statistics() -> Outcome {
    let graph = single_link_graph(1.62).expect("graph");
    let route = &graph.routes()[0];
    let (mut sum, mut covered) = (0.0, 0);
    let seeds = 1000;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let times: Vec<f64> = generate_arrivals(route, 0.0, 3600.0, &SpeedModel::default(), &mut rng)
            .iter()
            .map(|a| a.time)
            .collect();
        let e = stationary_counter(0, &times, 0.0, 3600.0, 0.1).expect("estimate");
        sum += e.lambda_hat;
        covered += usize::from(e.contains(1.62));
    }
    let mean = sum / seeds as f64;
    let coverage = covered as f64 / seeds as f64;
    check(
        (mean - 1.62).abs() <= 0.05 && (0.85..=0.97).contains(&coverage),
        format!("mean {mean:.4}/min (1.62 +/- 0.05), 90% coverage {coverage:.3} (in [0.85, 0.97])"),
    )
}

fn single_link() -> Outcome {
    let mut spec = ExperimentSpec::new(ExperimentKind::SingleLinkVisitsSweep);
    spec.visits = vec![10];
    let r = run_visits_sweep(&spec).expect("sweep");
    let p = &r.points[0];
    let rel = p.relative_error().unwrap_or(f64::INFINITY);
    let cov = p.coverage.unwrap_or(0.0);
    check(
        rel <= 0.15 && cov >= 0.85 && p.estimated == spec.reps,
        format!(
            "10 traversals, {} reps: mean {:.4}/min, relative error {rel:.3} (<= 0.15), coverage {cov:.2} (>= 0.85)",
            spec.reps,
            p.mean_hat.unwrap_or(f64::NAN)
        ),
    )
}

fn visits_monotone() -> Outcome {
    let mut spec = ExperimentSpec::new(ExperimentKind::SingleLinkVisitsSweep);
    spec.visits = vec![2, 5, 10, 20];
    let r = run_visits_sweep(&spec).expect("sweep");
    let widths: Vec<f64> = r.points.iter().map(|p| p.mean_width.unwrap_or(f64::NAN)).collect();
    let decreasing = widths.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = widths.iter().map(|w| format!("{w:.3}")).collect();
    check(decreasing, format!("mean CI width at 2/5/10/20 visits: {}", shown.join(" > ")))
}

fn full_network() -> Outcome {
    let spec = ExperimentSpec::new(ExperimentKind::FullNetwork);
    let r = run_full_network(&spec).expect("full network");
    let active = r.active().count();
    let all = r.all_active_estimated(spec.reps);
    let cov = r.mean_interval_coverage();
    let rho = r.length_width_correlation().unwrap_or(f64::NAN);
    check(
        active == 34 && all && cov >= 0.85 && rho < 0.0,
        format!(
            "{active} active links, all estimated every run: {all}, truth in mean 90% CI on {cov:.3} of them (>= 0.85), \
             spearman(length, width) {rho:.3} (< 0); pooled per-run coverage {:.3}",
            r.pooled_coverage()
        ),
    )
}

fn parked() -> (Outcome, String) {
    let mut spec = ExperimentSpec::new(ExperimentKind::FullNetwork);
    spec.reps = 200;
    let r = run_parked(&spec).expect("parked");
    let matched = r.matched_relative_difference();
    let outcome = check(
        matched < 0.05,
        format!(
            "moving {:.4}/min vs counter over the observed spans {:.4}/min: relative difference {matched:.4} (< 0.05)",
            r.mean_moving(),
            r.mean_matched_counter()
        ),
    );
    let info = format!(
        "whole-run counter {:.4}/min, relative difference {:.4} with speed std {} m/s",
        r.mean_counter(),
        r.relative_difference(),
        spec.scenario.pedestrian_speed.std
    );
    (outcome, info)
}

fn independence() -> Outcome {
    let mut spec = ExperimentSpec::new(ExperimentKind::FullNetwork);
    spec.reps = 20;
    spec.rate_per_min = 6.0;
    let runs = run_pacing(&spec).expect("pacing").runs;
    let paced = runs
        .iter()
        .all(|r| r.snapshots > 1 && r.accepted == 1 && r.rejected == r.snapshots - 1 && r.ledger_disjoint);
    let rejected: usize = runs.iter().map(|r| r.rejected).sum();
    let later: usize = runs.iter().map(|r| r.snapshots - 1).sum();
    let graph = pedrate::network::NetworkGraph::benchmark();
    let mut disjoint = true;
    for seed in 0..5 {
        let cfg = ScenarioConfig {
            seed,
            duration_s: 900.0,
            ..ScenarioConfig::default()
        };
        let out = simulate(&graph, &cfg).expect("simulation");
        let mut obs = pedrate::estimator::MovingObserver::new(Default::default()).expect("config");
        obs.observe_all(&out.log.snapshots).expect("snapshots");
        disjoint &= obs.ledger().is_pairwise_disjoint();
    }
    check(
        paced && disjoint,
        format!(
            "paced runs: {rejected} of {later} later snapshots rejected over {} runs; \
             ledgers disjoint on paced and benchmark runs: {}",
            runs.len(),
            paced && disjoint
        ),
    )
}

fn fusion() -> (Outcome, String) {
    let spec = ExperimentSpec::new(ExperimentKind::Roc);
    let r = run_roc(&spec).expect("roc");
    let hit = r.mean_hit_at(Method::Df, 1.5);
    let d = &r.dominance;
    let outcome = check(
        d.dominates && hit >= 0.90,
        format!(
            "{} corpora: DF dominates MLF {} (worst margin {:.4}); mean hit rate at 1.5 FP/min DF {hit:.3} (>= 0.90), MLF {:.3}",
            r.df.len(),
            d.dominates,
            d.worst_margin,
            r.mean_hit_at(Method::Mlf, 1.5)
        ),
    );
    let mut narrow = spec.clone();
    narrow.fusion = Some(FusionParams::default());
    let n = run_roc(&narrow).expect("roc");
    let info = format!(
        "with sigma = (2 deg)^2: DF {:.3} vs MLF {:.3} at 1.5 FP/min, worst margin {:.4}",
        n.mean_hit_at(Method::Df, 1.5),
        n.mean_hit_at(Method::Mlf, 1.5),
        n.dominance.worst_margin
    );
    (outcome, info)
}

fn outputs(report: &Report) -> Vec<(String, String)> {
    let mut files = report.tables.clone();
    files.push(("report.json".into(), report.json()));
    files
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let graph = single_link_graph(3.0).expect("graph");
    let cfg = ScenarioConfig {
        seed: 11,
        duration_s: 1200.0,
        ..ScenarioConfig::default()
    };
    let log = simulate(&graph, &cfg).expect("simulation").log;
    log.save(dir.path().join("events.csv")).expect("save log");

    let mut specs = Vec::new();
    for kind in [
        ExperimentKind::FullNetwork,
        ExperimentKind::SingleLinkVisitsSweep,
        ExperimentKind::RateSweep,
        ExperimentKind::Roc,
        ExperimentKind::HardwareReplay,
    ] {
        let mut s = ExperimentSpec::new(kind);
        s.reps = 3;
        s.roc_seeds = 2;
        s.scenario.seed = 5;
        s.scenario.duration_s = 600.0;
        s.log_dir = Some(dir.path().to_path_buf());
        specs.push(s);
    }
    let mut identical = 0;
    for spec in &specs {
        let a = experiment::run(spec).expect("first run");
        let b = experiment::run(spec).expect("second run");
        let embedded: serde_json::Value = serde_json::from_str(&a.json()).expect("report json");
        let again: ExperimentSpec = serde_json::from_value(embedded["spec"].clone()).expect("embedded spec");
        let c = experiment::run(&again).expect("rerun from report");
        if outputs(&a) == outputs(&b) && outputs(&a) == outputs(&c) {
            identical += 1;
        }
    }
    let first = log.to_csv_string();
    let second = simulate(&graph, &cfg).expect("simulation").log.to_csv_string();
    check(
        identical == specs.len() && first == second,
        format!(
            "{identical} of {} experiment kinds byte-identical on rerun and from the embedded spec; event log identical: {}",
            specs.len(),
            first == second
        ),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, run: &dyn Fn() -> (Outcome, Option<String>)| {
        let start = Instant::now();
        let (o, info) = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} {n} {name}: {} [{secs:.1} s]", o.detail);
        if let Some(i) = info {
            println!("     info: {i}");
        }
        failed += usize::from(!o.pass);
    };
    report(1, "quantile oracle", &|| (quantile_oracle(), None));
    report(2, "counter statistics", &|| (counter_statistics(), None));
    report(3, "single-link moving observer", &|| (single_link(), None));
    report(4, "visits sweep", &|| (visits_monotone(), None));
    report(5, "full network", &|| (full_network(), None));
    report(6, "parked vehicle", &|| {
        let (o, i) = parked();
        (o, Some(i))
    });
    report(7, "independence filter", &|| (independence(), None));
    report(8, "fusion DF vs MLF", &|| {
        let (o, i) = fusion();
        (o, Some(i))
    });
    report(9, "determinism", &|| (determinism(), None));
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
