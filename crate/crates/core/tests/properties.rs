use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pedrate::estimator::{
    poisson_estimate, space_mean_speed, window_from_snapshot, EstimatorConfig, MovingObserver, OVERLAP_EPS,
};
use pedrate::fusion::{
    classify, generate_detection_corpus, partial_hit, roc_sweep, score_frames, Assignment, BBoxVectorSet, ClusterFix,
    CorpusConfig, Frame, FusionParams, Method,
};
use pedrate::geom::{angle_between, Point2};
use pedrate::network::NetworkGraph;
use pedrate::simkit::{SeenPedestrian, SensingSnapshot};
use pedrate::stats::{chi2_cdf, chi2_quantile};

fn frame_strategy() -> impl Strategy<Value = Frame> {
    let clusters = prop::collection::vec((-20.0..20.0f64, -20.0..20.0f64), 1..6);
    let dets = prop::collection::vec((-3.2..3.2f64, 0.0..0.1f64), 0..6);
    (0.0..100.0f64, clusters, dets).prop_map(|(time, clusters, dets)| Frame {
        time,
        observer: Point2::new(0.0, 0.0),
        clusters: clusters
            .into_iter()
            .enumerate()
            .map(|(i, (x, y))| ClusterFix {
                id: i as u32,
                position: Point2::new(x + 0.5, y),
            })
            .collect(),
        detections: dets
            .into_iter()
            .map(|(mid, half)| BBoxVectorSet {
                time,
                camera: 0,
                left: mid - half,
                middle: mid,
                right: mid + half,
            })
            .collect(),
        sources: Vec::new(),
    })
}

fn frames_strategy() -> impl Strategy<Value = Vec<Frame>> {
    prop::collection::vec(frame_strategy(), 1..8)
}

fn gated_count(frame: &Frame, det: &BBoxVectorSet, gate: f64) -> usize {
    frame
        .clusters
        .iter()
        .filter(|c| angle_between(frame.observer.bearing_to(c.position), det.middle) <= gate)
        .count()
}

fn snapshot_strategy() -> impl Strategy<Value = Vec<SensingSnapshot>> {
    let one = (
        0.0..0.5f64,
        0u32..3,
        0.0..50.0f64,
        0.5..30.0f64,
        prop::collection::vec(0.4..3.0f64, 0..4),
    );
    prop::collection::vec(one, 1..80).prop_map(|raw| {
        let mut t = 0.0;
        raw.into_iter()
            .map(|(dt, link, x2, d, speeds)| {
                t += dt;
                SensingSnapshot {
                    time: t,
                    link,
                    x1: x2 + d,
                    x2,
                    pedestrians: speeds
                        .into_iter()
                        .enumerate()
                        .map(|(i, speed)| SeenPedestrian {
                            id: i as u64,
                            position: x2 + 0.5 * d,
                            speed,
                        })
                        .collect(),
                }
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn partial_hit_is_a_decreasing_kernel(d in 0.0..10.0f64, extra in 0.0..5.0f64, sigma in 1e-6..10.0f64) {
        let h = partial_hit(d, sigma).unwrap();
        prop_assert!((0.0..=1.0).contains(&h));
        prop_assert!(partial_hit(d + extra, sigma).unwrap() <= h);
        prop_assert_eq!(partial_hit(0.0, sigma).unwrap(), 1.0);
    }

    #[test]
    fn mlf_awards_one_hit_per_gated_detection(frames in frames_strategy()) {
        let params = FusionParams::default();
        let ledger = score_frames(&frames, Method::Mlf, params).unwrap();
        let expected = frames
            .iter()
            .flat_map(|f| f.detections.iter().map(move |d| gated_count(f, d, params.gate)))
            .filter(|&n| n > 0)
            .count();
        let total: f64 = ledger.totals().values().sum();
        prop_assert!((total - expected as f64).abs() < 1e-9);
    }

    #[test]
    fn df_hits_per_detection_are_bounded_by_gated_clusters(frames in frames_strategy()) {
        let params = FusionParams::for_misalignment(2.0);
        let ledger = score_frames(&frames, Method::Df, params).unwrap();
        let bound: usize = frames
            .iter()
            .flat_map(|f| f.detections.iter().map(move |d| gated_count(f, d, params.gate)))
            .sum();
        let total: f64 = ledger.totals().values().sum();
        prop_assert!(total <= bound as f64 + 1e-9);
        prop_assert!(ledger.events().iter().all(|e| (0.0..=1.0).contains(&e.h)));
    }

    #[test]
    fn df_winner_take_all_approaches_mlf_for_wide_kernels(frames in frames_strategy()) {
        let wide = FusionParams { sigma: 1e6, assignment: Assignment::WinnerTakeAll, ..FusionParams::default() };
        let df = score_frames(&frames, Method::Df, wide).unwrap();
        let mlf = score_frames(&frames, Method::Mlf, wide).unwrap();
        prop_assert_eq!(df.totals().keys().collect::<Vec<_>>(), mlf.totals().keys().collect::<Vec<_>>());
        for (id, &t) in mlf.totals() {
            prop_assert!((df.total(*id).unwrap() - t).abs() <= 1e-5 * t.max(1.0));
        }
    }

    #[test]
    fn raising_the_threshold_never_adds_clusters(frames in frames_strategy(), a in 0.0..5.0f64, b in 0.0..5.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let ledger = score_frames(&frames, Method::Df, FusionParams::for_misalignment(2.0)).unwrap();
        let strict = classify(&ledger, hi).unwrap();
        prop_assert!(strict.is_subset(&classify(&ledger, lo).unwrap()));
    }

    #[test]
    fn space_mean_speed_lies_between_min_and_arithmetic_mean(speeds in prop::collection::vec(0.1..5.0f64, 1..20)) {
        let hm = space_mean_speed(&speeds).unwrap();
        let am = speeds.iter().sum::<f64>() / speeds.len() as f64;
        let min = speeds.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(hm >= min - 1e-12);
        prop_assert!(hm <= am + 1e-12);
    }

    #[test]
    fn projected_windows_follow_the_snapshot(snaps in snapshot_strategy()) {
        let cfg = EstimatorConfig::default();
        for s in &snaps {
            let w = window_from_snapshot(s, &cfg).unwrap();
            prop_assert!((w.t1 - (s.time - s.x1 / w.speed)).abs() < 1e-9);
            prop_assert!((w.t2 - (s.time - s.x2 / w.speed)).abs() < 1e-9);
            prop_assert!((w.tau() - s.d_obs() / w.speed).abs() < 1e-9);
            prop_assert_eq!(w.count, s.pedestrians.len() as u64);
        }
    }

    #[test]
    fn accepted_windows_never_overlap(snaps in snapshot_strategy()) {
        let mut obs = MovingObserver::new(EstimatorConfig::default()).unwrap();
        obs.observe_all(&snaps).unwrap();
        prop_assert!(obs.ledger().is_pairwise_disjoint());
        for link in 0..3 {
            let acc = obs.accepted(link);
            for (i, a) in acc.iter().enumerate() {
                for b in &acc[i + 1..] {
                    let overlap = a.t2.min(b.t2) - a.t1.max(b.t1);
                    prop_assert!(overlap <= OVERLAP_EPS);
                }
            }
        }
        let total = (0..3).map(|l| obs.accepted(l).len()).sum::<usize>() + obs.rejected().len();
        prop_assert_eq!(total, snaps.len());
    }

    #[test]
    fn poisson_interval_brackets_and_grows_with_counts(n in 0u64..500, period in 1.0..1e5f64) {
        let e = poisson_estimate(0, n, period, 0.1).unwrap();
        let next = poisson_estimate(0, n + 1, period, 0.1).unwrap();
        prop_assert!(e.lambda_lo <= e.lambda_hat && e.lambda_hat <= e.lambda_hi);
        prop_assert_eq!(e.lambda_lo == 0.0, n == 0);
        prop_assert!(next.lambda_lo > e.lambda_lo && next.lambda_hi > e.lambda_hi);
    }

    #[test]
    fn chi2_quantile_inverts_the_cdf(p in 0.001..0.999f64, dof in 1u32..300) {
        let x = chi2_quantile(p, dof as f64);
        prop_assert!((chi2_cdf(x, dof as f64) - p).abs() < 1e-8);
    }

    #[test]
    fn link_rates_scale_with_route_rates(k in 0.0..10.0f64) {
        let g = NetworkGraph::benchmark();
        let base = g.link_rates();
        let scaled = g.with_scaled_rates(k).link_rates();
        for (link, r) in base {
            prop_assert!((scaled[&link] - k * r).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn roc_points_fall_as_the_threshold_rises(seed in any::<u64>()) {
        let cfg = CorpusConfig { duration_s: 240.0, pedestrians: 40, clutter: 50, ..CorpusConfig::default() };
        let corpus = generate_detection_corpus(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        for method in [Method::Df, Method::Mlf] {
            let pts = roc_sweep(&corpus, method, FusionParams::for_misalignment(2.0)).unwrap();
            prop_assert_eq!(pts.last().unwrap().hit_rate, 0.0);
            for w in pts.windows(2) {
                prop_assert!(w[0].threshold < w[1].threshold);
                prop_assert!(w[1].hit_rate <= w[0].hit_rate);
                prop_assert!(w[1].false_positives_per_minute <= w[0].false_positives_per_minute);
            }
        }
    }
}
