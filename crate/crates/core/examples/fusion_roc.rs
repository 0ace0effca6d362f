//! DF vs MLF ROC curves on synthetic detection corpora, averaged over seeds.
//! Runs the misalignment-matched kernel and the narrow default kernel.
//!
//! `cargo run --release --example fusion_roc [seeds]`

use pedrate::experiment::{best_hit_at, run_roc, ExperimentKind, ExperimentSpec, OPERATING_POINTS};
use pedrate::fusion::{FusionParams, Method};

fn main() {
    let seeds: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let mut spec = ExperimentSpec::new(ExperimentKind::Roc);
    spec.roc_seeds = seeds;
    for (label, params) in [
        ("matched to 2 deg misalignment", FusionParams::for_misalignment(2.0)),
        ("narrow default kernel", FusionParams::default()),
    ] {
        spec.fusion = Some(params);
        let r = run_roc(&spec).expect("roc run");
        println!("{label}: sigma {:.5} rad^2", params.sigma);
        for (seed, (df, mlf)) in r.seeds.iter().zip(r.df.iter().zip(&r.mlf)) {
            println!(
                "  seed {seed:2}: best hit at <=1.5 FP/min  DF {:.3}  MLF {:.3}",
                best_hit_at(df, 1.5),
                best_hit_at(mlf, 1.5)
            );
        }
        for fp in OPERATING_POINTS {
            println!(
                "  {fp:4.2} FP/min: DF {:.3}  MLF {:.3}",
                r.mean_hit_at(Method::Df, fp),
                r.mean_hit_at(Method::Mlf, fp)
            );
        }
        let d = &r.dominance;
        println!(
            "  worst DF-MLF margin {:.4} at {:.2} FP/min, DF dominates: {}\n",
            d.worst_margin, d.worst_at, d.dominates
        );
    }
}
