//! Vehicle pacing pedestrians at the same speed: every window after the
//! first on the link overlaps and is rejected.
//!
//! `cargo run --release --example pacing [reps]`

use pedrate::experiment::{run_pacing, ExperimentKind, ExperimentSpec};

fn main() {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let mut spec = ExperimentSpec::new(ExperimentKind::FullNetwork);
    spec.reps = reps;
    spec.rate_per_min = 6.0;
    for run in run_pacing(&spec).expect("pacing run").runs {
        println!(
            "seed {:2}: {} snapshots, {} accepted, {} rejected, ledger disjoint {}",
            run.seed, run.snapshots, run.accepted, run.rejected, run.ledger_disjoint
        );
    }
}
