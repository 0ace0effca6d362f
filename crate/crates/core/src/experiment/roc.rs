use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::fusion::{
    dominance, generate_detection_corpus, interpolate_hit_rate, roc_sweep, write_roc_csv, DetectionCorpus, Dominance,
    FusionParams, Method, RocPoint,
};

use super::{ExperimentError, ExperimentSpec, Report};

/// FP/min values reported in the summary.
pub const OPERATING_POINTS: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 3.0];

#[derive(Clone, Debug, PartialEq)]
pub struct RocResult {
    pub params: FusionParams,
    /// Corpus seeds, or empty for a recorded corpus.
    pub seeds: Vec<u64>,
    pub df: Vec<Vec<RocPoint>>,
    pub mlf: Vec<Vec<RocPoint>>,
    pub dominance: Dominance,
}

/// Highest hit rate among points at or below `max_fp`.
pub fn best_hit_at(curve: &[RocPoint], max_fp: f64) -> f64 {
    curve
        .iter()
        .filter(|p| p.false_positives_per_minute <= max_fp)
        .map(|p| p.hit_rate)
        .fold(0.0, f64::max)
}

impl RocResult {
    /// Mean interpolated hit rate over corpora at `fp` per minute.
    pub fn mean_hit_at(&self, method: Method, fp: f64) -> f64 {
        let curves = match method {
            Method::Df => &self.df,
            Method::Mlf => &self.mlf,
        };
        curves.iter().map(|c| interpolate_hit_rate(c, fp).unwrap_or(0.0)).sum::<f64>() / curves.len().max(1) as f64
    }

    pub fn report(&self, spec: &ExperimentSpec) -> Report {
        let csv = |c: &[RocPoint]| {
            let mut buf = Vec::new();
            write_roc_csv(&mut buf, c).expect("writing to memory");
            String::from_utf8(buf).expect("csv is utf-8")
        };
        let mut mean = String::from("fp_per_min,df_hit_rate,mlf_hit_rate\n");
        for ((x, a), b) in self.dominance.grid.iter().zip(&self.dominance.mean_df).zip(&self.dominance.mean_mlf) {
            let _ = writeln!(mean, "{x},{a},{b}");
        }
        let points: Vec<_> = OPERATING_POINTS
            .iter()
            .map(|&fp| {
                json!({
                    "fp_per_min": fp,
                    "df_hit_rate": self.mean_hit_at(Method::Df, fp),
                    "mlf_hit_rate": self.mean_hit_at(Method::Mlf, fp),
                })
            })
            .collect();
        Report {
            spec: spec.clone(),
            summary: json!({
                "sigma": self.params.sigma,
                "gate": self.params.gate,
                "corpora": self.df.len(),
                "seeds": self.seeds,
                "df_dominates": self.dominance.dominates,
                "worst_margin": self.dominance.worst_margin,
                "worst_margin_at": self.dominance.worst_at,
                "support_fp_per_min": self.dominance.support,
                "operating_points": points,
                "first_df_best_hit_at_1_5": self.df.first().map(|c| best_hit_at(c, 1.5)),
            }),
            tables: vec![
                ("roc_df.csv".into(), csv(&self.df[0])),
                ("roc_mlf.csv".into(), csv(&self.mlf[0])),
                ("roc_mean.csv".into(), mean),
            ],
        }
    }
}

/// DF and MLF curves on `roc_seeds` generated corpora, or on the recorded
/// `corpus_file`.
pub fn run_roc(spec: &ExperimentSpec) -> Result<RocResult, ExperimentError> {
    spec.validate()?;
    let params = spec.fusion_params();
    let curves = |corpus: &DetectionCorpus| -> Result<_, ExperimentError> {
        Ok((
            roc_sweep(corpus, Method::Df, params)?,
            roc_sweep(corpus, Method::Mlf, params)?,
        ))
    };
    let (seeds, pairs): (Vec<u64>, Vec<_>) = match &spec.corpus_file {
        Some(path) => (Vec::new(), vec![curves(&DetectionCorpus::load(path)?)?]),
        None => {
            let seeds: Vec<u64> = (0..spec.roc_seeds).map(|i| spec.seed_for(i)).collect();
            let pairs = seeds
                .par_iter()
                .map(|&s| {
                    let corpus = generate_detection_corpus(&spec.corpus, &mut ChaCha8Rng::seed_from_u64(s))?;
                    curves(&corpus)
                })
                .collect::<Result<Vec<_>, _>>()?;
            (seeds, pairs)
        }
    };
    let (df, mlf): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let dominance = dominance(&df, &mlf, 201);
    Ok(RocResult {
        params,
        seeds,
        df,
        mlf,
        dominance,
    })
}
