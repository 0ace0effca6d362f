use std::io::Write;

use serde::Serialize;

use super::{classify, score_frames, DetectionCorpus, FusionError, FusionParams, Method, TrackLabel};

pub const ROC_HEADER: &str = "threshold,hit_rate,fp_per_min";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    /// Fraction of pedestrian tracks labelled pedestrian.
    pub hit_rate: f64,
    /// Clutter tracks labelled pedestrian, per minute of data.
    pub false_positives_per_minute: f64,
}

/// One point per threshold, in the order given. Totals never decrease, so a
/// track classified at any instant is classified by its final total.
pub fn roc_curve(
    corpus: &DetectionCorpus,
    method: Method,
    thresholds: &[f64],
    params: FusionParams,
) -> Result<Vec<RocPoint>, FusionError> {
    if !(corpus.duration_s > 0.0) {
        return Err(FusionError::ZeroDuration(corpus.duration_s));
    }
    let ledger = score_frames(&corpus.frames, method, params)?;
    let peds = corpus.count(TrackLabel::Pedestrian);
    thresholds
        .iter()
        .map(|&threshold| {
            let labelled = classify(&ledger, threshold)?;
            let (mut hits, mut fps) = (0usize, 0usize);
            for id in &labelled {
                match corpus.labels.get(id) {
                    Some(TrackLabel::Pedestrian) => hits += 1,
                    Some(TrackLabel::Clutter) => fps += 1,
                    None => {}
                }
            }
            Ok(RocPoint {
                threshold,
                hit_rate: if peds == 0 { 0.0 } else { hits as f64 / peds as f64 },
                false_positives_per_minute: fps as f64 / corpus.duration_min(),
            })
        })
        .collect()
}

/// Full curve: zero, every distinct final score, and infinity.
pub fn roc_sweep(corpus: &DetectionCorpus, method: Method, params: FusionParams) -> Result<Vec<RocPoint>, FusionError> {
    let ledger = score_frames(&corpus.frames, method, params)?;
    let mut thresholds: Vec<f64> = std::iter::once(0.0)
        .chain(ledger.totals().values().copied())
        .chain(std::iter::once(f64::INFINITY))
        .collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    roc_curve(corpus, method, &thresholds, params)
}

/// Hit rate of the linearly interpolated curve at `fp` per minute; the best
/// value where the curve is vertical. `None` beyond the curve's support.
pub fn interpolate_hit_rate(points: &[RocPoint], fp: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.false_positives_per_minute, p.hit_rate))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut best: Option<f64> = None;
    let mut consider = |v: f64| best = Some(best.map_or(v, |b: f64| b.max(v)));
    for w in pts.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if fp < x0 || fp > x1 {
            continue;
        }
        if x1 == x0 {
            consider(y1);
        } else {
            consider(y0 + (y1 - y0) * (fp - x0) / (x1 - x0));
        }
    }
    if let [(x, y)] = pts.as_slice() {
        if fp == *x {
            consider(*y);
        }
    }
    best
}

/// Seed-averaged comparison of two families of curves on a common grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dominance {
    /// Largest FP/min covered by every curve.
    pub support: f64,
    pub grid: Vec<f64>,
    pub mean_df: Vec<f64>,
    pub mean_mlf: Vec<f64>,
    /// Smallest `mean_df - mean_mlf` over the grid.
    pub worst_margin: f64,
    pub worst_at: f64,
    pub dominates: bool,
}

/// Averages each family at `grid_points` evenly spaced FP/min values over
/// the common support and checks DF on or above MLF everywhere.
pub fn dominance(df: &[Vec<RocPoint>], mlf: &[Vec<RocPoint>], grid_points: usize) -> Dominance {
    let max_fp = |c: &Vec<RocPoint>| {
        c.iter()
            .map(|p| p.false_positives_per_minute)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let support = df.iter().chain(mlf).map(max_fp).fold(f64::INFINITY, f64::min);
    let n = grid_points.max(2);
    let grid: Vec<f64> = if support.is_finite() && support >= 0.0 {
        (0..n).map(|i| support * i as f64 / (n - 1) as f64).collect()
    } else {
        Vec::new()
    };
    let mean = |family: &[Vec<RocPoint>], x: f64| {
        family
            .iter()
            .map(|c| interpolate_hit_rate(c, x).unwrap_or(0.0))
            .sum::<f64>()
            / family.len().max(1) as f64
    };
    let mean_df: Vec<f64> = grid.iter().map(|&x| mean(df, x)).collect();
    let mean_mlf: Vec<f64> = grid.iter().map(|&x| mean(mlf, x)).collect();
    let (worst_margin, worst_at) = grid
        .iter()
        .zip(mean_df.iter().zip(&mean_mlf))
        .map(|(&x, (a, b))| (a - b, x))
        .fold((f64::INFINITY, f64::NAN), |acc, v| if v.0 < acc.0 { v } else { acc });
    Dominance {
        support,
        dominates: !grid.is_empty() && worst_margin >= -1e-12,
        grid,
        mean_df,
        mean_mlf,
        worst_margin,
        worst_at,
    }
}

pub fn write_roc_csv<W: Write>(mut out: W, points: &[RocPoint]) -> std::io::Result<()> {
    writeln!(out, "{ROC_HEADER}")?;
    for p in points {
        writeln!(out, "{},{},{}", p.threshold, p.hit_rate, p.false_positives_per_minute)?;
    }
    Ok(())
}
