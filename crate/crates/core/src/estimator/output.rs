use std::io::Write;

use super::{ProfilePoint, RateOutcome};

pub const ESTIMATE_HEADER: &str = "link_id,eval_time,lambda_hat,lambda_lo,lambda_hi,Nc,Tc_seconds";
pub const PROFILE_HEADER: &str = "link_id,eval_time,lambda_hat,lambda_lo,lambda_hi,Nc,Tc_seconds,flag";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn row(outcome: &RateOutcome) -> String {
    match outcome {
        RateOutcome::Estimate(e) => format!(
            "{},{},{},{},{},{},{}",
            e.link,
            opt(e.eval_time),
            e.lambda_hat,
            e.lambda_lo,
            e.lambda_hi,
            e.counts,
            e.period_s
        ),
        RateOutcome::NoData { link, eval_time } => {
            format!("{},{},,,,0,0", link, opt(*eval_time))
        }
    }
}

/// Estimate table; "no data" rows leave the rate columns empty.
pub fn write_estimates_csv<'a, W: Write>(
    mut out: W,
    rows: impl IntoIterator<Item = &'a RateOutcome>,
) -> std::io::Result<()> {
    writeln!(out, "{ESTIMATE_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", row(r))?;
    }
    Ok(())
}

/// Profile table with a trailing `flag` column: `ok`, `short` (averaging
/// window truncated at the data edge) or `gap` (no data).
pub fn write_profile_csv<'a, W: Write>(
    mut out: W,
    points: impl IntoIterator<Item = &'a ProfilePoint>,
) -> std::io::Result<()> {
    writeln!(out, "{PROFILE_HEADER}")?;
    for p in points {
        let flag = match (&p.outcome, p.shortened) {
            (RateOutcome::NoData { .. }, _) => "gap",
            (_, true) => "short",
            _ => "ok",
        };
        writeln!(out, "{},{}", row(&p.outcome), flag)?;
    }
    Ok(())
}
