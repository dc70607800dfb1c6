//! Stable CSV outputs: one summary row per scenario, one trace row per AO
//! iteration. Floats carry 9 significant digits.

use std::io::Write;

use super::run::{ScenarioRun, SweepRow};
use crate::Result;

pub const SUMMARY_HEADER: [&str; 9] = [
    "axis_value",
    "pass_lossy_wc_ar",
    "pass_lossy_perfect_ar",
    "pass_lossless_wc_ar",
    "baseline_wc_ar",
    "baseline_perfect_ar",
    "nonoutage_ar",
    "trials",
    "seed",
];

pub const TRACE_HEADER: [&str; 6] = ["axis_value", "trial", "series", "iteration", "after_w", "after_p"];

/// `x` with 9 significant digits: positional for moderate magnitudes,
/// scientific otherwise. Non-finite values print as `NaN`, `inf`, `-inf`.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.00000000".into();
    }
    let sci = format!("{x:.8e}");
    let exponent: i32 = sci[sci.find('e').map_or(sci.len(), |i| i + 1)..].parse().unwrap_or(0);
    if (-5..9).contains(&exponent) {
        let decimals = (8 - exponent) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

fn map_csv(e: ::csv::Error) -> crate::Error {
    match e.into_kind() {
        ::csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}

fn summary_record(row: &SweepRow) -> [String; 9] {
    [
        format_float(row.axis_value),
        format_float(row.pass_lossy_wc_ar),
        format_float(row.pass_lossy_perfect_ar),
        format_float(row.pass_lossless_wc_ar),
        format_float(row.baseline_wc_ar),
        format_float(row.baseline_perfect_ar),
        format_float(row.nonoutage_ar),
        row.trials.to_string(),
        row.seed.to_string(),
    ]
}

pub fn write_summary<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER).map_err(map_csv)?;
    for row in rows {
        w.write_record(summary_record(row)).map_err(map_csv)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_traces<'a, W: Write>(out: W, runs: impl IntoIterator<Item = &'a ScenarioRun>) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER).map_err(map_csv)?;
    for run in runs {
        for (trial, series, entry) in run.traces() {
            w.write_record([
                format_float(run.row.axis_value),
                trial.to_string(),
                series.name().to_string(),
                entry.iteration.to_string(),
                format_float(entry.after_w),
                entry.after_p.map_or_else(String::new, format_float),
            ])
            .map_err(map_csv)?;
        }
    }
    w.flush()?;
    Ok(())
}
