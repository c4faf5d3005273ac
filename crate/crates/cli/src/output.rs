//! Persistent run outputs and console tables.
//!
//! All fractional columns print with six decimals. Times and periods are
//! rendered from their integer microsecond values, never through
//! floating point, so reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use wsansim_core::metrics::RunSummary;
use wsansim_core::sim::RunOutput;

use crate::CliError;

/// Seconds with six decimals from integer microseconds.
pub fn fmt_secs(us: u64) -> String {
    format!("{}.{:06}", us / 1_000_000, us % 1_000_000)
}

/// Milliseconds with six decimals from integer microseconds.
pub fn fmt_ms(us: u64) -> String {
    format!("{}.{:03}000", us / 1_000, us % 1_000)
}

/// `time_s,flow,window_dmr,period_ms,released,missed`, one row per
/// (window, managed flow), time-major.
pub fn render_timeseries(summary: &RunSummary) -> String {
    let mut out = String::from("time_s,flow,window_dmr,period_ms,released,missed\n");
    for row in &summary.rows {
        let flow = &summary.flows[row.flow.0].name;
        let _ = writeln!(
            out,
            "{},{},{:.6},{},{},{}",
            fmt_secs(row.window_end.micros()),
            flow,
            row.dmr,
            fmt_ms(row.period_us),
            row.released,
            row.missed
        );
    }
    out
}

/// `flow,avg_dmr,released,on_time,missed_expired,missed_dropped,final_period_ms`,
/// one row per flow in declaration order; the DMR column is empty for
/// flows that never released.
pub fn render_summary_csv(summary: &RunSummary) -> String {
    let mut out =
        String::from("flow,avg_dmr,released,on_time,missed_expired,missed_dropped,final_period_ms\n");
    for f in &summary.flows {
        let dmr = f.avg_dmr.map(|d| format!("{d:.6}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            f.name,
            dmr,
            f.released,
            f.on_time,
            f.missed_expired,
            f.missed_dropped,
            fmt_ms(f.final_period_us)
        );
    }
    out
}

/// Per-flow console table mirroring `summary.csv`.
pub fn render_summary_table(summary: &RunSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:<8} {:>9} {:>9} {:>8} {:>15} {:>15} {:>16}",
        "flow", "managed", "avg_dmr", "released", "on_time", "missed_expired", "missed_dropped",
        "final_period_ms"
    );
    for f in &summary.flows {
        let dmr = f.avg_dmr.map(|d| format!("{d:.6}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<10} {:<8} {:>9} {:>9} {:>8} {:>15} {:>15} {:>16}",
            f.name,
            if f.managed { "yes" } else { "no" },
            dmr,
            f.released,
            f.on_time,
            f.missed_expired,
            f.missed_dropped,
            fmt_ms(f.final_period_us)
        );
    }
    out
}

/// Side-by-side open-loop vs closed-loop table over managed flows.
pub fn render_compare_table(open: &RunSummary, fuzzy: &RunSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>10} {:>10} {:>10}",
        "flow", "open_dmr", "fuzzy_dmr", "reduction"
    );
    for (fo, ff) in open.flows.iter().zip(&fuzzy.flows) {
        if !fo.managed {
            continue;
        }
        let cell = |v: Option<f64>| v.map(|d| format!("{d:.6}")).unwrap_or_else(|| "-".into());
        let reduction = match (fo.avg_dmr, ff.avg_dmr) {
            (Some(o), Some(f)) if f > 0.0 => format!("{:.2}x", o / f),
            _ => "-".into(),
        };
        let _ = writeln!(
            out,
            "{:<10} {:>10} {:>10} {:>10}",
            fo.name,
            cell(fo.avg_dmr),
            cell(ff.avg_dmr),
            reduction
        );
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |source: io::Error| CliError::Output { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    fs::write(path, contents).map_err(|source| {
        // never leave a partial file behind
        let _ = fs::remove_file(path);
        io_err(source)
    })
}

/// Writes `dmr_timeseries.csv`, `summary.csv` and, when the run was
/// traced, `events.log`. Returns the paths written.
pub fn write_outputs(dir: &Path, out: &RunOutput) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    let timeseries = dir.join("dmr_timeseries.csv");
    write_file(&timeseries, &render_timeseries(&out.summary))?;
    written.push(timeseries);
    let summary = dir.join("summary.csv");
    write_file(&summary, &render_summary_csv(&out.summary))?;
    written.push(summary);
    if let Some(trace) = &out.trace {
        let mut text = trace.join("\n");
        text.push('\n');
        let events = dir.join("events.log");
        write_file(&events, &text)?;
        written.push(events);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn microsecond_formatting_is_exact() {
        assert_eq!(fmt_secs(1_000_000), "1.000000");
        assert_eq!(fmt_secs(20_500_000), "20.500000");
        assert_eq!(fmt_secs(999), "0.000999");
        assert_eq!(fmt_ms(10_000), "10.000000");
        assert_eq!(fmt_ms(14_583), "14.583000");
    }
}
