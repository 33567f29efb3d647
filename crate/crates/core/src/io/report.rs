//! Comma-separated run reports.

use std::io::Write;

use crate::error::{Error, Result};
use crate::sparsify::ReportRow;

pub const REPORT_HEADER: &str = "iteration,mu_max,edge_ratio,wall_time_seconds,edges_added,edges_rejected";

/// Writes one line per row after the header. With `timings = false` the
/// wall-clock column is written as zero so that reports are reproducible.
pub fn write_report<W: Write>(rows: &[ReportRow], timings: bool, mut out: W) -> Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for r in rows {
        let time = if timings { r.wall_time_seconds } else { 0.0 };
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{},{}",
            r.iteration, r.mu_max, r.edge_ratio, time, r.edges_added, r.edges_rejected
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_report(text: &str) -> Result<Vec<ReportRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == REPORT_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "unexpected report header".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let err = |m: &str| Error::Parse {
                line: i + 1,
                message: m.into(),
            };
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 6 {
                return Err(err("expected six columns"));
            }
            let int = |s: &str| s.trim().parse::<usize>().map_err(|_| err("invalid integer"));
            let real = |s: &str| s.trim().parse::<f64>().map_err(|_| err("invalid number"));
            Ok(ReportRow {
                iteration: int(f[0])?,
                mu_max: real(f[1])?,
                edge_ratio: real(f[2])?,
                wall_time_seconds: real(f[3])?,
                edges_added: int(f[4])?,
                edges_rejected: int(f[5])?,
            })
        })
        .collect()
}
