//! Text, CSV and JSON renderings of run and sweep reports.
//!
//! Floats in CSV are written in shortest round-trip form, so a CSV file
//! parses back to the exact values of the JSON report.

use std::fmt::Write;

use anyhow::Result;

use crate::config::Format;
use crate::runner::{CellReport, Report};
use crate::sweep::SweepReport;

pub const CSV_HEADER: &str = "estimator,n,b,N,R,mean_estimate,mean_std_err,mean_time_s,nsm,seed";

pub fn render(report: &Report, format: Format) -> Result<String> {
    Ok(match format {
        Format::Table => table(report),
        Format::Csv => csv(report),
        Format::Json => json(report)?,
    })
}

pub fn render_sweep(report: &SweepReport, format: Format) -> Result<String> {
    Ok(match format {
        Format::Table => sweep_table(report),
        Format::Csv => sweep_csv(report),
        Format::Json => json(report)?,
    })
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Quotes a CSV field when it needs it.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn csv(report: &Report) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in &report.cells {
        let s = &c.summary;
        let _ = writeln!(
            out,
            "{},{},{:e},{},{},{:e},{:e},{:e},{:e},{}",
            field(&c.estimator),
            c.n,
            c.b,
            c.samples,
            c.repetitions,
            s.mean_estimate,
            s.mean_std_err,
            s.mean_time_s,
            s.nsm,
            c.seed
        );
    }
    out
}

/// Groups of cells sharing `(n, b)`, in report order.
fn blocks(report: &Report) -> Vec<&[CellReport]> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=report.cells.len() {
        let split = k == report.cells.len() || {
            let (x, y) = (&report.cells[k - 1], &report.cells[k]);
            (x.n, x.b) != (y.n, y.b)
        };
        if split {
            out.push(&report.cells[start..k]);
            start = k;
        }
    }
    out
}

const W: usize = 13;

/// Rows of `(n, b)`; each cell shows mean estimate, `(mean std error)` and
/// `[mean time]` on three lines.
pub fn table(report: &Report) -> String {
    let mut out = String::new();
    let mut labels: Vec<&str> = Vec::new();
    for c in &report.cells {
        if !labels.contains(&c.estimator.as_str()) {
            labels.push(&c.estimator);
        }
    }
    let _ = write!(out, "{:>4} {:>9} {:>W$}", "n", "b", "true value");
    for l in &labels {
        let _ = write!(out, " {l:>W$}");
    }
    out.push('\n');
    let rule = "-".repeat(4 + 1 + 9 + (1 + W) * (labels.len() + 1));
    let mut notes = Vec::new();
    for block in blocks(report) {
        let first = &block[0];
        out.push_str(&rule);
        out.push('\n');
        let find = |l: &str| block.iter().find(|c| c.estimator == l);
        let mut lines = [String::new(), String::new(), String::new()];
        let _ = write!(lines[0], "{:>4} {:>9} {:>W$.4e}", first.n, format!("{:e}", first.b), first.reference);
        let quoted = first.quoted_true_value.map(|q| format!("({q:.4e})")).unwrap_or_default();
        let _ = write!(lines[1], "{:>4} {:>9} {:>W$}", "", "", quoted);
        let _ = write!(lines[2], "{:>4} {:>9} {:>W$}", "", "", "");
        for l in &labels {
            let (a, b, c) = match find(l) {
                Some(c) => (
                    format!("{:.4e}", c.summary.mean_estimate),
                    format!("({:.2e})", c.summary.mean_std_err),
                    if report.timing { format!("[{:.3}]", c.summary.mean_time_s) } else { String::new() },
                ),
                None => Default::default(),
            };
            let _ = write!(lines[0], " {a:>W$}");
            let _ = write!(lines[1], " {b:>W$}");
            let _ = write!(lines[2], " {c:>W$}");
        }
        for l in lines {
            out.push_str(l.trim_end());
            out.push('\n');
        }
        for c in block {
            for f in &c.flags {
                notes.push(format!("n = {}, b = {:e}, {}: {f}", c.n, c.b, c.estimator));
            }
        }
    }
    out.push_str(&rule);
    out.push('\n');
    out.push_str("cells: avg. estimate / (avg. std. error) / [avg. time (s)]; ");
    out.push_str("true value: quadrature for n ≤ 3, else n·F̄(b) (quoted value in parentheses)\n");
    if let Some(c) = report.cells.first() {
        let _ = writeln!(out, "N = {}, R = {}, seed = {}", c.samples, c.repetitions, c.seed);
    }
    notes.dedup();
    for n in notes {
        let _ = writeln!(out, "flag: {n}");
    }
    out
}

pub const SWEEP_CSV_HEADER: &str = "estimator,n,b,a,mean_estimate,reference,nsm,nsm_std_err,bound,seed";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for t in &report.trends {
        for p in &t.points {
            let _ = writeln!(
                out,
                "{},{},{:e},{},{:e},{:e},{:e},{:e},{},{}",
                field(&t.estimator),
                report.n,
                p.b,
                opt(p.a),
                p.mean_estimate,
                p.reference,
                p.nsm,
                p.nsm_std_err,
                opt(p.bound),
                report.seed
            );
        }
    }
    out
}

pub fn sweep_table(report: &SweepReport) -> String {
    let mut out = String::new();
    let _ =
        writeln!(out, "n = {}, N = {}, R = {}, seed = {}", report.n, report.samples, report.repetitions, report.seed);
    for t in &report.trends {
        let _ = writeln!(out, "\n{} ({})", t.estimator, t.method);
        let _ = writeln!(out, "{:>10} {:>10} {:>12} {:>10} {:>10}", "b", "a", "nsm", "± se", "bound");
        for p in &t.points {
            let a = p.a.map(|a| format!("{a:.6}")).unwrap_or_default();
            let bound = p.bound.map(|v| format!("{v:.6}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{:>10} {a:>10} {:>12.6} {:>10.2e} {bound:>10}",
                format!("{:e}", p.b),
                p.nsm,
                p.nsm_std_err
            );
        }
        match (t.slope_per_decade, t.slope_std_err) {
            (Some(s), Some(se)) => {
                let _ = writeln!(
                    out,
                    "slope per decade {s:.3e} ± {se:.1e}; first-to-last decrease z = {:.2}",
                    t.decrease_z
                );
            }
            _ => {
                let _ = writeln!(out, "first-to-last decrease z = {:.2}", t.decrease_z);
            }
        }
    }
    out
}
