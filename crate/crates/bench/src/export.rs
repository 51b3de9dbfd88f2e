//! Writers for trial CSV, JSON reports, the summary table, sweeps and rank traces.
//!
//! Floats are written with Rust's shortest round-trip formatting so a CSV
//! read back yields bit-identical values.

use std::fmt::Write as _;
use std::io::{Read, Write};

use minieg::{Method, RunStatus};

use crate::experiment::{
    AggregateStats, BenchError, ExperimentReport, MeanStd, RankTrace, SweepRow, TrialResult,
};

pub const TRIALS_HEADER: [&str; 8] = [
    "method",
    "trial",
    "itr",
    "nf",
    "tcpu_s",
    "final_residual",
    "status",
    "seed",
];

pub const SWEEP_HEADER: [&str; 5] = ["method", "rho", "metric", "mean", "std"];

pub const RANK_HEADER: [&str; 5] = ["k", "selected_index", "rank", "normalized_rank", "reset"];

/// JSON Schema for [`write_json`] output.
pub const TRIALS_SCHEMA: &str = include_str!("../schema/trials.schema.json");

/// Shortest text that parses back to the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_trials_csv<W: Write>(trials: &[TrialResult], w: W) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRIALS_HEADER)?;
    for t in trials {
        out.write_record([
            t.method.name().to_string(),
            t.trial.to_string(),
            t.itr.to_string(),
            fmt_f64(t.nf),
            fmt_f64(t.tcpu_s),
            fmt_f64(t.final_residual),
            t.status.name().to_string(),
            t.seed.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trials_csv<R: Read>(r: R) -> Result<Vec<TrialResult>, BenchError> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(TRIALS_HEADER) {
        return Err(BenchError::Config(format!(
            "unexpected trial CSV header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let bad = |field: &str, value: &str| BenchError::Config(format!("bad {field} '{value}'"));
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| f(i).parse::<f64>().map_err(|_| bad(TRIALS_HEADER[i], f(i)));
        rows.push(TrialResult {
            method: f(0).parse::<Method>().map_err(|_| bad("method", f(0)))?,
            trial: f(1).parse().map_err(|_| bad("trial", f(1)))?,
            itr: f(2).parse().map_err(|_| bad("itr", f(2)))?,
            nf: num(3)?,
            tcpu_s: num(4)?,
            final_residual: num(5)?,
            status: parse_status(f(6)).ok_or_else(|| bad("status", f(6)))?,
            seed: f(7).parse().map_err(|_| bad("seed", f(7)))?,
        });
    }
    Ok(rows)
}

fn parse_status(s: &str) -> Option<RunStatus> {
    [
        RunStatus::Converged,
        RunStatus::IterationCapReached,
        RunStatus::StepsizeFailure,
    ]
    .into_iter()
    .find(|st| st.name() == s)
}

pub fn write_json<W: Write>(report: &ExperimentReport, w: W) -> Result<(), BenchError> {
    serde_json::to_writer_pretty(w, report)?;
    Ok(())
}

fn cell(v: MeanStd, sci: bool) -> String {
    if v.mean.is_nan() {
        return "-".into();
    }
    if sci {
        format!("{:.2e} ± {:.1e}", v.mean, v.std)
    } else if v.mean.abs() >= 100.0 {
        format!("{:.0} ± {:.0}", v.mean, v.std)
    } else {
        format!("{:.3} ± {:.3}", v.mean, v.std)
    }
}

/// Summary table: one row per method, `mean ± std` over the kept trials.
pub fn render_table(aggregates: &[AggregateStats], reference: Method) -> String {
    let head = [
        "Method",
        "Itr",
        "NF",
        "Tcpu (s)",
        "‖F‖ final",
        "Speedup",
        "Conv",
    ];
    let rows: Vec<[String; 7]> = aggregates
        .iter()
        .map(|a| {
            [
                a.method.label().to_string(),
                cell(a.itr, false),
                cell(a.nf, false),
                cell(a.tcpu_s, false),
                cell(a.final_residual, true),
                if a.speedup.is_finite() {
                    format!("{:.2}x", a.speedup)
                } else {
                    "-".into()
                },
                format!("{}/{}", a.converged, a.trials),
            ]
        })
        .collect();
    let mut widths = head.map(|h| h.chars().count());
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[&str]| {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(widths).enumerate() {
            let pad = w - c.chars().count();
            if i == 0 {
                let _ = write!(s, "{c}{}", " ".repeat(pad));
            } else {
                let _ = write!(s, "  {}{c}", " ".repeat(pad));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(&head);
    out += &"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1));
    out.push('\n');
    for r in &rows {
        out += &line(&r.iter().map(String::as_str).collect::<Vec<_>>());
    }
    let _ = writeln!(out, "speedup relative to {}", reference.label());
    let dropped: usize = aggregates.iter().map(|a| a.stepsize_failures).sum();
    if dropped > 0 {
        let _ = writeln!(
            out,
            "{dropped} trial(s) hit a stepsize failure and are excluded"
        );
    }
    out
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_HEADER)?;
    for r in rows {
        out.write_record([
            r.method.name().to_string(),
            fmt_f64(r.rho),
            r.metric.name().to_string(),
            fmt_f64(r.mean),
            fmt_f64(r.std),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_rank_csv<W: Write>(trace: &RankTrace, w: W) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RANK_HEADER)?;
    for p in &trace.points {
        out.write_record([
            p.k.to_string(),
            p.selected_index.to_string(),
            p.rank.to_string(),
            fmt_f64(p.normalized_rank),
            u8::from(p.reset).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
