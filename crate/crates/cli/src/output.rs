// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use bandslice::driver::StepReport;
use bandslice::layout::TrafficReport;
use bandslice::partition::PartitionSource;

/// Whitespace-separated numbers; `#` starts a comment.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .with_context(|| format!("{}:{}: not a number: {tok}", path.display(), no + 1))?;
            out.push(v);
        }
    }
    Ok(out)
}

pub fn write_values(w: &mut impl Write, values: &[f64]) -> io::Result<()> {
    for v in values {
        writeln!(w, "{v:.16e}")?;
    }
    Ok(())
}

fn source_name(s: PartitionSource) -> &'static str {
    match s {
        PartitionSource::KMeansFromPriors => "kmeans-priors",
        PartitionSource::InertiaBisection => "inertia-bisection",
    }
}

/// Plain-text summary of one solve.
pub fn write_step(w: &mut impl Write, r: &StepReport) -> io::Result<()> {
    writeln!(
        w,
        "step {}: n {} bandwidth {} partition {} recovery rounds {}",
        r.step,
        r.n,
        r.bandwidth,
        source_name(r.source),
        r.recovery_rounds
    )?;
    writeln!(
        w,
        "  {:>5} {:>14} {:>14} {:>8} {:>5} {:>5} {:>5} {:>9} {:>4}",
        "slice", "lower", "upper", "expected", "m0", "found", "iter", "converged", "warm"
    )?;
    for (i, s) in r.slices.iter().enumerate() {
        writeln!(
            w,
            "  {:>5} {:>14.6e} {:>14.6e} {:>8} {:>5} {:>5} {:>5} {:>9} {:>4}",
            i,
            s.lower,
            s.upper,
            s.expected,
            s.m0,
            s.found,
            s.iterations,
            if s.converged { "yes" } else { "no" },
            if s.warm { "yes" } else { "no" }
        )?;
    }
    let a = &r.accuracy;
    writeln!(
        w,
        "  pairs {} orth {:.3e} max residual {:.3e} (raw {:.3e}) mean iterations {:.2}",
        a.per_pair_residuals.len(),
        a.orth,
        a.max_residual,
        a.max_raw_residual,
        r.mean_iterations()
    )?;
    let t = &r.timings;
    writeln!(
        w,
        "  seconds: reduce {:.4} distribute {:.4} partition {:.4} solve {:.4} redistribute {:.4} backtransform {:.4}",
        t.reduce.as_secs_f64(),
        t.distribute.as_secs_f64(),
        t.partition.as_secs_f64(),
        t.solve.as_secs_f64(),
        t.redistribute.as_secs_f64(),
        t.backtransform.as_secs_f64()
    )?;
    for (name, traffic) in [("band", &r.band_traffic), ("vectors", &r.vector_traffic)] {
        if let Some(t) = traffic {
            for p in &t.phases {
                writeln!(
                    w,
                    "  traffic {name} {}: messages {} bytes {} max rank bytes {}",
                    p.phase, p.messages, p.bytes, p.max_rank_bytes
                )?;
            }
        }
    }
    Ok(())
}

/// One CSV row per step.
pub fn write_steps_csv(w: impl Write, reports: &[&StepReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "step",
        "slices",
        "mean_iterations",
        "max_iterations",
        "recovery_rounds",
        "max_residual",
        "orth",
        "solve_seconds",
    ])?;
    for r in reports {
        out.write_record([
            r.step.to_string(),
            r.slices.len().to_string(),
            format!("{:.3}", r.mean_iterations()),
            r.max_iterations().to_string(),
            r.recovery_rounds.to_string(),
            format!("{:.3e}", r.accuracy.max_residual),
            format!("{:.3e}", r.accuracy.orth),
            format!("{:.6}", r.timings.solve.as_secs_f64()),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Traffic rows `operation,phase,messages,bytes,max_rank_bytes`.
pub fn write_traffic_csv(w: impl Write, rows: &[(&str, &TrafficReport)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["operation", "phase", "messages", "bytes", "max_rank_bytes"])?;
    for (op, report) in rows {
        for p in &report.phases {
            out.write_record([
                op.to_string(),
                p.phase.clone(),
                p.messages.to_string(),
                p.bytes.to_string(),
                p.max_rank_bytes.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}
