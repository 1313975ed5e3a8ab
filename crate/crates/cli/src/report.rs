//! Report envelope and JSON rendering of domain results.
//!
//! Every command emits `{version, command, config, result, timing_ms}`. The
//! `config` echoes everything needed to reproduce the run; `result` is fully
//! deterministic given that config, so reruns compare equal on it.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde_json::{json, Value};

use satrep_core::{
    Histogram, LevelCertificate, MarkovKernel, PreorderCertificate, SaturationReport,
    SaturationVerdict, Tolerances,
};

use crate::problem::label_to_json;

pub fn tolerances_json(tol: &Tolerances) -> Value {
    json!({
        "herm": tol.herm,
        "psd": tol.psd,
        "eig": tol.eig,
        "cluster": tol.cluster,
        "sum": tol.sum,
        "zero": tol.zero,
        "prop": tol.prop,
        "feas": tol.feas,
        "witness": tol.witness,
    })
}

pub fn kernel_json(kernel: &MarkovKernel) -> Value {
    let rows: Vec<Vec<f64>> = (0..kernel.n_targets())
        .map(|i| (0..kernel.n_sources()).map(|j| kernel.get(i, j)).collect())
        .collect();
    json!({
        "target_labels": kernel.target_labels().iter().map(label_to_json).collect::<Vec<_>>(),
        "source_labels": kernel.source_labels().iter().map(label_to_json).collect::<Vec<_>>(),
        "entries": rows,
    })
}

pub fn certificate_json(certificate: &PreorderCertificate) -> Value {
    match certificate {
        PreorderCertificate::Holds { kernel, residual } => json!({
            "holds": true,
            "residual": residual,
            "kernel": kernel_json(kernel),
        }),
        PreorderCertificate::Fails { gap } => json!({
            "holds": false,
            "gap": gap,
        }),
    }
}

fn level_json(level: &LevelCertificate) -> Value {
    let mut value = certificate_json(&level.certificate);
    value["level"] = json!(level.level);
    value
}

pub fn saturation_json(report: &SaturationReport) -> Value {
    let verdict = match report.verdict {
        SaturationVerdict::Finite(n) => json!({ "finite": n }),
        SaturationVerdict::ExceededCap(n_max) => json!({ "exceeded_cap": n_max }),
    };
    json!({
        "verdict": verdict,
        "chain": report.chain.iter().map(level_json).collect::<Vec<_>>(),
    })
}

pub fn histogram_json(histogram: &Histogram) -> Value {
    json!({
        "edges": histogram.edges,
        "masses": histogram.masses,
    })
}

/// Assembles the envelope and writes it to `out` (or stdout).
pub fn emit(
    command: &str,
    config: Value,
    result: Value,
    started: Instant,
    out: Option<&Path>,
) -> Result<()> {
    let report = json!({
        "version": 1,
        "command": command,
        "config": config,
        "result": result,
        "timing_ms": started.elapsed().as_secs_f64() * 1e3,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match out {
        Some(path) => fs::write(path, text.as_bytes())
            .with_context(|| format!("writing report to {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}
