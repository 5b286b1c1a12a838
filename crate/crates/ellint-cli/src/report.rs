//! Report rows and their JSON/CSV encodings.
//!
//! A report file is a top-level array of rows with fixed field names
//! `{identity, n, m, k, seed, lhs_re, lhs_im, rhs_re, rhs_im, rel_err,
//! passed, wall_ms, history}`. `history` carries one entry per integral
//! side with the raw refinement trajectory (values before normalization
//! constants; `rel_change` is scale-free). In CSV the history is embedded
//! as a JSON string in the last column.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use ellint_core::identities::VerificationReport;
use ellint_core::quadrature::ConvergenceHistory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub grid: u32,
    pub re: f64,
    pub im: f64,
    pub rel_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideHistory {
    /// 0 = left side, 1 = right side.
    pub side: usize,
    pub target_rel: f64,
    pub converged: bool,
    pub levels: Vec<LevelRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub identity: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub rel_err: f64,
    pub passed: bool,
    pub wall_ms: u64,
    pub history: Vec<SideHistory>,
}

pub fn side_history(side: usize, h: &ConvergenceHistory) -> SideHistory {
    SideHistory {
        side,
        target_rel: h.target_rel,
        converged: h.converged,
        levels: h
            .levels
            .iter()
            .map(|l| LevelRow {
                grid: l.grid,
                re: l.value.re,
                im: l.value.im,
                rel_change: l.rel_change,
            })
            .collect(),
    }
}

pub fn row_from_report(r: &VerificationReport, seed: u64, redact_timing: bool) -> ReportRow {
    ReportRow {
        identity: r.identity.clone(),
        n: r.n,
        m: r.m,
        k: r.k,
        seed,
        lhs_re: r.lhs.re,
        lhs_im: r.lhs.im,
        rhs_re: r.rhs.re,
        rhs_im: r.rhs.im,
        rel_err: r.rel_err,
        passed: r.passed,
        wall_ms: if redact_timing { 0 } else { r.wall_time.as_millis() as u64 },
        history: r.grids.iter().enumerate().map(|(i, h)| side_history(i, h)).collect(),
    }
}

pub fn write_json<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut text = serde_json::to_string_pretty(rows)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)
        .with_context(|| format!("writing {}", path.display()))?;
    wtr.write_record([
        "identity", "n", "m", "k", "seed", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "rel_err",
        "passed", "wall_ms", "history",
    ])?;
    for r in rows {
        wtr.write_record([
            r.identity.clone(),
            r.n.to_string(),
            r.m.to_string(),
            r.k.to_string(),
            r.seed.to_string(),
            fmt_f64(r.lhs_re),
            fmt_f64(r.lhs_im),
            fmt_f64(r.rhs_re),
            fmt_f64(r.rhs_im),
            fmt_f64(r.rel_err),
            r.passed.to_string(),
            r.wall_ms.to_string(),
            serde_json::to_string(&r.history)?,
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<Vec<ReportRow>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

/// Shortest round-trippable decimal, matching the JSON encoding.
fn fmt_f64(x: f64) -> String {
    let mut buf = ryu_format(x);
    if buf.ends_with(".0") {
        buf.truncate(buf.len() - 2);
    }
    buf
}

fn ryu_format(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergeRow {
    pub identity: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub side: usize,
    pub grid: u32,
    pub re: f64,
    pub im: f64,
    pub rel_change: Option<f64>,
}

/// One probe nome of a small-p collapse study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub identity: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub probe_p: f64,
    pub elliptic_re: f64,
    pub elliptic_im: f64,
    pub basic_re: f64,
    pub basic_im: f64,
    pub rel_gap: f64,
}

pub fn write_converge_csv(path: &Path, rows: &[ConvergeRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)
        .with_context(|| format!("writing {}", path.display()))?;
    wtr.write_record(["identity", "n", "m", "k", "seed", "side", "grid", "re", "im", "rel_change"])?;
    for r in rows {
        wtr.write_record([
            r.identity.clone(),
            r.n.to_string(),
            r.m.to_string(),
            r.k.to_string(),
            r.seed.to_string(),
            r.side.to_string(),
            r.grid.to_string(),
            fmt_f64(r.re),
            fmt_f64(r.im),
            r.rel_change.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_probe_csv(path: &Path, rows: &[ProbeRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)
        .with_context(|| format!("writing {}", path.display()))?;
    wtr.write_record([
        "identity", "n", "m", "k", "seed", "probe_p", "elliptic_re", "elliptic_im", "basic_re",
        "basic_im", "rel_gap",
    ])?;
    for r in rows {
        wtr.write_record([
            r.identity.clone(),
            r.n.to_string(),
            r.m.to_string(),
            r.k.to_string(),
            r.seed.to_string(),
            fmt_f64(r.probe_p),
            fmt_f64(r.elliptic_re),
            fmt_f64(r.elliptic_im),
            fmt_f64(r.basic_re),
            fmt_f64(r.basic_im),
            fmt_f64(r.rel_gap),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
