//! Executes verify and converge runs: expands jobs, runs them on the rayon
//! pool, keeps the output file valid after every completed job, and folds
//! per-job outcomes into the process exit code.

use std::path::PathBuf;
use std::sync::Mutex;

use anyhow::{bail, Result};
use rayon::prelude::*;

use ellint_core::error::Error as CoreError;
use ellint_core::identities::basic::{verify_bh1, verify_bh2, verify_bh3};
use ellint_core::identities::classical::{verify_classical_contiguous, verify_classical_euler};
use ellint_core::identities::elliptic::{
    verify_dixon_eval, verify_dixon_transform, verify_main, verify_selberg_eval,
    verify_selberg_transform,
};
use ellint_core::identities::lemma::verify_lemma;
use ellint_core::identities::limits::{bh1_limit_probe, gamma_limit_probe, verify_gamma_limits};
use ellint_core::identities::{VerificationReport, VerifySettings};
use ellint_core::sampling::{
    sample_bh1, sample_bh2, sample_bh3, sample_classical, sample_dixon, sample_gamma_limit,
    sample_lemma, sample_main, sample_selberg_eval, sample_selberg_transform, Bh1Params,
    BhAParams, ClassicalParams, ClassicalVariant, DixonParams, GammaLimitParams, LemmaParams,
    MainParams, NamedParams, SelbergEvalParams, SelbergTransformParams,
};

use crate::config::{Format, Identity};
use crate::report::{
    row_from_report, write_converge_csv, write_csv, write_json, write_probe_csv, ConvergeRow,
    ProbeRow, ReportRow,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;

/// Exit-code precedence: configuration > infeasible > non-convergence >
/// identity failure > success.
fn severity(code: i32) -> u8 {
    match code {
        EXIT_CONFIG => 4,
        EXIT_INFEASIBLE => 3,
        EXIT_NO_CONVERGENCE => 2,
        EXIT_FAIL => 1,
        _ => 0,
    }
}

pub fn combine_codes(a: i32, b: i32) -> i32 {
    if severity(b) > severity(a) {
        b
    } else {
        a
    }
}

fn code_for_error(e: &CoreError) -> i32 {
    match e {
        CoreError::Infeasible { .. } => EXIT_INFEASIBLE,
        CoreError::DomainViolation(_) | CoreError::ZeroArgument(_) | CoreError::NonConvergent(_) => {
            EXIT_CONFIG
        }
        _ => EXIT_NO_CONVERGENCE,
    }
}

fn code_for_report(r: &VerificationReport) -> i32 {
    if !r.grids.iter().all(|h| h.converged) {
        EXIT_NO_CONVERGENCE
    } else if r.passed {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

#[derive(Debug, Clone)]
pub struct Job {
    pub identity: Identity,
    pub dims: (usize, usize, usize),
    pub seed: u64,
}

pub struct VerifyPlan {
    /// Sorted by (identity name, seed); report order follows job order.
    pub jobs: Vec<Job>,
    /// None means each identity's default tolerance.
    pub tol: Option<f64>,
    pub settings: VerifySettings,
    /// Explicit parameters; when present `jobs` holds exactly one entry
    /// with seed 0 and sampling is bypassed.
    pub file_params: Option<NamedParams>,
    pub output: PathBuf,
    pub format: Format,
    pub redact_timing: bool,
}

fn run_sampled(
    identity: Identity,
    (n, m, k): (usize, usize, usize),
    seed: u64,
    tol: f64,
    settings: &VerifySettings,
) -> std::result::Result<VerificationReport, CoreError> {
    match identity {
        Identity::Bh1 => verify_bh1(&sample_bh1(n, m, k, seed)?, tol, settings),
        Identity::Bh2 => verify_bh2(&sample_bh2(n, m, seed)?, tol, settings),
        Identity::Bh3 => verify_bh3(&sample_bh3(n, m, k, seed)?, tol, settings),
        Identity::ClassicalContiguous => verify_classical_contiguous(
            &sample_classical(ClassicalVariant::Contiguous, n, seed)?,
            tol,
            settings,
        ),
        Identity::ClassicalEuler => {
            verify_classical_euler(&sample_classical(ClassicalVariant::Euler, n, seed)?, tol, settings)
        }
        Identity::DixonEval => verify_dixon_eval(&sample_dixon(n, 0, seed)?, tol, settings),
        Identity::DixonTransform => verify_dixon_transform(&sample_dixon(n, m, seed)?, tol, settings),
        Identity::GammaLimit => verify_gamma_limits(&sample_gamma_limit(seed)?, tol, settings),
        Identity::LemmaSym => verify_lemma(&sample_lemma(n, seed)?, tol, settings),
        Identity::Main => verify_main(&sample_main(n, m, seed)?, tol, settings),
        Identity::SelbergEval => verify_selberg_eval(&sample_selberg_eval(n, seed)?, tol, settings),
        Identity::SelbergTransform => {
            verify_selberg_transform(&sample_selberg_transform(n, seed)?, tol, settings)
        }
    }
}

fn run_from_file(
    identity: Identity,
    (n, m, k): (usize, usize, usize),
    map: &NamedParams,
    tol: f64,
    settings: &VerifySettings,
) -> std::result::Result<VerificationReport, CoreError> {
    match identity {
        Identity::Bh1 => verify_bh1(&Bh1Params::from_named(map, n, m, k)?, tol, settings),
        Identity::Bh2 => verify_bh2(&BhAParams::from_named(map, n, m, k)?, tol, settings),
        Identity::Bh3 => verify_bh3(&BhAParams::from_named(map, n, m, k)?, tol, settings),
        Identity::ClassicalContiguous => verify_classical_contiguous(
            &ClassicalParams::from_named(map, ClassicalVariant::Contiguous, n)?,
            tol,
            settings,
        ),
        Identity::ClassicalEuler => verify_classical_euler(
            &ClassicalParams::from_named(map, ClassicalVariant::Euler, n)?,
            tol,
            settings,
        ),
        Identity::DixonEval => verify_dixon_eval(&DixonParams::from_named(map, n, 0)?, tol, settings),
        Identity::DixonTransform => {
            verify_dixon_transform(&DixonParams::from_named(map, n, m)?, tol, settings)
        }
        Identity::GammaLimit => verify_gamma_limits(&GammaLimitParams::from_named(map)?, tol, settings),
        Identity::LemmaSym => verify_lemma(&LemmaParams::from_named(map, n)?, tol, settings),
        Identity::Main => verify_main(&MainParams::from_named(map, n, m)?, tol, settings),
        Identity::SelbergEval => {
            verify_selberg_eval(&SelbergEvalParams::from_named(map, n)?, tol, settings)
        }
        Identity::SelbergTransform => {
            verify_selberg_transform(&SelbergTransformParams::from_named(map, n)?, tol, settings)
        }
    }
}

pub fn run_verify(plan: &VerifyPlan) -> Result<i32> {
    let total = plan.jobs.len();
    let slots: Mutex<(Vec<Option<ReportRow>>, usize)> = Mutex::new((vec![None; total], 0));

    let flush = |rows: &[Option<ReportRow>]| -> Result<()> {
        let done: Vec<ReportRow> = rows.iter().flatten().cloned().collect();
        match plan.format {
            Format::Json => write_json(&plan.output, &done),
            Format::Csv => write_csv(&plan.output, &done),
        }
    };

    let codes: Vec<i32> = plan
        .jobs
        .par_iter()
        .enumerate()
        .map(|(idx, job)| {
            let tol = plan.tol.unwrap_or_else(|| job.identity.default_tol());
            let outcome = match &plan.file_params {
                Some(map) => run_from_file(job.identity, job.dims, map, tol, &plan.settings),
                None => run_sampled(job.identity, job.dims, job.seed, tol, &plan.settings),
            };
            match outcome {
                Ok(report) => {
                    let code = code_for_report(&report);
                    let row = row_from_report(&report, job.seed, plan.redact_timing);
                    let mut guard = slots.lock().expect("report slots poisoned");
                    guard.0[idx] = Some(row);
                    // Keep the file valid after each completed job so an
                    // interrupted run leaves the finished prefix behind.
                    let prefix = guard.0.iter().take_while(|s| s.is_some()).count();
                    if prefix > guard.1 {
                        guard.1 = prefix;
                        if let Err(e) = flush(&guard.0[..prefix]) {
                            eprintln!("warning: partial flush failed: {e:#}");
                        }
                    }
                    code
                }
                Err(e) => {
                    eprintln!("{} seed {}: {e}", job.identity.name(), job.seed);
                    code_for_error(&e)
                }
            }
        })
        .collect();

    let (rows, _) = slots.into_inner().expect("report slots poisoned");
    flush(&rows)?;
    for row in rows.iter().flatten() {
        println!(
            "{} n={} m={} k={} seed={} rel_err={:.3e} passed={}",
            row.identity, row.n, row.m, row.k, row.seed, row.rel_err, row.passed
        );
    }
    Ok(codes.into_iter().fold(EXIT_OK, combine_codes))
}

pub struct ConvergePlan {
    pub identity: Identity,
    pub dims: (usize, usize, usize),
    pub seed: u64,
    pub settings: VerifySettings,
    /// Small-p study nomes; when set the run probes the limit collapse
    /// instead of the grid ladder.
    pub probe_ps: Option<Vec<f64>>,
    pub file_params: Option<NamedParams>,
    pub output: PathBuf,
    pub format: Format,
}

pub fn run_converge(plan: &ConvergePlan) -> Result<i32> {
    if let Some(ps) = &plan.probe_ps {
        return run_probe_study(plan, ps);
    }

    // Push the ladder to its full depth: the study wants the trajectory,
    // not an early stop.
    let settings = VerifySettings {
        grid_start: plan.settings.grid_start,
        target_rel: Some(plan.settings.target_rel.unwrap_or(1e-15)),
        max_level: plan.settings.max_level,
    };
    let (n, m, k) = plan.dims;
    let tol = plan.identity.default_tol();
    let outcome = match &plan.file_params {
        Some(map) => run_from_file(plan.identity, plan.dims, map, tol, &settings),
        None => run_sampled(plan.identity, plan.dims, plan.seed, tol, &settings),
    };
    let report = match outcome {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{} seed {}: {e}", plan.identity.name(), plan.seed);
            return Ok(code_for_error(&e));
        }
    };
    let mut rows = Vec::new();
    for (side, h) in report.grids.iter().enumerate() {
        for level in &h.levels {
            rows.push(ConvergeRow {
                identity: plan.identity.name().to_string(),
                n,
                m,
                k,
                seed: plan.seed,
                side,
                grid: level.grid,
                re: level.value.re,
                im: level.value.im,
                rel_change: level.rel_change,
            });
        }
    }
    if rows.is_empty() {
        eprintln!(
            "{}: no quadrature side to study (closed-form evaluation)",
            plan.identity.name()
        );
    }
    match plan.format {
        Format::Json => write_json(&plan.output, &rows)?,
        Format::Csv => write_converge_csv(&plan.output, &rows)?,
    }
    for row in &rows {
        println!(
            "{} side={} grid={} value=({:.12e}, {:.12e}) rel_change={}",
            row.identity,
            row.side,
            row.grid,
            row.re,
            row.im,
            row.rel_change.map(|c| format!("{c:.3e}")).unwrap_or_else(|| "-".into())
        );
    }
    Ok(EXIT_OK)
}

fn run_probe_study(plan: &ConvergePlan, ps: &[f64]) -> Result<i32> {
    let (n, m, k) = plan.dims;
    let mut rows = Vec::new();
    for &p in ps {
        let probe = match plan.identity {
            Identity::Bh1 => {
                let params = match &plan.file_params {
                    Some(map) => Bh1Params::from_named(map, n, m, k),
                    None => sample_bh1(n, m, k, plan.seed),
                };
                params.and_then(|params| bh1_limit_probe(&params, p, &plan.settings))
            }
            Identity::GammaLimit => {
                let params = match &plan.file_params {
                    Some(map) => GammaLimitParams::from_named(map),
                    None => sample_gamma_limit(plan.seed),
                };
                params.and_then(|params| gamma_limit_probe(&params, p))
            }
            other => bail!(
                "--probe-ps studies the small-p collapse and applies to bh1 or gamma-limit, not {}",
                other.name()
            ),
        };
        match probe {
            Ok(pr) => rows.push(ProbeRow {
                identity: plan.identity.name().to_string(),
                n,
                m,
                k,
                seed: plan.seed,
                probe_p: pr.probe_p,
                elliptic_re: pr.elliptic.re,
                elliptic_im: pr.elliptic.im,
                basic_re: pr.basic.re,
                basic_im: pr.basic.im,
                rel_gap: pr.rel_gap,
            }),
            Err(e) => {
                eprintln!("{} probe p={p}: {e}", plan.identity.name());
                return Ok(code_for_error(&e));
            }
        }
    }
    match plan.format {
        Format::Json => write_json(&plan.output, &rows)?,
        Format::Csv => write_probe_csv(&plan.output, &rows)?,
    }
    for row in &rows {
        println!("{} probe_p={:.1e} rel_gap={:.3e}", row.identity, row.probe_p, row.rel_gap);
    }
    Ok(EXIT_OK)
}
