//! Verifiers for the elliptic-level (two-nome) integral identities.
//!
//! All left sides share one shape: a normalization constant, a power of
//! `Γ(t)`, and a torus integral of a hyperoctahedrally symmetric integrand
//! built from per-coordinate gamma factors and pair cross terms. The
//! integrals run through the factored-table engine with the pole-dodging
//! offset ladder.

use std::time::Instant;

use num_complex::Complex64;

use super::{signed_product, trivial_history, VerificationReport, VerifySettings, ONE};
use crate::error::{Error, Result};
use crate::kernels::{bc_pair_core, bc_single_core, constants, Group};
use crate::qseries::{elliptic_gamma, Nome, TruncationPolicy};
use crate::quadrature::{
    refine_with_offsets, ConvergenceHistory, GridTables, RefineSettings, TorusGrid,
};
use crate::sampling::{DixonParams, MainParams, SelbergEvalParams, SelbergTransformParams};
use crate::scaled::ScaledProduct;

/// Torus integral of `Δ_I` (or `Δ_II` when `cross` is set) times
/// `∏_i ∏_r Γ(w_r z_i^{±1})`, refined to convergence. Zero-dimensional
/// integrals evaluate to 1.
pub(crate) fn bc_integral(
    dim: usize,
    nome: &Nome,
    cross: Option<Complex64>,
    weights: &[Complex64],
    settings: &RefineSettings,
    policy: &TruncationPolicy,
) -> Result<(Complex64, ConvergenceHistory)> {
    if dim == 0 {
        return Ok((ONE, trivial_history()));
    }
    let single = |z: Complex64| -> Result<Complex64> {
        let mut acc = bc_single_core(z, nome, policy)?;
        for &w in weights {
            acc *= elliptic_gamma(w * z, nome.p, nome.q, policy)?;
            acc *= elliptic_gamma(w / z, nome.p, nome.q, policy)?;
        }
        Ok(acc)
    };
    let pair = |w: Complex64| bc_pair_core(w, cross, nome, policy);
    let history = refine_with_offsets(
        |size, offset| {
            let grid = TorusGrid { dim, size, phase_offset: offset };
            GridTables::build(&grid, &single, Some(&pair), Some(&pair))?.integrate()
        },
        settings,
    )?;
    let value = history.final_value().expect("refinement records at least one level");
    Ok((value, history))
}

fn gamma_t_pow(t: Complex64, n: usize, nome: &Nome, policy: &TruncationPolicy) -> Result<Complex64> {
    Ok(elliptic_gamma(t, nome.p, nome.q, policy)?.powi(n as i32))
}

// ---------------------------------------------------------------------------
// Transformation/evaluation with 2n+2m+4 parameters and no cross term.
// ---------------------------------------------------------------------------

fn dixon_core(
    label: &str,
    params: &DixonParams,
    tol: f64,
    settings: &VerifySettings,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let policy = TruncationPolicy::default();
    params.check(0.0, &policy)?;
    let nome = &params.nome;
    let mut grids = Vec::new();

    let lhs = if params.n == 0 {
        ONE
    } else {
        let (ival, hist) =
            bc_integral(params.n, nome, None, &params.t, &settings.refine_for(params.n), &policy)?;
        grids.push(hist);
        constants(Group::BC, params.n, nome, true, &policy)? * ival
    };

    let mut pref = ScaledProduct::one();
    for r in 0..params.t.len() {
        for s in (r + 1)..params.t.len() {
            pref.mul(elliptic_gamma(params.t[r] * params.t[s], nome.p, nome.q, &policy)?);
        }
    }
    let mut sqrt_pq = nome.pq().sqrt();
    if params.branch_negate_sqrt {
        sqrt_pq = -sqrt_pq;
    }
    let rhs_int = if params.m == 0 {
        ONE
    } else {
        let dual: Vec<Complex64> = params.t.iter().map(|&tr| sqrt_pq / tr).collect();
        let (ival, hist) =
            bc_integral(params.m, nome, None, &dual, &settings.refine_for(params.m), &policy)?;
        grids.push(hist);
        constants(Group::BC, params.m, nome, true, &policy)? * ival
    };
    let rhs = pref.value() * rhs_int;

    Ok(VerificationReport::build(
        label,
        (params.n, params.m, 0),
        lhs,
        rhs,
        grids,
        tol,
        started,
        params.to_named(),
    ))
}

/// Both sides are integrals (`m` may be 0, collapsing the right side to
/// the pure gamma product).
pub fn verify_dixon_transform(
    params: &DixonParams,
    tol: f64,
    settings: &VerifySettings,
) -> Result<VerificationReport> {
    dixon_core("dixon-transform", params, tol, settings)
}

/// The `m = 0` closed-form evaluation.
pub fn verify_dixon_eval(
    params: &DixonParams,
    tol: f64,
    settings: &VerifySettings,
) -> Result<VerificationReport> {
    if params.m != 0 {
        return Err(Error::DomainViolation(
            "closed-form evaluation requires m = 0".into(),
        ));
    }
    dixon_core("dixon-eval", params, tol, settings)
}

// ---------------------------------------------------------------------------
// Six-parameter evaluation with cross term.
// ---------------------------------------------------------------------------

/// Full left side: `P_{BC_n} Γ(t)^n ∫ Δ_II ∏ Γ(t_r z^{±1})`. Does not
/// validate windows; callers comparing integrands rely on that.
pub fn selberg_eval_lhs(
    params: &SelbergEvalParams,
    settings: &VerifySettings,
    policy: &TruncationPolicy,
) -> Result<(Complex64, ConvergenceHistory)> {
    let nome = &params.nome;
    let (ival, hist) = bc_integral(
        params.n,
        nome,
        Some(params.t),
        &params.tr,
        &settings.refine_for(params.n),
        policy,
    )?;
    let value = constants(Group::BC, params.n, nome, true, policy)?
        * gamma_t_pow(params.t, params.n, nome, policy)?
        * ival;
    Ok((value, hist))
}

pub fn verify_selberg_eval(
    params: &SelbergEvalParams,
    tol: f64,
    settings: &VerifySettings,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let policy = TruncationPolicy::default();
    params.check(0.0, &policy)?;
    let nome = &params.nome;

    let (lhs, hist) = selberg_eval_lhs(params, settings, &policy)?;

    let mut pref = ScaledProduct::one();
    for i in 0..params.n as i32 {
        pref.mul(elliptic_gamma(params.t.powi(i + 1), nome.p, nome.q, &policy)?);
        let ti = params.t.powi(i);
        for r in 0..6 {
            for s in (r + 1)..6 {
                pref.mul(elliptic_gamma(
                    ti * params.tr[r] * params.tr[s],
                    nome.p,
                    nome.q,
                    &policy,
                )?);
            }
        }
    }
    let rhs = pref.value();

    Ok(VerificationReport::build(
        "selberg-eval",
        (params.n, 0, 0),
        lhs,
        rhs,
        vec![hist],
        tol,
        started,
        params.to_named(),
    ))
}

// ---------------------------------------------------------------------------
// Eight-parameter transformation with cross term.
// ---------------------------------------------------------------------------

/// The parameter map of the transformation: `t_r → v t_r` for `r <= 4`
/// and `t_r → t_r/v` for `r >= 5`, with `v` the principal square root of
/// `pq/(t^{n-1} t_1 t_2 t_3 t_4)`.
pub fn transform_map(params: &SelbergTransformParams) -> SelbergTransformParams {
    let v = params.v();
    let tr = params
        .tr
        .iter()
        .enumerate()
        .map(|(r, &x)| if r < 4 { v * x } else { x / v })
        .collect();
    SelbergTransformParams { n: params.n, nome: params.nome.clone(), t: params.t, tr }
}

/// The closed-form factor relating the two sides:
/// `∏_{i=0}^{n-1} [∏_{1<=r<s<=4} Γ(t^i t_r t_s) ∏_{5<=r<s<=8} Γ(t^i t_r t_s)]`.
pub fn transform_prefactor(
    params: &SelbergTransformParams,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    let nome = &params.nome;
    let mut pref = ScaledProduct::one();
    for i in 0..params.n as i32 {
        let ti = params.t.powi(i);
        for (lo, hi) in [(0usize, 4usize), (4, 8)] {
            for r in lo..hi {
                for s in (r + 1)..hi {
                    pref.mul(elliptic_gamma(
                        ti * params.tr[r] * params.tr[s],
                        nome.p,
                        nome.q,
                        policy,
                    )?);
                }
            }
        }
    }
    Ok(pref.value())
}

/// Full left side of the transformation (same shape as the evaluation but
/// with eight parameters). No window validation.
pub fn selberg_transform_lhs(
    params: &SelbergTransformParams,
    settings: &VerifySettings,
    policy: &TruncationPolicy,
) -> Result<(Complex64, ConvergenceHistory)> {
    let nome = &params.nome;
    let (ival, hist) = bc_integral(
        params.n,
        nome,
        Some(params.t),
        &params.tr,
        &settings.refine_for(params.n),
        policy,
    )?;
    let value = constants(Group::BC, params.n, nome, true, policy)?
        * gamma_t_pow(params.t, params.n, nome, policy)?
        * ival;
    Ok((value, hist))
}

pub fn verify_selberg_transform(
    params: &SelbergTransformParams,
    tol: f64,
    settings: &VerifySettings,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let policy = TruncationPolicy::default();
    params.check(0.0, &policy)?;

    let (lhs, h_lhs) = selberg_transform_lhs(params, settings, &policy)?;
    // The original admissibility check already bounds the mapped moduli,
    // so the mapped integral is well-defined without a second check.
    let mapped = transform_map(params);
    let (rhs_int, h_rhs) = selberg_transform_lhs(&mapped, settings, &policy)?;
    let rhs = transform_prefactor(params, &policy)? * rhs_int;

    Ok(VerificationReport::build(
        "selberg-transform",
        (params.n, 0, 0),
        lhs,
        rhs,
        vec![h_lhs, h_rhs],
        tol,
        started,
        params.to_named(),
    ))
}

// ---------------------------------------------------------------------------
// Rank-lowering transformation with paired parameters.
// ---------------------------------------------------------------------------

/// Full left side: `P_{BC_n} Γ(t)^n ∫ Δ_II ∏_r Γ(t_r z^{±1}) ∏_r Γ(v_r z^{±1})`.
/// No window validation.
pub fn main_lhs(
    params: &MainParams,
    settings: &VerifySettings,
    policy: &TruncationPolicy,
) -> Result<(Complex64, ConvergenceHistory)> {
    let nome = &params.nome;
    if params.n == 0 {
        return Ok((ONE, trivial_history()));
    }
    let mut weights = params.tr.clone();
    weights.extend_from_slice(&params.v);
    let (ival, hist) = bc_integral(
        params.n,
        nome,
        Some(params.t),
        &weights,
        &settings.refine_for(params.n),
        policy,
    )?;
    let value = constants(Group::BC, params.n, nome, true, policy)?
        * gamma_t_pow(params.t, params.n, nome, policy)?
        * ival;
    Ok((value, hist))
}

/// Reinterprets an `(n, m) = (1, 0)` parameter set as a six-parameter
/// evaluation: the four `t_r` and one `v` pair supply the six parameters,
/// and the balancing conditions combine to the six-parameter one.
pub fn main_as_selberg_eval(params: &MainParams) -> Result<SelbergEvalParams> {
    if params.n != 1 || params.m != 0 {
        return Err(Error::DomainViolation(
            "reinterpretation requires (n, m) = (1, 0)".into(),
        ));
    }
    let mut tr = params.tr.clone();
    tr.extend_from_slice(&params.v);
    Ok(SelbergEvalParams { n: 1, nome: params.nome.clone(), t: params.t, tr })
}

pub fn verify_main(
    params: &MainParams,
    tol: f64,
    settings: &VerifySettings,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let policy = TruncationPolicy::default();
    params.check(0.0, &policy)?;
    let nome = &params.nome;
    let k = params.k();
    let mut grids = Vec::new();

    let (lhs, h_lhs) = main_lhs(params, settings, &policy)?;
    if params.n > 0 {
        grids.push(h_lhs);
    }

    // Closed-form factor over the dimension gap, inverted-range aware.
    let mut pref = ScaledProduct::one();
    let gap = signed_product(params.m as i64 + 1, params.n as i64, |i| {
        let tp = params.t.powi((params.n as i64 - i) as i32);
        let mut acc = ONE;
        for r in 0..4 {
            for s in (r + 1)..4 {
                acc *= elliptic_gamma(params.tr[r] * params.tr[s] * tp, nome.p, nome.q, &policy)?;
            }
        }
        Ok(acc)
    })?;
    pref.mul(gap);
    for &vi in &params.v {
        for &tr in &params.tr {
            pref.mul(elliptic_gamma(tr * vi, nome.p, nome.q, &policy)?);
        }
    }

    let rhs_int = if params.m == 0 {
        ONE
    } else {
        let mut weights: Vec<Complex64> = params.tr.iter().map(|&tr| params.t / tr).collect();
        weights.extend_from_slice(&params.v);
        let (ival, hist) = bc_integral(
            params.m,
            nome,
            Some(params.t),
            &weights,
            &settings.refine_for(params.m),
            &policy,
        )?;
        grids.push(hist);
        constants(Group::BC, params.m, nome, true, &policy)?
            * gamma_t_pow(params.t, params.m, nome, &policy)?
            * ival
    };
    let rhs = pref.value() * rhs_int;

    Ok(VerificationReport::build(
        "main",
        (params.n, params.m, k),
        lhs,
        rhs,
        grids,
        tol,
        started,
        params.to_named(),
    ))
}
