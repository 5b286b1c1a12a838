//! Verifiers for the basic-level (single nome q) degenerations.
//!
//! These replace the elliptic gamma factors with q-Pochhammer ratios, so
//! each side is a torus integral of products of `(x;q)` factors against
//! one of the tilde kernels, with closed-form Pochhammer/theta prefactors.

use std::time::Instant;

use num_complex::Complex64;

use super::{signed_product, trivial_history, VerificationReport, VerifySettings, ONE};
use crate::error::{Error, Result};
use crate::kernels::{constants, tilde_pair_iii_prod, tilde_pair_sym, tilde_single_ii, Group};
use crate::qseries::{qpochhammer, qpochhammer_checked, theta, Nome, TruncationPolicy};
use crate::quadrature::{
    refine_with_offsets, ConvergenceHistory, GridTables, RefineSettings, TorusGrid,
};
use crate::sampling::{Bh1Params, BhAParams};
use crate::scaled::ScaledProduct;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `1/(x;q)` with a grid-placement error when a factor vanishes.
fn inv_poch(x: Complex64, q: Complex64, policy: &TruncationPolicy) -> Result<Complex64> {
    match qpochhammer_checked(x, q, policy) {
        Ok(v) => Ok(ONE / v),
        Err(Error::PoleHit(msg)) => Err(Error::DenominatorZero(msg)),
        Err(e) => Err(e),
    }
}

/// `P̃ / (t;q)^dim` for the given group.
fn tilde_norm(
    group: Group,
    dim: usize,
    t: Complex64,
    q: Complex64,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    let nome = Nome { p: ZERO, q };
    let c = constants(group, dim, &nome, false, policy)?;
    let pt = qpochhammer(t, q, policy)?;
    Ok(c / pt.powi(dim as i32))
}

// ---------------------------------------------------------------------------
// Hyperoctahedral transformation.
// ---------------------------------------------------------------------------

/// One side of the hyperoctahedral transformation:
/// `P̃_{BC} /(t;q)^dim · ∫ Δ̃_II ∏_i [∏_x 1/(x z_i^{±1};q)
///  · ∏_r (t v_r z_i^{±1};q)/(v_r z_i^{±1};q)]`.
pub(crate) fn bh1_side(
    dim: usize,
    q: Complex64,
    t: Complex64,
    quartet: &[Complex64],
    v: &[Complex64],
    settings: &RefineSettings,
    policy: &TruncationPolicy,
) -> Result<(Complex64, ConvergenceHistory)> {
    let norm = tilde_norm(Group::BC, dim, t, q, policy)?;
    if dim == 0 {
        return Ok((norm, trivial_history()));
    }
    let single = |z: Complex64| -> Result<Complex64> {
        let mut acc = tilde_single_ii(z, q, policy)?;
        for &x in quartet {
            acc *= inv_poch(x * z, q, policy)?;
            acc *= inv_poch(x / z, q, policy)?;
        }
        for &vr in v {
            acc *= qpochhammer(t * vr * z, q, policy)?;
            acc *= qpochhammer(t * vr / z, q, policy)?;
            acc *= inv_poch(vr * z, q, policy)?;
            acc *= inv_poch(vr / z, q, policy)?;
        }
        Ok(acc)
    };
    let pair = |w: Complex64| tilde_pair_sym(w, t, q, policy);
    let history = refine_with_offsets(
        |size, offset| {
            let grid = TorusGrid { dim, size, phase_offset: offset };
            GridTables::build(&grid, &single, Some(&pair), Some(&pair))?.integrate()
        },
        settings,
    )?;
    let value = history.final_value().expect("refinement records at least one level");
    Ok((norm * value, history))
}

pub fn verify_bh1(
    params: &Bh1Params,
    tol: f64,
    settings: &VerifySettings,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let policy = TruncationPolicy::default();
    params.check(0.0, &policy)?;
    let q = params.q;
    let t = params.t;
    let mut grids = Vec::new();

    let (lhs, h_lhs) =
        bh1_side(params.n, q, t, &params.tr, &params.v, &settings.refine_for(params.n), &policy)?;
    if params.n > 0 {
        grids.push(h_lhs);
    }

    let mut pref = ScaledProduct::one();
    let gap = signed_product(params.m as i64 + 1, params.n as i64, |i| {
        let tp = t.powi((params.n as i64 - i) as i32);
        let mut acc = ONE;
        for r in 0..4 {
            for s in (r + 1)..4 {
                acc /= qpochhammer(params.tr[r] * params.tr[s] * tp, q, &policy)?;
            }
        }
        Ok(acc)
    })?;
    pref.mul(gap);
    for &vi in &params.v {
        for &tr in &params.tr {
            pref.mul(qpochhammer(t * vi / tr, q, &policy)?);
            pref.div(qpochhammer(tr * vi, q, &policy)?);
        }
    }

    let dual: Vec<Complex64> = params.tr.iter().map(|&tr| t / tr).collect();
    let (rhs_side, h_rhs) =
        bh1_side(params.m, q, t, &dual, &params.v, &settings.refine_for(params.m), &policy)?;
    if params.m > 0 {
        grids.push(h_rhs);
    }
    let rhs = pref.value() * rhs_side;

    Ok(VerificationReport::build(
        "bh1",
        (params.n, params.m, params.k),
        lhs,
        rhs,
        grids,
        tol,
        started,
        params.to_named(),
    ))
}

// ---------------------------------------------------------------------------
// A-type transformations. The right-side integrand is the left-side integrand
// with the roles of (t_0, t_1) and (s_0, s_1) exchanged and the theta
// parameters swapped, so one builder serves both sides of each.
// ---------------------------------------------------------------------------

/// Side with both product and ratio cross terms (the `Δ̃_III` kernel):
/// `P̃_A/(t;q)^dim · ∫ Δ̃_III ∏_i [ (q y_0 z_i, q y_1 z_i;q)
///  / ((t x_0 z_i^{±1}, t x_1 z_i^{±1}, z_i/y_0, z_i/y_1;q))
///  · ∏_r (t v_r z_i;q)(q z_i/v_r;q) / ((v_r z_i;q)(q z_i/(t v_r);q))
///  · θ(h_0 z_i;q) θ(h_1 z_i;q) ]`.
#[allow(clippy::too_many_arguments)]
fn bh2_side(
    dim: usize,
    q: Complex64,
    t: Complex64,
    x: (Complex64, Complex64),
    y: (Complex64, Complex64),
    h: (Complex64, Complex64),
    v: &[Complex64],
    settings: &RefineSettings,
    policy: &TruncationPolicy,
) -> Result<(Complex64, ConvergenceHistory)> {
    let norm = tilde_norm(Group::A, dim, t, q, policy)?;
    if dim == 0 {
        return Ok((norm, trivial_history()));
    }
    let single = |z: Complex64| -> Result<Complex64> {
        let mut acc = ONE - z * z;
        for xv in [x.0, x.1] {
            acc *= inv_poch(t * xv * z, q, policy)?;
            acc *= inv_poch(t * xv / z, q, policy)?;
        }
        for yv in [y.0, y.1] {
            acc *= qpochhammer(q * yv * z, q, policy)?;
            acc *= inv_poch(z / yv, q, policy)?;
        }
        for &vr in v {
            acc *= qpochhammer(t * vr * z, q, policy)?;
            acc *= qpochhammer(q * z / vr, q, policy)?;
            acc *= inv_poch(vr * z, q, policy)?;
            acc *= inv_poch(q * z / (t * vr), q, policy)?;
        }
        acc *= theta(h.0 * z, q, policy)?;
        acc *= theta(h.1 * z, q, policy)?;
        Ok(acc)
    };
    let pair_prod = |w: Complex64| tilde_pair_iii_prod(w, t, q, policy);
    let pair_ratio = |w: Complex64| tilde_pair_sym(w, t, q, policy);
    let history = refine_with_offsets(
        |size, offset| {
            let grid = TorusGrid { dim, size, phase_offset: offset };
            GridTables::build(&grid, &single, Some(&pair_prod), Some(&pair_ratio))?.integrate()
        },
        settings,
    )?;
    let value = history.final_value().expect("refinement records at least one level");
    Ok((norm * value, history))
}

/// Side with only ratio cross terms (the `Δ̃_AII` kernel):
/// `P̃_A/(t;q)^dim · ∫ Δ̃_AII ∏_i [ 1/((t x_0/z_i, t x_1/z_i, z_i/y_0,
///  z_i/y_1;q)) · ∏_r (t v_r z_i;q)/(v_r z_i;q) · θ(h_0 z_i;q) θ(h_1 z_i;q) ]`.
#[allow(clippy::too_many_arguments)]
fn bh3_side(
    dim: usize,
    q: Complex64,
    t: Complex64,
    x: (Complex64, Complex64),
    y: (Complex64, Complex64),
    h: (Complex64, Complex64),
    v: &[Complex64],
    settings: &RefineSettings,
    policy: &TruncationPolicy,
) -> Result<(Complex64, ConvergenceHistory)> {
    let norm = tilde_norm(Group::A, dim, t, q, policy)?;
    if dim == 0 {
        return Ok((norm, trivial_history()));
    }
    let single = |z: Complex64| -> Result<Complex64> {
        let mut acc = ONE;
        for xv in [x.0, x.1] {
            acc *= inv_poch(t * xv / z, q, policy)?;
        }
        for yv in [y.0, y.1] {
            acc *= inv_poch(z / yv, q, policy)?;
        }
        for &vr in v {
            acc *= qpochhammer(t * vr * z, q, policy)?;
            acc *= inv_poch(vr * z, q, policy)?;
        }
        acc *= theta(h.0 * z, q, policy)?;
        acc *= theta(h.1 * z, q, policy)?;
        Ok(acc)
    };
    let pair_ratio = |w: Complex64| tilde_pair_sym(w, t, q, policy);
    let history = refine_with_offsets(
        |size, offset| {
            let grid = TorusGrid { dim, size, phase_offset: offset };
            GridTables::build(&grid, &single, None, Some(&pair_ratio))?.integrate()
        },
        settings,
    )?;
    let value = history.final_value().expect("refinement records at least one level");
    Ok((norm * value, history))
}

/// The theta-quotient prefactor shared by the two A-type transformations:
/// `∏_{i=1}^{n} θ(t^i t_0 u_2) θ(t^i t_0 u_3) / ∏_{i=1}^{m} θ(t^i w_2 s_0) θ(t^i w_3 s_0)`.
fn bh_a_theta_ratio(params: &BhAParams, policy: &TruncationPolicy) -> Result<Complex64> {
    let mut pref = ScaledProduct::one();
    for i in 1..=params.n as i32 {
        let ti = params.t.powi(i);
        pref.mul(theta(ti * params.t0 * params.u2, params.q, policy)?);
        pref.mul(theta(ti * params.t0 * params.u3, params.q, policy)?);
    }
    for i in 1..=params.m as i32 {
        let ti = params.t.powi(i);
        pref.div(theta(ti * params.w2 * params.s0, params.q, policy)?);
        pref.div(theta(ti * params.w3 * params.s0, params.q, policy)?);
    }
    Ok(pref.value())
}

pub fn verify_bh2(
    params: &BhAParams,
    tol: f64,
    settings: &VerifySettings,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let policy = TruncationPolicy::default();
    params.check_paired(0.0, &policy)?;
    let q = params.q;
    let t = params.t;
    let mut grids = Vec::new();

    let (lhs, h_lhs) = bh2_side(
        params.n,
        q,
        t,
        (params.t0, params.t1),
        (params.s0, params.s1),
        (params.u2, params.u3),
        &params.v,
        &settings.refine_for(params.n),
        &policy,
    )?;
    if params.n > 0 {
        grids.push(h_lhs);
    }

    let mut pref = ScaledProduct::one();
    pref.mul(bh_a_theta_ratio(params, &policy)?);
    let gap = signed_product(params.m as i64 + 1, params.n as i64, |i| {
        let mut acc = qpochhammer(q * t.powi((i - params.n as i64) as i32) * params.s0 * params.s1, q, &policy)?;
        acc /= qpochhammer(params.t0 * params.t1 * t.powi((2 + params.n as i64 - i) as i32), q, &policy)?;
        for tj in [params.t0, params.t1] {
            for sk in [params.s0, params.s1] {
                acc /= qpochhammer(tj * t.powi((1 + params.n as i64 - i) as i32) / sk, q, &policy)?;
            }
        }
        Ok(acc)
    })?;
    pref.mul(gap);
    for &vr in &params.v {
        pref.mul(qpochhammer(q * params.s0 / vr, q, &policy)?);
        pref.mul(qpochhammer(t * vr * params.s0, q, &policy)?);
        pref.mul(qpochhammer(q * params.s1 / vr, q, &policy)?);
        pref.mul(qpochhammer(t * vr * params.s1, q, &policy)?);
        pref.div(qpochhammer(params.t0 * t * vr, q, &policy)?);
        pref.div(qpochhammer(q * params.t0 / vr, q, &policy)?);
        pref.div(qpochhammer(params.t1 * t * vr, q, &policy)?);
        pref.div(qpochhammer(q * params.t1 / vr, q, &policy)?);
    }

    let (rhs_side, h_rhs) = bh2_side(
        params.m,
        q,
        t,
        (params.s0, params.s1),
        (params.t0, params.t1),
        (params.w2, params.w3),
        &params.v,
        &settings.refine_for(params.m),
        &policy,
    )?;
    if params.m > 0 {
        grids.push(h_rhs);
    }
    let rhs = pref.value() * rhs_side;

    Ok(VerificationReport::build(
        "bh2",
        (params.n, params.m, params.k),
        lhs,
        rhs,
        grids,
        tol,
        started,
        params.to_named(),
    ))
}

pub fn verify_bh3(
    params: &BhAParams,
    tol: f64,
    settings: &VerifySettings,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let policy = TruncationPolicy::default();
    params.check_ratio_only(0.0, &policy)?;
    let q = params.q;
    let t = params.t;
    let mut grids = Vec::new();

    let (lhs, h_lhs) = bh3_side(
        params.n,
        q,
        t,
        (params.t0, params.t1),
        (params.s0, params.s1),
        (params.u2, params.u3),
        &params.v,
        &settings.refine_for(params.n),
        &policy,
    )?;
    if params.n > 0 {
        grids.push(h_lhs);
    }

    let mut pref = ScaledProduct::one();
    pref.mul(bh_a_theta_ratio(params, &policy)?);
    let gap = signed_product(params.m as i64 + 1, params.n as i64, |i| {
        let mut acc = ONE;
        for tj in [params.t0, params.t1] {
            for sk in [params.s0, params.s1] {
                acc /= qpochhammer(tj * t.powi((1 + params.n as i64 - i) as i32) / sk, q, &policy)?;
            }
        }
        Ok(acc)
    })?;
    pref.mul(gap);
    for &vr in &params.v {
        pref.mul(qpochhammer(t * vr * params.s0, q, &policy)?);
        pref.mul(qpochhammer(t * vr * params.s1, q, &policy)?);
        pref.div(qpochhammer(params.t0 * t * vr, q, &policy)?);
        pref.div(qpochhammer(params.t1 * t * vr, q, &policy)?);
    }

    let (rhs_side, h_rhs) = bh3_side(
        params.m,
        q,
        t,
        (params.s0, params.s1),
        (params.t0, params.t1),
        (params.w2, params.w3),
        &params.v,
        &settings.refine_for(params.m),
        &policy,
    )?;
    if params.m > 0 {
        grids.push(h_rhs);
    }
    let rhs = pref.value() * rhs_side;

    Ok(VerificationReport::build(
        "bh3",
        (params.n, params.m, params.k),
        lhs,
        rhs,
        grids,
        tol,
        started,
        params.to_named(),
    ))
}
