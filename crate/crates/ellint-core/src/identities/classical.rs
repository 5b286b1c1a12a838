//! Verifiers for the real-interval degenerations: Selberg-style densities
//! `∏_{j<k} |x_j - x_k|^{2τ} ∏_i |x_i - a_0|^{α_0-1} |x_i - a_1|^{α_1-1}
//! / ∏_{i,r} |x_i - b_r|^{τ}` on a box `[a_0, a_1]^n`, integrated with
//! Gauss-Jacobi product rules that absorb the endpoint singularities.

use std::time::Instant;

use num_complex::Complex64;

use super::{trivial_history, VerificationReport, VerifySettings, ONE};
use crate::error::Result;
use crate::kernels::classical_weight;
use crate::qseries::TruncationPolicy;
use crate::quadrature::{
    classical_gamma, jacobi_integrate_nd, refine_until, ConvergenceHistory, RefineSettings,
};
use crate::sampling::ClassicalParams;

/// Node-count refinement schedule for the interval rules. The error decays
/// algebraically in the node count (the interior `|x_j - x_k|^{2τ}` factor
/// has limited smoothness), so the targets are looser than on the torus.
fn classical_refine(dim: usize, settings: &VerifySettings) -> RefineSettings {
    let base = RefineSettings {
        grid_start: 16,
        target_rel: if dim <= 1 { 1e-8 } else { 2e-7 },
        max_level: if dim <= 1 { 5 } else { 6 },
    };
    settings.apply(base)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `∫_{[a_0,a_1]^dim} W(β_0, β_1) dx` where `W` is the density above with
/// endpoint exponents `β` and the shared `(τ, b)` data from `params`.
fn weight_integral(
    dim: usize,
    params: &ClassicalParams,
    beta: (f64, f64),
    settings: &VerifySettings,
) -> Result<(Complex64, ConvergenceHistory)> {
    if dim == 0 {
        return Ok((ONE, trivial_history()));
    }
    let alpha = (Complex64::new(beta.0, 0.0), Complex64::new(beta.1, 0.0));
    let tau = Complex64::new(params.tau(), 0.0);
    let f = |x: &[Complex64]| {
        let xr: Vec<f64> = x.iter().map(|z| z.re).collect();
        classical_weight(&xr, params.a, &params.b, alpha, tau, true)
    };
    let history = refine_until(
        |nodes| jacobi_integrate_nd(params.a.0, params.a.1, alpha.0, alpha.1, nodes, dim, &f),
        &classical_refine(dim, settings),
    )?;
    let value = history.final_value().expect("refinement records at least one level");
    Ok((value, history))
}

/// Exponent swap: with `τ = (α_0 + α_1)/2` and `2n` external points,
/// `∏_{r,i} |a_r - b_i|^{τ - α_r} · ∫ W(α_0, α_1) = ∫ W(α_1, α_0)`.
pub fn verify_classical_euler(
    params: &ClassicalParams,
    tol: f64,
    settings: &VerifySettings,
) -> Result<VerificationReport> {
    let started = Instant::now();
    params.check(0.0, &TruncationPolicy::default())?;
    let tau = params.tau();
    let (alpha0, alpha1) = params.alpha;

    let mut pref = 1.0;
    for &br in &params.b {
        pref *= (params.a.0 - br).abs().powf(tau - alpha0);
        pref *= (params.a.1 - br).abs().powf(tau - alpha1);
    }
    let (fwd, h_fwd) = weight_integral(params.n, params, (alpha0, alpha1), settings)?;
    let (rev, h_rev) = weight_integral(params.n, params, (alpha1, alpha0), settings)?;
    let lhs = pref * fwd;
    let rhs = rev;

    Ok(VerificationReport::build(
        "classical-euler",
        (params.n, params.n, 0),
        lhs,
        rhs,
        vec![h_fwd, h_rev],
        tol,
        started,
        params.to_named(),
    ))
}

/// Rank reduction: with `τ = α_0 + α_1` and `2n - 1` external points,
/// `(1/n!) ∫^n W(α_0, α_1) = Γ(α_0)Γ(α_1)/Γ(τ) · |a_0 - a_1|^{τ-1}
///  / ∏_i |a_0 - b_i|^{α_1} |a_1 - b_i|^{α_0} · (1/(n-1)!) ∫^{n-1} W(2τ-α_0, 2τ-α_1)`.
pub fn verify_classical_contiguous(
    params: &ClassicalParams,
    tol: f64,
    settings: &VerifySettings,
) -> Result<VerificationReport> {
    let started = Instant::now();
    params.check(0.0, &TruncationPolicy::default())?;
    let tau = params.tau();
    let (alpha0, alpha1) = params.alpha;
    let n = params.n;

    let (full, h_full) = weight_integral(n, params, (alpha0, alpha1), settings)?;
    let lhs = full / factorial(n);

    let c = |x: f64| Complex64::new(x, 0.0);
    let mut pref = classical_gamma(c(alpha0))? * classical_gamma(c(alpha1))?
        / classical_gamma(c(tau))?;
    pref *= (params.a.1 - params.a.0).abs().powf(tau - 1.0);
    for &br in &params.b {
        pref /= (params.a.0 - br).abs().powf(alpha1);
        pref /= (params.a.1 - br).abs().powf(alpha0);
    }
    let (reduced, h_reduced) =
        weight_integral(n - 1, params, (2.0 * tau - alpha0, 2.0 * tau - alpha1), settings)?;
    let rhs = pref * reduced / factorial(n - 1);

    let mut grids = vec![h_full];
    if n > 1 {
        grids.push(h_reduced);
    }
    Ok(VerificationReport::build(
        "classical-contiguous",
        (n, n - 1, 0),
        lhs,
        rhs,
        grids,
        tol,
        started,
        params.to_named(),
    ))
}
