//! Degeneration checks: the small-p behaviour of the elliptic gamma
//! function, and the small-p collapse of the full hyperoctahedral integral
//! onto its single-nome counterpart.

use std::time::Instant;

use num_complex::Complex64;

use super::basic::bh1_side;
use super::elliptic::bc_integral;
use super::{VerificationReport, VerifySettings};
use crate::error::Result;
use crate::kernels::{constants, Group};
use crate::qseries::{elliptic_gamma, qpochhammer, Nome, TruncationPolicy};
use crate::quadrature::rel_change;
use crate::sampling::{Bh1Params, GammaLimitParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

const PROBE_P: f64 = 1e-4;
const COARSE_P: f64 = 1e-3;
/// Slack on the linear-in-p error model when comparing the two probes.
const LINEAR_SLACK: f64 = 1.25;

/// Checks both small-p degenerations of the gamma function at one `(z, q)`:
///
/// * `Γ(z; p, q) -> 1/(z;q)`,
/// * `Γ(p z; p, q) -> (q/z;q)`,
///
/// each with an error that must shrink linearly in `p` (measured against a
/// coarser probe), on top of the plain closeness test at the fine probe.
pub fn verify_gamma_limits(
    params: &GammaLimitParams,
    tol: f64,
    _settings: &VerifySettings,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let policy = TruncationPolicy::default();
    params.check(0.0, &policy)?;
    let (z, q) = (params.z, params.q);

    let base_plain = elliptic_gamma(z, ZERO, q, &policy)?;
    let base_shifted = qpochhammer(q / z, q, &policy)?;
    let eval = |p: f64| -> Result<(Complex64, Complex64)> {
        let pc = Complex64::new(p, 0.0);
        let plain = elliptic_gamma(z, pc, q, &policy)?;
        let shifted = elliptic_gamma(pc * z, pc, q, &policy)?;
        Ok((plain, shifted))
    };
    let (coarse_plain, coarse_shifted) = eval(COARSE_P)?;
    let (probe_plain, probe_shifted) = eval(PROBE_P)?;

    let rate_plain = (coarse_plain - base_plain).norm() / COARSE_P;
    let rate_shifted = (coarse_shifted - base_shifted).norm() / COARSE_P;
    let linear_ok = (probe_plain - base_plain).norm() <= LINEAR_SLACK * rate_plain * PROBE_P
        && (probe_shifted - base_shifted).norm() <= LINEAR_SLACK * rate_shifted * PROBE_P;
    let rel_err =
        rel_change(probe_plain, base_plain).max(rel_change(probe_shifted, base_shifted));

    let mut report = VerificationReport::build(
        "gamma-limit",
        (0, 0, 0),
        probe_plain,
        base_plain,
        Vec::new(),
        tol,
        started,
        params.to_named(),
    );
    report.rel_err = rel_err;
    report.passed = linear_ok && rel_err < tol;
    Ok(report)
}

/// One point of a small-p collapse study.
#[derive(Debug, Clone, Copy)]
pub struct LimitProbe {
    pub probe_p: f64,
    /// Full two-nome integral at `p = probe_p`.
    pub elliptic: Complex64,
    /// Single-nome integral the elliptic one must collapse onto.
    pub basic: Complex64,
    pub rel_gap: f64,
}

/// Gap between `Γ(z;p,q)` at one probe nome and its `p = 0` limit `1/(z;q)`.
pub fn gamma_limit_probe(params: &GammaLimitParams, probe_p: f64) -> Result<LimitProbe> {
    let policy = TruncationPolicy::default();
    params.check(0.0, &policy)?;
    let basic = elliptic_gamma(params.z, ZERO, params.q, &policy)?;
    let elliptic =
        elliptic_gamma(params.z, Complex64::new(probe_p, 0.0), params.q, &policy)?;
    Ok(LimitProbe { probe_p, elliptic, basic, rel_gap: rel_change(elliptic, basic) })
}

/// Evaluates the two-nome hyperoctahedral integral whose `p -> 0` limit is
/// the single-nome side described by `params`, at nome `p = probe_p`, and
/// reports the gap. Each single-nome parameter `v_r` lifts to the pair
/// `(v_r, pq/(t v_r))` of gamma weights, which collapse onto the
/// `(t v_r z^{±1};q)/(v_r z^{±1};q)` factors.
pub fn bh1_limit_probe(
    params: &Bh1Params,
    probe_p: f64,
    settings: &VerifySettings,
) -> Result<LimitProbe> {
    let policy = TruncationPolicy::default();
    params.check(0.0, &policy)?;
    let refine = settings.refine_for(params.n);

    let (basic, _) =
        bh1_side(params.n, params.q, params.t, &params.tr, &params.v, &refine, &policy)?;

    let nome = Nome::new(Complex64::new(probe_p, 0.0), params.q)?;
    let mut weights = params.tr.clone();
    for &vr in &params.v {
        weights.push(vr);
        weights.push(nome.pq() / (params.t * vr));
    }
    let consts = constants(Group::BC, params.n, &nome, true, &policy)?;
    let gamma_t = elliptic_gamma(params.t, nome.p, nome.q, &policy)?.powi(params.n as i32);
    let (integral, _) =
        bc_integral(params.n, &nome, Some(params.t), &weights, &refine, &policy)?;
    let elliptic = consts * gamma_t * integral;

    Ok(LimitProbe { probe_p, elliptic, basic, rel_gap: rel_change(elliptic, basic) })
}
