//! Verifier for the theta-function summation identity (single nome).
//!
//! The left side sums over all sign choices `σ ∈ {±1}^n` applied to the
//! free points `z_i`; the right side is a closed product with two
//! equivalent written forms. No quadrature is involved.

use std::time::Instant;

use num_complex::Complex64;

use super::{VerificationReport, VerifySettings, ONE};
use crate::error::{Error, Result};
use crate::qseries::{theta, TruncationPolicy};
use crate::sampling::LemmaParams;

/// The sign sum
/// `Σ_σ ∏_{i<j} θ(t z_i^{σ_i} z_j^{σ_j})/θ(z_i^{σ_i} z_j^{σ_j})
///  · ∏_i ∏_r θ(u_r z_i^{σ_i}) / θ(z_i^{2σ_i})`.
pub fn lemma_sum(params: &LemmaParams, policy: &TruncationPolicy) -> Result<Complex64> {
    let n = params.n;
    let p = params.p;
    let mut sum = Complex64::new(0.0, 0.0);
    for mask in 0u32..(1u32 << n) {
        let zs: Vec<Complex64> = (0..n)
            .map(|i| if mask >> i & 1 == 1 { ONE / params.z[i] } else { params.z[i] })
            .collect();
        let mut term = ONE;
        for i in 0..n {
            for &ur in &params.u {
                term *= theta(ur * zs[i], p, policy)?;
            }
            let den = theta(zs[i] * zs[i], p, policy)?;
            if den.norm() == 0.0 {
                return Err(Error::DenominatorZero(format!(
                    "theta(z_{}^2; p) vanishes in the sign sum",
                    i + 1
                )));
            }
            term /= den;
            for j in (i + 1)..n {
                term *= theta(params.t * zs[i] * zs[j], p, policy)?;
                let den = theta(zs[i] * zs[j], p, policy)?;
                if den.norm() == 0.0 {
                    return Err(Error::DenominatorZero(format!(
                        "theta(z_{} z_{}; p) vanishes in the sign sum",
                        i + 1,
                        j + 1
                    )));
                }
                term /= den;
            }
        }
        sum += term;
    }
    Ok(sum)
}

/// The two written forms of the closed side:
/// `∏_{i=0}^{n-1} θ(t^i u_0 u_1) θ(t^i u_0 u_2) θ(t^i u_0 u_3)` and
/// `∏_{i=0}^{n-1} θ(t^i u_0 u_1) θ(t^i u_0 u_2) θ(t^i u_1 u_2)`. They
/// agree whenever the balancing condition holds.
pub fn lemma_rhs_forms(
    params: &LemmaParams,
    policy: &TruncationPolicy,
) -> Result<(Complex64, Complex64)> {
    let p = params.p;
    let u = &params.u;
    let mut f1 = ONE;
    let mut f2 = ONE;
    for i in 0..params.n as i32 {
        let ti = params.t.powi(i);
        let base = theta(ti * u[0] * u[1], p, policy)? * theta(ti * u[0] * u[2], p, policy)?;
        f1 *= base * theta(ti * u[0] * u[3], p, policy)?;
        f2 *= base * theta(ti * u[1] * u[2], p, policy)?;
    }
    Ok((f1, f2))
}

pub fn verify_lemma(
    params: &LemmaParams,
    tol: f64,
    _settings: &VerifySettings,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let policy = TruncationPolicy::default();
    params.check(0.0, &policy)?;
    let lhs = lemma_sum(params, &policy)?;
    let (rhs, _alt) = lemma_rhs_forms(params, &policy)?;
    Ok(VerificationReport::build(
        "lemma-sym",
        (params.n, 0, 0),
        lhs,
        rhs,
        Vec::new(),
        tol,
        started,
        params.to_named(),
    ))
}
