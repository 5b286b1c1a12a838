//! Symmetric integration kernels on the torus and the classical interval
//! weight.
//!
//! The `±` shorthand `f(a z^{±1} w^{±1}) = ∏ f(a z^{s} w^{u})` over all sign
//! choices is expanded in exactly one place, [`pm_expand`]; every kernel
//! routes through it so the convention cannot drift between call sites.
//!
//! Reciprocal elliptic gamma factors are evaluated through the reflection
//! equation (`1/Γ(w) = Γ(pq/w)`), so kernel zeros (points where a
//! denominator gamma poles) come out as exact zeros instead of evaluation
//! failures.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qseries::{
    elliptic_gamma, elliptic_gamma_recip, qpochhammer, qpochhammer_checked, Nome, TruncationPolicy,
};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A point of the n-torus (or any point of `(C^*)^n` for off-contour
/// evaluation); coordinates produced by a grid have unit modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    pub z: Vec<Complex64>,
}

impl TorusPoint {
    pub fn new(z: Vec<Complex64>) -> Self {
        TorusPoint { z }
    }

    pub fn from_slice(z: &[Complex64]) -> Self {
        TorusPoint { z: z.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }
}

/// The six kernel families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    DeltaI,
    DeltaII,
    TildeDeltaII,
    TildeDeltaIII,
    TildeDeltaAII,
    ClassicalSelbergWeight,
}

/// Root-system family for normalization constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    BC,
    A,
}

/// Expands `base · ∏_k v_k^{± e_k}` over all sign vectors.
///
/// Output order is fixed: entry `mask` (ascending) uses sign `+` for factor
/// `k` when bit `k` of `mask` is 0, `-` when it is 1. Length `2^len`.
pub fn pm_expand(base: Complex64, factors: &[(Complex64, i32)]) -> Vec<Complex64> {
    let count = 1usize << factors.len();
    let mut out = Vec::with_capacity(count);
    for mask in 0..count {
        let mut w = base;
        for (k, &(v, e)) in factors.iter().enumerate() {
            let sign = if (mask >> k) & 1 == 0 { 1 } else { -1 };
            w *= v.powi(sign * e);
        }
        out.push(w);
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Normalization constants: `(p;p)^n (q;q)^n / (2^n n!)` for `BC`,
/// `(p;p)^n (q;q)^n / n!` for `A`. With `elliptic = false` the `(p;p)^n`
/// factor is dropped (the basic-level constants).
pub fn constants(
    group: Group,
    n: usize,
    nome: &Nome,
    elliptic: bool,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    let mut value = qpochhammer(nome.q, nome.q, policy)?.powi(n as i32);
    if elliptic {
        value *= qpochhammer(nome.p, nome.p, policy)?.powi(n as i32);
    }
    let denom = match group {
        Group::BC => 2f64.powi(n as i32) * factorial(n),
        Group::A => factorial(n),
    };
    Ok(value / denom)
}

/// Per-coordinate factor of Δ_I: `1/Γ(z^{±2})`, via reflection.
pub fn bc_single_core(z: Complex64, nome: &Nome, policy: &TruncationPolicy) -> Result<Complex64> {
    let mut acc = ONE;
    for w in pm_expand(ONE, &[(z, 2)]) {
        acc *= elliptic_gamma_recip(w, nome.p, nome.q, policy)?;
    }
    Ok(acc)
}

/// Pair factor of Δ_I / Δ_II as a function of one invariant `w` (either
/// `z_i z_j` or `z_i/z_j`): `1/(Γ(w)Γ(1/w))`, times `Γ(t w)Γ(t/w)` when a
/// cross-term parameter is present.
pub fn bc_pair_core(
    w: Complex64,
    t: Option<Complex64>,
    nome: &Nome,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    let mut acc = ONE;
    for u in pm_expand(ONE, &[(w, 1)]) {
        acc *= elliptic_gamma_recip(u, nome.p, nome.q, policy)?;
    }
    if let Some(t) = t {
        for u in pm_expand(t, &[(w, 1)]) {
            acc *= elliptic_gamma(u, nome.p, nome.q, policy)?;
        }
    }
    Ok(acc)
}

/// `Δ_I^{(n)}(z) = 1/(∏_{i<j} Γ(z_i^{±1} z_j^{±1}) ∏_i Γ(z_i^{±2}))`.
pub fn delta_i(z: &TorusPoint, nome: &Nome, policy: &TruncationPolicy) -> Result<Complex64> {
    delta_ii_impl(None, z, nome, policy)
}

/// `Δ_II^{(n)}(t;z) = ∏_{i<j} Γ(t z_i^{±1} z_j^{±1}) · Δ_I^{(n)}(z)`.
pub fn delta_ii(
    t: Complex64,
    z: &TorusPoint,
    nome: &Nome,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    delta_ii_impl(Some(t), z, nome, policy)
}

fn delta_ii_impl(
    t: Option<Complex64>,
    z: &TorusPoint,
    nome: &Nome,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    let n = z.dim();
    let mut acc = ONE;
    for i in 0..n {
        acc *= bc_single_core(z.z[i], nome, policy)?;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            acc *= bc_pair_core(z.z[i] * z.z[j], t, nome, policy)?;
            acc *= bc_pair_core(z.z[i] / z.z[j], t, nome, policy)?;
        }
    }
    Ok(acc)
}

fn poch_den(x: Complex64, q: Complex64, policy: &TruncationPolicy) -> Result<Complex64> {
    qpochhammer_checked(x, q, policy).map_err(|e| match e {
        Error::PoleHit(msg) => Error::DenominatorZero(msg),
        other => other,
    })
}

/// Per-coordinate factor of Δ̃_II: `(z^{±2};q)`.
pub fn tilde_single_ii(z: Complex64, q: Complex64, policy: &TruncationPolicy) -> Result<Complex64> {
    let mut acc = ONE;
    for w in pm_expand(ONE, &[(z, 2)]) {
        acc *= qpochhammer(w, q, policy)?;
    }
    Ok(acc)
}

/// Symmetric pair factor `(w^{±1};q)/(t w^{±1};q)`, shared by Δ̃_II (both
/// invariants), Δ̃_AII, and the ratio part of Δ̃_III.
pub fn tilde_pair_sym(
    w: Complex64,
    t: Complex64,
    q: Complex64,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    let mut acc = ONE;
    for u in pm_expand(ONE, &[(w, 1)]) {
        acc *= qpochhammer(u, q, policy)?;
    }
    for u in pm_expand(t, &[(w, 1)]) {
        acc /= poch_den(u, q, policy)?;
    }
    Ok(acc)
}

/// Product-invariant pair factor of Δ̃_III at `w = z_i z_j` (off-diagonal):
/// `(1 - w) · (q w/t;q)/(t w;q)`.
pub fn tilde_pair_iii_prod(
    w: Complex64,
    t: Complex64,
    q: Complex64,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    let num = qpochhammer(q * w / t, q, policy)?;
    let den = poch_den(t * w, q, policy)?;
    Ok((ONE - w) * num / den)
}

/// The basic-level kernels, exactly as factored products:
///
/// * `Δ̃_II = ∏_{i<j} (z_i^{±1}z_j^{±1};q)/(t z_i^{±1}z_j^{±1};q) · ∏_i (z_i^{±2};q)`
/// * `Δ̃_III = ∏_{i<j} (q z_iz_j/t, z_i/z_j, z_j/z_i;q)/(t z_iz_j, t z_i/z_j, t z_j/z_i;q) · ∏_{i≤j} (1 - z_iz_j)`
///   (the diagonal of the last product contributes `(1 - z_i²)`)
/// * `Δ̃_AII = ∏_{i<j} (z_i/z_j, z_j/z_i;q)/(t z_i/z_j, t z_j/z_i;q)`
pub fn tilde_kernels(
    kind: KernelKind,
    t: Complex64,
    z: &TorusPoint,
    q: Complex64,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    let n = z.dim();
    let mut acc = ONE;
    match kind {
        KernelKind::TildeDeltaII => {
            for i in 0..n {
                acc *= tilde_single_ii(z.z[i], q, policy)?;
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    acc *= tilde_pair_sym(z.z[i] * z.z[j], t, q, policy)?;
                    acc *= tilde_pair_sym(z.z[i] / z.z[j], t, q, policy)?;
                }
            }
        }
        KernelKind::TildeDeltaIII => {
            for i in 0..n {
                acc *= ONE - z.z[i] * z.z[i];
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    acc *= tilde_pair_iii_prod(z.z[i] * z.z[j], t, q, policy)?;
                    acc *= tilde_pair_sym(z.z[i] / z.z[j], t, q, policy)?;
                }
            }
        }
        KernelKind::TildeDeltaAII => {
            for i in 0..n {
                for j in (i + 1)..n {
                    acc *= tilde_pair_sym(z.z[i] / z.z[j], t, q, policy)?;
                }
            }
        }
        other => {
            return Err(Error::DomainViolation(format!(
                "tilde_kernels only evaluates the basic-level kernels, got {other:?}"
            )));
        }
    }
    Ok(acc)
}

/// `|base|^w`, with the zero base resolved to 0 for `Re(w) > 0`.
fn pow_abs(base: f64, w: Complex64) -> Result<Complex64> {
    let b = base.abs();
    if b == 0.0 {
        if w.re > 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Err(Error::DenominatorZero(format!(
            "|0|^w with Re(w) = {} <= 0 in the classical weight",
            w.re
        )));
    }
    Ok(Complex64::new(b, 0.0).powc(w))
}

/// The classical Selberg-type weight
/// `∏_{j<k} |x_j - x_k|^{2τ} ∏_i |x_i - a_0|^{α_0-1} |x_i - a_1|^{α_1-1} / ∏_{i,r} |x_i - b_r|^{τ}`.
///
/// With `exclude_endpoint_singularity` the `|x_i - a_r|^{α_r-1}` factors are
/// omitted (they are carried by the Gauss-Jacobi weights instead). Bases are
/// absolute values, so complex exponents raise positive reals and no branch
/// cuts arise. Symmetric under permutation of `x`.
pub fn classical_weight(
    x: &[f64],
    a: (f64, f64),
    b: &[f64],
    alpha: (Complex64, Complex64),
    tau: Complex64,
    exclude_endpoint_singularity: bool,
) -> Result<Complex64> {
    let (a0, a1) = a;
    if !(a0 < a1) {
        return Err(Error::DomainViolation(format!("need a_0 < a_1, got ({a0}, {a1})")));
    }
    for &xi in x {
        if !(xi > a0 && xi < a1) {
            return Err(Error::DomainViolation(format!(
                "weight argument {xi} outside the open interval ({a0}, {a1})"
            )));
        }
    }
    for &br in b {
        if (a0..=a1).contains(&br) {
            return Err(Error::DomainViolation(format!(
                "external point {br} lies inside [{a0}, {a1}]"
            )));
        }
    }
    let mut acc = ONE;
    for j in 0..x.len() {
        for k in (j + 1)..x.len() {
            acc *= pow_abs(x[j] - x[k], 2.0 * tau)?;
        }
    }
    for &xi in x {
        if !exclude_endpoint_singularity {
            acc *= pow_abs(xi - a0, alpha.0 - ONE)?;
            acc *= pow_abs(xi - a1, alpha.1 - ONE)?;
        }
        for &br in b {
            acc /= pow_abs(xi - br, tau)?;
        }
    }
    Ok(acc)
}
