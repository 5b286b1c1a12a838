//! q-shifted factorials, theta functions, and the elliptic gamma function.
//!
//! Conventions (everywhere in this crate):
//!
//! * `(x;q) = ∏_{r≥0} (1 - x q^r)`, convergent for `|q| < 1`;
//! * `θ(x;q) = (x;q) (q/x;q)`;
//! * `Γ(z;p,q) = ∏_{r,s≥0} (1 - p^{r+1} q^{s+1}/z) / (1 - p^r q^s z)`.
//!
//! Γ satisfies the reflection equation `Γ(z;p,q) Γ(pq/z;p,q) = 1`, the
//! difference equations `Γ(pz) = θ(z;q) Γ(z)` and `Γ(qz) = θ(z;p) Γ(z)`, and
//! the degeneration `Γ(z;0,q) = 1/(z;q)` (taken exactly on the `p = 0` path).
//!
//! Truncation is certified: every product chooses its truncation index from
//! a geometric tail bound so that the neglected log-tail is at most
//! `abs_tail_bound`, and fails with `TruncationBudgetExceeded` if that takes
//! more than `max_terms` factors.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A denominator factor with modulus below this threshold makes the point a
/// (numerical) member of the pole lattice; evaluation fails loudly with
/// `PoleHit` instead of returning a huge, meaningless value.
pub const POLE_THRESHOLD: f64 = 1e-10;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The pair of base parameters governing the elliptic structure.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Nome {
    pub p: Complex64,
    pub q: Complex64,
}

impl Nome {
    /// Builds a nome, enforcing `|p| < 1` and `|q| < 1`.
    pub fn new(p: Complex64, q: Complex64) -> Result<Self> {
        if p.norm() >= 1.0 || q.norm() >= 1.0 {
            return Err(Error::NonConvergent(format!(
                "nome moduli must be < 1, got |p| = {}, |q| = {}",
                p.norm(),
                q.norm()
            )));
        }
        Ok(Nome { p, q })
    }

    /// Real nome from two real bases.
    pub fn real(p: f64, q: f64) -> Result<Self> {
        Self::new(Complex64::new(p, 0.0), Complex64::new(q, 0.0))
    }

    /// The product `p·q` (argument of the reflection equation).
    pub fn pq(&self) -> Complex64 {
        self.p * self.q
    }
}

/// Controls how infinite products are truncated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Target absolute bound on the neglected tail of the log-product.
    pub abs_tail_bound: f64,
    /// Hard cap on the number of factors.
    pub max_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { abs_tail_bound: 1e-15, max_terms: 1_000_000 }
    }
}

impl TruncationPolicy {
    fn validate(&self) -> Result<()> {
        if !(self.abs_tail_bound > 0.0) || self.max_terms < 1 {
            return Err(Error::DomainViolation(format!(
                "truncation policy requires abs_tail_bound > 0 and max_terms >= 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Smallest `R` such that the neglected tail of `∑_{r≥R} log(1 - x q^r)` is
/// certifiably at most `bound`: at index `R` the leading neglected magnitude
/// `u = |x||q|^R` satisfies `u < 1/2` (so `|log(1-u)| ≤ 2u`) and the
/// geometric tail `u/((1-|q|)(1-u))` is within the bound.
fn pochhammer_truncation_index(ax: f64, aq: f64, bound: f64, max_terms: usize) -> Result<usize> {
    let mut r = 0usize;
    let mut u = ax;
    loop {
        if u < 0.5 && u / ((1.0 - aq) * (1.0 - u)) <= bound {
            return Ok(r);
        }
        if r >= max_terms {
            return Err(Error::TruncationBudgetExceeded(format!(
                "(x;q) with |x| = {ax}, |q| = {aq} needs more than {max_terms} factors for tail {bound:e}"
            )));
        }
        u *= aq;
        r += 1;
    }
}

fn qpochhammer_impl(
    x: Complex64,
    q: Complex64,
    policy: &TruncationPolicy,
    pole_threshold: Option<f64>,
) -> Result<Complex64> {
    policy.validate()?;
    let aq = q.norm();
    if aq >= 1.0 {
        return Err(Error::NonConvergent(format!("(x;q) requires |q| < 1, got |q| = {aq}")));
    }
    if x == ZERO {
        return Ok(ONE);
    }
    if q == ZERO {
        let f = ONE - x;
        if let Some(thr) = pole_threshold {
            if f.norm() < thr {
                return Err(Error::PoleHit(format!("(x;0) factor 1-x vanishes at x = {x}")));
            }
        }
        return Ok(f);
    }
    let r_max = pochhammer_truncation_index(x.norm(), aq, policy.abs_tail_bound, policy.max_terms)?;
    let mut acc = ONE;
    let mut xq = x;
    for _ in 0..r_max {
        let f = ONE - xq;
        if let Some(thr) = pole_threshold {
            if f.norm() < thr {
                return Err(Error::PoleHit(format!(
                    "(x;q) factor vanishes: x = {x}, q = {q} ({} within {thr:e} of a lattice point)",
                    xq
                )));
            }
        }
        acc *= f;
        xq *= q;
    }
    Ok(acc)
}

/// The q-shifted factorial `(x;q) = ∏_{r≥0}(1 - x q^r)`.
///
/// Exact for `x = 0` (returns 1) and `q = 0` (returns `1 - x`). An `x` on
/// the zero set `q^{-r}` legitimately returns 0; this is only an error when
/// the value sits in a denominator (see [`qpochhammer_checked`]).
pub fn qpochhammer(x: Complex64, q: Complex64, policy: &TruncationPolicy) -> Result<Complex64> {
    qpochhammer_impl(x, q, policy, None)
}

/// `(x;q)` destined for a denominator: fails with `PoleHit` if any factor
/// falls below [`POLE_THRESHOLD`] instead of silently returning ~0.
pub fn qpochhammer_checked(
    x: Complex64,
    q: Complex64,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    qpochhammer_impl(x, q, policy, Some(POLE_THRESHOLD))
}

/// The theta function `θ(x;q) = (x;q)(q/x;q)`.
///
/// Satisfies `θ(x;q) = θ(q/x;q)` exactly by construction (the same two
/// factors are multiplied, and complex multiplication commutes) and the
/// quasi-periodicity `θ(qx;q) = -x^{-1} θ(x;q)`.
pub fn theta(x: Complex64, q: Complex64, policy: &TruncationPolicy) -> Result<Complex64> {
    if x == ZERO {
        return Err(Error::ZeroArgument("theta(x;q) requires x != 0".into()));
    }
    let a = qpochhammer(x, q, policy)?;
    let b = qpochhammer(q / x, q, policy)?;
    Ok(a * b)
}

/// Truncation ranks `(R_p, R_q)` for the double product, from the L-shaped
/// geometric tail: the terms with `r ≥ R_p` (any `s`) contribute at most
/// `2 C |p|^{R_p} / ((1-|p|)(1-|q|))` to the log-tail, where
/// `C = |z| + |pq/z|` covers both numerator and denominator rows, and
/// symmetrically in `q`. Each rank also guarantees the leading neglected
/// magnitude is below 1/2 so `|log(1-u)| ≤ 2u` applies.
fn gamma_truncation_ranks(
    c: f64,
    ap: f64,
    aq: f64,
    policy: &TruncationPolicy,
) -> Result<(usize, usize)> {
    let denom = (1.0 - ap) * (1.0 - aq);
    let per_side = policy.abs_tail_bound / 2.0;
    let rank = |a: f64| -> Result<usize> {
        let mut r = 1usize;
        let mut u = c * a; // c * a^r at r = 1
        loop {
            if u <= 0.5 && 2.0 * u / denom <= per_side {
                return Ok(r);
            }
            if r >= policy.max_terms {
                return Err(Error::TruncationBudgetExceeded(format!(
                    "elliptic gamma rank for base modulus {a} exceeds {} terms",
                    policy.max_terms
                )));
            }
            u *= a;
            r += 1;
        }
    };
    let rp = rank(ap)?;
    let rq = rank(aq)?;
    if rp.saturating_mul(rq) > policy.max_terms {
        return Err(Error::TruncationBudgetExceeded(format!(
            "elliptic gamma needs {rp} x {rq} factors, over the {} budget",
            policy.max_terms
        )));
    }
    Ok((rp, rq))
}

/// The elliptic gamma function
/// `Γ(z;p,q) = ∏_{r,s≥0} (1 - p^{r+1}q^{s+1}/z)/(1 - p^r q^s z)`.
///
/// Exact degenerations: `Γ(z;0,q) = 1/(z;q)` and `Γ(z;p,0) = 1/(z;p)` (the
/// double product collapses to a single row). Fails with `PoleHit` when a
/// denominator factor vanishes to within [`POLE_THRESHOLD`]; zeros coming
/// from numerator factors are legitimate values.
pub fn elliptic_gamma(
    z: Complex64,
    p: Complex64,
    q: Complex64,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    policy.validate()?;
    if z == ZERO {
        return Err(Error::ZeroArgument("elliptic gamma requires z != 0".into()));
    }
    let (ap, aq) = (p.norm(), q.norm());
    if ap >= 1.0 || aq >= 1.0 {
        return Err(Error::NonConvergent(format!(
            "elliptic gamma requires |p|,|q| < 1, got |p| = {ap}, |q| = {aq}"
        )));
    }
    if p == ZERO {
        return Ok(ONE / qpochhammer_checked(z, q, policy)?);
    }
    if q == ZERO {
        return Ok(ONE / qpochhammer_checked(z, p, policy)?);
    }
    let c = z.norm() + (p * q / z).norm();
    let (rp, rq) = gamma_truncation_ranks(c, ap, aq, policy)?;
    let mut num = ONE;
    let mut den = ONE;
    let mut p_r = ONE; // p^r
    for _ in 0..rp {
        let mut w_num = p_r * p * q / z; // p^{r+1} q^{s+1} / z at s = 0
        let mut w_den = p_r * z; // p^r q^s z at s = 0
        for _ in 0..rq {
            num *= ONE - w_num;
            let f = ONE - w_den;
            if f.norm() < POLE_THRESHOLD {
                return Err(Error::PoleHit(format!(
                    "elliptic gamma denominator vanishes: z = {z} is on the pole lattice of (p,q) = ({p}, {q})"
                )));
            }
            den *= f;
            w_num *= q;
            w_den *= q;
        }
        p_r *= p;
    }
    Ok(num / den)
}

/// `Γ(pz;p,q)` computed through the difference equation as
/// `θ(z;q)·Γ(z;p,q)`.
///
/// Bit-identical to calling [`theta`] and [`elliptic_gamma`] and multiplying
/// whenever that product is finite. On the lattice points where `Γ(z)` poles
/// but `θ(z;q)` vanishes (z ∈ {q^{-s}}), returns the resolved value 0.
pub fn elliptic_gamma_shifted(
    z: Complex64,
    p: Complex64,
    q: Complex64,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    let th = theta(z, q, policy)?;
    match elliptic_gamma(z, p, q, policy) {
        Ok(g) => Ok(th * g),
        Err(Error::PoleHit(_)) if th == ZERO => Ok(ZERO),
        Err(e) => Err(e),
    }
}

/// `1/Γ(w;p,q)` evaluated through the reflection equation as `Γ(pq/w;p,q)`.
///
/// This is how kernel denominators are computed: at the points where `Γ(w)`
/// poles (so the kernel vanishes), the reflected form returns the exact zero
/// instead of failing, which matters because product grids hit the kernel
/// zeros `z_i = z_j^{±1}` exactly.
pub fn elliptic_gamma_recip(
    w: Complex64,
    p: Complex64,
    q: Complex64,
    policy: &TruncationPolicy,
) -> Result<Complex64> {
    if w == ZERO {
        return Err(Error::ZeroArgument("reciprocal gamma requires w != 0".into()));
    }
    elliptic_gamma(p * q / w, p, q, policy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pochhammer_exact_special_points() {
        let pol = TruncationPolicy::default();
        let q = c(0.37, 0.11);
        assert_eq!(qpochhammer(ZERO, q, &pol).unwrap(), ONE);
        assert_eq!(qpochhammer(c(0.3, -0.2), ZERO, &pol).unwrap(), c(0.7, 0.2));
        // (1;q) = 0 exactly: the r = 0 factor vanishes.
        assert_eq!(qpochhammer(ONE, q, &pol).unwrap(), ZERO);
    }

    #[test]
    fn pochhammer_rejects_bad_modulus() {
        let pol = TruncationPolicy::default();
        assert!(matches!(
            qpochhammer(c(0.5, 0.0), c(1.0, 0.0), &pol),
            Err(Error::NonConvergent(_))
        ));
    }

    #[test]
    fn theta_inversion_symmetry() {
        // theta(x) and theta(q/x) share the same factored form; the only
        // discrepancy left is the x -> q/(q/x) round trip, a few ulp.
        let pol = TruncationPolicy::default();
        let x = c(0.3, 0.4);
        let q = c(0.2, -0.1);
        let a = theta(x, q, &pol).unwrap();
        let b = theta(q / x, q, &pol).unwrap();
        assert!((a - b).norm() <= 1e-14 * a.norm());
    }

    #[test]
    fn theta_zero_argument() {
        let pol = TruncationPolicy::default();
        assert!(matches!(theta(ZERO, c(0.5, 0.0), &pol), Err(Error::ZeroArgument(_))));
    }

    #[test]
    fn gamma_at_sqrt_pq_is_one() {
        // Reflection forces Γ(√(pq))² = 1 and every factor is positive for
        // real p, q in (0,1), so the value is exactly +1 up to rounding.
        let pol = TruncationPolicy::default();
        let (p, q) = (c(0.15, 0.0), c(0.25, 0.0));
        let z = (p * q).sqrt();
        let g = elliptic_gamma(z, p, q, &pol).unwrap();
        assert!((g - ONE).norm() < 1e-13, "got {g}");
    }

    #[test]
    fn gamma_p_zero_path_is_exact_reciprocal_pochhammer() {
        let pol = TruncationPolicy::default();
        let z = c(0.31, 0.17);
        let q = c(0.23, 0.05);
        let g = elliptic_gamma(z, ZERO, q, &pol).unwrap();
        let poch = qpochhammer(z, q, &pol).unwrap();
        assert_eq!(g, ONE / poch);
    }

    #[test]
    fn gamma_pole_is_loud() {
        let pol = TruncationPolicy::default();
        // z = 1 is the (r,s) = (0,0) denominator zero.
        assert!(matches!(
            elliptic_gamma(ONE, c(0.1, 0.0), c(0.2, 0.0), &pol),
            Err(Error::PoleHit(_))
        ));
    }

    #[test]
    fn shifted_gamma_resolves_theta_zero_against_gamma_pole() {
        let pol = TruncationPolicy::default();
        let g = elliptic_gamma_shifted(ONE, c(0.1, 0.0), c(0.2, 0.0), &pol).unwrap();
        assert_eq!(g, ZERO);
    }

    #[test]
    fn recip_gamma_is_exact_zero_at_gamma_poles() {
        // 1/Γ(1) via reflection: Γ(pq) has the vanishing numerator factor
        // (1 - pq/(pq)), so the reciprocal is exactly 0.
        let pol = TruncationPolicy::default();
        let v = elliptic_gamma_recip(ONE, c(0.1, 0.0), c(0.2, 0.0), &pol).unwrap();
        assert_eq!(v, ZERO);
    }
}
