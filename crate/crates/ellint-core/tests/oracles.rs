//! Reference-value tests. Every special function is pinned two ways: against
//! a brute-force in-test evaluation of its defining product (no shared
//! truncation logic), and against constants computed with a 40-digit
//! arbitrary-precision sweep of the same defining products.

use num_complex::Complex64;

use ellint_core::kernels::bc_single_core;
use ellint_core::qseries::{elliptic_gamma, qpochhammer, theta, Nome, TruncationPolicy};
use ellint_core::quadrature::{
    classical_beta, classical_gamma, jacobi_integrate_nd, torus_integrate, GridTables, TorusGrid,
};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn assert_close(got: Complex64, want: Complex64, rel: f64, what: &str) {
    let denom = want.norm().max(1e-300);
    let err = (got - want).norm() / denom;
    assert!(
        err <= rel,
        "{what}: got {got}, want {want}, rel err {err:e} > {rel:e}"
    );
}

/// `(x;q)` as a literal 400-factor partial product.
fn poch_brute(x: Complex64, q: Complex64) -> Complex64 {
    let mut acc = ONE;
    let mut xq = x;
    for _ in 0..400 {
        acc *= ONE - xq;
        xq *= q;
    }
    acc
}

#[test]
fn qpochhammer_matches_brute_force_product() {
    let policy = TruncationPolicy::default();
    let cases = [
        (c(0.3, 0.4), c(0.15, 0.05)),
        (c(-0.8, 0.2), c(0.2, -0.1)),
        (c(2.5, -1.5), c(0.1, 0.1)),
        (c(0.95, 0.0), c(0.3, 0.0)),
        (c(-3.0, 0.0), c(0.25, 0.0)),
    ];
    for (x, q) in cases {
        let got = qpochhammer(x, q, &policy).unwrap();
        assert_close(got, poch_brute(x, q), 1e-13, &format!("(x;q) at x={x}, q={q}"));
    }
}

#[test]
fn qpochhammer_matches_reference_values() {
    let policy = TruncationPolicy::default();
    let cases = [
        (c(0.3, 0.4), c(0.15, 0.05), c(0.64655470954699151, -0.45243931969461532)),
        (c(-0.8, 0.2), c(0.2, -0.1), c(2.0332155830729114, -0.54993787855764475)),
        (c(2.5, -1.5), c(0.1, 0.1), c(-0.66811337194226883, 1.0651157197071812)),
    ];
    for (x, q, want) in cases {
        let got = qpochhammer(x, q, &policy).unwrap();
        assert_close(got, want, 5e-14, &format!("(x;q) reference at x={x}"));
    }
}

/// `Σ_k (-1)^k q^{k(k-1)/2} x^k = (q;q) θ(x;q)`: an alternating series with
/// no factor structure in common with the product implementation.
#[test]
fn theta_matches_triple_product_series() {
    let policy = TruncationPolicy::default();
    let cases =
        [(c(0.5, 0.3), c(0.12, -0.04)), (c(1.7, 0.9), c(0.08, 0.06)), (c(-0.4, 0.9), c(0.2, 0.1))];
    for (x, q) in cases {
        let mut series = Complex64::new(0.0, 0.0);
        for k in -25i32..=25 {
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let binom = (k * (k - 1) / 2) as u32;
            series += sign * q.powu(binom) * x.powi(k);
        }
        let product = qpochhammer(q, q, &policy).unwrap() * theta(x, q, &policy).unwrap();
        assert_close(series, product, 1e-13, &format!("triple product at x={x}, q={q}"));
    }
}

#[test]
fn theta_matches_reference_values() {
    let policy = TruncationPolicy::default();
    let cases = [
        (c(0.5, 0.3), c(0.12, -0.04), c(0.43750466721358116, -0.15328165026996979)),
        (c(1.7, 0.9), c(0.08, 0.06), c(-0.78134852846034712, -0.64426999251926770)),
    ];
    for (x, q, want) in cases {
        let got = theta(x, q, &policy).unwrap();
        assert_close(got, want, 5e-14, &format!("theta reference at x={x}"));
    }
}

/// `Γ(z;p,q)` as a literal truncated double product, with the `p^r q^s`
/// lattice walked by repeated multiplication.
fn gamma_brute(z: Complex64, p: Complex64, q: Complex64, terms: usize) -> Complex64 {
    let mut acc = ONE;
    let mut pr = ONE;
    for _ in 0..terms {
        let mut qs = ONE;
        for _ in 0..terms {
            let num = ONE - pr * p * qs * q / z;
            let den = ONE - pr * qs * z;
            acc *= num / den;
            qs *= q;
        }
        pr *= p;
    }
    acc
}

#[test]
fn elliptic_gamma_matches_brute_force_double_product() {
    let policy = TruncationPolicy::default();
    let cases = [
        (c(0.4, 0.3), c(0.08, 0.03), c(0.11, -0.05)),
        (c(1.3, -0.7), c(0.1, 0.0), c(0.12, 0.06)),
        (c(-2.1, 0.4), c(0.14, -0.02), c(0.09, 0.04)),
    ];
    for (z, p, q) in cases {
        let got = elliptic_gamma(z, p, q, &policy).unwrap();
        assert_close(got, gamma_brute(z, p, q, 120), 1e-12, &format!("Γ(z;p,q) at z={z}"));
    }
}

#[test]
fn elliptic_gamma_matches_reference_values() {
    let policy = TruncationPolicy::default();
    let cases = [
        (c(0.4, 0.3), c(0.08, 0.03), c(0.11, -0.05), c(1.3860804137936008, 0.82415765050486584)),
        (c(1.3, -0.7), c(0.1, 0.0), c(0.12, 0.06), c(-0.94590488543672561, -1.7536621517860327)),
        (c(-1.0, 0.0), c(0.1, 0.0), c(0.1, 0.0), c(0.40418223957932906, 0.0)),
    ];
    for (z, p, q, want) in cases {
        let got = elliptic_gamma(z, p, q, &policy).unwrap();
        assert_close(got, want, 1e-13, &format!("Γ(z;p,q) reference at z={z}"));
    }
}

/// At `z = i` the per-coordinate kernel core is `1/Γ(-1;p,q)^2` (both `z^2`
/// and `z^{-2}` land on -1 exactly in floating point). Checked against the
/// frozen double-product value of `Γ(-1;0.1,0.1)`, which exercises the
/// reflection-based reciprocal along the way.
#[test]
fn kernel_core_matches_gamma_quotient_at_i() {
    let policy = TruncationPolicy::default();
    let nome = Nome::real(0.1, 0.1).unwrap();
    let got = bc_single_core(c(0.0, 1.0), &nome, &policy).unwrap();
    let gamma_neg_one = c(0.40418223957932906, 0.0);
    assert_close(got, ONE / (gamma_neg_one * gamma_neg_one), 1e-13, "kernel core at z=i");
}

#[test]
fn euler_gamma_matches_reference_values() {
    let cases = [
        (c(3.7, 1.2), c(0.48030991567412305, 3.3176635199002848)),
        (c(-2.3, 0.8), c(-0.023343663103221567, -0.21035413754506296)),
        (c(1.5, -2.5), c(0.047852328112029621, -0.11646735440110321)),
        (c(0.5, 0.0), c(1.7724538509055160, 0.0)),
    ];
    for (z, want) in cases {
        let got = classical_gamma(z).unwrap();
        assert_close(got, want, 1e-12, &format!("Γ(z) reference at z={z}"));
    }
}

#[test]
fn classical_beta_matches_reference_value() {
    let got = classical_beta(c(0.7, 0.2), c(1.9, -0.4)).unwrap();
    assert_close(got, c(0.76879039217659970, -0.18208651015810514), 1e-12, "B(a,b) reference");
}

/// A Gauss rule reproduces the total mass of its own weight, so the mapped
/// rule over `[0,1]` with `f = 1` must return `B(α,β)` to rounding.
#[test]
fn jacobi_rule_reproduces_beta_integral() {
    let cases = [(0.6, 1.3), (2.2, 0.4), (0.35, 0.35)];
    for (alpha, beta) in cases {
        let a = c(alpha, 0.0);
        let b = c(beta, 0.0);
        let got = jacobi_integrate_nd(0.0, 1.0, a, b, 24, 1, &|_: &[Complex64]| Ok(ONE)).unwrap();
        let want = classical_beta(a, b).unwrap();
        assert_close(got, want, 1e-12, &format!("beta mass at α={alpha}, β={beta}"));
    }
}

/// The factored-table integrator must agree with a naive sweep that
/// evaluates the full product at every grid point.
#[test]
fn grid_tables_match_naive_torus_sweep() {
    let grid = TorusGrid { dim: 2, size: 12, phase_offset: 0.5 };
    let single = |z: Complex64| Ok(ONE + c(0.3, 0.1) * z + c(0.2, -0.05) / z);
    let pair_prod = |w: Complex64| Ok(ONE / (ONE - c(0.3, 0.2) * w));
    let pair_ratio = |w: Complex64| Ok((c(2.0, 0.0) + w) / (c(2.0, 0.0) - w));

    let tables = GridTables::build(&grid, &single, Some(&pair_prod), Some(&pair_ratio)).unwrap();
    let fast = tables.integrate().unwrap();

    let naive = torus_integrate(&grid, |z: &[Complex64]| {
        Ok(single(z[0])? * single(z[1])? * pair_prod(z[0] * z[1])? * pair_ratio(z[0] / z[1])?)
    })
    .unwrap();
    assert_close(fast, naive, 1e-12, "table vs naive product sweep");
}
