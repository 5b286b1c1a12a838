//! Deterministic quadrature: torus product rules with certified refinement,
//! and Gauss-Jacobi rules on an interval (real or complex exponents).
//!
//! Every summation routine here is bit-identical across thread counts: work
//! is split into fixed-size chunks, each chunk is reduced serially with a
//! pairwise tree, and the per-chunk sums are combined serially in chunk
//! order. Parallelism only changes which thread computes a chunk, never the
//! shape of the reduction.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Fixed chunk length for deterministic parallel reduction.
const CHUNK: usize = 8192;

/// Maximum supported torus dimension (stack buffers in the hot loop).
pub const MAX_DIM: usize = 8;

/// Relative difference `|a - b| / max(|a|, |b|)`, guarded against 0/0.
pub fn rel_change(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 16 {
        let mut acc = ZERO;
        for x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Deterministic sum of `f(0) + f(1) + ... + f(total-1)`.
///
/// Chunks of [`CHUNK`] terms are evaluated in parallel; each chunk is
/// reduced with a serial pairwise tree and the chunk sums are combined in
/// chunk order, so the result does not depend on the worker count. If
/// several terms fail, the error with the smallest index wins.
pub fn sum_indexed<F>(total: usize, f: F) -> Result<Complex64>
where
    F: Fn(usize) -> Result<Complex64> + Sync,
{
    if total == 0 {
        return Ok(ZERO);
    }
    let nchunks = total.div_ceil(CHUNK);
    let chunk_sums: Vec<Result<Complex64>> = (0..nchunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * CHUNK;
            let hi = (lo + CHUNK).min(total);
            let mut buf = Vec::with_capacity(hi - lo);
            for k in lo..hi {
                buf.push(f(k)?);
            }
            Ok(pairwise_sum(&buf))
        })
        .collect();
    let mut sums = Vec::with_capacity(nchunks);
    for r in chunk_sums {
        sums.push(r?);
    }
    Ok(pairwise_sum(&sums))
}

/// Deterministic parallel tabulation of `f(0..len)`.
pub fn par_table<F>(len: usize, f: F) -> Result<Vec<Complex64>>
where
    F: Fn(usize) -> Result<Complex64> + Sync + Send,
{
    let entries: Vec<Result<Complex64>> = (0..len).into_par_iter().map(f).collect();
    let mut out = Vec::with_capacity(len);
    for e in entries {
        out.push(e?);
    }
    Ok(out)
}

/// Equispaced product grid on the n-torus.
///
/// Node `k` on each circle is `exp(2πi (k + phase_offset)/size)`. The
/// product rule `size^{-n} Σ f` integrates Laurent monomials `z^m` exactly
/// for `0 < |m| < size` in each variable, so the error for an integrand
/// analytic in an annulus decays geometrically in `size`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    pub dim: usize,
    pub size: usize,
    /// Offset in node units; 0.5 keeps nodes off the real axis and keeps the
    /// node set closed under both conjugation and negation (for even sizes).
    pub phase_offset: f64,
}

impl TorusGrid {
    pub fn new(dim: usize, size: usize, phase_offset: f64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::DomainViolation(format!(
                "torus dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        if size < 2 {
            return Err(Error::DomainViolation(format!("grid size must be >= 2, got {size}")));
        }
        Ok(TorusGrid { dim, size, phase_offset })
    }

    /// Node `k` on a single circle.
    pub fn node(&self, k: usize) -> Complex64 {
        let angle = std::f64::consts::TAU * ((k as f64) + self.phase_offset) / (self.size as f64);
        Complex64::from_polar(1.0, angle)
    }

    /// Total number of grid points, guarded against overflow.
    pub fn total_points(&self) -> Result<usize> {
        let mut total = 1usize;
        for _ in 0..self.dim {
            total = total.checked_mul(self.size).ok_or_else(|| {
                Error::DomainViolation(format!(
                    "grid {}^{} overflows the point counter",
                    self.size, self.dim
                ))
            })?;
        }
        Ok(total)
    }

    fn decode(&self, mut flat: usize, out: &mut [usize]) {
        for slot in out[..self.dim].iter_mut() {
            *slot = flat % self.size;
            flat /= self.size;
        }
    }
}

/// Integrates `f` over the torus `T^n` against `∏ dz_i/(2πi z_i)` with the
/// grid's product rule. Deterministic across thread counts.
pub fn torus_integrate<F>(grid: &TorusGrid, f: F) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
{
    let total = grid.total_points()?;
    let nodes: Vec<Complex64> = (0..grid.size).map(|k| grid.node(k)).collect();
    let sum = sum_indexed(total, |flat| {
        let mut idx = [0usize; MAX_DIM];
        grid.decode(flat, &mut idx);
        let mut z = [ZERO; MAX_DIM];
        for i in 0..grid.dim {
            z[i] = nodes[idx[i]];
        }
        f(&z[..grid.dim])
    })?;
    Ok(sum * (grid.size as f64).recip().powi(grid.dim as i32))
}

/// Precomputed per-node factor tables for integrands of the shape
/// `∏_i S(z_i) · ∏_{i<j} G(z_i z_j) · H(z_i/z_j)`.
///
/// All the symmetric kernels in this crate factor this way, which turns an
/// `O(size^n)` sweep of expensive special-function evaluations into three
/// `O(size)` tables plus an `O(size^n)` sweep of table lookups.
pub struct GridTables {
    pub grid: TorusGrid,
    /// `single[k] = S(node_k)`.
    pub single: Vec<Complex64>,
    /// `pair_prod[m] = G(exp(2πi (m + 2·offset)/size))`, looked up at
    /// `m = (k_i + k_j) mod size`; the two node offsets add.
    pub pair_prod: Option<Vec<Complex64>>,
    /// `pair_ratio[m] = H(exp(2πi m/size))`, looked up at
    /// `m = (k_i - k_j) mod size`; the offsets cancel.
    pub pair_ratio: Option<Vec<Complex64>>,
}

/// Closure type for a per-node factor table.
pub type NodeFactor<'a> = &'a (dyn Fn(Complex64) -> Result<Complex64> + Sync);

impl GridTables {
    /// Tabulates the three factor families on the grid.
    pub fn build(
        grid: &TorusGrid,
        single: NodeFactor<'_>,
        pair_prod: Option<NodeFactor<'_>>,
        pair_ratio: Option<NodeFactor<'_>>,
    ) -> Result<GridTables> {
        let n = grid.size;
        let single_tab = par_table(n, |k| single(grid.node(k)))?;
        let pp = match pair_prod {
            Some(g) => Some(par_table(n, |m| {
                let angle = std::f64::consts::TAU * ((m as f64) + 2.0 * grid.phase_offset)
                    / (grid.size as f64);
                g(Complex64::from_polar(1.0, angle))
            })?),
            None => None,
        };
        let pr = match pair_ratio {
            Some(h) => Some(par_table(n, |m| {
                let angle = std::f64::consts::TAU * (m as f64) / (grid.size as f64);
                h(Complex64::from_polar(1.0, angle))
            })?),
            None => None,
        };
        Ok(GridTables { grid: *grid, single: single_tab, pair_prod: pp, pair_ratio: pr })
    }

    /// The product-rule integral `size^{-n} Σ ∏ tables`.
    pub fn integrate(&self) -> Result<Complex64> {
        let grid = self.grid;
        let n = grid.size;
        let total = grid.total_points()?;
        let sum = sum_indexed(total, |flat| {
            let mut idx = [0usize; MAX_DIM];
            grid.decode(flat, &mut idx);
            let mut acc = ONE;
            for i in 0..grid.dim {
                acc *= self.single[idx[i]];
            }
            for i in 0..grid.dim {
                for j in (i + 1)..grid.dim {
                    if let Some(pp) = &self.pair_prod {
                        acc *= pp[(idx[i] + idx[j]) % n];
                    }
                    if let Some(pr) = &self.pair_ratio {
                        acc *= pr[(idx[i] + n - idx[j]) % n];
                    }
                }
            }
            Ok(acc)
        })?;
        Ok(sum * (n as f64).recip().powi(grid.dim as i32))
    }
}

/// One refinement level: the grid size used and the value it produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub grid: u32,
    pub value: Complex64,
    /// Relative change from the previous level; `None` on the first level.
    pub rel_change: Option<f64>,
}

/// Record of a doubling refinement run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceHistory {
    pub target_rel: f64,
    pub levels: Vec<Level>,
    /// True iff the last recorded relative change met `target_rel`.
    pub converged: bool,
}

impl ConvergenceHistory {
    pub fn last_rel_change(&self) -> Option<f64> {
        self.levels.last().and_then(|l| l.rel_change)
    }

    /// The finest-level value.
    pub fn final_value(&self) -> Option<Complex64> {
        self.levels.last().map(|l| l.value)
    }
}

/// Controls for [`refine_until`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineSettings {
    pub grid_start: usize,
    pub target_rel: f64,
    pub max_level: usize,
}

impl RefineSettings {
    /// Dimension-aware defaults: finer starting grids and tighter targets
    /// in low dimension, where refinement is cheap.
    pub fn for_dim(dim: usize) -> Self {
        let (grid_start, target_rel, max_level) = match dim {
            0 | 1 => (64, 1e-9, 7),
            2 => (48, 1e-9, 6),
            _ => (32, 1e-6, 4),
        };
        RefineSettings { grid_start, target_rel, max_level }
    }
}

/// Doubles the grid until two consecutive values agree to `target_rel`.
///
/// Levels run `grid_start, 2·grid_start, ...` up to `max_level` doublings.
/// Returns the full history; `converged = false` (not an error) when the
/// budget runs out, so callers can report the trajectory. Hard evaluation
/// failures propagate as errors.
pub fn refine_until<F>(mut eval_at: F, settings: &RefineSettings) -> Result<ConvergenceHistory>
where
    F: FnMut(usize) -> Result<Complex64>,
{
    if settings.grid_start < 2 || !(settings.target_rel > 0.0) {
        return Err(Error::DomainViolation(format!(
            "refinement needs grid_start >= 2 and target_rel > 0, got {settings:?}"
        )));
    }
    let mut history = ConvergenceHistory {
        target_rel: settings.target_rel,
        levels: Vec::with_capacity(settings.max_level + 1),
        converged: false,
    };
    let mut grid = settings.grid_start;
    let mut prev: Option<Complex64> = None;
    for _ in 0..=settings.max_level {
        let v = eval_at(grid)?;
        let rc = prev.map(|pv| rel_change(v, pv));
        history.levels.push(Level { grid: grid as u32, value: v, rel_change: rc });
        if let Some(rc) = rc {
            if rc <= settings.target_rel {
                history.converged = true;
                return Ok(history);
            }
        }
        prev = Some(v);
        grid = grid.checked_mul(2).ok_or_else(|| {
            Error::DomainViolation("grid size overflow during refinement".into())
        })?;
    }
    Ok(history)
}

/// Phase offsets tried in order when a grid lands on a pole.
pub const OFFSET_LADDER: [f64; 5] = [0.5, 0.25, 0.75, 0.125, 0.875];

/// Runs [`refine_until`] with the first phase offset from
/// [`OFFSET_LADDER`] that avoids the singular set (a `PoleHit` or
/// `DenominatorZero` is grid-placement dependent, so the next offset is
/// tried). Other errors propagate immediately; if every offset lands on a
/// singularity, the last such error is returned.
pub fn refine_with_offsets<F>(mut eval: F, settings: &RefineSettings) -> Result<ConvergenceHistory>
where
    F: FnMut(usize, f64) -> Result<Complex64>,
{
    let mut last_singular: Option<Error> = None;
    for &off in OFFSET_LADDER.iter() {
        match refine_until(|g| eval(g, off), settings) {
            Ok(h) => return Ok(h),
            Err(e @ (Error::PoleHit(_) | Error::DenominatorZero(_))) => last_singular = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_singular.expect("offset ladder is non-empty"))
}

// ---------------------------------------------------------------------------
// Classical gamma and Gauss-Jacobi rules.
// ---------------------------------------------------------------------------

/// Lanczos coefficients, g = 7, 9 terms.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler's gamma function for complex arguments (Lanczos, g = 7), with the
/// reflection formula for `Re z < 0.5`. Fails with `PoleHit` at the poles
/// `z = 0, -1, -2, ...`.
pub fn classical_gamma(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor() {
        return Err(Error::PoleHit(format!("classical gamma pole at z = {}", z.re)));
    }
    if z.re < 0.5 {
        // Γ(z) Γ(1-z) = π / sin(πz)
        let s = (std::f64::consts::PI * z).sin();
        if s.norm() == 0.0 {
            return Err(Error::PoleHit(format!("classical gamma reflection pole at z = {z}")));
        }
        return Ok(std::f64::consts::PI / (s * classical_gamma(ONE - z)?));
    }
    let zm = z - ONE;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (zm + Complex64::new(i as f64, 0.0));
    }
    let t = zm + Complex64::new(7.5, 0.0);
    let sqrt_two_pi = (2.0 * std::f64::consts::PI).sqrt();
    Ok(sqrt_two_pi * t.powc(zm + Complex64::new(0.5, 0.0)) * (-t).exp() * acc)
}

/// `B(x, y) = Γ(x)Γ(y)/Γ(x+y)`.
pub fn classical_beta(x: Complex64, y: Complex64) -> Result<Complex64> {
    Ok(classical_gamma(x)? * classical_gamma(y)? / classical_gamma(x + y)?)
}

/// Monic three-term recurrence coefficients for Jacobi polynomials with
/// weight `(1-x)^a (1+x)^b` on `[-1, 1]` (generic, works in any field with
/// the usual formulas): returns `(a_k, b_k)` for `k = 0..m`, where `b_0` is
/// unused and `b_k` is the squared off-diagonal.
fn jacobi_recurrence(m: usize, a: Complex64, b: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut ak = Vec::with_capacity(m);
    let mut bk = Vec::with_capacity(m);
    for k in 0..m {
        if k == 0 {
            ak.push((b - a) / (a + b + 2.0));
            bk.push(ZERO);
        } else {
            let kk = k as f64;
            let s = 2.0 * kk + a + b;
            ak.push((b * b - a * a) / (s * (s + 2.0)));
            if k == 1 {
                let d = a + b + 2.0;
                bk.push(4.0 * (a + 1.0) * (b + 1.0) / (d * d * (a + b + 3.0)));
            } else {
                bk.push(
                    4.0 * kk * (kk + a) * (kk + b) * (kk + a + b) / (s * s * (s + 1.0) * (s - 1.0)),
                );
            }
        }
    }
    (ak, bk)
}

/// Total mass `∫_{-1}^1 (1-x)^a (1+x)^b dx = 2^{a+b+1} B(a+1, b+1)`.
fn jacobi_mu0(a: Complex64, b: Complex64) -> Result<Complex64> {
    let two = Complex64::new(2.0, 0.0);
    Ok(two.powc(a + b + ONE) * classical_beta(a + ONE, b + ONE)?)
}

/// QL with implicit shifts, eigenvalues only. `d` holds the diagonal, `e`
/// the off-diagonals (`e[i]` couples `d[i]` and `d[i+1]`; `e[n-1]` is
/// scratch). More than 50 sweeps for one eigenvalue is a failure.
fn symmetric_tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::NodeComputationFailure(format!(
                    "QL sweep failed to deflate eigenvalue {l} of {n} within 50 iterations"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut deflated_early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let bb = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated_early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * bb;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - bb;
            }
            if deflated_early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    Ok(())
}

/// Sum of squared orthonormal polynomial values `Σ_{k<m} p̃_k(x)²` (no
/// conjugation; for complex exponents this is the formal bilinear form).
/// The Gauss weight at a node is the reciprocal of this sum.
fn christoffel_denominator(
    x: Complex64,
    ak: &[Complex64],
    bsqrt: &[Complex64],
    mu0: Complex64,
) -> Complex64 {
    let m = ak.len();
    let mut u_prev = ZERO;
    let mut u = ONE / mu0.sqrt();
    let mut total = u * u;
    for k in 0..m.saturating_sub(1) {
        let carry = if k == 0 { ZERO } else { bsqrt[k] * u_prev };
        let next = ((x - ak[k]) * u - carry) / bsqrt[k + 1];
        u_prev = u;
        u = next;
        total += next * next;
    }
    total
}

/// Monic Jacobi polynomial of degree `m` and its derivative at `x`.
fn monic_with_derivative(
    x: Complex64,
    ak: &[Complex64],
    bk: &[Complex64],
) -> (Complex64, Complex64) {
    let mut p_prev = ONE;
    let mut dp_prev = ZERO;
    let mut p = x - ak[0];
    let mut dp = ONE;
    for k in 1..ak.len() {
        let p_next = (x - ak[k]) * p - bk[k] * p_prev;
        let dp_next = p + (x - ak[k]) * dp - bk[k] * dp_prev;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
    }
    (p, dp)
}

/// Gauss-Jacobi rule on `(-1, 1)` for the weight `(1-x)^a (1+x)^b`.
#[derive(Debug, Clone)]
pub struct JacobiRule {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

/// Builds the `m`-point Gauss-Jacobi rule for weight `(1-x)^a (1+x)^b`,
/// requiring `Re a > -1` and `Re b > -1`.
///
/// Real exponents go through Golub-Welsch (QL eigenvalues of the real
/// recurrence matrix, Christoffel weights). Complex exponents reuse the
/// real-part rule's nodes as seeds for a Newton iteration on the complex
/// monic polynomial; the weights come from the formal (unconjugated)
/// Christoffel sum. The rule then integrates polynomials of degree
/// `2m - 1` exactly against the complex weight.
pub fn jacobi_rule(m: usize, a: Complex64, b: Complex64) -> Result<JacobiRule> {
    if m == 0 {
        return Err(Error::DomainViolation("Jacobi rule needs at least one node".into()));
    }
    if a.re <= -1.0 || b.re <= -1.0 {
        return Err(Error::DomainViolation(format!(
            "Jacobi weight needs Re(a) > -1 and Re(b) > -1, got a = {a}, b = {b}"
        )));
    }
    let real_nodes = {
        let ar = Complex64::new(a.re, 0.0);
        let br = Complex64::new(b.re, 0.0);
        let (ak, bk) = jacobi_recurrence(m, ar, br);
        let mut d: Vec<f64> = ak.iter().map(|c| c.re).collect();
        let mut e: Vec<f64> = (0..m)
            .map(|k| if k + 1 < m { bk[k + 1].re.max(0.0).sqrt() } else { 0.0 })
            .collect();
        symmetric_tridiagonal_eigenvalues(&mut d, &mut e)?;
        d
    };
    let (ak, bk) = jacobi_recurrence(m, a, b);
    let mu0 = jacobi_mu0(a, b)?;
    let bsqrt: Vec<Complex64> = bk.iter().map(|c| c.sqrt()).collect();
    let is_complex = a.im != 0.0 || b.im != 0.0;
    let mut nodes = Vec::with_capacity(m);
    for &x0 in &real_nodes {
        let mut x = Complex64::new(x0, 0.0);
        if is_complex {
            let mut ok = false;
            for _ in 0..60 {
                let (p, dp) = monic_with_derivative(x, &ak, &bk);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                x -= step;
                if step.norm() <= 1e-15 * (1.0 + x.norm()) {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Err(Error::NodeComputationFailure(format!(
                    "Newton polish for the complex Jacobi node seeded at {x0} did not converge"
                )));
            }
        }
        nodes.push(x);
    }
    let mut weights = Vec::with_capacity(m);
    for &x in &nodes {
        let denom = christoffel_denominator(x, &ak, &bsqrt, mu0);
        if denom.norm() == 0.0 {
            return Err(Error::NodeComputationFailure(format!(
                "Christoffel sum vanished at node {x}"
            )));
        }
        weights.push(ONE / denom);
    }
    Ok(JacobiRule { nodes, weights })
}

/// `∫_a^b (x-a)^{α-1} (b-x)^{β-1} f(x) dx` by an `m`-point Gauss-Jacobi
/// rule; requires `a < b` and `Re α, Re β > 0`. `f` receives the mapped
/// node (real nodes have zero imaginary part).
pub fn jacobi_integrate<F>(
    a: f64,
    b: f64,
    alpha: Complex64,
    beta: Complex64,
    m: usize,
    f: F,
) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mapped = JacobiMap::new(a, b, alpha, beta, m)?;
    let mut acc = Vec::with_capacity(m);
    for k in 0..m {
        let (x, w) = mapped.node(k);
        acc.push(w * f(x)?);
    }
    Ok(mapped.scale * pairwise_sum(&acc))
}

/// A Gauss-Jacobi rule mapped to `[a, b]` with the endpoint-singularity
/// exponents `(x-a)^{α-1}` near `a` and `(b-x)^{β-1}` near `b` folded into
/// the weights. Used directly for product rules in several dimensions.
pub struct JacobiMap {
    rule: JacobiRule,
    a: f64,
    half_width: f64,
    /// `((b-a)/2)^{α+β-1}`, applied once per dimension.
    pub scale: Complex64,
}

impl JacobiMap {
    pub fn new(a: f64, b: f64, alpha: Complex64, beta: Complex64, m: usize) -> Result<Self> {
        if !(b > a) {
            return Err(Error::DomainViolation(format!(
                "interval must satisfy a < b, got [{a}, {b}]"
            )));
        }
        if alpha.re <= 0.0 || beta.re <= 0.0 {
            return Err(Error::DomainViolation(format!(
                "endpoint exponents need positive real part, got α = {alpha}, β = {beta}"
            )));
        }
        // Weight (1-ξ)^{β-1} (1+ξ)^{α-1} on (-1,1): ξ = -1 maps to x = a.
        let rule = jacobi_rule(m, beta - ONE, alpha - ONE)?;
        let half = (b - a) / 2.0;
        let scale = Complex64::new(half, 0.0).powc(alpha + beta - ONE);
        Ok(JacobiMap { rule, a, half_width: half, scale })
    }

    pub fn len(&self) -> usize {
        self.rule.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.nodes.is_empty()
    }

    /// The mapped node and its (unscaled) weight.
    pub fn node(&self, k: usize) -> (Complex64, Complex64) {
        let xi = self.rule.nodes[k];
        let x = Complex64::new(self.a + self.half_width, 0.0) + self.half_width * xi;
        (x, self.rule.weights[k])
    }
}

/// `n`-fold product Gauss-Jacobi integration over `[a, b]^n` of
/// `∏_i (x_i-a)^{α-1} (b-x_i)^{β-1} · f(x)`, deterministic across thread
/// counts. `f` sees the vector of mapped nodes.
pub fn jacobi_integrate_nd<F>(
    a: f64,
    b: f64,
    alpha: Complex64,
    beta: Complex64,
    m: usize,
    dim: usize,
    f: F,
) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
{
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::DomainViolation(format!(
            "product rule dimension must be in 1..={MAX_DIM}, got {dim}"
        )));
    }
    let map = JacobiMap::new(a, b, alpha, beta, m)?;
    let total = {
        let mut t = 1usize;
        for _ in 0..dim {
            t = t.checked_mul(m).ok_or_else(|| {
                Error::DomainViolation(format!("product rule {m}^{dim} overflows"))
            })?;
        }
        t
    };
    let sum = sum_indexed(total, |flat| {
        let mut rest = flat;
        let mut x = [ZERO; MAX_DIM];
        let mut w = ONE;
        for slot in x[..dim].iter_mut() {
            let k = rest % m;
            rest /= m;
            let (xi, wi) = map.node(k);
            *slot = xi;
            w *= wi;
        }
        Ok(w * f(&x[..dim])?)
    })?;
    let mut scale = ONE;
    for _ in 0..dim {
        scale *= map.scale;
    }
    Ok(scale * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<Complex64> =
            (0..1000).map(|k| c((k as f64).sin(), (k as f64 * 0.7).cos())).collect();
        let naive: Complex64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).norm() < 1e-10);
    }

    #[test]
    fn sum_indexed_reports_first_error() {
        let r = sum_indexed(20_000, |k| {
            if k == 10 || k == 5000 {
                Err(Error::PoleHit(format!("at {k}")))
            } else {
                Ok(ONE)
            }
        });
        match r {
            Err(Error::PoleHit(msg)) => assert!(msg.contains("at 10"), "got {msg}"),
            other => panic!("expected pole error, got {other:?}"),
        }
    }

    #[test]
    fn torus_rule_kills_low_laurent_modes() {
        let grid = TorusGrid::new(1, 8, 0.5).unwrap();
        for m in 1..8i32 {
            let v = torus_integrate(&grid, |z| Ok(z[0].powi(m))).unwrap();
            assert!(v.norm() < 1e-14, "mode {m} leaked: {v}");
        }
        let v0 = torus_integrate(&grid, |z| Ok(z[0].powi(0))).unwrap();
        assert!((v0 - ONE).norm() < 1e-15);
        // Aliasing at |m| = size is expected: z^8 sums to exp(2πi·8·0.5/8)·...
        let v8 = torus_integrate(&grid, |z| Ok(z[0].powi(8))).unwrap();
        assert!((v8.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn grid_tables_match_direct_evaluation() {
        let grid = TorusGrid::new(2, 6, 0.5).unwrap();
        let single = |z: Complex64| Ok(ONE + c(0.3, 0.1) * z);
        let pp = |w: Complex64| Ok(ONE + c(0.2, -0.05) * w);
        let pr = |w: Complex64| Ok(ONE / (c(2.0, 0.0) + w));
        let tables = GridTables::build(&grid, &single, Some(&pp), Some(&pr)).unwrap();
        let fast = tables.integrate().unwrap();
        let direct = torus_integrate(&grid, |z| {
            Ok(single(z[0])?
                * single(z[1])?
                * pp(z[0] * z[1])?
                * pr(z[0] / z[1])?)
        })
        .unwrap();
        assert!((fast - direct).norm() < 1e-13, "fast {fast} direct {direct}");
    }

    #[test]
    fn refinement_stops_when_converged() {
        let settings = RefineSettings { grid_start: 4, target_rel: 1e-6, max_level: 10 };
        let h = refine_until(|g| Ok(ONE + c(0.5, 0.0).powi(g as i32)), &settings).unwrap();
        assert!(h.converged);
        assert!(h.levels.len() < 11);
        assert!(h.last_rel_change().unwrap() <= 1e-6);
    }

    #[test]
    fn refinement_exhausts_budget_without_converging() {
        let settings = RefineSettings { grid_start: 4, target_rel: 1e-12, max_level: 3 };
        let mut toggle = 1.0;
        let h = refine_until(
            |_| {
                toggle = -toggle;
                Ok(c(1.0 + toggle, 0.0))
            },
            &settings,
        )
        .unwrap();
        assert!(!h.converged);
        assert_eq!(h.levels.len(), 4);
    }

    #[test]
    fn offset_ladder_skips_poles() {
        // Fail the default offset, succeed on the next.
        let settings = RefineSettings { grid_start: 4, target_rel: 1e-3, max_level: 5 };
        let h = refine_with_offsets(
            |g, off| {
                if off == 0.5 {
                    Err(Error::PoleHit("synthetic".into()))
                } else {
                    Ok(ONE + c(0.1, 0.0).powi(g as i32))
                }
            },
            &settings,
        )
        .unwrap();
        assert!(h.converged);
    }

    #[test]
    fn legendre_rule_matches_reference() {
        let r = jacobi_rule(5, ZERO, ZERO).unwrap();
        let nodes: Vec<f64> = r.nodes.iter().map(|z| z.re).collect();
        let expect = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683_1,
            0.0,
            0.538_469_310_105_683_1,
            0.906_179_845_938_664,
        ];
        for (got, want) in nodes.iter().zip(expect.iter()) {
            assert!((got - want).abs() < 1e-12, "node {got} vs {want}");
        }
        let wexpect = [
            0.236_926_885_056_189_1,
            0.478_628_670_499_366_5,
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
        ];
        for (got, want) in r.weights.iter().zip(wexpect.iter()) {
            assert!((got.re - want).abs() < 1e-12, "weight {got} vs {want}");
        }
    }

    #[test]
    fn jacobi_weights_sum_to_total_mass() {
        let (a, b) = (c(0.7, 0.0), c(-0.3, 0.0));
        let r = jacobi_rule(24, a, b).unwrap();
        let total: Complex64 = r.weights.iter().sum();
        let mu0 = jacobi_mu0(a, b).unwrap();
        assert!((total - mu0).norm() < 1e-12 * mu0.norm());
    }

    #[test]
    fn complex_exponent_rule_reproduces_beta() {
        let alpha = c(0.8, 0.25);
        let beta = c(1.3, -0.4);
        let v = jacobi_integrate(0.0, 1.0, alpha, beta, 32, |_| Ok(ONE)).unwrap();
        let want = classical_beta(alpha, beta).unwrap();
        assert!((v - want).norm() < 1e-10 * want.norm(), "got {v}, want {want}");
    }

    #[test]
    fn nd_product_rule_factorizes() {
        let alpha = c(0.6, 0.0);
        let beta = c(1.1, 0.0);
        let one_d = jacobi_integrate(0.0, 1.0, alpha, beta, 20, |x| Ok(ONE + x)).unwrap();
        let two_d = jacobi_integrate_nd(0.0, 1.0, alpha, beta, 20, 2, |x| {
            Ok((ONE + x[0]) * (ONE + x[1]))
        })
        .unwrap();
        assert!((two_d - one_d * one_d).norm() < 1e-12 * two_d.norm());
    }

    #[test]
    fn classical_gamma_reference_values() {
        let g_half = classical_gamma(c(0.5, 0.0)).unwrap();
        assert!((g_half.re - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        let g5 = classical_gamma(c(5.0, 0.0)).unwrap();
        assert!((g5.re - 24.0).abs() < 1e-11);
        let gm = classical_gamma(c(-0.5, 0.0)).unwrap();
        assert!((gm.re + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
        let gi = classical_gamma(c(1.0, 1.0)).unwrap();
        let want = c(0.498_015_668_118_356, -0.154_949_828_301_810_7);
        assert!((gi - want).norm() < 1e-12);
        assert!(matches!(classical_gamma(c(0.0, 0.0)), Err(Error::PoleHit(_))));
        assert!(matches!(classical_gamma(c(-3.0, 0.0)), Err(Error::PoleHit(_))));
    }
}
