//! Seeded parameter sampling and admissibility checking.
//!
//! Every identity family has a parameter struct, a `check` method, and a
//! sampler. The sampler draws moduli log-uniformly inside margin-shrunk
//! windows, solves the balancing condition exactly for one dependent
//! parameter per constraint, and then runs the same `check` it shares with
//! the verifier (the sampler uses [`SAMPLER_MARGIN`]; externally supplied
//! parameter files are checked with margin 0). After [`MAX_ROUNDS`]
//! rejected draws the sampler reports `Infeasible` with a per-constraint
//! violation tally.
//!
//! Window convention: a modulus `x` passes the window `(lo, hi)` with
//! margin `m` iff `lo·(1+m) <= x <= hi·(1-m)`.
//!
//! Randomness is `ChaCha8` keyed by `(seed, identity tag, dimensions)`
//! through a splitmix mixing step, so the same seed yields unrelated
//! streams for different identities or dimensions, and results are
//! reproducible across platforms and thread counts.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qseries::{theta, Nome, TruncationPolicy};

/// Margin applied by the samplers to every window and balance check.
pub const SAMPLER_MARGIN: f64 = 0.05;

/// Rejection rounds before giving up with `Infeasible`.
pub const MAX_ROUNDS: u32 = 10_000;

/// Relative residual allowed on balancing conditions.
pub const BALANCE_TOL: f64 = 1e-12;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

// ---------------------------------------------------------------------------
// RNG plumbing.
// ---------------------------------------------------------------------------

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic stream for `(seed, tag, n, m, k)`.
pub fn rng_for(seed: u64, tag: u64, n: usize, m: usize, k: usize) -> ChaCha8Rng {
    let mut s = seed;
    let mut h = splitmix64(&mut s);
    s ^= tag.wrapping_mul(0xA076_1D64_78BD_642F);
    h ^= splitmix64(&mut s);
    s ^= (n as u64) ^ ((m as u64) << 20) ^ ((k as u64) << 40);
    h ^= splitmix64(&mut s);
    ChaCha8Rng::seed_from_u64(h)
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    uniform(rng, lo.ln(), hi.ln()).exp()
}

fn phase(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>() * std::f64::consts::TAU
}

fn annulus(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Complex64 {
    Complex64::from_polar(log_uniform(rng, lo, hi), phase(rng))
}

fn sample_nome(rng: &mut ChaCha8Rng) -> Nome {
    let p = annulus(rng, 0.04, 0.12);
    let q = annulus(rng, 0.05, 0.15);
    Nome { p, q }
}

// ---------------------------------------------------------------------------
// Constraint helpers (shared by samplers and external-parameter checking).
// ---------------------------------------------------------------------------

fn window(label: &str, value: Complex64, lo: f64, hi: f64, margin: f64) -> Result<()> {
    let x = value.norm();
    let lo_eff = lo * (1.0 + margin);
    let hi_eff = hi * (1.0 - margin);
    if !(x >= lo_eff && x <= hi_eff) {
        return Err(Error::DomainViolation(format!(
            "window {label}: modulus {x:.6} outside [{lo_eff:.6}, {hi_eff:.6}]"
        )));
    }
    Ok(())
}

fn upper(label: &str, value: Complex64, hi: f64, margin: f64) -> Result<()> {
    let x = value.norm();
    let hi_eff = hi * (1.0 - margin);
    if !(x <= hi_eff) {
        return Err(Error::DomainViolation(format!(
            "window {label}: modulus {x:.6} above {hi_eff:.6}"
        )));
    }
    Ok(())
}

fn balanced(label: &str, lhs: Complex64, rhs: Complex64) -> Result<()> {
    let scale = lhs.norm().max(rhs.norm()).max(1e-300);
    let res = (lhs - rhs).norm() / scale;
    if res > BALANCE_TOL {
        return Err(Error::DomainViolation(format!(
            "balance {label}: relative residual {res:.3e} exceeds {BALANCE_TOL:e}"
        )));
    }
    Ok(())
}

struct ViolationLog {
    counts: BTreeMap<String, u32>,
    last: String,
}

impl ViolationLog {
    fn new() -> Self {
        ViolationLog { counts: BTreeMap::new(), last: String::new() }
    }

    fn record(&mut self, msg: String) {
        let label = msg.split(':').next().unwrap_or("constraint").to_string();
        *self.counts.entry(label).or_insert(0) += 1;
        self.last = msg;
    }

    fn infeasible(self, rounds: u32) -> Error {
        let mut tallies: Vec<(String, u32)> = self.counts.into_iter().collect();
        tallies.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let summary =
            tallies.iter().map(|(k, v)| format!("{k} x{v}")).collect::<Vec<_>>().join(", ");
        Error::Infeasible { rounds, worst: format!("{summary}; last: {}", self.last) }
    }
}

fn rejection_sample<T>(
    mut draw: impl FnMut() -> T,
    check: impl Fn(&T) -> Result<()>,
) -> Result<T> {
    let mut log = ViolationLog::new();
    for _ in 0..MAX_ROUNDS {
        let cand = draw();
        match check(&cand) {
            Ok(()) => return Ok(cand),
            Err(Error::DomainViolation(msg)) => log.record(msg),
            Err(e) => return Err(e),
        }
    }
    Err(log.infeasible(MAX_ROUNDS))
}

/// Flat name → value map, the exchange format for parameter files.
pub type NamedParams = BTreeMap<String, Complex64>;

fn take(map: &NamedParams, key: &str) -> Result<Complex64> {
    map.get(key)
        .copied()
        .ok_or_else(|| Error::DomainViolation(format!("missing parameter `{key}`")))
}

fn take_real(map: &NamedParams, key: &str) -> Result<f64> {
    let v = take(map, key)?;
    if v.im != 0.0 {
        return Err(Error::DomainViolation(format!(
            "parameter `{key}` must be real, got imaginary part {}",
            v.im
        )));
    }
    Ok(v.re)
}

// ---------------------------------------------------------------------------
// Transformation with 2n+2m+4 parameters on unit-circle contours.
// ---------------------------------------------------------------------------

/// Parameters `t_0, ..., t_{2n+2m+3}` with `∏ t_r = (pq)^{m+1}` and
/// `√|pq| < |t_r| < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DixonParams {
    pub n: usize,
    pub m: usize,
    pub nome: Nome,
    pub t: Vec<Complex64>,
    /// Build the dual parameters with the negated square root of `pq`.
    #[serde(default)]
    pub branch_negate_sqrt: bool,
}

impl DixonParams {
    pub fn count(n: usize, m: usize) -> usize {
        2 * n + 2 * m + 4
    }

    pub fn check(&self, margin: f64, _policy: &TruncationPolicy) -> Result<()> {
        let want = Self::count(self.n, self.m);
        if self.t.len() != want {
            return Err(Error::DomainViolation(format!(
                "parameter count: expected {want} values t_r, got {}",
                self.t.len()
            )));
        }
        let spq = self.nome.pq().norm().sqrt();
        for (r, &tr) in self.t.iter().enumerate() {
            window(&format!("t{r}"), tr, spq, 1.0, margin)?;
        }
        let prod: Complex64 = self.t.iter().product();
        balanced("prod(t_r) = (pq)^(m+1)", prod, self.nome.pq().powi(self.m as i32 + 1))
    }

    pub fn to_named(&self) -> Vec<(String, Complex64)> {
        let mut out = vec![("p".into(), self.nome.p), ("q".into(), self.nome.q)];
        for (r, &tr) in self.t.iter().enumerate() {
            out.push((format!("t{r}"), tr));
        }
        out
    }

    pub fn from_named(map: &NamedParams, n: usize, m: usize) -> Result<Self> {
        let nome = Nome::new(take(map, "p")?, take(map, "q")?)?;
        let t = (0..Self::count(n, m))
            .map(|r| take(map, &format!("t{r}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(DixonParams { n, m, nome, t, branch_negate_sqrt: false })
    }
}

pub fn sample_dixon(n: usize, m: usize, seed: u64) -> Result<DixonParams> {
    let policy = TruncationPolicy::default();
    let mut rng = rng_for(seed, 1, n, m, 0);
    rejection_sample(
        || {
            let nome = sample_nome(&mut rng);
            let spq = nome.pq().norm().sqrt();
            let lo = spq * (1.0 + 1.5 * SAMPLER_MARGIN);
            let hi = 1.0 - 1.5 * SAMPLER_MARGIN;
            let count = DixonParams::count(n, m);
            let mut t: Vec<Complex64> = (0..count - 1).map(|_| annulus(&mut rng, lo, hi)).collect();
            let prod: Complex64 = t.iter().product();
            t.push(nome.pq().powi(m as i32 + 1) / prod);
            DixonParams { n, m, nome, t, branch_negate_sqrt: false }
        },
        |cand| cand.check(SAMPLER_MARGIN, &policy),
    )
}

// ---------------------------------------------------------------------------
// Six-parameter evaluation and eight-parameter transformation with a
// cross-term parameter t.
// ---------------------------------------------------------------------------

/// Parameters `t; t_1..t_6` with `t^{2(n-1)} t_1 ⋯ t_6 = pq`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelbergEvalParams {
    pub n: usize,
    pub nome: Nome,
    pub t: Complex64,
    pub tr: Vec<Complex64>,
}

impl SelbergEvalParams {
    pub fn check(&self, margin: f64, _policy: &TruncationPolicy) -> Result<()> {
        if self.tr.len() != 6 {
            return Err(Error::DomainViolation(format!(
                "parameter count: expected 6 values t_r, got {}",
                self.tr.len()
            )));
        }
        if self.n == 0 {
            return Err(Error::DomainViolation("dimension: n must be >= 1".into()));
        }
        let spq = self.nome.pq().norm().sqrt();
        window("t", self.t, spq, 1.0, margin)?;
        for (r, &tr) in self.tr.iter().enumerate() {
            window(&format!("t{}", r + 1), tr, spq, 1.0, margin)?;
        }
        let prod: Complex64 = self.tr.iter().product();
        balanced(
            "t^(2n-2) prod(t_r) = pq",
            self.t.powi(2 * self.n as i32 - 2) * prod,
            self.nome.pq(),
        )
    }

    pub fn to_named(&self) -> Vec<(String, Complex64)> {
        let mut out =
            vec![("p".into(), self.nome.p), ("q".into(), self.nome.q), ("t".into(), self.t)];
        for (r, &tr) in self.tr.iter().enumerate() {
            out.push((format!("t{}", r + 1), tr));
        }
        out
    }

    pub fn from_named(map: &NamedParams, n: usize) -> Result<Self> {
        let nome = Nome::new(take(map, "p")?, take(map, "q")?)?;
        let t = take(map, "t")?;
        let tr = (1..=6).map(|r| take(map, &format!("t{r}"))).collect::<Result<Vec<_>>>()?;
        Ok(SelbergEvalParams { n, nome, t, tr })
    }
}

pub fn sample_selberg_eval(n: usize, seed: u64) -> Result<SelbergEvalParams> {
    let policy = TruncationPolicy::default();
    let mut rng = rng_for(seed, 2, n, 0, 0);
    rejection_sample(
        || {
            let nome = sample_nome(&mut rng);
            let spq = nome.pq().norm().sqrt();
            let lo = spq * (1.0 + 1.5 * SAMPLER_MARGIN);
            let hi = 1.0 - 1.5 * SAMPLER_MARGIN;
            let t = annulus(&mut rng, lo, hi);
            let mut tr: Vec<Complex64> = (0..5).map(|_| annulus(&mut rng, lo, hi)).collect();
            let prod: Complex64 = tr.iter().product();
            tr.push(nome.pq() / (t.powi(2 * n as i32 - 2) * prod));
            SelbergEvalParams { n, nome, t, tr }
        },
        |cand| cand.check(SAMPLER_MARGIN, &policy),
    )
}

/// Parameters `t; t_1..t_8` with `t^{2(n-1)} t_1 ⋯ t_8 = (pq)²`. The
/// transformation multiplies `t_1..t_4` by `v` and divides `t_5..t_8` by
/// `v`, where `v² = pq/(t^{n-1} t_1 t_2 t_3 t_4)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelbergTransformParams {
    pub n: usize,
    pub nome: Nome,
    pub t: Complex64,
    pub tr: Vec<Complex64>,
}

impl SelbergTransformParams {
    /// The principal square root of `pq/(t^{n-1} t_1 t_2 t_3 t_4)`.
    pub fn v(&self) -> Complex64 {
        let first: Complex64 = self.tr[..4].iter().product();
        (self.nome.pq() / (self.t.powi(self.n as i32 - 1) * first)).sqrt()
    }

    pub fn check(&self, margin: f64, _policy: &TruncationPolicy) -> Result<()> {
        if self.tr.len() != 8 {
            return Err(Error::DomainViolation(format!(
                "parameter count: expected 8 values t_r, got {}",
                self.tr.len()
            )));
        }
        if self.n == 0 {
            return Err(Error::DomainViolation("dimension: n must be >= 1".into()));
        }
        let spq = self.nome.pq().norm().sqrt();
        window("t", self.t, spq, 1.0, margin)?;
        let v = self.v();
        for (r, &tr) in self.tr.iter().enumerate() {
            let label = r + 1;
            if r < 4 {
                window(&format!("t{label}"), tr, spq, 1.0, margin)?;
                upper(&format!("v*t{label}"), v * tr, 1.0, margin)?;
            } else {
                upper(&format!("t{label}"), tr, 1.0, margin)?;
                upper(&format!("t{label}/v"), tr / v, 1.0, margin)?;
            }
        }
        let prod: Complex64 = self.tr.iter().product();
        balanced(
            "t^(2n-2) prod(t_r) = (pq)^2",
            self.t.powi(2 * self.n as i32 - 2) * prod,
            self.nome.pq().powi(2),
        )
    }

    pub fn to_named(&self) -> Vec<(String, Complex64)> {
        let mut out =
            vec![("p".into(), self.nome.p), ("q".into(), self.nome.q), ("t".into(), self.t)];
        for (r, &tr) in self.tr.iter().enumerate() {
            out.push((format!("t{}", r + 1), tr));
        }
        out
    }

    pub fn from_named(map: &NamedParams, n: usize) -> Result<Self> {
        let nome = Nome::new(take(map, "p")?, take(map, "q")?)?;
        let t = take(map, "t")?;
        let tr = (1..=8).map(|r| take(map, &format!("t{r}"))).collect::<Result<Vec<_>>>()?;
        Ok(SelbergTransformParams { n, nome, t, tr })
    }
}

pub fn sample_selberg_transform(n: usize, seed: u64) -> Result<SelbergTransformParams> {
    let policy = TruncationPolicy::default();
    let mut rng = rng_for(seed, 3, n, 0, 0);
    rejection_sample(
        || {
            let nome = sample_nome(&mut rng);
            let spq = nome.pq().norm().sqrt();
            let lo = spq * (1.0 + 1.5 * SAMPLER_MARGIN);
            let hi = 1.0 - 1.5 * SAMPLER_MARGIN;
            let t = annulus(&mut rng, lo, hi);
            let mut tr: Vec<Complex64> = (0..4).map(|_| annulus(&mut rng, lo, hi)).collect();
            let first: Complex64 = tr.iter().product();
            let v = (nome.pq() / (t.powi(n as i32 - 1) * first)).sqrt();
            for _ in 0..3 {
                // |t_r / v| lands inside the window by construction.
                let ratio = log_uniform(&mut rng, lo, hi);
                tr.push(Complex64::from_polar(ratio * v.norm(), phase(&mut rng)));
            }
            let prod: Complex64 = tr.iter().product();
            tr.push(nome.pq().powi(2) / (t.powi(2 * n as i32 - 2) * prod));
            SelbergTransformParams { n, nome, t, tr }
        },
        |cand| cand.check(SAMPLER_MARGIN, &policy),
    )
}

// ---------------------------------------------------------------------------
// Rank-lowering transformation with cross-term parameter t, four t_r and
// 2(m+n) paired v_r.
// ---------------------------------------------------------------------------

/// Parameters `t; t_0..t_3; v_0..v_{2k-1}` with `k = m + n`,
/// `t_0 t_1 t_2 t_3 = t^{2+m-n}` and `v_{2i} v_{2i+1} = pq/t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainParams {
    pub n: usize,
    pub m: usize,
    pub nome: Nome,
    pub t: Complex64,
    pub tr: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl MainParams {
    pub fn k(&self) -> usize {
        self.n + self.m
    }

    pub fn check(&self, margin: f64, _policy: &TruncationPolicy) -> Result<()> {
        if self.tr.len() != 4 {
            return Err(Error::DomainViolation(format!(
                "parameter count: expected 4 values t_r, got {}",
                self.tr.len()
            )));
        }
        let k = self.k();
        if self.v.len() != 2 * k {
            return Err(Error::DomainViolation(format!(
                "parameter count: expected 2(m+n) = {} values v_r, got {}",
                2 * k,
                self.v.len()
            )));
        }
        upper("t", self.t, 1.0, margin)?;
        let at = self.t.norm();
        for (r, &tr) in self.tr.iter().enumerate() {
            window(&format!("t{r}"), tr, at, 1.0, margin)?;
        }
        for (r, &vr) in self.v.iter().enumerate() {
            upper(&format!("v{r}"), vr, 1.0, margin)?;
        }
        let prod: Complex64 = self.tr.iter().product();
        balanced(
            "t_0 t_1 t_2 t_3 = t^(2+m-n)",
            prod,
            self.t.powi(2 + self.m as i32 - self.n as i32),
        )?;
        let pq_over_t = self.nome.pq() / self.t;
        for i in 0..k {
            balanced(&format!("v{} v{} = pq/t", 2 * i, 2 * i + 1), self.v[2 * i] * self.v[2 * i + 1], pq_over_t)?;
        }
        Ok(())
    }

    pub fn to_named(&self) -> Vec<(String, Complex64)> {
        let mut out =
            vec![("p".into(), self.nome.p), ("q".into(), self.nome.q), ("t".into(), self.t)];
        for (r, &tr) in self.tr.iter().enumerate() {
            out.push((format!("t{r}"), tr));
        }
        for (r, &vr) in self.v.iter().enumerate() {
            out.push((format!("v{r}"), vr));
        }
        out
    }

    pub fn from_named(map: &NamedParams, n: usize, m: usize) -> Result<Self> {
        let nome = Nome::new(take(map, "p")?, take(map, "q")?)?;
        let t = take(map, "t")?;
        let tr = (0..4).map(|r| take(map, &format!("t{r}"))).collect::<Result<Vec<_>>>()?;
        let v = (0..2 * (n + m))
            .map(|r| take(map, &format!("v{r}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(MainParams { n, m, nome, t, tr, v })
    }
}

pub fn sample_main(n: usize, m: usize, seed: u64) -> Result<MainParams> {
    let policy = TruncationPolicy::default();
    let mut rng = rng_for(seed, 4, n, m, 0);
    let k = n + m;
    rejection_sample(
        || {
            let nome = sample_nome(&mut rng);
            let apq = nome.pq().norm();
            // |t| large enough that the paired-v window (|pq/t|, 1) is
            // nonempty after margins.
            let lo_t = apq / (1.0 - SAMPLER_MARGIN).powi(2) * (1.0 + 2.0 * SAMPLER_MARGIN);
            let hi_t = 0.7;
            let t = annulus(&mut rng, lo_t, hi_t);
            let lo_r = t.norm() * (1.0 + 1.5 * SAMPLER_MARGIN);
            let hi_r = 1.0 - 1.5 * SAMPLER_MARGIN;
            let mut tr: Vec<Complex64> = (0..3).map(|_| annulus(&mut rng, lo_r, hi_r)).collect();
            let prod: Complex64 = tr.iter().product();
            tr.push(t.powi(2 + m as i32 - n as i32) / prod);
            let pq_over_t = nome.pq() / t;
            let b = pq_over_t.norm();
            let lo_v = b / (1.0 - SAMPLER_MARGIN) * 1.02;
            let hi_v = (1.0 - SAMPLER_MARGIN) * 0.995;
            let mut v = Vec::with_capacity(2 * k);
            for _ in 0..k {
                let even = annulus(&mut rng, lo_v, hi_v);
                v.push(even);
                v.push(pq_over_t / even);
            }
            MainParams { n, m, nome, t, tr, v }
        },
        |cand| cand.check(SAMPLER_MARGIN, &policy),
    )
}

// ---------------------------------------------------------------------------
// Theta-function summation identity (single nome p, free points z).
// ---------------------------------------------------------------------------

/// Parameters `t; u_0..u_3; z_1..z_n` with `t^{n-1} u_0 u_1 u_2 u_3 = p`.
/// The `z_i` are free nonzero points (no contour); the checker keeps them
/// off the zero sets of the denominator theta factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    pub n: usize,
    pub p: Complex64,
    pub t: Complex64,
    pub u: Vec<Complex64>,
    pub z: Vec<Complex64>,
}

impl LemmaParams {
    pub fn check(&self, _margin: f64, policy: &TruncationPolicy) -> Result<()> {
        if self.u.len() != 4 {
            return Err(Error::DomainViolation(format!(
                "parameter count: expected 4 values u_r, got {}",
                self.u.len()
            )));
        }
        if self.z.len() != self.n || self.n == 0 {
            return Err(Error::DomainViolation(format!(
                "parameter count: expected n = {} >= 1 points z_i, got {}",
                self.n,
                self.z.len()
            )));
        }
        if self.p.norm() >= 1.0 || self.p.norm() == 0.0 {
            return Err(Error::DomainViolation(format!(
                "window p: need 0 < |p| < 1, got {}",
                self.p.norm()
            )));
        }
        let prod: Complex64 = self.u.iter().product();
        balanced(
            "t^(n-1) u_0 u_1 u_2 u_3 = p",
            self.t.powi(self.n as i32 - 1) * prod,
            self.p,
        )?;
        // Denominator theta factors of the sign sum must stay away from 0.
        let check_theta = |label: String, x: Complex64| -> Result<()> {
            let v = theta(x, self.p, policy)?;
            if v.norm() < 1e-8 {
                return Err(Error::DomainViolation(format!(
                    "degenerate point {label}: |theta| = {:.3e} below 1e-8",
                    v.norm()
                )));
            }
            Ok(())
        };
        for i in 0..self.n {
            let zi = self.z[i];
            check_theta(format!("theta(z{}^2)", i + 1), zi * zi)?;
            check_theta(format!("theta(z{}^-2)", i + 1), ONE / (zi * zi))?;
            for j in (i + 1)..self.n {
                let zj = self.z[j];
                check_theta(format!("theta(z{}z{})", i + 1, j + 1), zi * zj)?;
                check_theta(format!("theta(z{}/z{})", i + 1, j + 1), zi / zj)?;
                check_theta(format!("theta(z{}/z{})", j + 1, i + 1), zj / zi)?;
                check_theta(format!("theta(1/(z{}z{}))", i + 1, j + 1), ONE / (zi * zj))?;
            }
        }
        Ok(())
    }

    pub fn to_named(&self) -> Vec<(String, Complex64)> {
        let mut out = vec![("p".into(), self.p), ("t".into(), self.t)];
        for (r, &ur) in self.u.iter().enumerate() {
            out.push((format!("u{r}"), ur));
        }
        for (i, &zi) in self.z.iter().enumerate() {
            out.push((format!("z{}", i + 1), zi));
        }
        out
    }

    pub fn from_named(map: &NamedParams, n: usize) -> Result<Self> {
        let p = take(map, "p")?;
        let t = take(map, "t")?;
        let u = (0..4).map(|r| take(map, &format!("u{r}"))).collect::<Result<Vec<_>>>()?;
        let z = (1..=n).map(|i| take(map, &format!("z{i}"))).collect::<Result<Vec<_>>>()?;
        Ok(LemmaParams { n, p, t, u, z })
    }
}

/// Largest sign-sum term magnitude relative to the closed-form magnitude.
/// The sum loses about this factor times machine epsilon to cancellation,
/// so draws with a large ratio cannot be verified in double precision.
fn lemma_amplification(params: &LemmaParams, policy: &TruncationPolicy) -> Result<f64> {
    let n = params.n;
    let mut rhs_mag = 1.0f64;
    for i in 0..n as i32 {
        let ti = params.t.powi(i);
        for (a, b) in [(0, 1), (0, 2), (0, 3)] {
            rhs_mag *= theta(ti * params.u[a] * params.u[b], params.p, policy)?.norm();
        }
    }
    let mut max_term = 0.0f64;
    for mask in 0u32..(1u32 << n) {
        let zs: Vec<Complex64> = (0..n)
            .map(|i| if mask >> i & 1 == 1 { ONE / params.z[i] } else { params.z[i] })
            .collect();
        let mut mag = 1.0f64;
        for i in 0..n {
            for &ur in &params.u {
                mag *= theta(ur * zs[i], params.p, policy)?.norm();
            }
            mag /= theta(zs[i] * zs[i], params.p, policy)?.norm();
            for j in (i + 1)..n {
                mag *= theta(params.t * zs[i] * zs[j], params.p, policy)?.norm();
                mag /= theta(zs[i] * zs[j], params.p, policy)?.norm();
            }
        }
        max_term = max_term.max(mag);
    }
    Ok(max_term / rhs_mag.max(1e-300))
}

pub fn sample_lemma(n: usize, seed: u64) -> Result<LemmaParams> {
    let policy = TruncationPolicy::default();
    let mut rng = rng_for(seed, 5, n, 0, 0);
    rejection_sample(
        || {
            let p = annulus(&mut rng, 0.05, 0.15);
            let t = annulus(&mut rng, 0.25, 0.85);
            let mut u: Vec<Complex64> = (0..3).map(|_| annulus(&mut rng, 0.25, 0.9)).collect();
            let prod: Complex64 = u.iter().product();
            u.push(p / (t.powi(n as i32 - 1) * prod));
            let spread = (1.0 / p.norm()).ln() / 8.0;
            let z: Vec<Complex64> = (0..n)
                .map(|_| Complex64::from_polar(uniform(&mut rng, -spread, spread).exp(), phase(&mut rng)))
                .collect();
            LemmaParams { n, p, t, u, z }
        },
        |cand| {
            cand.check(SAMPLER_MARGIN, &policy)?;
            // Keep the closed-form side numerically well-scaled: reject
            // draws where one of its theta factors nearly vanishes.
            for i in 0..cand.n as i32 {
                let ti = cand.t.powi(i);
                for (a, b) in
                    [(0, 1), (0, 2), (0, 3), (1, 2)]
                {
                    let v = theta(ti * cand.u[a] * cand.u[b], cand.p, &policy)?;
                    if v.norm() < 1e-6 {
                        return Err(Error::DomainViolation(format!(
                            "degenerate value theta(t^{i} u{a} u{b}): modulus {:.3e} below 1e-6",
                            v.norm()
                        )));
                    }
                }
            }
            let amp = lemma_amplification(cand, &policy)?;
            if amp > 1e4 {
                return Err(Error::DomainViolation(format!(
                    "ill-conditioned sign sum: term-to-sum ratio {amp:.3e} above 1e4"
                )));
            }
            Ok(())
        },
    )
}

// ---------------------------------------------------------------------------
// Basic-level (single nome q) parameter families.
// ---------------------------------------------------------------------------

/// Parameters `t; t_0..t_3; v_0..v_{k-1}` (k free, `k <= m+n`) with
/// `t_0 t_1 t_2 t_3 = t^{2+m-n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bh1Params {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub q: Complex64,
    pub t: Complex64,
    pub tr: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl Bh1Params {
    pub fn check(&self, margin: f64, _policy: &TruncationPolicy) -> Result<()> {
        if self.k > self.n + self.m {
            return Err(Error::DomainViolation(format!(
                "dimension: k = {} exceeds m + n = {}",
                self.k,
                self.n + self.m
            )));
        }
        if self.tr.len() != 4 || self.v.len() != self.k {
            return Err(Error::DomainViolation(format!(
                "parameter count: expected 4 t_r and k = {} v_r, got {} and {}",
                self.k,
                self.tr.len(),
                self.v.len()
            )));
        }
        let aq = self.q.norm();
        if aq >= 1.0 {
            return Err(Error::DomainViolation(format!("window q: |q| = {aq} not below 1")));
        }
        window("t", self.t, aq, 1.0, margin)?;
        for (r, &tr) in self.tr.iter().enumerate() {
            window(&format!("t{r}"), tr, self.t.norm(), 1.0, margin)?;
        }
        for (r, &vr) in self.v.iter().enumerate() {
            window(&format!("v{r}"), vr, aq, 1.0, margin)?;
        }
        let prod: Complex64 = self.tr.iter().product();
        balanced(
            "t_0 t_1 t_2 t_3 = t^(2+m-n)",
            prod,
            self.t.powi(2 + self.m as i32 - self.n as i32),
        )
    }

    pub fn to_named(&self) -> Vec<(String, Complex64)> {
        let mut out = vec![("q".into(), self.q), ("t".into(), self.t)];
        for (r, &tr) in self.tr.iter().enumerate() {
            out.push((format!("t{r}"), tr));
        }
        for (r, &vr) in self.v.iter().enumerate() {
            out.push((format!("v{r}"), vr));
        }
        out
    }

    pub fn from_named(map: &NamedParams, n: usize, m: usize, k: usize) -> Result<Self> {
        let q = take(map, "q")?;
        let t = take(map, "t")?;
        let tr = (0..4).map(|r| take(map, &format!("t{r}"))).collect::<Result<Vec<_>>>()?;
        let v = (0..k).map(|r| take(map, &format!("v{r}"))).collect::<Result<Vec<_>>>()?;
        Ok(Bh1Params { n, m, k, q, t, tr, v })
    }
}

pub fn sample_bh1(n: usize, m: usize, k: usize, seed: u64) -> Result<Bh1Params> {
    if k > n + m {
        return Err(Error::DomainViolation(format!(
            "dimension: k = {k} exceeds m + n = {}",
            n + m
        )));
    }
    let policy = TruncationPolicy::default();
    let mut rng = rng_for(seed, 6, n, m, k);
    rejection_sample(
        || {
            let q = annulus(&mut rng, 0.05, 0.18);
            let aq = q.norm();
            let t = annulus(&mut rng, aq * (1.0 + 2.0 * SAMPLER_MARGIN), 0.6);
            let lo_r = t.norm() * (1.0 + 1.5 * SAMPLER_MARGIN);
            let hi_r = 1.0 - 1.5 * SAMPLER_MARGIN;
            let mut tr: Vec<Complex64> = (0..3).map(|_| annulus(&mut rng, lo_r, hi_r)).collect();
            let prod: Complex64 = tr.iter().product();
            tr.push(t.powi(2 + m as i32 - n as i32) / prod);
            let v: Vec<Complex64> = (0..k)
                .map(|_| annulus(&mut rng, aq * (1.0 + 1.5 * SAMPLER_MARGIN), hi_r))
                .collect();
            Bh1Params { n, m, k, q, t, tr, v }
        },
        |cand| cand.check(SAMPLER_MARGIN, &policy),
    )
}

/// Parameters for the two A-type transformations: `t; t_0, t_1; s_0, s_1;
/// u_2, u_3; w_2, w_3; v_0..v_{k-1}` with `s_0 s_1 = t_0 t_1 t^{n-m}`,
/// `t^{n+1} t_0 t_1 u_2 u_3 = q`, and `t^{n+1} s_0 s_1 w_2 w_3 = q`.
/// The external points `t_j, s_k` have moduli in `(1, 1/|t|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BhAParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub q: Complex64,
    pub t: Complex64,
    pub t0: Complex64,
    pub t1: Complex64,
    pub s0: Complex64,
    pub s1: Complex64,
    pub u2: Complex64,
    pub u3: Complex64,
    pub w2: Complex64,
    pub w3: Complex64,
    pub v: Vec<Complex64>,
}

impl BhAParams {
    fn check_common(&self, margin: f64, policy: &TruncationPolicy) -> Result<()> {
        if self.v.len() != self.k {
            return Err(Error::DomainViolation(format!(
                "parameter count: expected k = {} values v_r, got {}",
                self.k,
                self.v.len()
            )));
        }
        let aq = self.q.norm();
        if aq >= 1.0 {
            return Err(Error::DomainViolation(format!("window q: |q| = {aq} not below 1")));
        }
        window("t", self.t, aq / (1.0 - margin).max(1e-12), 1.0, margin)?;
        // The unit torus is the right contour only when the external points
        // sit just outside it: the z = s_k q^{-j} and z = t_j q^{-j} pole
        // families must stay entirely outside, the t s_k z^{-1} families
        // entirely inside, so 1 < |t_0|, |t_1|, |s_0|, |s_1| < 1/|t|.
        let hi = 1.0 / self.t.norm();
        for (label, x) in
            [("t0", self.t0), ("t1", self.t1), ("s0", self.s0), ("s1", self.s1)]
        {
            window(label, x, 1.0, hi, margin)?;
        }
        balanced(
            "s_0 s_1 = t_0 t_1 t^(n-m)",
            self.s0 * self.s1,
            self.t0 * self.t1 * self.t.powi(self.n as i32 - self.m as i32),
        )?;
        balanced(
            "t^(n+1) t_0 t_1 u_2 u_3 = q",
            self.t.powi(self.n as i32 + 1) * self.t0 * self.t1 * self.u2 * self.u3,
            self.q,
        )?;
        balanced(
            "t^(n+1) s_0 s_1 w_2 w_3 = q",
            self.t.powi(self.n as i32 + 1) * self.s0 * self.s1 * self.w2 * self.w3,
            self.q,
        )?;
        // The closed-form ratio divides by theta(t^i w_j s_0; q), i = 1..m.
        for i in 1..=self.m as i32 {
            for (label, w) in [("w2", self.w2), ("w3", self.w3)] {
                let v = theta(self.t.powi(i) * w * self.s0, self.q, policy)?;
                if v.norm() < 1e-8 {
                    return Err(Error::DomainViolation(format!(
                        "degenerate value theta(t^{i} {label} s0): modulus {:.3e} below 1e-8",
                        v.norm()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Admissibility for the kernel with both product and ratio cross
    /// terms (`k = m + n` exactly; `|t v_r| > |q|`).
    pub fn check_paired(&self, margin: f64, policy: &TruncationPolicy) -> Result<()> {
        if self.k != self.n + self.m {
            return Err(Error::DomainViolation(format!(
                "dimension: k = {} must equal m + n = {}",
                self.k,
                self.n + self.m
            )));
        }
        self.check_common(margin, policy)?;
        let aq = self.q.norm();
        for (r, &vr) in self.v.iter().enumerate() {
            window(&format!("v{r}"), vr, aq / self.t.norm(), 1.0, margin)?;
        }
        Ok(())
    }

    /// Admissibility for the ratio-only kernel (`k <= m + n`).
    pub fn check_ratio_only(&self, margin: f64, policy: &TruncationPolicy) -> Result<()> {
        if self.k > self.n + self.m {
            return Err(Error::DomainViolation(format!(
                "dimension: k = {} exceeds m + n = {}",
                self.k,
                self.n + self.m
            )));
        }
        self.check_common(margin, policy)?;
        for (r, &vr) in self.v.iter().enumerate() {
            upper(&format!("v{r}"), vr, 1.0, margin)?;
        }
        Ok(())
    }

    pub fn to_named(&self) -> Vec<(String, Complex64)> {
        let mut out = vec![
            ("q".into(), self.q),
            ("t".into(), self.t),
            ("t0".into(), self.t0),
            ("t1".into(), self.t1),
            ("s0".into(), self.s0),
            ("s1".into(), self.s1),
            ("u2".into(), self.u2),
            ("u3".into(), self.u3),
            ("w2".into(), self.w2),
            ("w3".into(), self.w3),
        ];
        for (r, &vr) in self.v.iter().enumerate() {
            out.push((format!("v{r}"), vr));
        }
        out
    }

    pub fn from_named(map: &NamedParams, n: usize, m: usize, k: usize) -> Result<Self> {
        Ok(BhAParams {
            n,
            m,
            k,
            q: take(map, "q")?,
            t: take(map, "t")?,
            t0: take(map, "t0")?,
            t1: take(map, "t1")?,
            s0: take(map, "s0")?,
            s1: take(map, "s1")?,
            u2: take(map, "u2")?,
            u3: take(map, "u3")?,
            w2: take(map, "w2")?,
            w3: take(map, "w3")?,
            v: (0..k).map(|r| take(map, &format!("v{r}"))).collect::<Result<Vec<_>>>()?,
        })
    }
}

fn sample_bh_a(n: usize, m: usize, k: usize, seed: u64, tag: u64, paired: bool) -> Result<BhAParams> {
    let policy = TruncationPolicy::default();
    let mut rng = rng_for(seed, tag, n, m, k);
    rejection_sample(
        || {
            let q = annulus(&mut rng, 0.05, 0.18);
            let aq = q.norm();
            let lo_t = aq * (1.0 + 2.0 * SAMPLER_MARGIN) / (1.0 - SAMPLER_MARGIN);
            let t = annulus(&mut rng, lo_t, 0.6);
            // External points live just outside the unit circle, below 1/|t|.
            let lo = 1.0 + 1.5 * SAMPLER_MARGIN;
            let hi = (1.0 - 1.5 * SAMPLER_MARGIN) / t.norm();
            let t0 = annulus(&mut rng, lo, hi);
            let t1 = annulus(&mut rng, lo, hi);
            // Pick |s_0| so the solved s_1 lands in the window as well.
            let g_s = t0 * t1 * t.powi(n as i32 - m as i32);
            let gn = g_s.norm();
            let s0 = Complex64::from_polar(
                log_uniform(&mut rng, (gn / hi).max(lo), (gn / lo).min(hi)),
                phase(&mut rng),
            );
            let s1 = g_s / s0;
            let hi_v = 1.0 - 1.5 * SAMPLER_MARGIN;
            let lo_v = if paired {
                aq / t.norm() * (1.0 + 1.5 * SAMPLER_MARGIN)
            } else {
                aq * (1.0 + 1.5 * SAMPLER_MARGIN)
            };
            let v: Vec<Complex64> = (0..k).map(|_| annulus(&mut rng, lo_v, hi_v)).collect();
            let g_u = q / (t.powi(n as i32 + 1) * t0 * t1);
            let ru = g_u.norm().sqrt();
            let u2 = Complex64::from_polar(log_uniform(&mut rng, ru / 3.0, ru * 3.0), phase(&mut rng));
            let u3 = g_u / u2;
            let g_w = q / (t.powi(n as i32 + 1) * s0 * s1);
            let rw = g_w.norm().sqrt();
            let w2 = Complex64::from_polar(log_uniform(&mut rng, rw / 3.0, rw * 3.0), phase(&mut rng));
            let w3 = g_w / w2;
            BhAParams { n, m, k, q, t, t0, t1, s0, s1, u2, u3, w2, w3, v }
        },
        |cand| {
            if paired {
                cand.check_paired(SAMPLER_MARGIN, &policy)
            } else {
                cand.check_ratio_only(SAMPLER_MARGIN, &policy)
            }
        },
    )
}

pub fn sample_bh2(n: usize, m: usize, seed: u64) -> Result<BhAParams> {
    sample_bh_a(n, m, n + m, seed, 7, true)
}

pub fn sample_bh3(n: usize, m: usize, k: usize, seed: u64) -> Result<BhAParams> {
    if k > n + m {
        return Err(Error::DomainViolation(format!(
            "dimension: k = {k} exceeds m + n = {}",
            n + m
        )));
    }
    sample_bh_a(n, m, k, seed, 8, false)
}

// ---------------------------------------------------------------------------
// Classical (real-interval) parameters.
// ---------------------------------------------------------------------------

/// Which classical identity the parameters feed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassicalVariant {
    /// Exponent swap with `τ = (α_0 + α_1)/2` and `2n` external points.
    Euler,
    /// Rank reduction with `τ = α_0 + α_1` and `2n - 1` external points.
    Contiguous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalParams {
    pub variant: ClassicalVariant,
    pub n: usize,
    pub a: (f64, f64),
    pub alpha: (f64, f64),
    pub b: Vec<f64>,
}

impl ClassicalParams {
    pub fn tau(&self) -> f64 {
        match self.variant {
            ClassicalVariant::Euler => (self.alpha.0 + self.alpha.1) / 2.0,
            ClassicalVariant::Contiguous => self.alpha.0 + self.alpha.1,
        }
    }

    pub fn expected_b_count(variant: ClassicalVariant, n: usize) -> usize {
        match variant {
            ClassicalVariant::Euler => 2 * n,
            ClassicalVariant::Contiguous => 2 * n - 1,
        }
    }

    pub fn check(&self, _margin: f64, _policy: &TruncationPolicy) -> Result<()> {
        if self.n == 0 {
            return Err(Error::DomainViolation("dimension: n must be >= 1".into()));
        }
        let want = Self::expected_b_count(self.variant, self.n);
        if self.b.len() != want {
            return Err(Error::DomainViolation(format!(
                "parameter count: expected {want} external points, got {}",
                self.b.len()
            )));
        }
        if !(self.a.0 < self.a.1) {
            return Err(Error::DomainViolation(format!(
                "window interval: need a_0 < a_1, got ({}, {})",
                self.a.0, self.a.1
            )));
        }
        if self.alpha.0 <= 0.0 || self.alpha.1 <= 0.0 {
            return Err(Error::DomainViolation(format!(
                "window exponents: need alpha_r > 0, got ({}, {})",
                self.alpha.0, self.alpha.1
            )));
        }
        for &br in &self.b {
            if (self.a.0..=self.a.1).contains(&br) {
                return Err(Error::DomainViolation(format!(
                    "window external point: {br} lies inside [{}, {}]",
                    self.a.0, self.a.1
                )));
            }
        }
        Ok(())
    }

    pub fn to_named(&self) -> Vec<(String, Complex64)> {
        let re = |x: f64| Complex64::new(x, 0.0);
        let mut out = vec![
            ("a0".into(), re(self.a.0)),
            ("a1".into(), re(self.a.1)),
            ("alpha0".into(), re(self.alpha.0)),
            ("alpha1".into(), re(self.alpha.1)),
        ];
        for (r, &br) in self.b.iter().enumerate() {
            out.push((format!("b{r}"), re(br)));
        }
        out
    }

    pub fn from_named(map: &NamedParams, variant: ClassicalVariant, n: usize) -> Result<Self> {
        let count = Self::expected_b_count(variant, n);
        Ok(ClassicalParams {
            variant,
            n,
            a: (take_real(map, "a0")?, take_real(map, "a1")?),
            alpha: (take_real(map, "alpha0")?, take_real(map, "alpha1")?),
            b: (0..count).map(|r| take_real(map, &format!("b{r}"))).collect::<Result<Vec<_>>>()?,
        })
    }
}

pub fn sample_classical(variant: ClassicalVariant, n: usize, seed: u64) -> Result<ClassicalParams> {
    let tag = match variant {
        ClassicalVariant::Euler => 9,
        ClassicalVariant::Contiguous => 10,
    };
    let mut rng = rng_for(seed, tag, n, 0, 0);
    let count = ClassicalParams::expected_b_count(variant, n);
    let params = ClassicalParams {
        variant,
        n,
        a: (0.0, 1.0),
        alpha: (uniform(&mut rng, 0.4, 1.6), uniform(&mut rng, 0.4, 1.6)),
        b: (0..count).map(|_| uniform(&mut rng, -3.0, -0.5)).collect(),
    };
    params.check(SAMPLER_MARGIN, &TruncationPolicy::default())?;
    Ok(params)
}

// ---------------------------------------------------------------------------
// Degeneration probe parameters.
// ---------------------------------------------------------------------------

/// A point `(z, q)` at which the small-p degenerations of the elliptic
/// gamma function are probed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaLimitParams {
    pub z: Complex64,
    pub q: Complex64,
}

impl GammaLimitParams {
    pub fn check(&self, _margin: f64, _policy: &TruncationPolicy) -> Result<()> {
        if self.z.norm() == 0.0 {
            return Err(Error::DomainViolation("window z: z must be nonzero".into()));
        }
        if self.q.norm() >= 1.0 {
            return Err(Error::DomainViolation(format!(
                "window q: |q| = {} not below 1",
                self.q.norm()
            )));
        }
        Ok(())
    }

    pub fn to_named(&self) -> Vec<(String, Complex64)> {
        vec![("z".into(), self.z), ("q".into(), self.q)]
    }

    pub fn from_named(map: &NamedParams) -> Result<Self> {
        Ok(GammaLimitParams { z: take(map, "z")?, q: take(map, "q")? })
    }
}

pub fn sample_gamma_limit(seed: u64) -> Result<GammaLimitParams> {
    let mut rng = rng_for(seed, 11, 0, 0, 0);
    let params = GammaLimitParams {
        z: annulus(&mut rng, 0.25, 0.9),
        q: annulus(&mut rng, 0.10, 0.30),
    };
    params.check(SAMPLER_MARGIN, &TruncationPolicy::default())?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_dixon(1, 1, 42).unwrap();
        let b = sample_dixon(1, 1, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_dixon(1, 1, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn different_identities_decorrelate() {
        let a = sample_selberg_eval(1, 7).unwrap();
        let b = sample_selberg_transform(1, 7).unwrap();
        assert_ne!(a.t, b.t);
    }

    #[test]
    fn dixon_balancing_is_exact() {
        for seed in 0..10 {
            let p = sample_dixon(1, 0, seed).unwrap();
            let prod: Complex64 = p.t.iter().product();
            let want = p.nome.pq();
            assert!((prod - want).norm() <= 1e-12 * want.norm());
            assert_eq!(p.t.len(), 6);
        }
    }

    #[test]
    fn main_pairing_and_windows_hold() {
        for seed in 0..10 {
            let p = sample_main(1, 1, seed).unwrap();
            assert_eq!(p.v.len(), 4);
            let pq_over_t = p.nome.pq() / p.t;
            for i in 0..p.k() {
                let prod = p.v[2 * i] * p.v[2 * i + 1];
                assert!((prod - pq_over_t).norm() <= 1e-12 * pq_over_t.norm());
            }
            for &vr in &p.v {
                assert!(vr.norm() <= 1.0 - SAMPLER_MARGIN + 1e-12);
            }
            for &tr in &p.tr {
                assert!(tr.norm() > p.t.norm());
            }
        }
    }

    #[test]
    fn selberg_transform_dual_parameters_admissible() {
        for seed in 0..10 {
            let p = sample_selberg_transform(1, seed).unwrap();
            let v = p.v();
            for (r, &tr) in p.tr.iter().enumerate() {
                let mapped = if r < 4 { v * tr } else { tr / v };
                assert!(mapped.norm() <= 1.0 - SAMPLER_MARGIN + 1e-12, "seed {seed} r {r}");
            }
        }
    }

    #[test]
    fn infeasible_dimension_gap_reports_tallies() {
        // Balancing t_0t_1t_2t_3 = t^{-1} needs a product above 1, but every
        // factor is below 1; rejection must exhaust and explain itself.
        let err = sample_main(3, 0, 5).unwrap_err();
        match err {
            Error::Infeasible { rounds, worst } => {
                assert_eq!(rounds, MAX_ROUNDS);
                assert!(worst.contains("window t3"), "worst = {worst}");
            }
            other => panic!("expected Infeasible, got {other:?}"),
        }
    }

    #[test]
    fn bh_dimension_rules() {
        assert!(matches!(sample_bh1(1, 1, 3, 0), Err(Error::DomainViolation(_))));
        let p = sample_bh2(1, 1, 3).unwrap();
        assert_eq!(p.k, 2);
        assert!(matches!(sample_bh3(1, 1, 5, 0), Err(Error::DomainViolation(_))));
        let p3 = sample_bh3(1, 1, 1, 3).unwrap();
        assert_eq!(p3.v.len(), 1);
    }

    #[test]
    fn bh2_balancing_solved_exactly() {
        let p = sample_bh2(2, 1, 11).unwrap();
        let lhs = p.s0 * p.s1;
        let rhs = p.t0 * p.t1 * p.t.powi(1);
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
        let ub = p.t.powi(p.n as i32 + 1) * p.t0 * p.t1 * p.u2 * p.u3;
        assert!((ub - p.q).norm() <= 1e-12 * p.q.norm());
        let wb = p.t.powi(p.n as i32 + 1) * p.s0 * p.s1 * p.w2 * p.w3;
        assert!((wb - p.q).norm() <= 1e-12 * p.q.norm());
    }

    #[test]
    fn named_round_trip() {
        let p = sample_main(1, 1, 3).unwrap();
        let named: NamedParams = p.to_named().into_iter().collect();
        let named =
            { let mut m = named; m.insert("p".into(), p.nome.p); m.insert("q".into(), p.nome.q); m };
        let back = MainParams::from_named(&named, 1, 1).unwrap();
        assert_eq!(p, back);

        let c = sample_classical(ClassicalVariant::Contiguous, 2, 9).unwrap();
        assert_eq!(c.b.len(), 3);
        let named: NamedParams = c.to_named().into_iter().collect();
        let back = ClassicalParams::from_named(&named, ClassicalVariant::Contiguous, 2).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn lemma_sampling_keeps_thetas_alive() {
        let pol = TruncationPolicy::default();
        for seed in 0..5 {
            let p = sample_lemma(2, seed).unwrap();
            let bal = p.t.powi(1) * p.u.iter().product::<Complex64>();
            assert!((bal - p.p).norm() <= 1e-12 * p.p.norm());
            for i in 0..2 {
                for j in (i + 1)..2 {
                    let th = theta(p.z[i] * p.z[j], p.p, &pol).unwrap();
                    assert!(th.norm() >= 1e-8);
                }
            }
        }
    }
}
