use std::time::{Duration, Instant};

use num_complex::Complex64;

use crate::quadrature::{rel_change, ConvergenceHistory, RefineSettings};

/// Optional overrides for the refinement schedules inside a verifier.
/// Fields left `None` fall back to the dimension-aware defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VerifySettings {
    pub grid_start: Option<usize>,
    pub target_rel: Option<f64>,
    pub max_level: Option<usize>,
}

impl VerifySettings {
    pub fn apply(&self, mut base: RefineSettings) -> RefineSettings {
        if let Some(g) = self.grid_start {
            base.grid_start = g;
        }
        if let Some(t) = self.target_rel {
            base.target_rel = t;
        }
        if let Some(l) = self.max_level {
            base.max_level = l;
        }
        base
    }

    /// Torus-refinement schedule for an integral of the given dimension.
    pub fn refine_for(&self, dim: usize) -> RefineSettings {
        self.apply(RefineSettings::for_dim(dim))
    }
}

/// Outcome of one identity verification.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub identity: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// `|lhs - rhs| / max(|lhs|, |rhs|)`.
    pub rel_err: f64,
    /// One refinement history per integral side, left side first.
    pub grids: Vec<ConvergenceHistory>,
    /// True iff `rel_err < tol` and every recorded history converged.
    pub passed: bool,
    pub wall_time: Duration,
    /// The parameter values the verdict refers to.
    pub params: Vec<(String, Complex64)>,
}

impl VerificationReport {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn build(
        identity: &str,
        dims: (usize, usize, usize),
        lhs: Complex64,
        rhs: Complex64,
        grids: Vec<ConvergenceHistory>,
        tol: f64,
        started: Instant,
        params: Vec<(String, Complex64)>,
    ) -> Self {
        let rel_err = rel_change(lhs, rhs);
        let converged = grids.iter().all(|h| h.converged);
        VerificationReport {
            identity: identity.to_string(),
            n: dims.0,
            m: dims.1,
            k: dims.2,
            lhs,
            rhs,
            rel_err,
            grids,
            passed: rel_err < tol && converged,
            wall_time: started.elapsed(),
            params,
        }
    }
}
