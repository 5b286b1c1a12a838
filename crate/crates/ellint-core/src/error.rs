//! Error taxonomy shared by every module.
//!
//! Each variant corresponds to one distinct failure mode of the numerical
//! pipeline; callers match on variants to decide between retrying (e.g. a
//! `PoleHit` after re-sampling the grid phase) and giving up.

use crate::quadrature::ConvergenceHistory;

/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An infinite product was requested outside its convergence region
    /// (some nome has modulus ≥ 1).
    #[error("non-convergent product: {0}")]
    NonConvergent(String),

    /// The truncation index needed to certify `abs_tail_bound` exceeds
    /// `max_terms`.
    #[error("truncation budget exceeded: {0}")]
    TruncationBudgetExceeded(String),

    /// An argument that must be nonzero was zero.
    #[error("zero argument: {0}")]
    ZeroArgument(String),

    /// A denominator factor of an elliptic gamma evaluation fell below the
    /// pole-proximity threshold; the requested point is (numerically) on the
    /// pole lattice.
    #[error("pole hit: {0}")]
    PoleHit(String),

    /// A q-shifted-factorial denominator of a basic (p=0) kernel vanished.
    #[error("denominator zero: {0}")]
    DenominatorZero(String),

    /// Arguments violate a documented domain restriction (e.g. a real node
    /// outside the integration interval, or a modulus inequality an identity
    /// attaches to its contours).
    #[error("domain violation: {0}")]
    DomainViolation(String),

    /// The Gauss–Jacobi node solver failed to produce the requested nodes.
    #[error("node computation failure: {0}")]
    NodeComputationFailure(String),

    /// Rejection sampling exhausted its round budget. Reports the constraint
    /// that failed most often so infeasible regions are diagnosable.
    #[error("infeasible after {rounds} rejection rounds; most violated constraint: {worst}")]
    Infeasible { rounds: u32, worst: String },

    /// Grid refinement hit `max_level` before the target relative change was
    /// met. The full history is attached for post-mortems.
    #[error("no convergence after {} levels (last rel change {:.3e}, target {:.3e})",
            history.levels.len(), history.last_rel_change().unwrap_or(f64::NAN), history.target_rel)]
    NoConvergence { history: Box<ConvergenceHistory> },
}

pub type Result<T> = std::result::Result<T, Error>;
