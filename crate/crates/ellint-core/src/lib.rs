//! Numerical toolkit for multivariate elliptic hypergeometric integral
//! identities of Selberg type and their basic hypergeometric and classical
//! degenerations.
//!
//! The crate is organized bottom-up:
//!
//! * [`qseries`]: q-shifted factorials `(x;q)`, theta functions
//!   `θ(x;q) = (x;q)(q/x;q)` and the elliptic gamma function
//!   `Γ(z;p,q) = ∏_{r,s≥0} (1-p^{r+1}q^{s+1}/z)/(1-p^r q^s z)`,
//!   all with certified truncation.
//! * [`kernels`]: the BC_n / A_{n-1} integration kernels Δ_I, Δ_II, their
//!   q-level analogues Δ̃_II, Δ̃_III, Δ̃_AII, normalization constants, and the
//!   real Selberg-type weight.
//! * [`quadrature`]: trapezoid rule on the n-torus with the dz/(2πiz)
//!   measure (spectrally accurate for integrands analytic near the torus),
//!   tensor-product Gauss–Jacobi rules with endpoint singularities folded
//!   into the weight, grid refinement, and the classical gamma function.
//! * [`sampling`]: seeded construction of admissible parameter sets with
//!   balancing conditions solved exactly.
//! * [`identities`]: one verifier per integral identity; each assembles
//!   both sides from kernels + quadrature and reports the relative error.
//!
//! All functions are pure; nothing in the crate holds shared mutable state,
//! so everything can be called concurrently. Grid summation uses a fixed
//! pairwise reduction tree, making every result reproducible bit-for-bit
//! regardless of how many worker threads evaluate the nodes.

pub mod error;
pub mod identities;
pub mod kernels;
pub mod qseries;
pub mod quadrature;
pub mod sampling;
pub mod scaled;

pub use error::{Error, Result};
pub use qseries::{Nome, TruncationPolicy};
