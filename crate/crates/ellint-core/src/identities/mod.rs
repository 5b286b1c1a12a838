//! Identity verifiers.
//!
//! Each verifier evaluates both sides of one integral (or summation)
//! identity at explicit parameter values and returns a
//! [`VerificationReport`] carrying the two side values, the relative
//! error, and the refinement history of every quadrature involved.
//! Verifiers validate their parameters with margin 0 before evaluating,
//! so externally supplied parameter files go through the same
//! admissibility rules as sampled points.

pub mod basic;
pub mod classical;
pub mod elliptic;
pub mod lemma;
pub mod limits;
mod report;

pub use report::{VerificationReport, VerifySettings};

use num_complex::Complex64;

use crate::error::Result;
use crate::quadrature::ConvergenceHistory;

pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// History for a side with no integral (closed form or zero-dimensional).
pub(crate) fn trivial_history() -> ConvergenceHistory {
    ConvergenceHistory { target_rel: 0.0, levels: Vec::new(), converged: true }
}

/// `∏_{i=a}^{b} f(i)`, extended to inverted ranges by the reciprocal
/// convention `∏_{i=a}^{b} f(i) = 1 / ∏_{i=b+1}^{a-1} f(i)` when `a > b`
/// (so the product over an empty range `a = b + 1` is 1).
pub(crate) fn signed_product(
    a: i64,
    b: i64,
    mut f: impl FnMut(i64) -> Result<Complex64>,
) -> Result<Complex64> {
    let mut acc = ONE;
    if a <= b {
        for i in a..=b {
            acc *= f(i)?;
        }
        Ok(acc)
    } else {
        for i in (b + 1)..=(a - 1) {
            acc *= f(i)?;
        }
        Ok(ONE / acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_product_ranges() {
        let f = |i: i64| Ok(Complex64::new(i as f64, 0.0));
        // 2*3 = 6.
        assert_eq!(signed_product(2, 3, f).unwrap(), Complex64::new(6.0, 0.0));
        // Empty: a = b+1.
        assert_eq!(signed_product(4, 3, f).unwrap(), ONE);
        // Inverted: prod_{i=5}^{2} = 1/(3*4).
        assert_eq!(signed_product(5, 2, f).unwrap(), ONE / Complex64::new(12.0, 0.0));
    }
}
