//! Overflow-safe accumulator for long products of complex factors.
//!
//! Identity prefactors multiply dozens of gamma values whose magnitudes can
//! drift through many orders; a plain `Complex64` product would overflow or
//! underflow long before the final (moderate) value is reached. The
//! accumulator keeps a mantissa together with a separate power-of-two
//! exponent and renormalizes whenever the mantissa leaves a safe band.

use num_complex::Complex64;

const RENORM_UP: f64 = 1.3407807929942597e154; // 2^512
const RENORM_DOWN: f64 = 7.458340731200207e-155; // 2^-512
const SCALE_DOWN: f64 = 8.636168555094445e-78; // 2^-256
const SCALE_UP: f64 = 1.157920892373162e77; // 2^256

/// A complex number stored as `mantissa * 2^exp2`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledProduct {
    mantissa: Complex64,
    exp2: i64,
}

impl ScaledProduct {
    /// The multiplicative identity.
    pub fn one() -> Self {
        ScaledProduct { mantissa: Complex64::new(1.0, 0.0), exp2: 0 }
    }

    /// Multiplies the accumulator by `f`.
    pub fn mul(&mut self, f: Complex64) {
        self.mantissa *= f;
        self.renorm();
    }

    /// Divides the accumulator by `f`.
    pub fn div(&mut self, f: Complex64) {
        self.mantissa /= f;
        self.renorm();
    }

    /// Multiplies by another scaled product.
    pub fn mul_scaled(&mut self, other: &ScaledProduct) {
        self.mantissa *= other.mantissa;
        self.exp2 += other.exp2;
        self.renorm();
    }

    /// Collapses to a plain `Complex64`. Saturates to `inf`/`0` if the true
    /// magnitude is outside the double range; final identity values compared
    /// by relative error are expected to be in range.
    pub fn value(&self) -> Complex64 {
        let mut v = self.mantissa;
        let mut e = self.exp2;
        // Apply the exponent in chunks so intermediate scales stay finite.
        while e > 256 {
            v *= SCALE_UP;
            e -= 256;
        }
        while e < -256 {
            v *= SCALE_DOWN;
            e += 256;
        }
        v * 2f64.powi(e as i32)
    }

    /// True when the accumulated product is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.mantissa == Complex64::new(0.0, 0.0)
    }

    fn renorm(&mut self) {
        let n = self.mantissa.norm_sqr();
        if n == 0.0 {
            self.exp2 = 0;
            return;
        }
        // norm_sqr thresholds are the squares of the magnitude band edges.
        while self.mantissa.norm_sqr() > RENORM_UP {
            self.mantissa *= SCALE_DOWN;
            self.exp2 += 256;
        }
        while self.mantissa.norm_sqr() < RENORM_DOWN {
            self.mantissa *= SCALE_UP;
            self.exp2 -= 256;
        }
    }
}

impl Default for ScaledProduct {
    fn default() -> Self {
        Self::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn long_product_that_would_overflow_plain_doubles() {
        // 1200 factors of 1e10 followed by 1200 factors of 1e-10: a plain
        // product overflows at ~{10^308}; the scaled product returns 1.
        let mut acc = ScaledProduct::one();
        for _ in 0..1200 {
            acc.mul(Complex64::new(1e10, 0.0));
        }
        for _ in 0..1200 {
            acc.mul(Complex64::new(1e-10, 0.0));
        }
        let v = acc.value();
        assert!((v.re - 1.0).abs() < 1e-9, "got {v}");
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn matches_plain_product_in_range() {
        let fs = [
            Complex64::new(1.5, -0.25),
            Complex64::new(-0.3, 0.9),
            Complex64::new(0.01, 2.0),
            Complex64::new(7.0, -0.5),
        ];
        let mut acc = ScaledProduct::one();
        let mut plain = Complex64::new(1.0, 0.0);
        for f in fs {
            acc.mul(f);
            plain *= f;
        }
        let v = acc.value();
        assert!((v - plain).norm() <= 1e-15 * plain.norm());
    }

    #[test]
    fn div_is_inverse_of_mul() {
        let f = Complex64::new(3.25, -1.5);
        let mut acc = ScaledProduct::one();
        acc.mul(f);
        acc.div(f);
        let v = acc.value();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
