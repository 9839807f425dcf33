//! Frequency decay coefficients of the linearized training dynamics.
//!
//! In the wide, lazily-trained regime every spectral component of a two-layer
//! ReLU network's output relaxes toward the target independently, at a rate
//! set by the initialization through
//!
//! ```text
//! c(xi) = A / |xi|^(d+3) + B / |xi|^(d+1)
//! A = mean_i ( |r_i|^2 + w_i^2 )
//! B = 4 pi^2 * mean_i ( |r_i|^2 * w_i^2 )
//! ```
//!
//! where `w_i` are output weights and `r_i` input weight vectors. Low
//! frequencies converge faster — the rate decays polynomially in `|xi|` —
//! which is the quantitative form of the frequency principle this crate
//! revolves around.

use crate::error::{LfpError, Result};
use crate::util::KahanSum;

/// The pair `(A, B)` defining the per-frequency rate `c(xi)`, together with
/// the spatial dimension that fixes the decay exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LfpCoefficients {
    a: f64,
    b: f64,
    d: usize,
}

impl LfpCoefficients {
    /// Validates and wraps explicit coefficients. Both must be nonnegative
    /// and finite, and at least one strictly positive.
    pub fn new(a: f64, b: f64, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(LfpError::InvalidParameter("dimension must be >= 1".into()));
        }
        if !(a.is_finite() && b.is_finite() && a >= 0.0 && b >= 0.0) {
            return Err(LfpError::InvalidParameter(format!(
                "decay coefficients must be finite and nonnegative, got A={a}, B={b}"
            )));
        }
        if a == 0.0 && b == 0.0 {
            return Err(LfpError::InvalidParameter(
                "decay coefficients A and B cannot both vanish".into(),
            ));
        }
        Ok(Self { a, b, d })
    }

    /// Computes `(A, B)` from raw network parameters: `w` holds the N output
    /// weights and `r` the N input weight vectors flattened row-major
    /// (length `N * d`). Compensated summation keeps the means stable to a
    /// few ulps, so parameter transformations that preserve `(|r_i|, |w_i|)`
    /// multisets reproduce the coefficients to ~1e-15 relative.
    pub fn from_parameters(w: &[f64], r: &[f64], d: usize) -> Result<Self> {
        if d == 0 {
            return Err(LfpError::InvalidParameter("dimension must be >= 1".into()));
        }
        let n = w.len();
        if n == 0 {
            return Err(LfpError::InvalidParameter(
                "cannot derive coefficients from an empty network".into(),
            ));
        }
        if r.len() != n * d {
            return Err(LfpError::DimensionMismatch {
                expected: n * d,
                got: r.len(),
            });
        }
        let mut sum_a = KahanSum::new();
        let mut sum_b = KahanSum::new();
        for (i, &wi) in w.iter().enumerate() {
            let mut r_sq = 0.0;
            for &c in &r[i * d..(i + 1) * d] {
                r_sq += c * c;
            }
            sum_a.add(r_sq + wi * wi);
            sum_b.add(r_sq * wi * wi);
        }
        let a = sum_a.value() / n as f64;
        let b = 4.0 * std::f64::consts::PI * std::f64::consts::PI * sum_b.value() / n as f64;
        Self::new(a, b, d)
    }

    /// Rate at a frequency of Euclidean norm `xi_norm > 0`.
    #[inline]
    pub fn rate_at_norm(&self, xi_norm: f64) -> f64 {
        debug_assert!(xi_norm > 0.0, "rate is undefined at the zero frequency");
        let low = xi_norm.powi(self.d as i32 + 1);
        self.a / (low * xi_norm * xi_norm) + self.b / low
    }

    /// Rate at a frequency vector; errors at the origin or on a dimension
    /// mismatch.
    pub fn rate(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.d {
            return Err(LfpError::DimensionMismatch {
                expected: self.d,
                got: xi.len(),
            });
        }
        let norm_sq: f64 = xi.iter().map(|&c| c * c).sum();
        if norm_sq == 0.0 {
            return Err(LfpError::ZeroFrequency);
        }
        Ok(self.rate_at_norm(norm_sq.sqrt()))
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn dim(&self) -> usize {
        self.d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn rate_pins_textbook_values() {
        // A-only, d=1: c(xi) = 1/xi^4
        let c = LfpCoefficients::new(1.0, 0.0, 1).unwrap();
        assert_relative_eq!(c.rate(&[2.0]).unwrap(), 1.0 / 16.0);
        // B-only, d=1: c(xi) = 1/xi^2
        let c = LfpCoefficients::new(0.0, 1.0, 1).unwrap();
        assert_relative_eq!(c.rate(&[3.0]).unwrap(), 1.0 / 9.0);
        // mixed, d=2, |xi|=2: 1/2^5 + 1/2^3
        let c = LfpCoefficients::new(1.0, 1.0, 2).unwrap();
        assert_relative_eq!(c.rate(&[2.0, 0.0]).unwrap(), 5.0 / 32.0);
    }

    #[test]
    fn from_parameters_matches_hand_computation() {
        // d=1: w = [0.5, -1], r = [2, 0.25]; all values exact in binary.
        let c = LfpCoefficients::from_parameters(&[0.5, -1.0], &[2.0, 0.25], 1).unwrap();
        assert_relative_eq!(c.a(), (4.25 + 1.0625) / 2.0, max_relative = 1e-15);
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        assert_relative_eq!(c.b(), 4.0 * pi2 * (1.0 + 0.0625) / 2.0, max_relative = 1e-15);

        // d=2: w = [1], r = [(3, 4)] so |r|^2 = 25.
        let c = LfpCoefficients::from_parameters(&[1.0], &[3.0, 4.0], 2).unwrap();
        assert_relative_eq!(c.a(), 26.0, max_relative = 1e-15);
        assert_relative_eq!(c.b(), 100.0 * pi2, max_relative = 1e-15);
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(LfpCoefficients::new(-1.0, 0.5, 1).is_err());
        assert!(LfpCoefficients::new(0.0, 0.0, 1).is_err());
        assert!(LfpCoefficients::new(f64::NAN, 1.0, 1).is_err());
        assert!(LfpCoefficients::new(1.0, 1.0, 0).is_err());
        assert!(LfpCoefficients::from_parameters(&[], &[], 1).is_err());
        assert!(LfpCoefficients::from_parameters(&[1.0], &[1.0, 2.0], 1).is_err());

        let c = LfpCoefficients::new(1.0, 1.0, 2).unwrap();
        assert!(matches!(
            c.rate(&[0.0, 0.0]),
            Err(LfpError::ZeroFrequency)
        ));
        assert!(matches!(
            c.rate(&[1.0]),
            Err(LfpError::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn rate_is_positive_and_strictly_decreasing(
            a in 0.0..100.0f64,
            b in 0.0..100.0f64,
            d in 1usize..4,
            lo in 0.05..50.0f64,
            gap in 0.01..50.0f64,
        ) {
            prop_assume!(a > 0.0 || b > 0.0);
            let c = LfpCoefficients::new(a, b, d).unwrap();
            let hi = lo + gap;
            prop_assert!(c.rate_at_norm(lo) > 0.0);
            prop_assert!(c.rate_at_norm(lo) > c.rate_at_norm(hi));
        }
    }
}
