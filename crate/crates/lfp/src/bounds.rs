//! Capacity and generalization bounds for weighted-norm balls.
//!
//! The hypothesis class is the ball `{ h : ||h||_gamma <= Q }` of the
//! weighted spectral norm (zero frequency excluded; an optional constant
//! offset is handled separately). Its empirical Rademacher complexity admits
//! the closed form
//!
//! ```text
//! R_S = (Q / M) E_eps sqrt( sum_xi c(xi) |eps_hat(xi)|^2 ),
//! eps_hat(xi) = sum_i eps_i exp(-2 pi i xi . x_i)
//! ```
//!
//! over sign vectors `eps`, which is bounded by `Q ||gamma|| / sqrt(M)`
//! (Cauchy-Schwarz + Jensen; an additive `c0 / sqrt(M)` appears when the
//! class is widened by constants up to `c0`). The spectral sum collapses to
//! the Gram quadratic form `eps^T G eps`, which is how the Monte-Carlo
//! estimator evaluates it.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LfpError, Result};
use crate::solver::LfpKernel;

/// Rademacher complexity bound `c0/sqrt(M) + Q ||gamma|| / sqrt(M)` for the
/// norm ball of radius `Q`, optionally widened by constants bounded by `c0`.
pub fn rademacher_bound(q: f64, gamma_l2: f64, m: usize, c0: Option<f64>) -> Result<f64> {
    if m == 0 {
        return Err(LfpError::InvalidParameter("sample count must be >= 1".into()));
    }
    if !(q >= 0.0 && gamma_l2 >= 0.0 && c0.map_or(true, |c| c >= 0.0)) {
        return Err(LfpError::InvalidParameter(
            "norm radius, weight norm and constant cap must be nonnegative".into(),
        ));
    }
    let root_m = (m as f64).sqrt();
    Ok(c0.unwrap_or(0.0) / root_m + q * gamma_l2 / root_m)
}

/// Monte-Carlo estimate of an empirical Rademacher complexity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RademacherEstimate {
    pub mean: f64,
    /// Standard error of the mean over sign draws.
    pub stderr: f64,
    pub trials: usize,
}

/// Estimates the empirical Rademacher complexity of the radius-`Q` ball on
/// the sample `xs` (flattened row-major) by averaging the exact per-draw
/// supremum `(Q/M) sqrt(eps^T G eps)` over `trials` sign vectors.
pub fn empirical_rademacher_mc(
    xs: &[f64],
    kernel: &LfpKernel,
    q: f64,
    trials: usize,
    seed: u64,
) -> Result<RademacherEstimate> {
    if trials < 2 {
        return Err(LfpError::InvalidParameter(
            "need at least two sign draws for a standard error".into(),
        ));
    }
    if q < 0.0 {
        return Err(LfpError::InvalidParameter("radius must be nonnegative".into()));
    }
    let d = kernel.lattice().dim();
    if xs.is_empty() || xs.len() % d != 0 {
        return Err(LfpError::DimensionMismatch { expected: d, got: xs.len() });
    }
    let m = xs.len() / d;
    let gram = kernel.gram(xs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut eps = vec![0.0f64; m];
    for _ in 0..trials {
        for e in eps.iter_mut() {
            *e = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        }
        let mut quad = 0.0;
        for i in 0..m {
            for j in 0..m {
                quad += eps[i] * gram[(i, j)] * eps[j];
            }
        }
        let value = q / m as f64 * quad.max(0.0).sqrt();
        sum += value;
        sum_sq += value * value;
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(RademacherEstimate {
        mean,
        stderr: (var / n).sqrt(),
        trials,
    })
}

/// Which population-risk bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// Norm-only: `||f'||_gamma ||gamma|| * factor`, for classes where the
    /// zero frequency carries weight.
    NormOnly,
    /// Sup-augmented: `(||f'||_inf + 2 ||f'||_gamma ||gamma||) * factor`,
    /// for the weightless-zero-frequency convention.
    WithSup,
}

/// Inputs of [`generalization_bound`]; `f'` is the residual target
/// `f - h_ini` the solver actually fits.
#[derive(Debug, Clone, Copy)]
pub struct BoundInputs {
    /// `||f'||_gamma`.
    pub fp_norm: f64,
    /// `||gamma||_{l2}` over the (truncated) nonzero lattice.
    pub gamma_l2: f64,
    /// `||f'||_inf`; required by [`BoundVariant::WithSup`].
    pub sup_norm: Option<f64>,
    pub m: usize,
    /// Confidence level: the bound holds with probability `1 - delta`.
    pub delta: f64,
}

/// High-probability bound on the population risk `E |h_M - f|^2` of the
/// minimum-norm interpolant of `M` samples:
/// `scale * (2/sqrt(M) + 4 sqrt(2 ln(4/delta) / M))`.
pub fn generalization_bound(inputs: &BoundInputs, variant: BoundVariant) -> Result<f64> {
    if inputs.m == 0 {
        return Err(LfpError::InvalidParameter("sample count must be >= 1".into()));
    }
    if !(inputs.delta > 0.0 && inputs.delta < 1.0) {
        return Err(LfpError::InvalidParameter(format!(
            "delta must lie in (0, 1), got {}",
            inputs.delta
        )));
    }
    if !(inputs.fp_norm >= 0.0 && inputs.gamma_l2 >= 0.0) {
        return Err(LfpError::InvalidParameter(
            "norms must be nonnegative".into(),
        ));
    }
    let m = inputs.m as f64;
    let factor = 2.0 / m.sqrt() + 4.0 * (2.0 * (4.0 / inputs.delta).ln() / m).sqrt();
    let scale = match variant {
        BoundVariant::NormOnly => inputs.fp_norm * inputs.gamma_l2,
        BoundVariant::WithSup => {
            let sup = inputs.sup_norm.ok_or_else(|| {
                LfpError::InvalidParameter(
                    "the sup-augmented bound needs ||f'||_inf".into(),
                )
            })?;
            if sup < 0.0 {
                return Err(LfpError::InvalidParameter("sup norm must be nonnegative".into()));
            }
            sup + 2.0 * inputs.fp_norm * inputs.gamma_l2
        }
    };
    Ok(scale * factor)
}

/// Cap on the magnitude of the fitted zero-frequency offset:
/// `||f'||_inf + ||f'||_gamma ||gamma||`. For a constant residual target
/// this collapses to its absolute value.
pub fn zero_freq_cap(sup_norm: f64, fp_norm: f64, gamma_l2: f64) -> f64 {
    sup_norm + fp_norm * gamma_l2
}

/// Estimates `max |f|` over an evenly spaced grid on an axis-aligned box
/// (`resolution` points per axis, endpoints included).
pub fn sup_norm_estimate(
    f: impl Fn(&[f64]) -> f64,
    domain: &[(f64, f64)],
    resolution: usize,
) -> Result<f64> {
    if domain.is_empty() {
        return Err(LfpError::InvalidParameter("domain must have an axis".into()));
    }
    if resolution < 2 {
        return Err(LfpError::InvalidParameter(
            "grid needs at least two points per axis".into(),
        ));
    }
    let d = domain.len();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0f64; d];
    let mut best = 0.0f64;
    loop {
        for j in 0..d {
            let (lo, hi) = domain[j];
            x[j] = lo + (hi - lo) * idx[j] as f64 / (resolution - 1) as f64;
        }
        best = best.max(f(&x).abs());
        // odometer over the grid
        let mut axis = d;
        loop {
            if axis == 0 {
                return Ok(best);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < resolution {
                break;
            }
            idx[axis] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::LfpCoefficients;
    use crate::lattice::FrequencyLattice;
    use crate::spectrum::gamma_l2_norm;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use std::sync::Arc;

    fn kernel(l_prime: f64, k_max: i64, a: f64, b: f64) -> LfpKernel {
        let lattice = Arc::new(FrequencyLattice::build(1, l_prime, k_max).unwrap());
        LfpKernel::new(lattice, LfpCoefficients::new(a, b, 1).unwrap()).unwrap()
    }

    #[test]
    fn rademacher_bound_hand_value() {
        // c0/sqrt(M) + Q ||gamma|| / sqrt(M) with Q=1, ||gamma||=1, M=4, c0=2
        assert_relative_eq!(
            rademacher_bound(1.0, 1.0, 4, Some(2.0)).unwrap(),
            1.5
        );
        assert_relative_eq!(rademacher_bound(2.0, 3.0, 9, None).unwrap(), 2.0);
        assert!(rademacher_bound(1.0, 1.0, 0, None).is_err());
        assert!(rademacher_bound(-1.0, 1.0, 4, None).is_err());
    }

    #[test]
    fn generalization_bound_hand_value() {
        // fp * gamma = 1, M = 100, delta = 4/e^2 so 2 ln(4/delta) = 4:
        // 2/10 + 4 sqrt(4/100) = 0.2 + 0.8 = 1
        let delta = 4.0 * (-2.0f64).exp();
        let inputs = BoundInputs {
            fp_norm: 1.0,
            gamma_l2: 1.0,
            sup_norm: None,
            m: 100,
            delta,
        };
        assert_relative_eq!(
            generalization_bound(&inputs, BoundVariant::NormOnly).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        // with sup = 0 the augmented variant is exactly twice the norm-only one
        let with_sup = BoundInputs {
            sup_norm: Some(0.0),
            ..inputs
        };
        assert_relative_eq!(
            generalization_bound(&with_sup, BoundVariant::WithSup).unwrap(),
            2.0,
            max_relative = 1e-12
        );
        // the sup-augmented variant requires the sup norm
        assert!(generalization_bound(&inputs, BoundVariant::WithSup).is_err());
        assert!(generalization_bound(
            &BoundInputs { delta: 0.0, ..inputs },
            BoundVariant::NormOnly
        )
        .is_err());
    }

    #[test]
    fn single_sample_estimate_is_exact() {
        // M=1: |eps_hat(xi)| = 1 for either sign, so every draw equals
        // Q sqrt(sum c) = Q ||gamma|| and the bound is attained exactly.
        let kern = kernel(1.0, 16, 1.0, 0.5);
        let q = 1.7;
        let est = empirical_rademacher_mc(&[0.33], &kern, q, 100, 9).unwrap();
        let bound = rademacher_bound(
            q,
            gamma_l2_norm(kern.lattice(), kern.coeffs()).unwrap(),
            1,
            None,
        )
        .unwrap();
        assert_relative_eq!(est.mean, bound, max_relative = 1e-12);
        assert!(est.stderr < 1e-12);
    }

    #[test]
    fn estimate_stays_below_the_bound() {
        let kern = kernel(2.0, 64, 1.0, 0.2);
        let xs: Vec<f64> = (0..8).map(|i| -0.9 + 0.25 * i as f64).collect();
        let est = empirical_rademacher_mc(&xs, &kern, 1.0, 500, 4).unwrap();
        let bound = rademacher_bound(
            1.0,
            gamma_l2_norm(kern.lattice(), kern.coeffs()).unwrap(),
            8,
            None,
        )
        .unwrap();
        assert!(
            est.mean <= bound + 3.0 * est.stderr,
            "MC mean {} exceeds bound {} beyond noise {}",
            est.mean,
            bound,
            est.stderr
        );
        assert!(est.mean > 0.0);
    }

    #[test]
    fn quadratic_form_equals_direct_spectral_sum() {
        // the estimator's Gram shortcut must match the literal
        // sum_xi c(xi) |eps_hat(xi)|^2 over the two-sided lattice
        let kern = kernel(1.0, 12, 0.7, 0.3);
        let xs = [0.05, 0.4, 0.62, 0.91];
        let eps = [1.0, -1.0, -1.0, 1.0];
        let gram = kern.gram(&xs).unwrap();
        let mut quad = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                quad += eps[i] * gram[(i, j)] * eps[j];
            }
        }
        let lattice = kern.lattice();
        let mut direct = 0.0;
        for (pos, k) in lattice.half_iter() {
            let mut hat = Complex64::new(0.0, 0.0);
            for (i, &x) in xs.iter().enumerate() {
                let arg = -2.0 * std::f64::consts::PI * k[0] as f64 * x / lattice.l_prime();
                hat += eps[i] * Complex64::new(arg.cos(), arg.sin());
            }
            direct += 2.0 * kern.weights_half()[pos] * hat.norm_sqr();
        }
        assert_relative_eq!(quad, direct, max_relative = 1e-10);
    }

    #[test]
    fn zero_frequency_cap_of_a_constant_is_its_magnitude() {
        let sup = sup_norm_estimate(|_| -3.5, &[(0.0, 1.0)], 100).unwrap();
        assert_relative_eq!(zero_freq_cap(sup, 0.0, 10.0), 3.5);
    }

    #[test]
    fn sup_norm_grid_estimates() {
        let f = |x: &[f64]| (2.0 * std::f64::consts::PI * x[0]).sin();
        let sup = sup_norm_estimate(f, &[(0.0, 1.0)], 1001).unwrap();
        assert!((sup - 1.0).abs() < 1e-4);
        // 2-d grid picks up the corner maximum
        let g = |x: &[f64]| x[0] * x[1];
        let sup2 = sup_norm_estimate(g, &[(-1.0, 1.0), (-1.0, 1.0)], 51).unwrap();
        assert_relative_eq!(sup2, 1.0);
        assert!(sup_norm_estimate(|_| 0.0, &[], 10).is_err());
        assert!(sup_norm_estimate(|_| 0.0, &[(0.0, 1.0)], 1).is_err());
    }
}
