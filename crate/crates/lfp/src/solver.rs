//! Frequency-weighted kernel ridge regression.
//!
//! The long-time limit of the linearized spectral dynamics is the minimizer
//! of the weighted norm `sum_xi |h(xi)|^2 / c(xi)` among interpolants of the
//! data. Numerically we reach it through its kernel dual: the weights define
//! the translation-invariant kernel
//!
//! ```text
//! k(x, z) = sum_{xi != 0} c(xi) exp(2 pi i xi . (x - z))
//!         = 2 sum_{half} c(xi) cos(2 pi xi . (x - z)),
//! ```
//!
//! the dual coefficients solve `(G + eps I) alpha = y` (optionally augmented
//! with an unpenalized intercept), and the primal spectrum is recovered as
//! `h(xi) = c(xi) sum_i alpha_i exp(-2 pi i xi . x_i)`. As `eps -> 0` the
//! solution tends to the minimum-weighted-norm interpolant.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::coeff::LfpCoefficients;
use crate::dataset::Dataset;
use crate::error::{LfpError, Result};
use crate::lattice::FrequencyLattice;
use crate::spectrum::SpectralSolution;
use crate::util::KahanSum;

/// How the zero-frequency mode is handled during the solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InterceptMode {
    /// Augmented KKT system with a free (unpenalized) intercept.
    Unpenalized,
    /// No intercept; the solution has no zero-frequency component.
    None,
}

/// Ridge solve configuration.
#[derive(Debug, Clone, Copy)]
pub struct RidgeConfig {
    /// Ridge parameter `eps` added to the Gram diagonal.
    pub epsilon: f64,
    pub intercept: InterceptMode,
    /// Target relative residual for iterative refinement.
    pub solver_tol: f64,
    /// Maximum refinement sweeps after the direct solve.
    pub max_refinement: usize,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            intercept: InterceptMode::Unpenalized,
            solver_tol: 1e-10,
            max_refinement: 8,
        }
    }
}

impl RidgeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(LfpError::InvalidParameter(format!(
                "ridge epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.solver_tol.is_finite() && self.solver_tol > 0.0) {
            return Err(LfpError::InvalidParameter(
                "solver tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The translation-invariant kernel induced by decay coefficients on a
/// truncated lattice, with the per-frequency weights cached.
#[derive(Debug, Clone)]
pub struct LfpKernel {
    lattice: Arc<FrequencyLattice>,
    coeffs: LfpCoefficients,
    c_half: Vec<f64>,
    gamma_l2_sq: f64,
}

impl LfpKernel {
    pub fn new(lattice: Arc<FrequencyLattice>, coeffs: LfpCoefficients) -> Result<Self> {
        if coeffs.dim() != lattice.dim() {
            return Err(LfpError::DimensionMismatch {
                expected: lattice.dim(),
                got: coeffs.dim(),
            });
        }
        let c_half: Vec<f64> = lattice
            .xi_norms()
            .iter()
            .map(|&n| coeffs.rate_at_norm(n))
            .collect();
        let mut acc = KahanSum::new();
        for &c in &c_half {
            acc.add(2.0 * c);
        }
        Ok(Self {
            lattice,
            coeffs,
            c_half,
            gamma_l2_sq: acc.value(),
        })
    }

    pub fn lattice(&self) -> &Arc<FrequencyLattice> {
        &self.lattice
    }

    pub fn coeffs(&self) -> &LfpCoefficients {
        &self.coeffs
    }

    /// Cached weights `c(xi)` aligned with the lattice half enumeration.
    pub fn weights_half(&self) -> &[f64] {
        &self.c_half
    }

    /// `k(x, x) = sum_xi c(xi)`, the squared weight-sequence norm.
    pub fn gamma_l2_sq(&self) -> f64 {
        self.gamma_l2_sq
    }

    /// Kernel value `k(x, z)`.
    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        let delta: Vec<f64> = x.iter().zip(z).map(|(&a, &b)| a - b).collect();
        let table = self.lattice.phase_table(&delta);
        let mut acc = 0.0;
        for (i, k) in self.lattice.half_iter() {
            acc += self.c_half[i] * table.phase(k).re;
        }
        2.0 * acc
    }

    /// Symmetric Gram matrix of flattened row-major points.
    pub fn gram(&self, xs: &[f64]) -> Result<DMatrix<f64>> {
        let d = self.lattice.dim();
        if xs.is_empty() || xs.len() % d != 0 {
            return Err(LfpError::DimensionMismatch {
                expected: d,
                got: xs.len(),
            });
        }
        let m = xs.len() / d;
        let mut g = DMatrix::zeros(m, m);
        for i in 0..m {
            g[(i, i)] = self.gamma_l2_sq;
            for j in (i + 1)..m {
                let v = self.eval(&xs[i * d..(i + 1) * d], &xs[j * d..(j + 1) * d]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// Primal spectrum of a dual solution:
    /// `h(xi) = c(xi) sum_i alpha_i exp(-2 pi i xi . x_i)`.
    pub fn recover_spectrum(
        &self,
        xs: &[f64],
        alpha: &[f64],
        intercept: f64,
    ) -> Result<SpectralSolution> {
        let d = self.lattice.dim();
        if xs.len() != alpha.len() * d {
            return Err(LfpError::DimensionMismatch {
                expected: alpha.len() * d,
                got: xs.len(),
            });
        }
        let mut half = vec![Complex64::new(0.0, 0.0); self.lattice.len_half()];
        for (x, &a) in xs.chunks_exact(d).zip(alpha) {
            let table = self.lattice.phase_table(x);
            for (i, k) in self.lattice.half_iter() {
                half[i] += table.phase(k).conj() * a;
            }
        }
        for (h, &c) in half.iter_mut().zip(&self.c_half) {
            *h *= c;
        }
        SpectralSolution::from_half(Arc::clone(&self.lattice), half, intercept)
    }
}

/// Solve diagnostics: condition estimate of the solved system, refinement
/// sweeps used, and final linear-system residual (relative).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolveDiagnostics {
    pub condition: f64,
    pub refinement_iterations: usize,
    pub relative_residual: f64,
}

/// Dual form of a ridge solution.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: DVector<f64>,
    pub intercept: f64,
    /// Gram matrix the system was built from.
    pub gram: DMatrix<f64>,
    /// Training data the coefficients refer to.
    pub data: Dataset,
    /// Initial function the solve was relative to, if any.
    pub h_ini: Option<SpectralSolution>,
    pub epsilon: f64,
    pub diagnostics: SolveDiagnostics,
}

impl DualSolution {
    /// Predicts at a single point through the kernel expansion.
    pub fn predict(&self, kernel: &LfpKernel, x: &[f64]) -> f64 {
        let d = self.data.dim();
        let mut acc = self.intercept;
        for (i, xi) in self.data.xs().chunks_exact(d).enumerate() {
            acc += self.alpha[i] * kernel.eval(x, xi);
        }
        if let Some(h0) = &self.h_ini {
            acc += h0.evaluate(x);
        }
        acc
    }

    /// Values of the solution at the training points, computed from the
    /// stored Gram matrix.
    pub fn fitted(&self) -> Vec<f64> {
        let fitted = &self.gram * &self.alpha;
        (0..self.data.len())
            .map(|i| {
                let mut v = fitted[i] + self.intercept;
                if let Some(h0) = &self.h_ini {
                    v += h0.evaluate(self.data.x(i));
                }
                v
            })
            .collect()
    }
}

/// Result of a ridge solve: dual coefficients plus the recovered spectrum.
#[derive(Debug, Clone)]
pub struct LfpSolve {
    pub dual: DualSolution,
    pub spectrum: SpectralSolution,
}

/// Solves the frequency-weighted ridge problem on `data`, optionally
/// relative to an initial function `h_ini` (the solve then fits the residual
/// targets `y_i - h_ini(x_i)` and adds `h_ini` back to the returned
/// spectrum).
pub fn solve_lfp(
    data: &Dataset,
    kernel: &LfpKernel,
    h_ini: Option<&SpectralSolution>,
    cfg: &RidgeConfig,
) -> Result<LfpSolve> {
    cfg.validate()?;
    if data.dim() != kernel.lattice().dim() {
        return Err(LfpError::DimensionMismatch {
            expected: kernel.lattice().dim(),
            got: data.dim(),
        });
    }
    let m = data.len();
    let mut g = DVector::from_column_slice(data.ys());
    if let Some(h0) = h_ini {
        for i in 0..m {
            g[i] -= h0.evaluate(data.x(i));
        }
    }
    let gram = kernel.gram(data.xs())?;

    // Assemble the (possibly augmented) symmetric system.
    let (a, b) = match cfg.intercept {
        InterceptMode::None => {
            let mut a = gram.clone();
            for i in 0..m {
                a[(i, i)] += cfg.epsilon;
            }
            (a, g.clone())
        }
        InterceptMode::Unpenalized => {
            let mut a = DMatrix::zeros(m + 1, m + 1);
            a.view_mut((0, 0), (m, m)).copy_from(&gram);
            for i in 0..m {
                a[(i, i)] += cfg.epsilon;
                a[(i, m)] = 1.0;
                a[(m, i)] = 1.0;
            }
            let mut b = DVector::zeros(m + 1);
            b.rows_mut(0, m).copy_from(&g);
            (a, b)
        }
    };

    let (x, diagnostics) = solve_refined(&a, &b, cfg.solver_tol, cfg.max_refinement)?;

    let (alpha, intercept) = match cfg.intercept {
        InterceptMode::None => (x.clone(), 0.0),
        InterceptMode::Unpenalized => (x.rows(0, m).into_owned(), x[m]),
    };

    let mut spectrum =
        kernel.recover_spectrum(data.xs(), alpha.as_slice(), intercept)?;
    if let Some(h0) = h_ini {
        spectrum = spectrum.try_add(h0)?;
    }

    Ok(LfpSolve {
        dual: DualSolution {
            alpha,
            intercept,
            gram,
            data: data.clone(),
            h_ini: h_ini.cloned(),
            epsilon: cfg.epsilon,
            diagnostics,
        },
        spectrum,
    })
}

/// Largest deviation of the solution from its targets at the training
/// points. In no-intercept mode this equals `eps * max_i |alpha_i|` up to
/// solver tolerance, directly exposing the ridge bias.
pub fn interpolation_residual(dual: &DualSolution) -> f64 {
    dual.fitted()
        .iter()
        .zip(dual.data.ys())
        .map(|(&h, &y)| (h - y).abs())
        .fold(0.0, f64::max)
}

/// LU solve with iterative refinement and a deterministic condition
/// estimate. Errors when the factorization fails outright or refinement
/// cannot push the relative residual below a loose floor.
fn solve_refined(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    tol: f64,
    max_refinement: usize,
) -> Result<(DVector<f64>, SolveDiagnostics)> {
    let n = a.nrows();
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok((
            DVector::zeros(n),
            SolveDiagnostics {
                condition: condition_estimate(a),
                refinement_iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let lu = a.clone().lu();
    let mut x = lu.solve(b).ok_or_else(|| LfpError::SingularSystem {
        condition: f64::INFINITY,
    })?;
    let mut iterations = 0;
    let mut rel = f64::INFINITY;
    for _ in 0..=max_refinement {
        let r = b - a * &x;
        rel = r.norm() / b_norm;
        if rel <= tol {
            break;
        }
        if iterations == max_refinement {
            break;
        }
        let delta = lu.solve(&r).ok_or_else(|| LfpError::SingularSystem {
            condition: f64::INFINITY,
        })?;
        x += delta;
        iterations += 1;
    }
    let condition = condition_estimate(a);
    // refinement converges fast on anything solvable; a residual that will
    // not drop below this floor means the factorization carries no
    // information at this conditioning
    if rel > 1e-6 {
        return Err(LfpError::SingularSystem { condition });
    }
    Ok((
        x,
        SolveDiagnostics {
            condition,
            refinement_iterations: iterations,
            relative_residual: rel,
        },
    ))
}

/// Deterministic two-sided power-iteration estimate of `|lambda|_max /
/// |lambda|_min` for a symmetric matrix.
fn condition_estimate(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let start = DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -0.5 } / (i + 1) as f64);
    let mut v = start.normalize();
    let mut lambda_max = 0.0;
    for _ in 0..40 {
        let w = a * &v;
        lambda_max = w.norm();
        if lambda_max == 0.0 {
            return f64::INFINITY;
        }
        v = w / lambda_max;
    }
    let lu = a.clone().lu();
    let mut u = start.normalize();
    let mut inv_norm = 0.0;
    for _ in 0..40 {
        match lu.solve(&u) {
            Some(w) => {
                inv_norm = w.norm();
                if inv_norm == 0.0 {
                    return f64::INFINITY;
                }
                u = w / inv_norm;
            }
            None => return f64::INFINITY,
        }
    }
    lambda_max * inv_norm
}

/// Flat JSON export of a solve, sufficient to re-evaluate the solution.
#[derive(Debug, Serialize)]
pub struct SolutionExport<'a> {
    pub d: usize,
    pub l_prime: f64,
    pub k_max: i64,
    pub coeff_a: f64,
    pub coeff_b: f64,
    pub epsilon: f64,
    pub intercept_mode: InterceptMode,
    pub alpha: &'a [f64],
    pub intercept: f64,
    pub train_x: &'a [f64],
    pub condition: f64,
    pub relative_residual: f64,
    pub dataset_sha256: Option<String>,
}

impl DualSolution {
    /// Writes the dual solution as JSON next to its spectrum artifacts.
    pub fn export_json(
        &self,
        kernel: &LfpKernel,
        intercept_mode: InterceptMode,
        path: &Path,
        dataset_sha256: Option<String>,
    ) -> Result<()> {
        let export = SolutionExport {
            d: self.data.dim(),
            l_prime: kernel.lattice().l_prime(),
            k_max: kernel.lattice().k_max(),
            coeff_a: kernel.coeffs().a(),
            coeff_b: kernel.coeffs().b(),
            epsilon: self.epsilon,
            intercept_mode,
            alpha: self.alpha.as_slice(),
            intercept: self.intercept,
            train_x: self.data.xs(),
            condition: self.diagnostics.condition,
            relative_residual: self.diagnostics.relative_residual,
            dataset_sha256,
        };
        let mut f = std::fs::File::create(path)?;
        f.write_all(serde_json::to_string_pretty(&export)?.as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::fp_norm;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn kernel_1d(l_prime: f64, k_max: i64, a: f64, b: f64) -> LfpKernel {
        let lattice = Arc::new(FrequencyLattice::build(1, l_prime, k_max).unwrap());
        LfpKernel::new(lattice, LfpCoefficients::new(a, b, 1).unwrap()).unwrap()
    }

    #[test]
    fn kernel_diagonal_is_weight_norm_and_gram_is_psd() {
        let kernel = kernel_1d(2.0, 32, 1.0, 0.5);
        let g = crate::spectrum::gamma_l2_norm(kernel.lattice(), kernel.coeffs()).unwrap();
        assert_relative_eq!(kernel.gamma_l2_sq(), g * g, max_relative = 1e-12);
        assert_relative_eq!(kernel.eval(&[0.3], &[0.3]), g * g, max_relative = 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let gram = kernel.gram(&xs).unwrap();
        let eig = nalgebra::SymmetricEigen::new(gram.clone());
        let min = eig.eigenvalues.min();
        assert!(
            min >= -1e-9 * gram.trace(),
            "Gram matrix must be PSD up to roundoff, got min eigenvalue {min}"
        );
    }

    #[test]
    fn single_sample_solve_matches_closed_form() {
        let kernel = kernel_1d(1.0, 8, 1.0, 0.0);
        let data = Dataset::new(1, vec![0.25], vec![2.0]).unwrap();
        let cfg = RidgeConfig {
            epsilon: 1e-4,
            intercept: InterceptMode::None,
            ..Default::default()
        };
        let solve = solve_lfp(&data, &kernel, None, &cfg).unwrap();
        let gsq = kernel.gamma_l2_sq();
        assert_relative_eq!(
            solve.dual.alpha[0],
            2.0 / (gsq + 1e-4),
            max_relative = 1e-10
        );
        // residual identity in no-intercept mode: max residual = eps * max |alpha|
        let resid = interpolation_residual(&solve.dual);
        assert_relative_eq!(
            resid,
            1e-4 * solve.dual.alpha[0].abs(),
            max_relative = 1e-8
        );
        // the spectrum's weighted norm has the closed form |alpha| * ||gamma||
        assert_relative_eq!(
            fp_norm(&solve.spectrum, kernel.coeffs()).unwrap(),
            solve.dual.alpha[0].abs() * gsq.sqrt(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn exactly_determined_system_recovers_the_target_spectrum() {
        // k_max=3 gives 2 stored frequencies -> 4 real dof + intercept = 5;
        // 5 samples of an on-lattice function pin it uniquely.
        let lattice = Arc::new(FrequencyLattice::build(1, 1.0, 3).unwrap());
        let kernel =
            LfpKernel::new(Arc::clone(&lattice), LfpCoefficients::new(1.0, 1.0, 1).unwrap())
                .unwrap();
        let target = {
            let mut rng = ChaCha8Rng::seed_from_u64(12);
            let half: Vec<Complex64> = (0..lattice.len_half())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            SpectralSolution::from_half(Arc::clone(&lattice), half, 0.7).unwrap()
        };
        let xs: Vec<f64> = vec![0.05, 0.23, 0.41, 0.67, 0.89];
        let ys: Vec<f64> = xs.iter().map(|&x| target.evaluate(&[x])).collect();
        let data = Dataset::new(1, xs, ys).unwrap();
        let cfg = RidgeConfig {
            epsilon: 1e-10,
            ..Default::default()
        };
        let solve = solve_lfp(&data, &kernel, None, &cfg).unwrap();
        assert!(
            solve.spectrum.rel_l2_distance(&target).unwrap() < 1e-6,
            "determined interpolation must recover the generating spectrum"
        );
        assert_relative_eq!(solve.dual.intercept, 0.7, max_relative = 1e-5);
    }

    #[test]
    fn constant_targets_land_entirely_on_the_intercept() {
        let kernel = kernel_1d(2.0, 16, 0.5, 0.5);
        let data = Dataset::new(1, vec![-0.4, 0.1, 0.8], vec![3.0, 3.0, 3.0]).unwrap();
        let solve = solve_lfp(&data, &kernel, None, &RidgeConfig::default()).unwrap();
        assert_relative_eq!(solve.dual.intercept, 3.0, epsilon = 1e-9);
        assert!(solve.dual.alpha.amax() < 1e-9);
        // dual feasibility of the augmented system: alphas sum to zero
        assert!(solve.dual.alpha.sum().abs() < 1e-12);
    }

    #[test]
    fn interpolation_residual_shrinks_with_epsilon() {
        let kernel = kernel_1d(2.0, 64, 1.0, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..6).map(|i| -0.9 + 0.33 * i as f64).collect();
        let ys: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let data = Dataset::new(1, xs, ys).unwrap();
        let mut eps = 1e-2;
        let mut last = f64::INFINITY;
        for _ in 0..6 {
            let cfg = RidgeConfig {
                epsilon: eps,
                intercept: InterceptMode::None,
                ..Default::default()
            };
            let solve = solve_lfp(&data, &kernel, None, &cfg).unwrap();
            let resid = interpolation_residual(&solve.dual);
            assert!(
                resid <= last * (1.0 + 1e-9),
                "halving eps must not grow the residual: {resid} after {last}"
            );
            // identity check against the dual coefficients
            assert_relative_eq!(
                resid,
                eps * solve.dual.alpha.amax(),
                max_relative = 1e-6
            );
            last = resid;
            eps /= 2.0;
        }
    }

    #[test]
    fn predictions_are_shift_invariant_with_the_periodic_kernel() {
        let kernel = kernel_1d(4.0, 64, 1.0, 0.5);
        let xs = vec![-0.75, -0.25, 0.125, 0.5];
        let ys = vec![1.0, -0.5, 0.25, 0.75];
        let data = Dataset::new(1, xs.clone(), ys.clone()).unwrap();
        let shifted =
            Dataset::new(1, xs.iter().map(|&x| x + 0.25).collect(), ys).unwrap();
        let cfg = RidgeConfig::default();
        let base = solve_lfp(&data, &kernel, None, &cfg).unwrap();
        let moved = solve_lfp(&shifted, &kernel, None, &cfg).unwrap();
        for &x in &[-0.6, 0.0, 0.3, 0.9] {
            assert_relative_eq!(
                base.spectrum.evaluate(&[x]),
                moved.spectrum.evaluate(&[x + 0.25]),
                epsilon = 1e-9,
                max_relative = 1e-7
            );
        }
    }

    #[test]
    fn duplicate_free_but_closely_spaced_points_report_conditioning() {
        // two nearly coincident samples on a smooth kernel: the solve either
        // succeeds with refinement or fails loudly with a condition estimate
        let kernel = kernel_1d(2.0, 32, 1.0, 0.0);
        let data = Dataset::new(1, vec![0.1, 0.1 + 1e-13], vec![1.0, -1.0]).unwrap();
        let cfg = RidgeConfig {
            epsilon: 1e-14,
            intercept: InterceptMode::None,
            ..Default::default()
        };
        match solve_lfp(&data, &kernel, None, &cfg) {
            Ok(solve) => assert!(solve.dual.diagnostics.condition > 1e10),
            Err(LfpError::SingularSystem { .. }) => {}
            Err(other) => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn solving_relative_to_an_initial_function_adds_it_back() {
        let kernel = kernel_1d(1.0, 8, 1.0, 1.0);
        let h0 = SpectralSolution::sine(Arc::clone(kernel.lattice()), 2, 0.5).unwrap();
        let data = Dataset::new(1, vec![0.1, 0.4, 0.75], vec![0.2, -0.1, 0.6]).unwrap();
        let cfg = RidgeConfig {
            epsilon: 1e-9,
            ..Default::default()
        };
        let solve = solve_lfp(&data, &kernel, Some(&h0), &cfg).unwrap();
        for i in 0..data.len() {
            assert_relative_eq!(
                solve.spectrum.evaluate(data.x(i)),
                data.y(i),
                epsilon = 1e-6
            );
        }
        // the correction lives on the constraint span; removing h_ini leaves
        // its weighted norm orthogonal piece intact
        let correction = solve.spectrum.try_sub(&h0).unwrap();
        assert!(correction.l2_norm() > 0.0);
    }
}
