//! Gradient flows whose long-time limits are minimum-norm solutions.
//!
//! Two levels are implemented. The finite-dimensional template: for a full
//! row rank `P`, the flow `du/dt = -P^T (P u - g)` started at `u_ini`
//! converges to the closest point of the affine solution set,
//!
//! ```text
//! u_inf = u_ini + P^T (P P^T)^{-1} (g - P u_ini).
//! ```
//!
//! And its function-space instance: on the truncated frequency lattice the
//! linearized training dynamics read, per frequency,
//!
//! ```text
//! d h(k)/dt = c(k) * sum_i (y_i - h(x_i, t)) exp(-2 pi i k . x_i / l')
//! ```
//!
//! which is exactly the template flow in coordinates weighted by
//! `sqrt(c(k))`; its limit is the minimum-weighted-norm interpolant that the
//! ridge solver approaches as `eps -> 0`. [`equivalence_report`] drives all
//! three routes on one instance and measures their pairwise distances.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{LfpError, Result};
use crate::solver::{solve_lfp, InterceptMode, LfpKernel, RidgeConfig};
use crate::spectrum::SpectralSolution;

/// Explicit time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMethod {
    Euler,
    Rk4,
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStop {
    /// Residual fell below tolerance.
    Converged,
    /// Step or time budget exhausted first.
    Budget,
}

/// Consecutive residual growths tolerated before declaring divergence.
const DIVERGENCE_PATIENCE: usize = 10;

// ---------------------------------------------------------------------------
// Finite-dimensional template
// ---------------------------------------------------------------------------

/// Configuration for the matrix-form flow.
#[derive(Debug, Clone, Copy)]
pub struct LinearFlowConfig {
    /// Explicit step; `None` picks `1 / lambda_max(P P^T)`.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub method: FlowMethod,
    /// Trajectory recording cadence in steps.
    pub record_every: usize,
}

impl Default for LinearFlowConfig {
    fn default() -> Self {
        Self {
            dt: None,
            t_end: 100.0,
            method: FlowMethod::Euler,
            record_every: 100,
        }
    }
}

/// Recorded matrix-form trajectory.
#[derive(Debug, Clone)]
pub struct LinearFlowTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub residuals: Vec<f64>,
    pub final_state: DVector<f64>,
    pub stop: FlowStop,
}

/// Least-squares flow data: minimize `|u - u_ini|` subject to `P u = g`.
#[derive(Debug, Clone)]
pub struct LinearFlowProblem {
    p: DMatrix<f64>,
    g: DVector<f64>,
    u_ini: DVector<f64>,
    lambda_max: f64,
}

impl LinearFlowProblem {
    /// Validates shapes and full row rank (`sigma_min > 1e-10 sigma_max`).
    /// A zero-row `p` is the unconstrained problem, whose minimizer is
    /// `u_ini` itself.
    pub fn new(p: DMatrix<f64>, g: DVector<f64>, u_ini: DVector<f64>) -> Result<Self> {
        if p.ncols() == 0 {
            return Err(LfpError::InvalidParameter(
                "constraint matrix must have at least one column".into(),
            ));
        }
        if p.nrows() == 0 {
            if !g.is_empty() {
                return Err(LfpError::DimensionMismatch {
                    expected: 0,
                    got: g.len(),
                });
            }
            if u_ini.len() != p.ncols() {
                return Err(LfpError::DimensionMismatch {
                    expected: p.ncols(),
                    got: u_ini.len(),
                });
            }
            return Ok(Self {
                p,
                g,
                u_ini,
                lambda_max: 0.0,
            });
        }
        if p.nrows() > p.ncols() {
            return Err(LfpError::InvalidParameter(format!(
                "constraint matrix must be wide (rows {} > cols {})",
                p.nrows(),
                p.ncols()
            )));
        }
        if g.len() != p.nrows() {
            return Err(LfpError::DimensionMismatch {
                expected: p.nrows(),
                got: g.len(),
            });
        }
        if u_ini.len() != p.ncols() {
            return Err(LfpError::DimensionMismatch {
                expected: p.ncols(),
                got: u_ini.len(),
            });
        }
        let svd = p.clone().svd(false, false);
        let sigma_max = svd.singular_values.max();
        let sigma_min = svd.singular_values.min();
        if !(sigma_min > 1e-10 * sigma_max && sigma_min > 0.0) {
            return Err(LfpError::RankDeficient { sigma_min });
        }
        Ok(Self {
            p,
            g,
            u_ini,
            lambda_max: sigma_max * sigma_max,
        })
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn g(&self) -> &DVector<f64> {
        &self.g
    }

    pub fn u_ini(&self) -> &DVector<f64> {
        &self.u_ini
    }

    /// Largest eigenvalue of `P P^T`, controlling the stable step size.
    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Eigendecomposition of `P P^T` driving the closed-form flow state:
    /// `(V, mu, V^T (g - P u_ini))`.
    fn modes(&self) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
        let eig = nalgebra::SymmetricEigen::new(&self.p * self.p.transpose());
        let rhs = &self.g - &self.p * &self.u_ini;
        let vt_rhs = eig.eigenvectors.transpose() * rhs;
        (eig.eigenvectors, eig.eigenvalues, vt_rhs)
    }

    /// Closed-form state of `du/dt = -P^T (P u - g)` at time `t`:
    ///
    /// ```text
    /// u(t) = u_ini + P^T V diag((1 - e^{-mu_j t}) / mu_j) V^T (g - P u_ini)
    /// ```
    ///
    /// `t = 0` returns `u_ini`; `t = inf` recovers [`Self::min_norm`].
    pub fn solution_at(&self, t: f64) -> Result<DVector<f64>> {
        if !(t >= 0.0) {
            return Err(LfpError::InvalidParameter(format!(
                "flow time must be nonnegative, got {t}"
            )));
        }
        if self.p.nrows() == 0 || t == 0.0 {
            return Ok(self.u_ini.clone());
        }
        let (v, mu, vt_rhs) = self.modes();
        let scaled = DVector::from_fn(vt_rhs.len(), |j, _| {
            // (1 - e^{-mu t}) / mu, via expm1 for accuracy at small mu*t;
            // the limit for mu -> 0 is t itself
            let phi = if mu[j] > 0.0 {
                -(-mu[j] * t).exp_m1() / mu[j]
            } else {
                t
            };
            phi * vt_rhs[j]
        });
        Ok(&self.u_ini + self.p.transpose() * (v * scaled))
    }

    /// Euclidean constraint residual `|g - P u(t)|` of the closed-form state
    /// at time `t`, without materializing the state.
    pub fn residual_norm_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(LfpError::InvalidParameter(format!(
                "flow time must be nonnegative, got {t}"
            )));
        }
        if self.p.nrows() == 0 {
            return Ok(0.0);
        }
        let (_, mu, vt_rhs) = self.modes();
        Ok(residual_at(&mu, &vt_rhs, t))
    }

    /// Earliest flow time at which the constraint residual falls to
    /// `target`. The residual decays monotonically, so the answer is unique:
    /// `0` when the initial residual is already at or below `target`,
    /// infinity when `target <= 0` or beyond time `1e30`.
    pub fn time_for_residual(&self, target: f64) -> Result<f64> {
        if !target.is_finite() {
            return Err(LfpError::InvalidParameter(format!(
                "residual target must be finite, got {target}"
            )));
        }
        if self.p.nrows() == 0 {
            return Ok(0.0);
        }
        if target <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let (_, mu, vt_rhs) = self.modes();
        if residual_at(&mu, &vt_rhs, 0.0) <= target {
            return Ok(0.0);
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        while residual_at(&mu, &vt_rhs, hi) > target {
            lo = hi;
            hi *= 2.0;
            if hi > 1e30 {
                return Ok(f64::INFINITY);
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if residual_at(&mu, &vt_rhs, mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Closed-form limit `u_ini + P^T (P P^T)^{-1} (g - P u_ini)`.
    pub fn min_norm(&self) -> Result<DVector<f64>> {
        if self.p.nrows() == 0 {
            return Ok(self.u_ini.clone());
        }
        let ppt = &self.p * self.p.transpose();
        let rhs = &self.g - &self.p * &self.u_ini;
        let lu = ppt.lu();
        let lam = lu.solve(&rhs).ok_or(LfpError::SingularSystem {
            condition: f64::INFINITY,
        })?;
        Ok(&self.u_ini + self.p.transpose() * lam)
    }

    /// Integrates `du/dt = -P^T (P u - g)` from `u_ini`.
    pub fn integrate(&self, cfg: &LinearFlowConfig) -> Result<LinearFlowTrajectory> {
        if self.p.nrows() == 0 {
            return Ok(LinearFlowTrajectory {
                times: vec![0.0],
                states: vec![self.u_ini.clone()],
                residuals: vec![0.0],
                final_state: self.u_ini.clone(),
                stop: FlowStop::Converged,
            });
        }
        let bound = 2.0 / self.lambda_max;
        let dt = match cfg.dt {
            Some(dt) if dt > bound => return Err(LfpError::StepSize { dt, bound }),
            Some(dt) if !(dt > 0.0) => {
                return Err(LfpError::InvalidParameter("dt must be positive".into()))
            }
            Some(dt) => dt,
            None => 1.0 / self.lambda_max,
        };
        let record_every = cfg.record_every.max(1);
        let deriv = |u: &DVector<f64>| -> DVector<f64> {
            self.p.transpose() * (&self.g - &self.p * u)
        };
        let mut u = self.u_ini.clone();
        let mut t = 0.0;
        let mut times = vec![0.0];
        let mut states = vec![u.clone()];
        let mut residual = (&self.p * &u - &self.g).norm();
        let mut residuals = vec![residual];
        let mut growths = 0;
        let mut stop = FlowStop::Budget;
        let mut step = 0usize;
        while t < cfg.t_end {
            match cfg.method {
                FlowMethod::Euler => {
                    u += deriv(&u) * dt;
                }
                FlowMethod::Rk4 => {
                    let k1 = deriv(&u);
                    let k2 = deriv(&(&u + &k1 * (dt / 2.0)));
                    let k3 = deriv(&(&u + &k2 * (dt / 2.0)));
                    let k4 = deriv(&(&u + &k3 * dt));
                    u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
                }
            }
            t += dt;
            step += 1;
            let r = (&self.p * &u - &self.g).norm();
            if r > residual * (1.0 + 1e-12) {
                growths += 1;
                if growths >= DIVERGENCE_PATIENCE {
                    return Err(LfpError::FlowDiverged {
                        steps: growths,
                        residual: r,
                    });
                }
            } else {
                growths = 0;
            }
            residual = r;
            if step % record_every == 0 {
                times.push(t);
                states.push(u.clone());
                residuals.push(residual);
            }
            if residual <= 1e-12 * self.g.norm().max(1.0) {
                stop = FlowStop::Converged;
                break;
            }
        }
        if *times.last().unwrap() < t {
            times.push(t);
            states.push(u.clone());
            residuals.push(residual);
        }
        Ok(LinearFlowTrajectory {
            times,
            states,
            residuals,
            final_state: u,
            stop,
        })
    }
}

// ---------------------------------------------------------------------------
// Spectral flow on the lattice
// ---------------------------------------------------------------------------

/// Configuration for the lattice flow.
#[derive(Debug, Clone)]
pub struct SpectralFlowConfig {
    /// Explicit step; `None` picks `1 / lambda_max(G)` with `G` the kernel
    /// Gram matrix of the training points.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub max_steps: usize,
    /// Convergence target for the training residual, relative to the target
    /// scale.
    pub residual_rtol: f64,
    pub method: FlowMethod,
    pub record_every: usize,
    /// Frequencies whose coefficients are recorded along the trajectory.
    pub track: Vec<Vec<i64>>,
}

impl Default for SpectralFlowConfig {
    fn default() -> Self {
        Self {
            dt: None,
            t_end: 1e7,
            max_steps: 2_000_000,
            residual_rtol: 1e-9,
            method: FlowMethod::Euler,
            record_every: 50,
            track: Vec::new(),
        }
    }
}

/// Recorded lattice-flow trajectory.
#[derive(Debug, Clone)]
pub struct SpectralFlowTrajectory {
    pub times: Vec<f64>,
    /// Euclidean norm of the training residual `y - h(X, t)` at each record.
    pub residual_norms: Vec<f64>,
    /// Tracked coefficients: one series per tracked frequency, aligned with
    /// `times`.
    pub tracked: Vec<(Vec<i64>, Vec<Complex64>)>,
    /// Final per-frequency derivative magnitude `|d h(k)/dt|` over the half
    /// lattice — the visible non-converged tail.
    pub frequency_residuals: Vec<f64>,
    pub final_spectrum: SpectralSolution,
    pub steps: usize,
    pub stop: FlowStop,
}

struct SpectralOde<'a> {
    c: &'a [f64],
    /// `exp(2 pi i k . x_i / l')` flattened as `m` rows over the half lattice.
    phases: Vec<Complex64>,
    targets: Vec<f64>,
    n: usize,
}

impl<'a> SpectralOde<'a> {
    fn new(data: &Dataset, kernel: &'a LfpKernel, targets: Vec<f64>) -> Self {
        let lattice = kernel.lattice();
        let n = lattice.len_half();
        let mut phases = Vec::with_capacity(data.len() * n);
        for i in 0..data.len() {
            let table = lattice.phase_table(data.x(i));
            for (_, k) in lattice.half_iter() {
                phases.push(table.phase(k));
            }
        }
        Self {
            c: kernel.weights_half(),
            phases,
            targets,
            n,
        }
    }

    /// Residual `e_i = g_i - h(x_i)` for the spectrum `h`.
    fn residual(&self, h: &[Complex64], e: &mut [f64]) {
        for (i, ei) in e.iter_mut().enumerate() {
            let row = &self.phases[i * self.n..(i + 1) * self.n];
            let mut acc = 0.0;
            for (hj, pj) in h.iter().zip(row) {
                acc += hj.re * pj.re - hj.im * pj.im;
            }
            *ei = self.targets[i] - 2.0 * acc;
        }
    }

    /// `d h(k)/dt = c(k) sum_i e_i conj(phase_i(k))` given the residual.
    fn derivative_from_residual(&self, e: &[f64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        for (i, &ei) in e.iter().enumerate() {
            let row = &self.phases[i * self.n..(i + 1) * self.n];
            for (oj, pj) in out.iter_mut().zip(row) {
                oj.re += ei * pj.re;
                oj.im -= ei * pj.im;
            }
        }
        for (oj, &cj) in out.iter_mut().zip(self.c) {
            *oj *= cj;
        }
    }

    fn derivative(&self, h: &[Complex64], e: &mut [f64], out: &mut [Complex64]) -> f64 {
        self.residual(h, e);
        let norm = e.iter().map(|&v| v * v).sum::<f64>().sqrt();
        self.derivative_from_residual(e, out);
        norm
    }
}

/// Integrates the per-frequency linear dynamics on the kernel's lattice,
/// starting from `h_ini` (zero if `None`). The flow carries no intercept:
/// its limit is the no-intercept minimum-weighted-norm interpolant.
pub fn integrate_spectral_flow(
    data: &Dataset,
    kernel: &LfpKernel,
    h_ini: Option<&SpectralSolution>,
    cfg: &SpectralFlowConfig,
) -> Result<SpectralFlowTrajectory> {
    if data.dim() != kernel.lattice().dim() {
        return Err(LfpError::DimensionMismatch {
            expected: kernel.lattice().dim(),
            got: data.dim(),
        });
    }
    if let Some(h0) = h_ini {
        if h0.lattice().len_half() != kernel.lattice().len_half()
            || h0.lattice().dim() != kernel.lattice().dim()
        {
            return Err(LfpError::InvalidParameter(
                "initial spectrum lives on a different lattice".into(),
            ));
        }
    }
    let lattice = Arc::clone(kernel.lattice());
    let n = lattice.len_half();
    let m = data.len();

    // Stability is governed by the Gram matrix: the residual evolves as
    // de/dt = -G e.
    let gram = kernel.gram(data.xs())?;
    let lambda_max = symmetric_lambda_max(&gram);
    let bound = 2.0 / lambda_max;
    let dt = match cfg.dt {
        Some(dt) if dt > bound => return Err(LfpError::StepSize { dt, bound }),
        Some(dt) if !(dt > 0.0) => {
            return Err(LfpError::InvalidParameter("dt must be positive".into()))
        }
        Some(dt) => dt,
        None => 1.0 / lambda_max,
    };

    let track_positions: Vec<(Vec<i64>, usize, bool)> = cfg
        .track
        .iter()
        .map(|k| {
            lattice
                .position_of(k)
                .map(|(pos, conj)| (k.clone(), pos, conj))
                .ok_or_else(|| {
                    LfpError::InvalidParameter(format!("tracked frequency {k:?} is off-lattice"))
                })
        })
        .collect::<Result<_>>()?;

    let ode = SpectralOde::new(data, kernel, data.ys().to_vec());
    let mut h: Vec<Complex64> = match h_ini {
        Some(h0) => h0.half().to_vec(),
        None => vec![Complex64::new(0.0, 0.0); n],
    };

    let mut e = vec![0.0; m];
    let mut deriv = vec![Complex64::new(0.0, 0.0); n];
    ode.residual(&h, &mut e);
    let r0 = e.iter().map(|&v| v * v).sum::<f64>().sqrt();
    let scale = DVector::from_column_slice(data.ys())
        .norm()
        .max(r0)
        .max(f64::MIN_POSITIVE);
    let target = cfg.residual_rtol * scale;

    let record_every = cfg.record_every.max(1);
    let mut times = vec![0.0];
    let mut residual_norms = vec![r0];
    let mut tracked: Vec<(Vec<i64>, Vec<Complex64>)> = track_positions
        .iter()
        .map(|(k, pos, conj)| {
            let v = if *conj { h[*pos].conj() } else { h[*pos] };
            (k.clone(), vec![v])
        })
        .collect();

    let mut t = 0.0;
    let mut residual = r0;
    let mut growths = 0usize;
    let mut stop = FlowStop::Budget;
    let mut steps = 0usize;

    // scratch buffers for RK4
    let mut k1 = vec![Complex64::new(0.0, 0.0); n];
    let mut k2 = vec![Complex64::new(0.0, 0.0); n];
    let mut k3 = vec![Complex64::new(0.0, 0.0); n];
    let mut htmp = vec![Complex64::new(0.0, 0.0); n];

    if residual <= target {
        stop = FlowStop::Converged;
    } else {
        while steps < cfg.max_steps && t < cfg.t_end {
            match cfg.method {
                FlowMethod::Euler => {
                    ode.derivative(&h, &mut e, &mut deriv);
                    for (hj, dj) in h.iter_mut().zip(&deriv) {
                        *hj += dj * dt;
                    }
                }
                FlowMethod::Rk4 => {
                    ode.derivative(&h, &mut e, &mut k1);
                    stage(&h, &k1, dt / 2.0, &mut htmp);
                    ode.derivative(&htmp, &mut e, &mut k2);
                    stage(&h, &k2, dt / 2.0, &mut htmp);
                    ode.derivative(&htmp, &mut e, &mut k3);
                    stage(&h, &k3, dt, &mut htmp);
                    ode.derivative(&htmp, &mut e, &mut deriv); // deriv = k4
                    for j in 0..n {
                        h[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + deriv[j]) * (dt / 6.0);
                    }
                }
            }
            t += dt;
            steps += 1;
            ode.residual(&h, &mut e);
            let r = e.iter().map(|&v| v * v).sum::<f64>().sqrt();
            if r > residual * (1.0 + 1e-12) {
                growths += 1;
                if growths >= DIVERGENCE_PATIENCE {
                    return Err(LfpError::FlowDiverged {
                        steps: growths,
                        residual: r,
                    });
                }
            } else {
                growths = 0;
            }
            residual = r;
            let done = residual <= target;
            if steps % record_every == 0 || done {
                times.push(t);
                residual_norms.push(residual);
                for ((_, pos, conj), (_, series)) in track_positions.iter().zip(&mut tracked) {
                    series.push(if *conj { h[*pos].conj() } else { h[*pos] });
                }
            }
            if done {
                stop = FlowStop::Converged;
                break;
            }
        }
        if *times.last().unwrap() < t {
            times.push(t);
            residual_norms.push(residual);
            for ((_, pos, conj), (_, series)) in track_positions.iter().zip(&mut tracked) {
                series.push(if *conj { h[*pos].conj() } else { h[*pos] });
            }
        }
    }

    ode.residual(&h, &mut e);
    ode.derivative_from_residual(&e, &mut deriv);
    let frequency_residuals = deriv.iter().map(|d| d.norm()).collect();

    Ok(SpectralFlowTrajectory {
        times,
        residual_norms,
        tracked,
        frequency_residuals,
        final_spectrum: SpectralSolution::from_half(lattice, h, 0.0)?,
        steps,
        stop,
    })
}

/// Residual norm `|V diag(e^{-mu t}) V^T rhs| = sqrt(sum_j (e^{-mu_j t} c_j)^2)`
/// of the closed-form flow, in the eigenbasis of `P P^T`.
fn residual_at(mu: &DVector<f64>, vt_rhs: &DVector<f64>, t: f64) -> f64 {
    mu.iter()
        .zip(vt_rhs.iter())
        .map(|(&m, &c)| {
            let d = c * (-m.max(0.0) * t).exp();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[inline]
fn stage(h: &[Complex64], k: &[Complex64], w: f64, out: &mut [Complex64]) {
    for ((oj, hj), kj) in out.iter_mut().zip(h).zip(k) {
        *oj = hj + kj * w;
    }
}

fn symmetric_lambda_max(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut v = DVector::from_fn(n, |i, _| 1.0 / (i + 1) as f64).normalize();
    let mut lambda = 0.0;
    for _ in 0..60 {
        let w = a * &v;
        lambda = w.norm();
        if lambda == 0.0 {
            return f64::MIN_POSITIVE;
        }
        v = w / lambda;
    }
    lambda
}

// ---------------------------------------------------------------------------
// Per-frequency convergence table
// ---------------------------------------------------------------------------

/// Convergence record of one tracked frequency.
#[derive(Debug, Clone, Serialize)]
pub struct FrequencyConvergence {
    pub k: Vec<i64>,
    pub xi_norm: f64,
    /// First recorded time at which the distance to the reference
    /// coefficient halved; `None` when it never did.
    pub time_to_half: Option<f64>,
}

/// Builds the (frequency, time-to-half) table of a trajectory relative to a
/// reference spectrum (usually the closed-form limit), sorted by `|xi|`.
pub fn per_frequency_convergence(
    trajectory: &SpectralFlowTrajectory,
    reference: &SpectralSolution,
) -> Result<Vec<FrequencyConvergence>> {
    let lattice = reference.lattice();
    let mut rows = Vec::with_capacity(trajectory.tracked.len());
    for (k, series) in &trajectory.tracked {
        let target = reference
            .coefficient(k)
            .ok_or_else(|| LfpError::InvalidParameter(format!("{k:?} is off-lattice")))?;
        let d0 = (series[0] - target).norm();
        let time_to_half = if d0 == 0.0 {
            Some(0.0)
        } else {
            series
                .iter()
                .zip(&trajectory.times)
                .find(|(c, _)| (**c - target).norm() <= 0.5 * d0)
                .map(|(_, &t)| t)
        };
        let norm_sq: f64 = k.iter().map(|&c| (c * c) as f64).sum();
        rows.push(FrequencyConvergence {
            k: k.clone(),
            xi_norm: norm_sq.sqrt() / lattice.l_prime(),
            time_to_half,
        });
    }
    rows.sort_by(|a, b| a.xi_norm.total_cmp(&b.xi_norm));
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Three-route equivalence
// ---------------------------------------------------------------------------

/// Configuration for [`equivalence_report`].
#[derive(Debug, Clone)]
pub struct EquivalenceConfig {
    /// Decreasing ridge parameters; the last one is compared against the
    /// other routes.
    pub ridge_eps: Vec<f64>,
    pub flow: SpectralFlowConfig,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        Self {
            ridge_eps: vec![1e-6, 1e-7, 1e-8],
            flow: SpectralFlowConfig::default(),
        }
    }
}

/// Pairwise distances between the three routes to the same limit object.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    /// Relative L2 distance: integrated flow vs smallest-eps ridge solve.
    pub flow_vs_ridge: f64,
    /// Relative L2 distance: integrated flow vs weighted closed form.
    pub flow_vs_closed: f64,
    /// Relative L2 distance: smallest-eps ridge solve vs closed form.
    pub ridge_vs_closed: f64,
    /// `(eps, max interpolation residual)` along the ridge sequence.
    pub ridge_path: Vec<(f64, f64)>,
    pub flow_converged: bool,
    pub flow_residual: f64,
    /// Max interpolation residual of the closed-form route.
    pub closed_residual: f64,
}

impl EquivalenceReport {
    /// Largest pairwise distance, the quantity acceptance thresholds bind.
    pub fn max_distance(&self) -> f64 {
        self.flow_vs_ridge
            .max(self.flow_vs_closed)
            .max(self.ridge_vs_closed)
    }
}

/// Weighted-coordinate constraint matrix: row `i` holds
/// `sqrt(2 c(k)) * [cos, sin](2 pi k . x_i / l')` over the half lattice.
/// In these coordinates the weighted norm is Euclidean, so the
/// finite-dimensional minimum-norm formula applies verbatim.
pub fn weighted_feature_matrix(data: &Dataset, kernel: &LfpKernel) -> DMatrix<f64> {
    let lattice = kernel.lattice();
    let n = lattice.len_half();
    let mut p = DMatrix::zeros(data.len(), 2 * n);
    for i in 0..data.len() {
        let table = lattice.phase_table(data.x(i));
        for (j, k) in lattice.half_iter() {
            let w = (2.0 * kernel.weights_half()[j]).sqrt();
            let ph = table.phase(k);
            p[(i, 2 * j)] = w * ph.re;
            p[(i, 2 * j + 1)] = w * ph.im;
        }
    }
    p
}

/// Packs a spectrum into weighted real coordinates
/// (`a = 2 Re h`, `b = -2 Im h`, scaled by `1/sqrt(2c)`).
pub fn spectrum_to_weighted(h: &SpectralSolution, kernel: &LfpKernel) -> DVector<f64> {
    let n = h.half().len();
    let mut u = DVector::zeros(2 * n);
    for (j, c) in h.half().iter().enumerate() {
        let w = (2.0 * kernel.weights_half()[j]).sqrt();
        u[2 * j] = 2.0 * c.re / w;
        u[2 * j + 1] = -2.0 * c.im / w;
    }
    u
}

/// Inverse of [`spectrum_to_weighted`] (zero intercept).
pub fn weighted_to_spectrum(u: &DVector<f64>, kernel: &LfpKernel) -> Result<SpectralSolution> {
    let n = kernel.lattice().len_half();
    let mut half = vec![Complex64::new(0.0, 0.0); n];
    for (j, h) in half.iter_mut().enumerate() {
        let w = (2.0 * kernel.weights_half()[j]).sqrt();
        let a = w * u[2 * j];
        let b = w * u[2 * j + 1];
        *h = Complex64::new(a / 2.0, -b / 2.0);
    }
    SpectralSolution::from_half(Arc::clone(kernel.lattice()), half, 0.0)
}

/// Builds the interpolation constraints of an instance as a
/// [`LinearFlowProblem`] in weighted coordinates (no intercept).
pub fn weighted_problem(
    data: &Dataset,
    kernel: &LfpKernel,
    h_ini: Option<&SpectralSolution>,
) -> Result<LinearFlowProblem> {
    let p = weighted_feature_matrix(data, kernel);
    let u_ini = match h_ini {
        Some(h0) => spectrum_to_weighted(h0, kernel),
        None => DVector::zeros(p.ncols()),
    };
    LinearFlowProblem::new(p, DVector::from_column_slice(data.ys()), u_ini)
}

/// Runs flow integration, a vanishing-eps ridge sequence (no intercept) and
/// the weighted-feature closed form on the same instance and reports their
/// pairwise relative distances. All routes start from the same `h_ini`.
pub fn equivalence_report(
    data: &Dataset,
    kernel: &LfpKernel,
    h_ini: Option<&SpectralSolution>,
    cfg: &EquivalenceConfig,
) -> Result<EquivalenceReport> {
    if cfg.ridge_eps.is_empty() {
        return Err(LfpError::InvalidParameter(
            "ridge sequence must contain at least one epsilon".into(),
        ));
    }

    // Route 1: time integration of the per-frequency dynamics.
    let trajectory = integrate_spectral_flow(data, kernel, h_ini, &cfg.flow)?;
    let flow_spectrum = &trajectory.final_spectrum;

    // Route 2: ridge sequence with decreasing eps.
    let mut ridge_path = Vec::with_capacity(cfg.ridge_eps.len());
    let mut ridge_spectrum = None;
    for &eps in &cfg.ridge_eps {
        let solve = solve_lfp(
            data,
            kernel,
            h_ini,
            &RidgeConfig {
                epsilon: eps,
                intercept: InterceptMode::None,
                ..Default::default()
            },
        )?;
        let resid = crate::solver::interpolation_residual(&solve.dual);
        ridge_path.push((eps, resid));
        ridge_spectrum = Some(solve.spectrum);
    }
    let ridge_spectrum = ridge_spectrum.expect("nonempty eps sequence");

    // Route 3: minimum-norm closed form in weighted coordinates.
    let problem = weighted_problem(data, kernel, h_ini)?;
    let u_star = problem.min_norm()?;
    let closed_spectrum = weighted_to_spectrum(&u_star, kernel)?;
    let closed_residual = (0..data.len())
        .map(|i| (closed_spectrum.evaluate(data.x(i)) - data.y(i)).abs())
        .fold(0.0, f64::max);

    Ok(EquivalenceReport {
        flow_vs_ridge: flow_spectrum.rel_l2_distance(&ridge_spectrum)?,
        flow_vs_closed: flow_spectrum.rel_l2_distance(&closed_spectrum)?,
        ridge_vs_closed: ridge_spectrum.rel_l2_distance(&closed_spectrum)?,
        ridge_path,
        flow_converged: trajectory.stop == FlowStop::Converged,
        flow_residual: *trajectory.residual_norms.last().unwrap(),
        closed_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::LfpCoefficients;
    use crate::lattice::FrequencyLattice;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn kernel(d: usize, l_prime: f64, k_max: i64, a: f64, b: f64) -> LfpKernel {
        let lattice = Arc::new(FrequencyLattice::build(d, l_prime, k_max).unwrap());
        LfpKernel::new(lattice, LfpCoefficients::new(a, b, d).unwrap()).unwrap()
    }

    #[test]
    fn min_norm_closed_form_by_hand() {
        // P = [1 1], g = [2]: from the origin the closest solution is (1,1);
        // from (1,0) it is (1.5, 0.5).
        let p = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let g = DVector::from_column_slice(&[2.0]);
        let from_zero =
            LinearFlowProblem::new(p.clone(), g.clone(), DVector::zeros(2)).unwrap();
        let u = from_zero.min_norm().unwrap();
        assert_relative_eq!(u[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(u[1], 1.0, epsilon = 1e-12);

        let from_e1 =
            LinearFlowProblem::new(p, g, DVector::from_column_slice(&[1.0, 0.0])).unwrap();
        let u = from_e1.min_norm().unwrap();
        assert_relative_eq!(u[0], 1.5, epsilon = 1e-12);
        assert_relative_eq!(u[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn rejects_rank_deficient_constraints() {
        let p = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        let err = LinearFlowProblem::new(p, DVector::zeros(2), DVector::zeros(3));
        assert!(matches!(err, Err(LfpError::RankDeficient { .. })));
    }

    #[test]
    fn unconstrained_problem_stays_at_the_initial_point() {
        let u_ini = DVector::from_column_slice(&[0.3, -0.7, 2.0]);
        let problem =
            LinearFlowProblem::new(DMatrix::zeros(0, 3), DVector::zeros(0), u_ini.clone())
                .unwrap();
        assert_eq!(problem.min_norm().unwrap(), u_ini);
        let traj = problem.integrate(&LinearFlowConfig::default()).unwrap();
        assert_eq!(traj.final_state, u_ini);
        assert_eq!(traj.stop, FlowStop::Converged);
    }

    #[test]
    fn matrix_flow_reaches_the_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let p = DMatrix::from_fn(3, 8, |_, _| rng.gen_range(-1.0..1.0));
        let g = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
        let u_ini = DVector::from_fn(8, |_, _| rng.gen_range(-0.5..0.5));
        let problem = LinearFlowProblem::new(p, g, u_ini).unwrap();
        let expected = problem.min_norm().unwrap();
        let cfg = LinearFlowConfig {
            t_end: 2000.0,
            ..Default::default()
        };
        let traj = problem.integrate(&cfg).unwrap();
        assert!(
            (traj.final_state - &expected).norm() < 1e-6 * expected.norm().max(1.0),
            "flow must land on the minimum-distance solution"
        );
        // residuals recorded along the way never increase
        for w in traj.residuals.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn closed_form_state_matches_time_integration() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let p = DMatrix::from_fn(3, 8, |_, _| rng.gen_range(-1.0..1.0));
        let g = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
        let u_ini = DVector::from_fn(8, |_, _| rng.gen_range(-0.5..0.5));
        let problem = LinearFlowProblem::new(p, g, u_ini).unwrap();
        let cfg = LinearFlowConfig {
            dt: Some(1e-3),
            t_end: 0.8,
            method: FlowMethod::Rk4,
            record_every: 1_000_000,
        };
        let traj = problem.integrate(&cfg).unwrap();
        let t_final = *traj.times.last().unwrap();
        let closed = problem.solution_at(t_final).unwrap();
        assert!(
            (&closed - &traj.final_state).norm() < 1e-8,
            "closed form drifted from the integrator by {}",
            (closed - traj.final_state).norm()
        );
    }

    #[test]
    fn closed_form_state_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = DMatrix::from_fn(4, 9, |_, _| rng.gen_range(-1.0..1.0));
        let g = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0));
        let u_ini = DVector::from_fn(9, |_, _| rng.gen_range(-0.5..0.5));
        let problem = LinearFlowProblem::new(p, g, u_ini.clone()).unwrap();
        assert_eq!(problem.solution_at(0.0).unwrap(), u_ini);
        let limit = problem.solution_at(f64::INFINITY).unwrap();
        let min_norm = problem.min_norm().unwrap();
        assert!((&limit - &min_norm).norm() < 1e-10 * min_norm.norm().max(1.0));
        assert!(problem.solution_at(-1.0).is_err());
    }

    #[test]
    fn residual_norm_tracks_the_state_and_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let p = DMatrix::from_fn(3, 7, |_, _| rng.gen_range(-1.0..1.0));
        let g = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
        let problem = LinearFlowProblem::new(p.clone(), g.clone(), DVector::zeros(7)).unwrap();

        // residual_norm_at agrees with the residual of the materialized state
        let t = 0.7;
        let direct = (&g - &p * problem.solution_at(t).unwrap()).norm();
        assert_relative_eq!(
            problem.residual_norm_at(t).unwrap(),
            direct,
            epsilon = 1e-12
        );

        // time_for_residual is the inverse of residual_norm_at
        let r0 = problem.residual_norm_at(0.0).unwrap();
        let target = 0.3 * r0;
        let t_hat = problem.time_for_residual(target).unwrap();
        assert_relative_eq!(
            problem.residual_norm_at(t_hat).unwrap(),
            target,
            max_relative = 1e-9
        );

        // edge cases: already-met targets and non-positive targets
        assert_eq!(problem.time_for_residual(r0 * 2.0).unwrap(), 0.0);
        assert_eq!(problem.time_for_residual(0.0).unwrap(), f64::INFINITY);
        assert!(problem.time_for_residual(f64::NAN).is_err());
    }

    #[test]
    fn oversized_steps_are_rejected() {
        let p = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let problem =
            LinearFlowProblem::new(p, DVector::from_column_slice(&[1.0]), DVector::zeros(2))
                .unwrap();
        // lambda_max(P P^T) = 2, so dt must stay below 1
        let cfg = LinearFlowConfig {
            dt: Some(1.5),
            ..Default::default()
        };
        assert!(matches!(
            problem.integrate(&cfg),
            Err(LfpError::StepSize { .. })
        ));

        let kern = kernel(1, 1.0, 2, 1.0, 0.0);
        let data = Dataset::new(1, vec![0.0], vec![1.0]).unwrap();
        let cfg = SpectralFlowConfig {
            dt: Some(1e3),
            ..Default::default()
        };
        assert!(matches!(
            integrate_spectral_flow(&data, &kern, None, &cfg),
            Err(LfpError::StepSize { .. })
        ));
    }

    #[test]
    fn positive_gram_spectra_match_between_primal_and_dual() {
        // the nonzero eigenvalues of P P^T and P^T P coincide
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = DMatrix::from_fn(4, 7, |_, _| rng.gen_range(-1.0..1.0));
        let mut outer: Vec<f64> = nalgebra::SymmetricEigen::new(&p * p.transpose())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        let mut inner: Vec<f64> = nalgebra::SymmetricEigen::new(p.transpose() * &p)
            .eigenvalues
            .iter()
            .copied()
            .filter(|&l| l > 1e-10)
            .collect();
        outer.sort_by(f64::total_cmp);
        inner.sort_by(f64::total_cmp);
        assert_eq!(outer.len(), inner.len());
        for (a, b) in outer.iter().zip(&inner) {
            assert_relative_eq!(a, b, max_relative = 1e-8, epsilon = 1e-10);
        }
    }

    #[test]
    fn scalar_spectral_flow_matches_the_exponential_solution() {
        // One sample at x=0 with y=1 on the lattice {-1, 1} with c(1) = 1:
        // h(0, t) = 1 - exp(-2 t).
        let kern = kernel(1, 1.0, 2, 1.0, 0.0);
        let data = Dataset::new(1, vec![0.0], vec![1.0]).unwrap();
        for (method, dt, tol) in [
            (FlowMethod::Euler, 1e-3, 2e-3),
            (FlowMethod::Rk4, 1e-2, 1e-7),
        ] {
            let cfg = SpectralFlowConfig {
                dt: Some(dt),
                t_end: 1.0,
                max_steps: 10_000,
                residual_rtol: 1e-300, // run out the clock
                method,
                record_every: 1_000_000,
                track: vec![],
            };
            let traj = integrate_spectral_flow(&data, &kern, None, &cfg).unwrap();
            let h_at_zero = traj.final_spectrum.evaluate(&[0.0]);
            let exact = 1.0 - (-2.0f64).exp();
            assert!(
                (h_at_zero - exact).abs() < tol,
                "{method:?} at dt={dt}: got {h_at_zero}, want {exact}"
            );
        }
    }

    #[test]
    fn lower_frequencies_halve_their_error_first() {
        let kern = kernel(1, 1.0, 12, 1.0, 1.0);
        // target carries equal-mass components at v=1 and v=8
        let lattice = Arc::clone(kern.lattice());
        let s1 = SpectralSolution::sine(Arc::clone(&lattice), 1, 1.0).unwrap();
        let s8 = SpectralSolution::sine(Arc::clone(&lattice), 8, 1.0).unwrap();
        let target = s1.try_add(&s8).unwrap();
        // 17 samples keep modes 1 and 8 in distinct alias classes of the
        // sample grid, so their errors decay at genuinely different rates
        let xs: Vec<f64> = (0..17).map(|i| i as f64 / 17.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| target.evaluate(&[x])).collect();
        let data = Dataset::new(1, xs, ys).unwrap();
        let cfg = SpectralFlowConfig {
            record_every: 1,
            track: vec![vec![1], vec![8]],
            residual_rtol: 1e-10,
            ..Default::default()
        };
        let traj = integrate_spectral_flow(&data, &kern, None, &cfg).unwrap();
        let reference = traj.final_spectrum.clone();
        let rows = per_frequency_convergence(&traj, &reference).unwrap();
        assert_eq!(rows.len(), 2);
        assert_relative_eq!(rows[0].xi_norm, 1.0);
        assert_relative_eq!(rows[1].xi_norm, 8.0);
        let t1 = rows[0].time_to_half.expect("low mode must converge");
        let t8 = rows[1].time_to_half.expect("high mode must converge");
        assert!(
            t1 < t8,
            "low-frequency error must halve first (t1={t1}, t8={t8})"
        );
    }

    #[test]
    fn three_routes_agree_on_a_small_instance() {
        let kern = kernel(1, 2.0, 12, 1.0, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let xs: Vec<f64> = (0..5).map(|i| -0.8 + 0.4 * i as f64).collect();
        let ys: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let data = Dataset::new(1, xs, ys).unwrap();
        let report = equivalence_report(&data, &kern, None, &EquivalenceConfig::default()).unwrap();
        assert!(report.flow_converged, "flow must converge on a tame instance");
        assert!(
            report.max_distance() < 1e-5,
            "routes disagree: {report:?}"
        );
        // the ridge residual path shrinks with eps
        for w in report.ridge_path.windows(2) {
            assert!(w[1].1 <= w[0].1 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn equivalence_holds_from_a_nonzero_start() {
        let kern = kernel(1, 1.0, 8, 0.8, 0.4);
        let h0 = SpectralSolution::sine(Arc::clone(kern.lattice()), 3, 0.7).unwrap();
        let data = Dataset::new(1, vec![0.1, 0.35, 0.6, 0.85], vec![0.5, -0.2, 0.3, 0.1]).unwrap();
        let report =
            equivalence_report(&data, &kern, Some(&h0), &EquivalenceConfig::default()).unwrap();
        assert!(report.flow_converged);
        assert!(report.max_distance() < 1e-5, "{report:?}");
    }
}
