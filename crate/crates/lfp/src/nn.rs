//! Two-layer ReLU networks trained from scratch.
//!
//! The parameterizations mirror the two conventions used throughout the
//! experiments:
//!
//! * general form: `h(x) = sum_i w_i relu(r_i . x - |r_i| l_i)` — the bias
//!   is a signed distance of the kink hyperplane from the origin;
//! * 1-d form: `h(x) = sum_i w_i relu(r_i (x - l_i))` — `l_i` is the kink
//!   position itself.
//!
//! The two coincide for `r_i > 0` in one dimension and differ otherwise.
//! ReLU's derivative at zero is taken to be 0, and a zero input weight
//! vector contributes zero gradient (subgradient convention).
//!
//! Forward evaluation always sums neurons left to right: together with the
//! interleaved antisymmetric doubling in [`TwoLayerNet::apply_asi`] this
//! makes the initial output exactly zero (each `+/-` pair cancels bitwise),
//! and keeps results reproducible across runs.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::coeff::LfpCoefficients;
use crate::dataset::Dataset;
use crate::error::{LfpError, Result};

/// Which parameterization a network uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetForm {
    /// `w relu(r . x - |r| l)`, any dimension.
    GeneralD,
    /// `w relu(r (x - l))`, one dimension only.
    OneD,
}

/// Distribution of one parameter tensor at initialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamDist {
    Uniform { lo: f64, hi: f64 },
    Normal { std: f64 },
    /// Normal with std `sqrt(2 / (fan_in + fan_out))`; defined for the
    /// weight tensors only, not for kink positions.
    XavierNormal,
}

/// Initialization spec for the three parameter tensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub w: ParamDist,
    pub r: ParamDist,
    pub l: ParamDist,
}

/// A dense two-layer ReLU network with scalar output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLayerNet {
    d: usize,
    form: NetForm,
    w: Vec<f64>,
    /// Input weights, `n x d` row-major.
    r: Vec<f64>,
    l: Vec<f64>,
}

fn sample(
    rng: &mut ChaCha8Rng,
    dist: ParamDist,
    count: usize,
    fans: Option<(usize, usize)>,
    tensor: &str,
) -> Result<Vec<f64>> {
    match dist {
        ParamDist::Uniform { lo, hi } => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(LfpError::InvalidParameter(format!(
                    "uniform bounds for {tensor} must satisfy lo < hi, got [{lo}, {hi}]"
                )));
            }
            let u = Uniform::new(lo, hi);
            Ok((0..count).map(|_| rng.sample(u)).collect())
        }
        ParamDist::Normal { std } => {
            if !(std.is_finite() && std > 0.0) {
                return Err(LfpError::InvalidParameter(format!(
                    "normal std for {tensor} must be positive, got {std}"
                )));
            }
            let n = Normal::new(0.0, std).expect("validated std");
            Ok((0..count).map(|_| rng.sample(n)).collect())
        }
        ParamDist::XavierNormal => {
            let (fan_in, fan_out) = fans.ok_or_else(|| {
                LfpError::InvalidParameter(format!(
                    "xavier_normal is undefined for {tensor}: kink positions have no fan-in/out"
                ))
            })?;
            let std = (2.0 / (fan_in + fan_out) as f64).sqrt();
            let n = Normal::new(0.0, std).expect("positive std");
            Ok((0..count).map(|_| rng.sample(n)).collect())
        }
    }
}

impl TwoLayerNet {
    /// Draws a fresh network. Sampling order is fixed (`w`, then `r`
    /// row-major, then `l`) from a ChaCha stream, so a seed pins the
    /// network bit-for-bit.
    pub fn init(d: usize, n: usize, form: NetForm, spec: &InitSpec, seed: u64) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(LfpError::InvalidParameter(
                "network needs d >= 1 and at least one neuron".into(),
            ));
        }
        if form == NetForm::OneD && d != 1 {
            return Err(LfpError::InvalidParameter(format!(
                "the 1-d parameterization requires d = 1, got d = {d}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = sample(&mut rng, spec.w, n, Some((n, 1)), "w")?;
        let r = sample(&mut rng, spec.r, n * d, Some((d, n)), "r")?;
        let l = sample(&mut rng, spec.l, n, None, "l")?;
        Ok(Self { d, form, w, r, l })
    }

    /// Wraps explicit parameters (mostly for tests and checkpoints).
    pub fn from_parts(d: usize, form: NetForm, w: Vec<f64>, r: Vec<f64>, l: Vec<f64>) -> Result<Self> {
        if d == 0 || w.is_empty() {
            return Err(LfpError::InvalidParameter(
                "network needs d >= 1 and at least one neuron".into(),
            ));
        }
        if form == NetForm::OneD && d != 1 {
            return Err(LfpError::InvalidParameter(
                "the 1-d parameterization requires d = 1".into(),
            ));
        }
        if r.len() != w.len() * d || l.len() != w.len() {
            return Err(LfpError::DimensionMismatch {
                expected: w.len() * d,
                got: r.len(),
            });
        }
        Ok(Self { d, form, w, r, l })
    }

    /// Antisymmetric doubling: every neuron is duplicated with a negated
    /// output weight, interleaved as `[n_0, -n_0, n_1, -n_1, ...]`. The
    /// output becomes exactly zero while the gradient generically is not,
    /// and the decay statistics `(A, B)` are untouched (each `|r|, |w|`
    /// appears twice).
    pub fn apply_asi(&self) -> Self {
        let n = self.width();
        let mut w = Vec::with_capacity(2 * n);
        let mut r = Vec::with_capacity(2 * n * self.d);
        let mut l = Vec::with_capacity(2 * n);
        for i in 0..n {
            w.push(self.w[i]);
            w.push(-self.w[i]);
            for _ in 0..2 {
                r.extend_from_slice(&self.r[i * self.d..(i + 1) * self.d]);
                l.push(self.l[i]);
            }
        }
        Self {
            d: self.d,
            form: self.form,
            w,
            r,
            l,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn form(&self) -> NetForm {
        self.form
    }

    /// Number of hidden neurons.
    pub fn width(&self) -> usize {
        self.w.len()
    }

    pub fn param_count(&self) -> usize {
        self.w.len() * (self.d + 2)
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn l(&self) -> &[f64] {
        &self.l
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [f64], &mut [f64], &mut [f64]) {
        (&mut self.w, &mut self.r, &mut self.l)
    }

    /// The decay coefficients `(A, B)` this initialization induces.
    pub fn lfp_coefficients(&self) -> Result<LfpCoefficients> {
        LfpCoefficients::from_parameters(&self.w, &self.r, self.d)
    }

    /// Evaluates the network at one point.
    pub fn forward(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.d, "input dimension mismatch");
        let n = self.width();
        let mut acc = 0.0;
        match (self.form, self.d) {
            (NetForm::OneD, _) => {
                let xv = x[0];
                for i in 0..n {
                    let z = self.r[i] * (xv - self.l[i]);
                    acc += self.w[i] * z.max(0.0);
                }
            }
            (NetForm::GeneralD, 1) => {
                let xv = x[0];
                for i in 0..n {
                    let ri = self.r[i];
                    let z = ri * xv - ri.abs() * self.l[i];
                    acc += self.w[i] * z.max(0.0);
                }
            }
            (NetForm::GeneralD, _) => {
                for i in 0..n {
                    let ri = &self.r[i * self.d..(i + 1) * self.d];
                    let mut dot = 0.0;
                    let mut nrm = 0.0;
                    for (&rj, &xj) in ri.iter().zip(x) {
                        dot += rj * xj;
                        nrm += rj * rj;
                    }
                    let z = dot - nrm.sqrt() * self.l[i];
                    acc += self.w[i] * z.max(0.0);
                }
            }
        }
        acc
    }

    /// Evaluates at every row of a flattened point list.
    pub fn forward_flat(&self, xs: &[f64]) -> Result<Vec<f64>> {
        if xs.len() % self.d != 0 {
            return Err(LfpError::DimensionMismatch {
                expected: self.d,
                got: xs.len(),
            });
        }
        Ok(xs.chunks_exact(self.d).map(|x| self.forward(x)).collect())
    }

    /// Half-mean-square training loss `(1/2M) sum_i (h(x_i) - y_i)^2`.
    pub fn loss(&self, data: &Dataset) -> Result<f64> {
        if data.dim() != self.d {
            return Err(LfpError::DimensionMismatch {
                expected: self.d,
                got: data.dim(),
            });
        }
        let mut acc = 0.0;
        for i in 0..data.len() {
            let e = self.forward(data.x(i)) - data.y(i);
            acc += e * e;
        }
        Ok(acc / (2.0 * data.len() as f64))
    }

    /// Loss and its full gradient in one pass pair.
    pub fn loss_and_grad(&self, data: &Dataset) -> Result<(f64, Gradients)> {
        if data.dim() != self.d {
            return Err(LfpError::DimensionMismatch {
                expected: self.d,
                got: data.dim(),
            });
        }
        let n = self.width();
        let m = data.len();
        let mf = m as f64;
        let xs = data.xs();

        // forward pass: per-sample errors
        let mut e = Vec::with_capacity(m);
        let mut loss = 0.0;
        for i in 0..m {
            let err = self.forward(data.x(i)) - data.y(i);
            loss += err * err;
            e.push(err / mf);
        }
        loss /= 2.0 * mf;

        let mut grad = Gradients {
            w: vec![0.0; n],
            r: vec![0.0; n * self.d],
            l: vec![0.0; n],
        };

        // backward pass: neurons outer so per-neuron accumulators stay in
        // registers; `e` already carries the 1/M factor
        match (self.form, self.d) {
            (NetForm::OneD, _) => {
                for i in 0..n {
                    let (wi, ri, li) = (self.w[i], self.r[i], self.l[i]);
                    let (mut gw, mut gr, mut gl) = (0.0, 0.0, 0.0);
                    for (em, &xm) in e.iter().zip(xs) {
                        let u = xm - li;
                        let z = ri * u;
                        if z > 0.0 {
                            gw += em * z;
                            let s = em * wi;
                            gr += s * u;
                            gl -= s * ri;
                        }
                    }
                    grad.w[i] = gw;
                    grad.r[i] = gr;
                    grad.l[i] = gl;
                }
            }
            (NetForm::GeneralD, 1) => {
                for i in 0..n {
                    let (wi, ri, li) = (self.w[i], self.r[i], self.l[i]);
                    let rn = ri.abs();
                    let sign = if ri > 0.0 {
                        1.0
                    } else if ri < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    let (mut gw, mut gr, mut gl) = (0.0, 0.0, 0.0);
                    for (em, &xm) in e.iter().zip(xs) {
                        let z = ri * xm - rn * li;
                        if z > 0.0 {
                            gw += em * z;
                            let s = em * wi;
                            gr += s * (xm - li * sign);
                            gl -= s * rn;
                        }
                    }
                    grad.w[i] = gw;
                    grad.r[i] = gr;
                    grad.l[i] = gl;
                }
            }
            (NetForm::GeneralD, d) => {
                for i in 0..n {
                    let (wi, li) = (self.w[i], self.l[i]);
                    let ri = &self.r[i * d..(i + 1) * d];
                    let rn = ri.iter().map(|&c| c * c).sum::<f64>().sqrt();
                    // l r / |r|, with the zero-vector subgradient convention
                    let q = if rn > 0.0 { li / rn } else { 0.0 };
                    let (mut gw, mut gl) = (0.0, 0.0);
                    let gr = &mut grad.r[i * d..(i + 1) * d];
                    for (im, em) in e.iter().enumerate() {
                        let xm = &xs[im * d..(im + 1) * d];
                        let mut dot = 0.0;
                        for (&rj, &xj) in ri.iter().zip(xm) {
                            dot += rj * xj;
                        }
                        let z = dot - rn * li;
                        if z > 0.0 {
                            gw += em * z;
                            let s = em * wi;
                            for ((grj, &rj), &xj) in gr.iter_mut().zip(ri).zip(xm) {
                                *grj += s * (xj - q * rj);
                            }
                            gl -= s * rn;
                        }
                    }
                    grad.w[i] = gw;
                    grad.l[i] = gl;
                }
            }
        }
        Ok((loss, grad))
    }

    /// Serializes parameters as JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Restores a network from [`to_json`](Self::to_json) output.
    pub fn from_json(text: &str) -> Result<Self> {
        let net: Self = serde_json::from_str(text)?;
        Self::from_parts(net.d, net.form, net.w, net.r, net.l)
    }
}

/// Full gradient of the training loss, shaped like the parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub w: Vec<f64>,
    pub r: Vec<f64>,
    pub l: Vec<f64>,
}

impl Gradients {
    /// Largest absolute entry across all tensors.
    pub fn max_abs(&self) -> f64 {
        self.w
            .iter()
            .chain(&self.r)
            .chain(&self.l)
            .fold(0.0f64, |a, &g| a.max(g.abs()))
    }
}

/// Lp order for function-space discrepancies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpOrder {
    L1,
    L2,
}

/// Unnormalized discrepancy `( sum_i |a_i - b_i|^p )^(1/p)` between two
/// functions sampled on the same grid.
pub fn lp_discrepancy(a: &[f64], b: &[f64], p: LpOrder) -> Result<f64> {
    if a.len() != b.len() {
        return Err(LfpError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let acc = match p {
        LpOrder::L1 => a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum::<f64>(),
        LpOrder::L2 => a
            .iter()
            .zip(b)
            .map(|(&x, &y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
    };
    Ok(acc)
}
