//! Full-batch training loops: plain gradient descent and Adam.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{LfpError, Result};
use crate::nn::TwoLayerNet;

/// First-order update rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Optimizer {
    Gd {
        lr: f64,
    },
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
}

impl Optimizer {
    pub fn gd(lr: f64) -> Self {
        Optimizer::Gd { lr }
    }

    /// Adam with the conventional moment decays and stabilizer.
    pub fn adam(lr: f64) -> Self {
        Optimizer::Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn lr(&self) -> f64 {
        match *self {
            Optimizer::Gd { lr } | Optimizer::Adam { lr, .. } => lr,
        }
    }

    /// Same rule with a different learning rate.
    pub fn with_lr(self, lr: f64) -> Self {
        match self {
            Optimizer::Gd { .. } => Optimizer::Gd { lr },
            Optimizer::Adam {
                beta1, beta2, eps, ..
            } => Optimizer::Adam {
                lr,
                beta1,
                beta2,
                eps,
            },
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Optimizer::Gd { lr } => lr.is_finite() && lr > 0.0,
            Optimizer::Adam {
                lr,
                beta1,
                beta2,
                eps,
            } => {
                lr.is_finite()
                    && lr > 0.0
                    && (0.0..1.0).contains(&beta1)
                    && (0.0..1.0).contains(&beta2)
                    && eps > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(LfpError::InvalidParameter(format!(
                "invalid optimizer settings: {self:?}"
            )))
        }
    }
}

/// Which tensors the optimizer may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamSelection {
    All,
    /// Freeze input weights and kinks; the loss becomes quadratic in `w`.
    OutputOnly,
}

/// Training loop configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub max_steps: usize,
    /// Stop once the training loss falls to this value, if set.
    pub stop_loss: Option<f64>,
    /// Loss recording cadence in steps.
    pub record_every: usize,
    pub params: ParamSelection,
}

impl TrainConfig {
    pub fn new(optimizer: Optimizer, max_steps: usize, stop_loss: Option<f64>) -> Self {
        Self {
            optimizer,
            max_steps,
            stop_loss,
            record_every: 1000,
            params: ParamSelection::All,
        }
    }
}

/// Why training stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The loss threshold was reached.
    LossThreshold,
    /// The step budget ran out first.
    StepBudget,
}

/// Loss trace and termination summary of one training run.
#[derive(Debug, Clone, Serialize)]
pub struct TrainRecord {
    /// `(step, loss)` at step 0, every `record_every` steps, and at the end.
    pub history: Vec<(usize, f64)>,
    pub final_loss: f64,
    pub steps: usize,
    pub stop: StopReason,
}

impl TrainRecord {
    /// Writes the loss trace as `step,loss` CSV.
    pub fn write_history_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "step,loss")?;
        for &(step, loss) in &self.history {
            writeln!(out, "{step},{loss}")?;
        }
        out.flush()?;
        Ok(())
    }
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    /// Running decay products `beta1^t`, `beta2^t`.
    p1: f64,
    p2: f64,
}

/// Trains `net` in place on `data`; full-batch updates, deterministic given
/// the inputs. Errors out if the loss turns non-finite or grows six orders
/// of magnitude beyond its initial value.
pub fn train(net: &mut TwoLayerNet, data: &Dataset, cfg: &TrainConfig) -> Result<TrainRecord> {
    cfg.optimizer.validate()?;
    let record_every = cfg.record_every.max(1);
    let (mut loss, mut grad) = net.loss_and_grad(data)?;
    let initial = loss;
    let blowup = 1e6 * initial.max(1e-12);

    let mut history = vec![(0usize, loss)];
    let reached = |l: f64| cfg.stop_loss.map(|s| l <= s).unwrap_or(false);
    if reached(loss) {
        return Ok(TrainRecord {
            history,
            final_loss: loss,
            steps: 0,
            stop: StopReason::LossThreshold,
        });
    }

    let total = net.param_count();
    let mut adam = match cfg.optimizer {
        Optimizer::Adam { .. } => Some(AdamState {
            m: vec![0.0; total],
            v: vec![0.0; total],
            p1: 1.0,
            p2: 1.0,
        }),
        Optimizer::Gd { .. } => None,
    };

    let mut stop = StopReason::StepBudget;
    let mut steps = 0usize;
    for step in 1..=cfg.max_steps {
        apply_update(net, &grad, &cfg.optimizer, cfg.params, adam.as_mut());
        let (l, g) = net.loss_and_grad(data)?;
        loss = l;
        grad = g;
        steps = step;
        if !loss.is_finite() || loss > blowup {
            return Err(LfpError::TrainingDiverged {
                step,
                loss,
                initial,
            });
        }
        if step % record_every == 0 {
            history.push((step, loss));
        }
        if reached(loss) {
            stop = StopReason::LossThreshold;
            break;
        }
    }
    if history.last().map(|&(s, _)| s) != Some(steps) {
        history.push((steps, loss));
    }
    Ok(TrainRecord {
        history,
        final_loss: loss,
        steps,
        stop,
    })
}

fn apply_update(
    net: &mut TwoLayerNet,
    grad: &crate::nn::Gradients,
    optimizer: &Optimizer,
    params: ParamSelection,
    adam: Option<&mut AdamState>,
) {
    let (w, r, l) = net.params_mut();
    match *optimizer {
        Optimizer::Gd { lr } => {
            gd_tensor(w, &grad.w, lr);
            if params == ParamSelection::All {
                gd_tensor(r, &grad.r, lr);
                gd_tensor(l, &grad.l, lr);
            }
        }
        Optimizer::Adam {
            lr,
            beta1,
            beta2,
            eps,
        } => {
            let state = adam.expect("adam state allocated for adam runs");
            state.p1 *= beta1;
            state.p2 *= beta2;
            let c1 = 1.0 / (1.0 - state.p1);
            let c2 = 1.0 / (1.0 - state.p2);
            let nw = w.len();
            let nr = r.len();
            adam_tensor(
                w,
                &grad.w,
                &mut state.m[..nw],
                &mut state.v[..nw],
                lr,
                beta1,
                beta2,
                eps,
                c1,
                c2,
            );
            if params == ParamSelection::All {
                adam_tensor(
                    r,
                    &grad.r,
                    &mut state.m[nw..nw + nr],
                    &mut state.v[nw..nw + nr],
                    lr,
                    beta1,
                    beta2,
                    eps,
                    c1,
                    c2,
                );
                adam_tensor(
                    l,
                    &grad.l,
                    &mut state.m[nw + nr..],
                    &mut state.v[nw + nr..],
                    lr,
                    beta1,
                    beta2,
                    eps,
                    c1,
                    c2,
                );
            }
        }
    }
}

#[inline]
fn gd_tensor(theta: &mut [f64], grad: &[f64], lr: f64) {
    for (t, &g) in theta.iter_mut().zip(grad) {
        *t -= lr * g;
    }
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn adam_tensor(
    theta: &mut [f64],
    grad: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    c1: f64,
    c2: f64,
) {
    for i in 0..theta.len() {
        let g = grad[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        theta[i] -= lr * (m[i] * c1) / ((v[i] * c2).sqrt() + eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{InitSpec, NetForm, ParamDist};
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    fn spec() -> InitSpec {
        InitSpec {
            w: ParamDist::Uniform { lo: -0.5, hi: 0.5 },
            r: ParamDist::Uniform { lo: -1.0, hi: 1.0 },
            l: ParamDist::Uniform { lo: -1.0, hi: 1.0 },
        }
    }

    fn toy_data() -> Dataset {
        Dataset::new(
            1,
            vec![-0.8, -0.3, 0.1, 0.6, 0.9],
            vec![0.5, -0.2, 0.1, 0.7, -0.4],
        )
        .unwrap()
    }

    #[test]
    fn output_only_gd_solves_the_linear_least_squares_problem() {
        // with r, l frozen the model is linear in w; GD at an admissible
        // rate must reach the least-squares optimum of the feature matrix.
        // Hand-placed kinks keep the feature Gram well conditioned so the
        // slowest mode actually converges within the step budget.
        let width = 12;
        let w0 = vec![0.1; width];
        let r0: Vec<f64> = (0..width).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let l0: Vec<f64> = (0..width).map(|j| -1.0 + 2.0 * j as f64 / 11.0).collect();
        let mut net = TwoLayerNet::from_parts(1, NetForm::OneD, w0, r0, l0).unwrap();
        let data = toy_data();
        let m = data.len();
        let features = DMatrix::from_fn(m, net.width(), |i, j| {
            (net.r()[j] * (data.x(i)[0] - net.l()[j])).max(0.0)
        });
        let y = DVector::from_column_slice(data.ys());
        let w_star = features
            .clone()
            .svd(true, true)
            .solve(&y, 1e-12)
            .expect("least squares solve");
        let best_loss = (features * w_star - &y).norm_squared() / (2.0 * m as f64);

        let cfg = TrainConfig {
            optimizer: Optimizer::gd(0.25),
            max_steps: 60_000,
            stop_loss: None,
            record_every: 10_000,
            params: ParamSelection::OutputOnly,
        };
        let record = train(&mut net, &data, &cfg).unwrap();
        assert_relative_eq!(record.final_loss, best_loss, epsilon = 1e-8, max_relative = 1e-6);
    }

    #[test]
    fn adam_reaches_the_stop_threshold_and_reports_it() {
        let mut net = TwoLayerNet::init(1, 32, NetForm::OneD, &spec(), 3)
            .unwrap()
            .apply_asi();
        let data = toy_data();
        let cfg = TrainConfig {
            optimizer: Optimizer::adam(1e-2),
            max_steps: 50_000,
            stop_loss: Some(1e-8),
            record_every: 5_000,
            params: ParamSelection::All,
        };
        let record = train(&mut net, &data, &cfg).unwrap();
        assert_eq!(record.stop, StopReason::LossThreshold);
        assert!(record.final_loss <= 1e-8);
        assert!(record.steps < 50_000);
        // history is monotone in step index and ends at the final step
        for w in record.history.windows(2) {
            assert!(w[0].0 < w[1].0);
        }
        assert_eq!(record.history.last().unwrap().0, record.steps);
    }

    #[test]
    fn oversized_gd_steps_error_out_as_divergence() {
        let mut net = TwoLayerNet::init(1, 64, NetForm::OneD, &spec(), 5).unwrap();
        let data = toy_data();
        let cfg = TrainConfig {
            optimizer: Optimizer::gd(1e6),
            max_steps: 2_000,
            stop_loss: None,
            record_every: 100,
            params: ParamSelection::All,
        };
        assert!(matches!(
            train(&mut net, &data, &cfg),
            Err(LfpError::TrainingDiverged { .. })
        ));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let mut net = TwoLayerNet::init(1, 8, NetForm::OneD, &spec(), 1).unwrap();
        let cfg = TrainConfig {
            optimizer: Optimizer::gd(1e-4),
            max_steps: 10,
            stop_loss: Some(0.0),
            record_every: 3,
            params: ParamSelection::All,
        };
        let record = train(&mut net, &toy_data(), &cfg).unwrap();
        assert_eq!(record.stop, StopReason::StepBudget);
        assert_eq!(record.steps, 10);
    }

    #[test]
    fn rejects_nonsense_optimizers() {
        let mut net = TwoLayerNet::init(1, 4, NetForm::OneD, &spec(), 0).unwrap();
        for opt in [
            Optimizer::gd(-1.0),
            Optimizer::gd(f64::NAN),
            Optimizer::Adam {
                lr: 1e-3,
                beta1: 1.0,
                beta2: 0.999,
                eps: 1e-8,
            },
        ] {
            let cfg = TrainConfig::new(opt, 10, None);
            assert!(train(&mut net, &toy_data(), &cfg).is_err());
        }
    }

    #[test]
    fn history_csv_roundtrip_shape() {
        let record = TrainRecord {
            history: vec![(0, 0.5), (10, 0.25), (13, 0.1)],
            final_loss: 0.1,
            steps: 13,
            stop: StopReason::StepBudget,
        };
        let dir = std::env::temp_dir().join("lfp_train_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("history.csv");
        record.write_history_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "step,loss\n0,0.5\n10,0.25\n13,0.1\n");
        std::fs::remove_dir_all(&dir).ok();
    }
}
