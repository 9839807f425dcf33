//! Frequency sweep: capacity norm of sine targets versus learnability.
//!
//! For each frequency `v` the target `sin(2 pi v x)` is sampled on a uniform
//! grid, a fresh copy of one preset-initialized (and antisymmetrized) net is
//! trained on it, and the row records the analytic FP-norm of the target,
//! the train/test losses and the a priori generalization bounds. The FP-norm
//! weight comes from the net's own initial `(A, B)` statistics, shared
//! across rows because every row trains from the same initialization.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{generalization_bound, BoundInputs, BoundVariant};
use crate::error::{LfpError, Result};
use crate::lattice::FrequencyLattice;
use crate::plot::{dual_axis_plot, write_svg, PlotConfig, Series};
use crate::presets::preset;
use crate::spectrum::{fp_norm, gamma_l2_norm, SpectralSolution};
use crate::train::{train, ParamSelection, StopReason, TrainConfig};
use crate::nn::TwoLayerNet;
use crate::util::spearman;

use super::data::{gen_dataset, sine_target, GenKind};
use super::manifest::RunManifest;

/// Step budget used when the config does not override it; sized for a
/// single desk-scale run of the whole sweep.
pub const DEFAULT_SWEEP_MAX_STEPS: usize = 50_000;

/// Sweep configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub v_list: Vec<u32>,
    pub train_samples: usize,
    pub test_samples: usize,
    /// Trained width (after antisymmetric doubling; must be even).
    pub width: usize,
    pub seed: u64,
    /// Confidence parameter of the generalization bounds.
    pub delta: f64,
    pub max_steps: Option<usize>,
    pub lr: Option<f64>,
    pub stop_loss: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            v_list: (1..=10).collect(),
            train_samples: 20,
            test_samples: 500,
            width: 5000,
            seed: 1,
            delta: 0.1,
            max_steps: None,
            lr: None,
            stop_loss: None,
        }
    }
}

impl SweepConfig {
    fn validate(&self, k_max: i64) -> Result<()> {
        if self.v_list.is_empty() {
            return Err(LfpError::Config("v_list must be nonempty".into()));
        }
        for &v in &self.v_list {
            if v == 0 || i64::from(v) >= k_max {
                return Err(LfpError::Config(format!(
                    "frequency v = {v} outside the resolvable range 1..{k_max}"
                )));
            }
        }
        if self.train_samples < 2 || self.test_samples < 2 {
            return Err(LfpError::Config("need at least 2 samples per grid".into()));
        }
        if self.width < 2 || self.width % 2 != 0 {
            return Err(LfpError::Config(format!(
                "width {} is not an even count of at least 2",
                self.width
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(LfpError::Config("delta must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// One sweep row.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub v: u32,
    /// Analytic FP-norm of the target under the run's rate weight.
    pub fp_norm: f64,
    /// `fp_norm` divided by the sweep maximum.
    pub fp_norm_normalized: f64,
    pub train_loss: f64,
    /// Mean squared error against the target on the uniform test grid.
    pub test_loss: f64,
    pub bound_norm_only: f64,
    pub bound_with_sup: f64,
    pub steps: usize,
    pub stop: Option<StopReason>,
    pub error: Option<String>,
}

/// Full sweep outcome.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub a: f64,
    pub b: f64,
    pub gamma_l2: f64,
    /// Relative change of the weight norm when the lattice cut doubles;
    /// small values mean the truncation is converged.
    pub gamma_truncation_rel_change: f64,
    /// Rank correlation between FP-norm and test loss over clean rows.
    pub spearman_fp_vs_test: Option<f64>,
    pub runtime_seconds: f64,
}

/// Computes the sweep table without touching the filesystem.
pub fn fpnorm_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    let started = Instant::now();
    let p = preset("fig3_sweep")?;
    cfg.validate(p.lattice_k_max)?;
    let base = TwoLayerNet::init(p.d, cfg.width / 2, p.form, &p.init, cfg.seed)?.apply_asi();
    let coeffs = base.lfp_coefficients()?;
    let lattice = Arc::new(FrequencyLattice::build(
        p.d,
        p.lattice_l_prime,
        p.lattice_k_max,
    )?);
    let gamma_l2 = gamma_l2_norm(&lattice, &coeffs)?;
    let lattice_double = FrequencyLattice::build(p.d, p.lattice_l_prime, 2 * p.lattice_k_max)?;
    let gamma_double = gamma_l2_norm(&lattice_double, &coeffs)?;
    let gamma_truncation_rel_change = (gamma_double - gamma_l2).abs() / gamma_l2;

    let optimizer = match cfg.lr {
        Some(lr) => p.optimizer.with_lr(lr),
        None => p.optimizer,
    };
    let train_cfg = TrainConfig {
        optimizer,
        max_steps: cfg.max_steps.unwrap_or(DEFAULT_SWEEP_MAX_STEPS),
        stop_loss: Some(cfg.stop_loss.unwrap_or(p.stop_loss)),
        record_every: 2000,
        params: ParamSelection::All,
    };
    let test_xs: Vec<f64> = (0..cfg.test_samples)
        .map(|j| j as f64 / cfg.test_samples as f64)
        .collect();

    let mut rows: Vec<SweepRow> = cfg
        .v_list
        .par_iter()
        .map(|&v| {
            let sine = SpectralSolution::sine(Arc::clone(&lattice), i64::from(v), 1.0)
                .and_then(|s| fp_norm(&s, &coeffs));
            let fp = match sine {
                Ok(fp) => fp,
                Err(e) => {
                    return SweepRow {
                        v,
                        fp_norm: f64::NAN,
                        fp_norm_normalized: f64::NAN,
                        train_loss: f64::NAN,
                        test_loss: f64::NAN,
                        bound_norm_only: f64::NAN,
                        bound_with_sup: f64::NAN,
                        steps: 0,
                        stop: None,
                        error: Some(e.to_string()),
                    }
                }
            };
            let inputs = BoundInputs {
                fp_norm: fp,
                gamma_l2,
                sup_norm: Some(1.0),
                m: cfg.train_samples,
                delta: cfg.delta,
            };
            let bound_norm_only = generalization_bound(&inputs, BoundVariant::NormOnly)
                .unwrap_or(f64::NAN);
            let bound_with_sup = generalization_bound(&inputs, BoundVariant::WithSup)
                .unwrap_or(f64::NAN);
            let trained = (|| -> Result<(f64, f64, usize, StopReason)> {
                let data = gen_dataset(
                    &GenKind::Sine {
                        v,
                        m: cfg.train_samples,
                    },
                    cfg.seed,
                )?;
                let mut net = base.clone();
                let record = train(&mut net, &data, &train_cfg)?;
                let target = sine_target(v);
                let test_loss = {
                    let preds = net.forward_flat(&test_xs)?;
                    preds
                        .iter()
                        .zip(&test_xs)
                        .map(|(&p, &x)| (p - target(x)) * (p - target(x)))
                        .sum::<f64>()
                        / test_xs.len() as f64
                };
                Ok((record.final_loss, test_loss, record.steps, record.stop))
            })();
            match trained {
                Ok((train_loss, test_loss, steps, stop)) => SweepRow {
                    v,
                    fp_norm: fp,
                    fp_norm_normalized: f64::NAN,
                    train_loss,
                    test_loss,
                    bound_norm_only,
                    bound_with_sup,
                    steps,
                    stop: Some(stop),
                    error: None,
                },
                Err(e) => SweepRow {
                    v,
                    fp_norm: fp,
                    fp_norm_normalized: f64::NAN,
                    train_loss: f64::NAN,
                    test_loss: f64::NAN,
                    bound_norm_only,
                    bound_with_sup,
                    steps: 0,
                    stop: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let fp_max = rows
        .iter()
        .map(|r| r.fp_norm)
        .filter(|f| f.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    for row in &mut rows {
        row.fp_norm_normalized = row.fp_norm / fp_max;
    }
    let clean: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.error.is_none() && r.test_loss.is_finite())
        .collect();
    let spearman_fp_vs_test = spearman(
        &clean.iter().map(|r| r.fp_norm).collect::<Vec<_>>(),
        &clean.iter().map(|r| r.test_loss).collect::<Vec<_>>(),
    );

    Ok(SweepReport {
        rows,
        a: coeffs.a(),
        b: coeffs.b(),
        gamma_l2,
        gamma_truncation_rel_change,
        spearman_fp_vs_test,
        runtime_seconds: started.elapsed().as_secs_f64(),
    })
}

/// CSV header of `sweep.csv`.
pub const SWEEP_CSV_HEADER: &str =
    "v,fp_norm,fp_norm_normalized,train_loss,test_loss,bound_norm_only,bound_with_sup,steps,stop,error";

fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let stop = match r.stop {
            Some(StopReason::LossThreshold) => "loss_threshold",
            Some(StopReason::StepBudget) => "step_budget",
            None => "",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.v,
            r.fp_norm,
            r.fp_norm_normalized,
            r.train_loss,
            r.test_loss,
            r.bound_norm_only,
            r.bound_with_sup,
            r.steps,
            stop,
            r.error.as_deref().unwrap_or("").replace(',', ";")
        ));
    }
    out
}

/// Runs the sweep and writes `sweep.csv`, `sweep.svg`, `summary.json`, the
/// per-frequency training sets and a manifest into `out`.
pub fn run_sweep(cfg: &SweepConfig, out: &Path) -> Result<SweepReport> {
    let report = fpnorm_sweep(cfg)?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("sweep.csv"), sweep_csv(&report))?;

    let left: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.fp_norm_normalized.is_finite())
        .map(|r| (f64::from(r.v), r.fp_norm_normalized))
        .collect();
    let right: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.test_loss.is_finite() && r.test_loss > 0.0)
        .map(|r| (f64::from(r.v), r.test_loss.log10()))
        .collect();
    let svg = dual_axis_plot(
        &PlotConfig::new(
            "capacity norm and test error vs target frequency",
            "v",
            "normalized fp-norm",
        ),
        &[Series::line("normalized fp-norm", left)],
        &[Series::line("log10 test mse", right)],
        "log10(test mse)",
    );
    write_svg(&out.join("sweep.svg"), &svg)?;

    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    std::fs::write(out.join("summary.json"), json)?;

    let data_dir = out.join("data");
    std::fs::create_dir_all(&data_dir)?;
    let mut manifest = RunManifest::new("sweep", &[cfg.seed], cfg)?;
    for &v in &cfg.v_list {
        let kind = GenKind::Sine {
            v,
            m: cfg.train_samples,
        };
        let csv = gen_dataset(&kind, cfg.seed)?.to_csv_string();
        let name = format!("{}.csv", kind.file_stem());
        std::fs::write(data_dir.join(&name), &csv)?;
        manifest.record_dataset(&format!("data/{name}"), csv.as_bytes());
    }
    manifest.write(out)?;
    Ok(report)
}
