//! NN-vs-LFP comparison pipeline.
//!
//! For every `(width, seed)` cell: initialize a net from the preset, apply
//! antisymmetric doubling (so the initial output is exactly zero), read off
//! the rate coefficients `(A, B)` from the initial parameters, train the net,
//! and measure the L1/L2 gap between the net and the LFP model prediction on
//! a fixed test grid.
//!
//! Which model state serves as the reference is configurable. The dynamics
//! claim time equivalence only up to a multiplicative constant, so the
//! default [`LfpReference::MatchedTime`] pins the model state by training
//! progress instead of wall time: it picks the flow time whose interpolation
//! residual equals the net's achieved training loss. A run that trains to
//! interpolation is thereby measured against the minimum-norm limit itself,
//! while a budget-stopped run is measured against the model's prediction for
//! an equally-converged net — not against a limit neither has reached. The
//! gap to the long-time limit is always reported alongside
//! (`l1_limit`/`l2_limit`).
//!
//! For the width trend to isolate width, every width must also be stopped at
//! the same training progress. A width-N net moves N times faster through
//! function space at a fixed learning rate (its kernel is a sum over N
//! units), so a fixed `(lr, steps)` budget leaves narrow nets much earlier
//! in training than wide ones and the measured gap confounds width with
//! progress. The default `scale_lr_inverse_width` therefore applies the
//! preset rate at the preset's default width and scales it by
//! `default_width / width` for the rest, which equalizes per-step progress
//! across the list; runs that reach their loss threshold are unaffected.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{LfpError, Result};
use crate::flow::{weighted_problem, weighted_to_spectrum};
use crate::lattice::FrequencyLattice;
use crate::nn::{lp_discrepancy, LpOrder, TwoLayerNet};
use crate::plot::{dual_axis_plot, heatmap, line_plot, write_svg, PlotConfig, Series};
use crate::presets::{preset, Preset};
use crate::solver::{solve_lfp, InterceptMode, RidgeConfig};
use crate::solver::LfpKernel;
use crate::train::{train, ParamSelection, StopReason, TrainConfig};

use super::data::{gen_dataset, GenKind};
use super::manifest::RunManifest;

/// Where the training data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Generate { gen: GenKind, seed: u64 },
    File { path: String },
}

/// Widths above this need an explicit opt-in: they are paper-scale runs
/// that take much longer than the bundled desk-scale defaults.
pub const DESK_SCALE_WIDTH_CAP: usize = 5000;

/// Which state of the LFP dynamics a trained net is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LfpReference {
    /// The flow state whose interpolation residual equals the net's final
    /// training loss, i.e. the model prediction at the same training
    /// progress. Coincides with `Converged` when training interpolates.
    #[default]
    MatchedTime,
    /// The long-time limit (minimum-norm interpolant), regardless of how far
    /// the net actually trained.
    Converged,
}

/// Comparison pipeline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareConfig {
    pub preset: String,
    /// Trained widths (after antisymmetric doubling; must be even).
    pub widths: Vec<usize>,
    pub seeds: Vec<u64>,
    pub data: DataSource,
    /// Test grid points for d=1, or per-axis points for d=2.
    /// `None` picks 800 / 40.
    pub test_resolution: Option<usize>,
    pub max_steps: Option<usize>,
    /// Base learning rate, applying at the preset's default width;
    /// `None` keeps the preset optimizer's rate.
    pub lr: Option<f64>,
    pub stop_loss: Option<f64>,
    /// Scale each cell's learning rate by `default_width / width` so nets of
    /// every width make the same function-space progress per step (a width-N
    /// net's collective gradient is N times stronger). Without this, width
    /// comparisons at a fixed step budget confound width with training
    /// progress. Disable for literal fixed-rate runs.
    pub scale_lr_inverse_width: bool,
    pub ridge_epsilon: f64,
    /// Model state the gap is measured against.
    pub reference: LfpReference,
    /// Allows widths above [`DESK_SCALE_WIDTH_CAP`] (with a warning).
    pub paper_scale: bool,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            preset: "fig1_smooth".into(),
            widths: vec![200, 1000, 5000],
            seeds: vec![1, 2, 3, 4, 5],
            data: DataSource::Generate {
                gen: GenKind::Random1d { m: 12 },
                seed: 101,
            },
            test_resolution: None,
            max_steps: None,
            lr: None,
            stop_loss: None,
            scale_lr_inverse_width: true,
            ridge_epsilon: 1e-6,
            reference: LfpReference::default(),
            paper_scale: false,
        }
    }
}

impl CompareConfig {
    /// Desk-scale defaults for the 2-d XOR pipeline.
    pub fn xor_defaults() -> Self {
        Self {
            preset: "fig2_xor".into(),
            widths: vec![200, 1000],
            data: DataSource::Generate {
                gen: GenKind::Xor2d { a: 0.5 },
                seed: 0,
            },
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.widths.is_empty() || self.seeds.is_empty() {
            return Err(LfpError::Config(
                "compare needs at least one width and one seed".into(),
            ));
        }
        for &w in &self.widths {
            if w < 2 || w % 2 != 0 {
                return Err(LfpError::Config(format!(
                    "width {w} is not an even count of at least 2 (widths are post-doubling totals)"
                )));
            }
            if w > DESK_SCALE_WIDTH_CAP && !self.paper_scale {
                return Err(LfpError::Config(format!(
                    "width {w} exceeds the desk-scale cap {DESK_SCALE_WIDTH_CAP}; set paper_scale to opt in"
                )));
            }
        }
        if !(self.ridge_epsilon > 0.0) {
            return Err(LfpError::Config("ridge_epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// One `(width, seed)` cell.
#[derive(Debug, Clone, Serialize)]
pub struct CellOutcome {
    pub width: usize,
    pub seed: u64,
    /// Grid-mean L1 gap between the trained net and the configured reference.
    pub l1: f64,
    /// Root-grid-mean-square L2 gap against the configured reference.
    pub l2: f64,
    /// Same gaps against the long-time limit, whatever the reference.
    pub l1_limit: f64,
    pub l2_limit: f64,
    /// Flow time of the matched reference state; `None` under a converged
    /// reference, infinite when the net interpolated exactly.
    pub tau: Option<f64>,
    pub train_loss: f64,
    pub steps: usize,
    pub stop: Option<StopReason>,
    pub a: f64,
    pub b: f64,
    pub error: Option<String>,
}

/// Per-width aggregate over seeds.
#[derive(Debug, Clone, Serialize)]
pub struct WidthSummary {
    pub width: usize,
    pub mean_l1: f64,
    pub mean_l2: f64,
    pub ok_cells: usize,
    pub failed_cells: usize,
}

/// Full pipeline outcome.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub preset: String,
    pub rows: Vec<WidthSummary>,
    pub cells: Vec<CellOutcome>,
    pub runtime_seconds: f64,
}

struct PlotData {
    nn: Vec<f64>,
    lfp: Vec<f64>,
    limit: Vec<f64>,
}

fn load_data(source: &DataSource) -> Result<Dataset> {
    match source {
        DataSource::Generate { gen, seed } => gen_dataset(gen, *seed),
        DataSource::File { path } => Dataset::read_csv(Path::new(path)),
    }
}

/// Inclusive uniform grid over the domain, flattened row-major; for d=2 the
/// first coordinate varies fastest and rows go bottom-up (heatmap order).
fn build_grid(domain: &[(f64, f64)], res: usize) -> Result<Vec<f64>> {
    let lin = |(lo, hi): (f64, f64)| -> Vec<f64> {
        (0..res)
            .map(|i| lo + (hi - lo) * i as f64 / (res - 1) as f64)
            .collect()
    };
    match domain.len() {
        1 => Ok(lin(domain[0])),
        2 => {
            let xs = lin(domain[0]);
            let ys = lin(domain[1]);
            let mut grid = Vec::with_capacity(res * res * 2);
            for &y in &ys {
                for &x in &xs {
                    grid.push(x);
                    grid.push(y);
                }
            }
            Ok(grid)
        }
        d => Err(LfpError::Config(format!(
            "comparison grids support d = 1 or 2, got {d}"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cell_inner(
    p: &Preset,
    cfg: &CompareConfig,
    data: &Dataset,
    lattice: &Arc<FrequencyLattice>,
    grid: &[f64],
    width: usize,
    seed: u64,
    want_plot: bool,
) -> Result<(CellOutcome, Option<PlotData>)> {
    let mut net = TwoLayerNet::init(p.d, width / 2, p.form, &p.init, seed)?.apply_asi();
    let coeffs = net.lfp_coefficients()?;
    let (a, b) = (coeffs.a(), coeffs.b());
    let kernel = LfpKernel::new(Arc::clone(lattice), coeffs)?;

    let base_lr = cfg.lr.unwrap_or_else(|| p.optimizer.lr());
    let lr = if cfg.scale_lr_inverse_width {
        base_lr * p.default_width as f64 / width as f64
    } else {
        base_lr
    };
    let optimizer = p.optimizer.with_lr(lr);
    let train_cfg = TrainConfig {
        optimizer,
        max_steps: cfg.max_steps.unwrap_or(p.max_steps),
        stop_loss: Some(cfg.stop_loss.unwrap_or(p.stop_loss)),
        record_every: 2000,
        params: ParamSelection::All,
    };
    let record = train(&mut net, data, &train_cfg)?;
    let nn_vals = net.forward_flat(grid)?;

    // The trained net has no bias unit, so the model's long-time limit is
    // the pure minimum-norm interpolant without an intercept.
    let solve = solve_lfp(
        data,
        &kernel,
        None,
        &RidgeConfig {
            epsilon: cfg.ridge_epsilon,
            intercept: InterceptMode::None,
            ..Default::default()
        },
    )?;
    let limit_vals: Vec<f64> = grid
        .chunks(p.d)
        .map(|x| solve.spectrum.evaluate(x))
        .collect();

    let (tau, lfp_vals) = match cfg.reference {
        LfpReference::Converged => (None, limit_vals.clone()),
        LfpReference::MatchedTime => {
            let problem = weighted_problem(data, &kernel, None)?;
            // loss = |residual|^2 / (2 M) maps the achieved loss to the
            // residual norm the flow state must reproduce
            let target = (2.0 * data.len() as f64 * record.final_loss).sqrt();
            let tau = problem.time_for_residual(target)?;
            let spectrum = weighted_to_spectrum(&problem.solution_at(tau)?, &kernel)?;
            let vals = grid.chunks(p.d).map(|x| spectrum.evaluate(x)).collect();
            (Some(tau), vals)
        }
    };

    let n = nn_vals.len() as f64;
    let l1 = lp_discrepancy(&nn_vals, &lfp_vals, LpOrder::L1)? / n;
    let l2 = lp_discrepancy(&nn_vals, &lfp_vals, LpOrder::L2)? / n.sqrt();
    let l1_limit = lp_discrepancy(&nn_vals, &limit_vals, LpOrder::L1)? / n;
    let l2_limit = lp_discrepancy(&nn_vals, &limit_vals, LpOrder::L2)? / n.sqrt();
    let outcome = CellOutcome {
        width,
        seed,
        l1,
        l2,
        l1_limit,
        l2_limit,
        tau,
        train_loss: record.final_loss,
        steps: record.steps,
        stop: Some(record.stop),
        a,
        b,
        error: None,
    };
    let plot = want_plot.then_some(PlotData {
        nn: nn_vals,
        lfp: lfp_vals,
        limit: limit_vals,
    });
    Ok((outcome, plot))
}

/// Runs the full comparison and writes CSVs, plots, a JSON report and a
/// manifest into `out`. Per-cell failures are recorded in the report rather
/// than aborting the run.
pub fn run_compare(cfg: &CompareConfig, out: &Path) -> Result<ComparisonReport> {
    cfg.validate()?;
    let started = Instant::now();
    let p = preset(&cfg.preset)?;
    if cfg.paper_scale {
        eprintln!(
            "warning: paper-scale widths requested; expect runtimes far beyond the desk-scale defaults"
        );
    }
    let data = load_data(&cfg.data)?;
    if data.dim() != p.d {
        return Err(LfpError::Config(format!(
            "dataset dimension {} does not match preset {} (d = {})",
            data.dim(),
            p.name,
            p.d
        )));
    }
    let lattice = Arc::new(FrequencyLattice::build(
        p.d,
        p.lattice_l_prime,
        p.lattice_k_max,
    )?);
    let res = cfg
        .test_resolution
        .unwrap_or(if p.d == 1 { 800 } else { 40 });
    if res < 2 {
        return Err(LfpError::Config("test_resolution must be at least 2".into()));
    }
    let grid = build_grid(data.domain(), res)?;

    let cells: Vec<(usize, u64)> = cfg
        .widths
        .iter()
        .flat_map(|&w| cfg.seeds.iter().map(move |&s| (w, s)))
        .collect();
    let first_seed = cfg.seeds[0];
    let outcomes: Vec<(CellOutcome, Option<PlotData>)> = cells
        .par_iter()
        .map(|&(width, seed)| {
            cell_inner(
                &p,
                cfg,
                &data,
                &lattice,
                &grid,
                width,
                seed,
                seed == first_seed,
            )
            .unwrap_or_else(|e| {
                (
                    CellOutcome {
                        width,
                        seed,
                        l1: f64::NAN,
                        l2: f64::NAN,
                        l1_limit: f64::NAN,
                        l2_limit: f64::NAN,
                        tau: None,
                        train_loss: f64::NAN,
                        steps: 0,
                        stop: None,
                        a: f64::NAN,
                        b: f64::NAN,
                        error: Some(e.to_string()),
                    },
                    None,
                )
            })
        })
        .collect();

    let mut rows = Vec::with_capacity(cfg.widths.len());
    for &width in &cfg.widths {
        let ok: Vec<&CellOutcome> = outcomes
            .iter()
            .map(|(c, _)| c)
            .filter(|c| c.width == width && c.error.is_none())
            .collect();
        let failed = cfg.seeds.len() - ok.len();
        let mean = |f: fn(&CellOutcome) -> f64| {
            if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().map(|c| f(c)).sum::<f64>() / ok.len() as f64
            }
        };
        rows.push(WidthSummary {
            width,
            mean_l1: mean(|c| c.l1),
            mean_l2: mean(|c| c.l2),
            ok_cells: ok.len(),
            failed_cells: failed,
        });
    }

    std::fs::create_dir_all(out)?;
    let show_limit = cfg.reference == LfpReference::MatchedTime;
    write_plots(&p, &data, &grid, res, &cfg.widths, &outcomes, show_limit, out)?;

    let report = ComparisonReport {
        preset: p.name.to_string(),
        rows,
        cells: outcomes.into_iter().map(|(c, _)| c).collect(),
        runtime_seconds: started.elapsed().as_secs_f64(),
    };
    std::fs::write(out.join("compare_cells.csv"), cells_csv(&report.cells))?;
    std::fs::write(out.join("compare_widths.csv"), widths_csv(&report.rows))?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    std::fs::write(out.join("report.json"), json)?;

    let train_csv = data.to_csv_string();
    std::fs::write(out.join("train.csv"), &train_csv)?;
    let mut manifest = RunManifest::new("compare", &cfg.seeds, cfg)?;
    manifest.record_dataset("train.csv", train_csv.as_bytes());
    manifest.write(out)?;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn write_plots(
    p: &Preset,
    data: &Dataset,
    grid: &[f64],
    res: usize,
    widths: &[usize],
    outcomes: &[(CellOutcome, Option<PlotData>)],
    show_limit: bool,
    out: &Path,
) -> Result<()> {
    for &width in widths {
        let Some((_, Some(plot))) = outcomes
            .iter()
            .find(|(c, pl)| c.width == width && pl.is_some())
        else {
            continue;
        };
        if p.d == 1 {
            let xs: Vec<f64> = grid.to_vec();
            let pair = |vals: &[f64]| -> Vec<(f64, f64)> {
                xs.iter().copied().zip(vals.iter().copied()).collect()
            };
            let train_pts: Vec<(f64, f64)> =
                (0..data.len()).map(|i| (data.x(i)[0], data.y(i))).collect();
            let mut series = vec![
                Series::line("lfp prediction", pair(&plot.lfp)),
                Series::line("trained net", pair(&plot.nn)),
            ];
            if show_limit {
                series.push(Series::line("lfp limit", pair(&plot.limit)));
            }
            series.push(Series::scatter("training samples", train_pts));
            let svg = line_plot(
                &PlotConfig::new(
                    format!("{} width {width}", p.name),
                    "x",
                    "output",
                ),
                &series,
            );
            write_svg(&out.join(format!("overlay_w{width}.svg")), &svg)?;
        } else {
            let extent = (data.domain()[0], data.domain()[1]);
            for (name, vals) in [("nn", &plot.nn), ("lfp", &plot.lfp)] {
                let svg = heatmap(
                    &PlotConfig::new(
                        format!("{} {name} width {width}", p.name),
                        "x1",
                        "x2",
                    ),
                    res,
                    res,
                    extent,
                    vals,
                );
                write_svg(&out.join(format!("heatmap_{name}_w{width}.svg")), &svg)?;
            }
            let pts: Vec<(f64, f64)> = plot
                .lfp
                .iter()
                .zip(&plot.nn)
                .map(|(&l, &n)| (l, n))
                .collect();
            let lo = pts
                .iter()
                .flat_map(|&(a, b)| [a, b])
                .fold(f64::INFINITY, f64::min);
            let hi = pts
                .iter()
                .flat_map(|&(a, b)| [a, b])
                .fold(f64::NEG_INFINITY, f64::max);
            let svg = line_plot(
                &PlotConfig::new(
                    format!("{} width {width}", p.name),
                    "lfp solution",
                    "trained net",
                ),
                &[
                    Series::line("identity", vec![(lo, lo), (hi, hi)]),
                    Series::scatter("test points", pts),
                ],
            );
            write_svg(&out.join(format!("scatter_w{width}.svg")), &svg)?;
        }
    }
    // width-trend figure: mean gaps per width on a shared axis
    let mut l1_pts = Vec::new();
    let mut l2_pts = Vec::new();
    for &width in widths {
        let ok: Vec<&CellOutcome> = outcomes
            .iter()
            .map(|(c, _)| c)
            .filter(|c| c.width == width && c.error.is_none())
            .collect();
        if !ok.is_empty() {
            let n = ok.len() as f64;
            l1_pts.push((
                width as f64,
                ok.iter().map(|c| c.l1).sum::<f64>() / n,
            ));
            l2_pts.push((
                width as f64,
                ok.iter().map(|c| c.l2).sum::<f64>() / n,
            ));
        }
    }
    let svg = dual_axis_plot(
        &PlotConfig::new(format!("{} gap vs width", p.name), "width", "mean L1 gap"),
        &[Series::line("mean L1", l1_pts)],
        &[Series::line("mean L2", l2_pts)],
        "mean L2 gap",
    );
    write_svg(&out.join("gap_vs_width.svg"), &svg)?;
    Ok(())
}

fn stop_label(stop: Option<StopReason>) -> &'static str {
    match stop {
        Some(StopReason::LossThreshold) => "loss_threshold",
        Some(StopReason::StepBudget) => "step_budget",
        None => "",
    }
}

fn cells_csv(cells: &[CellOutcome]) -> String {
    let mut out = String::from(
        "width,seed,l1,l2,l1_limit,l2_limit,tau,train_loss,steps,stop,a,b,error\n",
    );
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            c.width,
            c.seed,
            c.l1,
            c.l2,
            c.l1_limit,
            c.l2_limit,
            c.tau.map(|t| t.to_string()).unwrap_or_default(),
            c.train_loss,
            c.steps,
            stop_label(c.stop),
            c.a,
            c.b,
            c.error.as_deref().unwrap_or("").replace(',', ";")
        ));
    }
    out
}

fn widths_csv(rows: &[WidthSummary]) -> String {
    let mut out = String::from("width,mean_l1,mean_l2,ok_cells,failed_cells\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.width, r.mean_l1, r.mean_l2, r.ok_cells, r.failed_cells
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_dir(tag: &str) -> std::path::PathBuf {
        std::env::temp_dir().join(format!("lfp-compare-{tag}-{}", std::process::id()))
    }

    fn tiny_cfg() -> CompareConfig {
        CompareConfig {
            widths: vec![8, 16],
            seeds: vec![1, 2],
            test_resolution: Some(64),
            max_steps: Some(200),
            ..Default::default()
        }
    }

    #[test]
    fn pipeline_produces_rows_cells_and_artifacts() {
        let dir = tiny_dir("basic");
        let report = run_compare(&tiny_cfg(), &dir).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.cells.len(), 4);
        assert!(report.cells.iter().all(|c| c.error.is_none()));
        for name in [
            "compare_cells.csv",
            "compare_widths.csv",
            "report.json",
            "train.csv",
            "manifest.json",
            "overlay_w8.svg",
            "overlay_w16.svg",
            "gap_vs_width.svg",
        ] {
            assert!(dir.join(name).exists(), "missing {name}");
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn aggregates_are_means_over_seeds() {
        let dir = tiny_dir("agg");
        let report = run_compare(&tiny_cfg(), &dir).unwrap();
        for row in &report.rows {
            let cells: Vec<&CellOutcome> = report
                .cells
                .iter()
                .filter(|c| c.width == row.width)
                .collect();
            let mean_l2 = cells.iter().map(|c| c.l2).sum::<f64>() / cells.len() as f64;
            assert!((row.mean_l2 - mean_l2).abs() < 1e-15);
            assert_eq!(row.ok_cells, cells.len());
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn csv_outputs_are_deterministic() {
        let dir_a = tiny_dir("det-a");
        let dir_b = tiny_dir("det-b");
        run_compare(&tiny_cfg(), &dir_a).unwrap();
        run_compare(&tiny_cfg(), &dir_b).unwrap();
        for name in ["compare_cells.csv", "compare_widths.csv", "train.csv"] {
            let a = std::fs::read(dir_a.join(name)).unwrap();
            let b = std::fs::read(dir_b.join(name)).unwrap();
            assert_eq!(a, b, "{name} must be byte-identical across reruns");
        }
        std::fs::remove_dir_all(&dir_a).unwrap();
        std::fs::remove_dir_all(&dir_b).unwrap();
    }

    #[test]
    fn single_width_yields_single_row() {
        let dir = tiny_dir("single");
        let cfg = CompareConfig {
            widths: vec![8],
            seeds: vec![3],
            test_resolution: Some(32),
            max_steps: Some(50),
            ..Default::default()
        };
        let report = run_compare(&cfg, &dir).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.cells.len(), 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn xor_pipeline_emits_heatmaps_and_scatter() {
        let dir = tiny_dir("xor");
        let cfg = CompareConfig {
            widths: vec![8],
            seeds: vec![1],
            test_resolution: Some(10),
            max_steps: Some(50),
            ..CompareConfig::xor_defaults()
        };
        let report = run_compare(&cfg, &dir).unwrap();
        assert!(report.cells[0].error.is_none());
        for name in [
            "heatmap_nn_w8.svg",
            "heatmap_lfp_w8.svg",
            "scatter_w8.svg",
        ] {
            assert!(dir.join(name).exists(), "missing {name}");
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn config_errors_are_rejected() {
        let out = tiny_dir("cfg-err");
        let odd = CompareConfig {
            widths: vec![7],
            ..Default::default()
        };
        assert!(matches!(
            run_compare(&odd, &out),
            Err(LfpError::Config(_))
        ));
        let oversized = CompareConfig {
            widths: vec![16_000],
            ..Default::default()
        };
        assert!(matches!(
            run_compare(&oversized, &out),
            Err(LfpError::Config(_))
        ));
        let empty = CompareConfig {
            seeds: vec![],
            ..Default::default()
        };
        assert!(matches!(
            run_compare(&empty, &out),
            Err(LfpError::Config(_))
        ));
    }
}
