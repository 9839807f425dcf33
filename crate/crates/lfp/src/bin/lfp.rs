//! Command-line front end for the lfp library.
//!
//! Exit codes: 0 on success, 1 when a verification/acceptance check fails
//! (or a run fails mid-experiment), 2 on configuration or usage errors.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};

use lfp::experiment::compare::{run_compare, CompareConfig};
use lfp::experiment::data::{gen_dataset, GenKind};
use lfp::experiment::manifest::{sha256_hex, RunManifest};
use lfp::experiment::sweep::{run_sweep, SweepConfig};
use lfp::experiment::verify::{run_flow_verify, VerifyConfig};
use lfp::plot::{line_plot, write_svg, PlotConfig, Series, SeriesStyle};
use lfp::spectrum::fp_norm;
use lfp::train::{train, ParamSelection, TrainConfig};
use lfp::{
    preset, solve_lfp, Dataset, FrequencyLattice, InterceptMode, LfpCoefficients, LfpError,
    LfpKernel, RidgeConfig, TwoLayerNet,
};

#[derive(Parser)]
#[command(
    name = "lfp",
    version,
    about = "Spectral model of wide two-layer ReLU training: solver, flow, nets, bounds",
    after_help = "Exit codes: 0 success, 1 failed check or runtime failure, 2 config/usage error."
)]
struct Cli {
    /// JSON config file; a previous run's manifest.json is also accepted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed override (meaning depends on the subcommand)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for parallel experiment cells
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset CSV (random_1d, xor_2d, asym_2d, sine)
    GenData {
        /// One of: random_1d, xor_2d, asym_2d, sine
        #[arg(long)]
        kind: Option<String>,
        /// Sample count for random_1d / sine
        #[arg(long)]
        m: Option<usize>,
        /// Sine frequency
        #[arg(long)]
        v: Option<u32>,
        /// Corner offset for xor_2d
        #[arg(long, default_value_t = 0.5)]
        offset: f64,
    },
    /// Solve the spectral minimum-norm / ridge problem on a dataset
    Solve {
        #[arg(long)]
        data: PathBuf,
        /// Rate constant A; taken from a preset-initialized net if absent
        #[arg(long)]
        a: Option<f64>,
        /// Rate constant B; taken from a preset-initialized net if absent
        #[arg(long)]
        b: Option<f64>,
        /// Preset supplying lattice parameters (and A, B when not given)
        #[arg(long)]
        preset: Option<String>,
        /// Net width used when sampling A, B from the preset
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        l_prime: Option<f64>,
        #[arg(long)]
        k_max: Option<i64>,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        /// Intercept handling: unpenalized | none
        #[arg(long, default_value = "unpenalized")]
        intercept: String,
    },
    /// Train a two-layer net on a dataset (from-scratch full-batch loop)
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "fig1_smooth")]
        preset: String,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        stop_loss: Option<f64>,
    },
    /// Width/seed sweep comparing trained nets to the model's solution
    Compare {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, value_delimiter = ',')]
        widths: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Allow widths beyond the desk-scale cap (slow)
        #[arg(long)]
        paper_scale: bool,
    },
    /// Cross-verify flow, ridge and closed-form routes on random instances
    FlowVerify {
        #[arg(long)]
        instances: Option<usize>,
    },
    /// Frequency sweep: capacity norm, losses and bounds per target frequency
    Sweep {
        /// Comma-separated frequency list, e.g. 1,2,3
        #[arg(long, value_delimiter = ',')]
        v: Option<Vec<u32>>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Render CSV columns as an SVG line/scatter plot
    Plot {
        #[arg(long)]
        input: PathBuf,
        /// Column used for the x axis
        #[arg(long)]
        x: String,
        /// Columns plotted as series
        #[arg(long, value_delimiter = ',')]
        y: Vec<String>,
        /// line | scatter
        #[arg(long, default_value = "line")]
        style: String,
        #[arg(long)]
        title: Option<String>,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                LfpError::Config(_) | LfpError::InvalidParameter(_) => 2,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}

/// Reads a typed config from JSON; unwraps `manifest.json` files so a run
/// can be replayed directly from its provenance record.
fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> lfp::Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LfpError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| LfpError::Config(format!("invalid JSON in {}: {e}", path.display())))?;
    let value = match (value.get("command"), value.get("config")) {
        (Some(_), Some(inner)) => inner.clone(),
        _ => value,
    };
    serde_json::from_value(value)
        .map_err(|e| LfpError::Config(format!("config does not match schema: {e}")))
}

/// Global flags shared by every subcommand.
struct Common {
    config: Option<PathBuf>,
    seed: Option<u64>,
    out: PathBuf,
}

fn run(cli: Cli) -> lfp::Result<i32> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(LfpError::Config("workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| LfpError::Config(format!("cannot size worker pool: {e}")))?;
    }
    let command = cli.command;
    let cli = Common {
        config: cli.config,
        seed: cli.seed,
        out: cli.out,
    };
    match command {
        Command::GenData { kind, m, v, offset } => {
            gen_data(&cli, kind.as_deref(), m, v, offset)
        }
        Command::Solve {
            data,
            a,
            b,
            preset,
            width,
            l_prime,
            k_max,
            epsilon,
            intercept,
        } => solve(
            &cli, &data, a, b, preset.as_deref(), width, l_prime, k_max, epsilon, &intercept,
        ),
        Command::Train {
            data,
            preset,
            width,
            max_steps,
            lr,
            stop_loss,
        } => train_cmd(&cli, &data, &preset, width, max_steps, lr, stop_loss),
        Command::Compare {
            preset,
            widths,
            seeds,
            max_steps,
            paper_scale,
        } => compare_cmd(&cli, preset.as_deref(), widths, seeds, max_steps, paper_scale),
        Command::FlowVerify { instances } => flow_verify_cmd(&cli, instances),
        Command::Sweep { v, width, max_steps } => sweep_cmd(&cli, v, width, max_steps),
        Command::Plot {
            input,
            x,
            y,
            style,
            title,
        } => plot_cmd(&cli, &input, &x, &y, &style, title.as_deref()),
    }
}

fn gen_data(
    cli: &Common,
    kind: Option<&str>,
    m: Option<usize>,
    v: Option<u32>,
    offset: f64,
) -> lfp::Result<i32> {
    let kind = match &cli.config {
        Some(path) => load_config::<GenKind>(path)?,
        None => match kind {
            Some("random_1d") => GenKind::Random1d { m: m.unwrap_or(12) },
            Some("xor_2d") => GenKind::Xor2d { a: offset },
            Some("asym_2d") => GenKind::Asym2d,
            Some("sine") => GenKind::Sine {
                v: v.ok_or_else(|| LfpError::Config("sine needs --v".into()))?,
                m: m.unwrap_or(20),
            },
            Some(other) => {
                return Err(LfpError::Config(format!(
                    "unknown dataset kind {other:?}; expected random_1d, xor_2d, asym_2d or sine"
                )))
            }
            None => {
                return Err(LfpError::Config(
                    "gen-data needs --kind or --config".into(),
                ))
            }
        },
    };
    let seed = cli.seed.unwrap_or(0);
    let data = gen_dataset(&kind, seed)?;
    std::fs::create_dir_all(&cli.out)?;
    let name = format!("{}.csv", kind.file_stem());
    let csv = data.to_csv_string();
    std::fs::write(cli.out.join(&name), &csv)?;
    let mut manifest = RunManifest::new("gen-data", &[seed], &kind)?;
    manifest.record_dataset(&name, csv.as_bytes());
    manifest.write(&cli.out)?;
    println!(
        "wrote {} ({} samples, d = {})",
        cli.out.join(&name).display(),
        data.len(),
        data.dim()
    );
    Ok(0)
}

#[derive(serde::Serialize, serde::Deserialize)]
#[serde(default)]
struct SolveEcho {
    a: f64,
    b: f64,
    l_prime: f64,
    k_max: i64,
    epsilon: f64,
    intercept: String,
}

impl Default for SolveEcho {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            l_prime: 20.0,
            k_max: 2000,
            epsilon: 1e-6,
            intercept: "unpenalized".into(),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn solve(
    cli: &Common,
    data_path: &Path,
    a: Option<f64>,
    b: Option<f64>,
    preset_name: Option<&str>,
    width: Option<usize>,
    l_prime: Option<f64>,
    k_max: Option<i64>,
    epsilon: f64,
    intercept: &str,
) -> lfp::Result<i32> {
    let data = Dataset::read_csv(data_path)?;
    let p = preset_name.map(preset).transpose()?;
    let (a, b) = match (a, b, &p) {
        (Some(a), Some(b), _) => (a, b),
        (None, None, Some(p)) => {
            let width = width.unwrap_or(p.default_width);
            if width < 2 || width % 2 != 0 {
                return Err(LfpError::Config(format!("width {width} must be even")));
            }
            let net = TwoLayerNet::init(p.d, width / 2, p.form, &p.init, cli.seed.unwrap_or(1))?
                .apply_asi();
            let c = net.lfp_coefficients()?;
            (c.a(), c.b())
        }
        _ => {
            return Err(LfpError::Config(
                "solve needs either both --a and --b, or --preset to sample them".into(),
            ))
        }
    };
    let l_prime = l_prime
        .or(p.as_ref().map(|p| p.lattice_l_prime))
        .ok_or_else(|| LfpError::Config("solve needs --l-prime or --preset".into()))?;
    let k_max = k_max
        .or(p.as_ref().map(|p| p.lattice_k_max))
        .ok_or_else(|| LfpError::Config("solve needs --k-max or --preset".into()))?;
    let intercept_mode = match intercept {
        "unpenalized" => InterceptMode::Unpenalized,
        "none" => InterceptMode::None,
        other => {
            return Err(LfpError::Config(format!(
                "intercept must be 'unpenalized' or 'none', got {other:?}"
            )))
        }
    };

    let lattice = Arc::new(FrequencyLattice::build(data.dim(), l_prime, k_max)?);
    let coeffs = LfpCoefficients::new(a, b, data.dim())?;
    let kernel = LfpKernel::new(lattice, coeffs.clone())?;
    let ridge = RidgeConfig {
        epsilon,
        intercept: intercept_mode,
        ..Default::default()
    };
    let solve = solve_lfp(&data, &kernel, None, &ridge)?;
    let residual = lfp::solver::interpolation_residual(&solve.dual);
    let capacity = fp_norm(&solve.spectrum, &coeffs)?;

    std::fs::create_dir_all(&cli.out)?;
    solve.spectrum.write_csv(&cli.out.join("spectrum.csv"))?;
    let dataset_csv = data.to_csv_string();
    solve.dual.export_json(
        &kernel,
        intercept_mode,
        &cli.out.join("solution.json"),
        Some(sha256_hex(dataset_csv.as_bytes())),
    )?;
    // dense predictions over the first axis range (d = 1) or the data points
    let pred_path = cli.out.join("predictions.csv");
    let mut pred = String::new();
    if data.dim() == 1 {
        pred.push_str("x,y_hat\n");
        let (lo, hi) = data.domain()[0];
        for i in 0..400 {
            let x = lo + (hi - lo) * i as f64 / 399.0;
            pred.push_str(&format!("{x},{}\n", solve.spectrum.evaluate(&[x])));
        }
    } else {
        pred.push_str("index,y,y_hat\n");
        for i in 0..data.len() {
            pred.push_str(&format!(
                "{i},{},{}\n",
                data.y(i),
                solve.spectrum.evaluate(data.x(i))
            ));
        }
    }
    std::fs::write(&pred_path, pred)?;
    let echo = SolveEcho {
        a,
        b,
        l_prime,
        k_max,
        epsilon,
        intercept: intercept.to_string(),
    };
    let mut manifest = RunManifest::new("solve", &[cli.seed.unwrap_or(1)], &echo)?;
    manifest.record_dataset("input.csv", dataset_csv.as_bytes());
    manifest.write(&cli.out)?;
    println!(
        "solved: A = {a:.6e}, B = {b:.6e}, max residual = {residual:.3e}, capacity norm = {capacity:.6e}"
    );
    println!("artifacts in {}", cli.out.display());
    Ok(0)
}

fn train_cmd(
    cli: &Common,
    data_path: &Path,
    preset_name: &str,
    width: Option<usize>,
    max_steps: Option<usize>,
    lr: Option<f64>,
    stop_loss: Option<f64>,
) -> lfp::Result<i32> {
    let data = Dataset::read_csv(data_path)?;
    let p = preset(preset_name)?;
    if data.dim() != p.d {
        return Err(LfpError::Config(format!(
            "dataset dimension {} does not match preset {}",
            data.dim(),
            p.name
        )));
    }
    let width = width.unwrap_or(p.default_width);
    if width < 2 || width % 2 != 0 {
        return Err(LfpError::Config(format!("width {width} must be even")));
    }
    let seed = cli.seed.unwrap_or(1);
    let mut net = TwoLayerNet::init(p.d, width / 2, p.form, &p.init, seed)?.apply_asi();
    let coeffs = net.lfp_coefficients()?;
    let cfg = TrainConfig {
        optimizer: match lr {
            Some(lr) => p.optimizer.with_lr(lr),
            None => p.optimizer,
        },
        max_steps: max_steps.unwrap_or(p.max_steps),
        stop_loss: Some(stop_loss.unwrap_or(p.stop_loss)),
        record_every: 1000,
        params: ParamSelection::All,
    };
    let record = train(&mut net, &data, &cfg)?;
    std::fs::create_dir_all(&cli.out)?;
    std::fs::write(cli.out.join("net.json"), net.to_json()?)?;
    record.write_history_csv(&cli.out.join("history.csv"))?;
    let mut manifest = RunManifest::new("train", &[seed], &cfg)?;
    manifest.record_dataset("input.csv", data.to_csv_string().as_bytes());
    manifest.write(&cli.out)?;
    println!(
        "trained {} (width {width}, A = {:.4e}, B = {:.4e}): loss {:.6e} after {} steps ({:?})",
        p.name,
        coeffs.a(),
        coeffs.b(),
        record.final_loss,
        record.steps,
        record.stop
    );
    Ok(0)
}

fn compare_cmd(
    cli: &Common,
    preset_name: Option<&str>,
    widths: Option<Vec<usize>>,
    seeds: Option<Vec<u64>>,
    max_steps: Option<usize>,
    paper_scale: bool,
) -> lfp::Result<i32> {
    let mut cfg: CompareConfig = match &cli.config {
        Some(path) => load_config(path)?,
        None => match preset_name {
            Some("fig2_xor") => CompareConfig::xor_defaults(),
            _ => CompareConfig::default(),
        },
    };
    if let Some(name) = preset_name {
        cfg.preset = name.to_string();
    }
    if let Some(widths) = widths {
        cfg.widths = widths;
    }
    if let Some(seeds) = seeds {
        cfg.seeds = seeds;
    }
    if let Some(steps) = max_steps {
        cfg.max_steps = Some(steps);
    }
    if paper_scale {
        cfg.paper_scale = true;
    }
    if let Some(seed) = cli.seed {
        if let lfp::experiment::compare::DataSource::Generate { seed: s, .. } = &mut cfg.data {
            *s = seed;
        }
    }
    let report = run_compare(&cfg, &cli.out)?;
    println!("preset {}: {} cells", report.preset, report.cells.len());
    for row in &report.rows {
        println!(
            "width {:>6}: mean L1 = {:.6e}, mean L2 = {:.6e} ({} ok, {} failed)",
            row.width, row.mean_l1, row.mean_l2, row.ok_cells, row.failed_cells
        );
    }
    println!("artifacts in {}", cli.out.display());
    Ok(if report.cells.iter().any(|c| c.error.is_some()) {
        1
    } else {
        0
    })
}

fn flow_verify_cmd(cli: &Common, instances: Option<usize>) -> lfp::Result<i32> {
    let mut cfg: VerifyConfig = match &cli.config {
        Some(path) => load_config(path)?,
        None => VerifyConfig::default(),
    };
    if let Some(n) = instances {
        cfg.instances = n;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let report = run_flow_verify(&cfg, Some(&cli.out))?;
    for i in &report.instances {
        println!(
            "instance {:>2} (d = {}, m = {}, k_max = {:>2}{}): max distance {:.3e}, optimality slack {:.3e} … {}",
            i.index,
            i.d,
            i.m,
            i.k_max,
            if i.nonzero_start { ", warm start" } else { "" },
            i.flow_vs_ridge.max(i.flow_vs_closed).max(i.ridge_vs_closed),
            i.min_norm_violation,
            if i.passed { "pass" } else { "FAIL" }
        );
    }
    println!(
        "matrix trials: worst relative error {:.3e} ({})",
        report.matrix_max_error,
        if report.matrix_max_error < cfg.matrix_tol {
            "pass"
        } else {
            "FAIL"
        }
    );
    println!(
        "guards: rank-deficient rejected = {}, unconstrained fixed point = {}",
        report.rank_deficient_rejected, report.unconstrained_fixed_point
    );
    println!(
        "overall: {}",
        if report.all_pass { "PASS" } else { "FAIL" }
    );
    Ok(if report.all_pass { 0 } else { 1 })
}

fn sweep_cmd(
    cli: &Common,
    v: Option<Vec<u32>>,
    width: Option<usize>,
    max_steps: Option<usize>,
) -> lfp::Result<i32> {
    let mut cfg: SweepConfig = match &cli.config {
        Some(path) => load_config(path)?,
        None => SweepConfig::default(),
    };
    if let Some(v) = v {
        cfg.v_list = v;
    }
    if let Some(width) = width {
        cfg.width = width;
    }
    if let Some(steps) = max_steps {
        cfg.max_steps = Some(steps);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let report = run_sweep(&cfg, &cli.out)?;
    println!("A = {:.4e}, B = {:.4e}, |gamma| = {:.4e}", report.a, report.b, report.gamma_l2);
    for r in &report.rows {
        println!(
            "v = {:>2}: fp-norm {:.4e} (normalized {:.3}), train {:.3e}, test {:.3e}, bounds {:.3e} / {:.3e}{}",
            r.v,
            r.fp_norm,
            r.fp_norm_normalized,
            r.train_loss,
            r.test_loss,
            r.bound_norm_only,
            r.bound_with_sup,
            r.error.as_deref().map(|e| format!(" [error: {e}]")).unwrap_or_default()
        );
    }
    if let Some(rho) = report.spearman_fp_vs_test {
        println!("spearman(fp-norm, test mse) = {rho:.3}");
    }
    println!("artifacts in {}", cli.out.display());
    Ok(if report.rows.iter().any(|r| r.error.is_some()) {
        1
    } else {
        0
    })
}

fn plot_cmd(
    cli: &Common,
    input: &Path,
    x: &str,
    y: &[String],
    style: &str,
    title: Option<&str>,
) -> lfp::Result<i32> {
    if y.is_empty() {
        return Err(LfpError::Config("plot needs at least one --y column".into()));
    }
    let style = match style {
        "line" => SeriesStyle::Line,
        "scatter" => SeriesStyle::Scatter,
        other => {
            return Err(LfpError::Config(format!(
                "style must be 'line' or 'scatter', got {other:?}"
            )))
        }
    };
    let text = std::fs::read_to_string(input)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| LfpError::Config("empty CSV".into()))?
        .split(',')
        .collect();
    let col = |name: &str| -> lfp::Result<usize> {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| LfpError::Config(format!("no column {name:?} in {header:?}")))
    };
    let xi = col(x)?;
    let yis: Vec<usize> = y.iter().map(|n| col(n)).collect::<lfp::Result<_>>()?;
    let mut series: Vec<Series> = y
        .iter()
        .map(|name| Series {
            label: name.clone(),
            points: Vec::new(),
            style,
        })
        .collect();
    for (row, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |idx: usize| -> lfp::Result<f64> {
            fields
                .get(idx)
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| {
                    LfpError::Config(format!("row {} column {} is not numeric", row + 2, idx + 1))
                })
        };
        let xv = parse(xi)?;
        for (s, &yi) in series.iter_mut().zip(&yis) {
            s.points.push((xv, parse(yi)?));
        }
    }
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "plot".into());
    let cfg = PlotConfig::new(
        title.unwrap_or(&stem),
        x,
        if y.len() == 1 { y[0].as_str() } else { "value" },
    );
    let svg = line_plot(&cfg, &series);
    std::fs::create_dir_all(&cli.out)?;
    let path = cli.out.join(format!("{stem}.svg"));
    write_svg(&path, &svg)?;
    println!("wrote {}", path.display());
    Ok(0)
}
