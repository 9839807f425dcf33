//! Target FP-norm against test error, at example scale.
//!
//! Trains one small network per sine frequency v until the training loss is
//! tiny, then reports the analytic FP-norm of each target next to the test
//! error and the a priori bounds. The ranking of test errors follows the
//! ranking of FP-norms. Full-size defaults live in the `sweep` CLI
//! subcommand; artifacts go to `target/examples-out/fp_norm_sweep/`.
//!
//! Run with `cargo run --example fp_norm_sweep`.

use lfp::experiment::sweep::{run_sweep, SweepConfig};

fn main() -> lfp::Result<()> {
    let cfg = SweepConfig {
        v_list: (1..=6).collect(),
        train_samples: 16,
        test_samples: 200,
        width: 128,
        seed: 1,
        max_steps: Some(20_000),
        ..Default::default()
    };
    let out = std::path::Path::new("target/examples-out/fp_norm_sweep");
    let report = run_sweep(&cfg, out)?;

    println!(
        "rates from the shared init: A = {:.4}, B = {:.4}, ||gamma|| = {:.4}",
        report.a, report.b, report.gamma_l2
    );
    println!(
        "lattice truncation check (relative change when the cut doubles): {:.2e}",
        report.gamma_truncation_rel_change
    );
    println!("\nv    FP-norm      train loss   test MSE     bound");
    for row in &report.rows {
        println!(
            "{:<2}   {:.4e}   {:.3e}   {:.4e}   {:.3e}",
            row.v, row.fp_norm, row.train_loss, row.test_loss, row.bound_with_sup
        );
    }
    match report.spearman_fp_vs_test {
        Some(rho) => println!("\nSpearman(FP-norm, test MSE) = {rho:.3}"),
        None => println!("\nSpearman unavailable (too few clean rows)"),
    }
    println!("artifacts in {}", out.display());
    Ok(())
}
