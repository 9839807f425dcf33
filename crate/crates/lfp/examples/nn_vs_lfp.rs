//! Trained networks against the kernel prediction, across widths.
//!
//! Runs a scaled-down comparison: networks of a few widths are trained on
//! the same 12-point dataset, and each is measured against the spectral
//! minimum-norm interpolant built from its own initialization statistics.
//! Wider networks land closer to the kernel prediction. Takes about half a
//! minute. Artifacts (CSV tables, overlay and gap plots, a manifest) go to
//! `target/examples-out/nn_vs_lfp/`.
//!
//! Run with `cargo run --example nn_vs_lfp`.

use lfp::experiment::compare::{run_compare, CompareConfig, DataSource};
use lfp::experiment::data::GenKind;

fn main() -> lfp::Result<()> {
    let cfg = CompareConfig {
        widths: vec![64, 256, 1024],
        seeds: vec![1, 2, 3, 4, 5],
        data: DataSource::Generate {
            gen: GenKind::Random1d { m: 12 },
            seed: 101,
        },
        test_resolution: Some(400),
        ..Default::default()
    };
    let out = std::path::Path::new("target/examples-out/nn_vs_lfp");
    let report = run_compare(&cfg, out)?;

    println!("preset {}; per-cell network-vs-kernel gaps:", report.preset);
    println!("width   seed   L2 gap       L1 gap       train loss   steps");
    for c in &report.cells {
        println!(
            "{:5}   {:4}   {:.4e}   {:.4e}   {:.3e}   {}",
            c.width, c.seed, c.l2, c.l1, c.train_loss, c.steps
        );
    }
    println!("\nwidth   mean L2 gap");
    for row in &report.rows {
        println!("{:5}   {:.4e}", row.width, row.mean_l2);
    }
    println!("\nartifacts in {}", out.display());
    Ok(())
}
