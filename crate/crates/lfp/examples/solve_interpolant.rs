//! Minimum-norm spectral interpolation of a handful of points.
//!
//! Solves the frequency-weighted ridge problem at a small epsilon, checks
//! that the result interpolates the data, and writes the spectrum plus a
//! dense prediction table under `target/examples-out/solve_interpolant/`.
//!
//! Run with `cargo run --example solve_interpolant`.

use lfp::solver::interpolation_residual;
use lfp::{
    solve_lfp, Dataset, FrequencyLattice, InterceptMode, LfpCoefficients, LfpKernel, RidgeConfig,
};
use std::sync::Arc;

fn main() -> lfp::Result<()> {
    let data = Dataset::new(
        1,
        vec![-0.9, -0.5, -0.1, 0.2, 0.55, 0.85],
        vec![0.3, -0.6, 0.8, 0.25, -0.45, 0.1],
    )?;
    let lattice = Arc::new(FrequencyLattice::build(1, 2.0, 256)?);
    let kernel = LfpKernel::new(lattice, LfpCoefficients::new(1.0, 0.1, 1)?)?;

    let cfg = RidgeConfig {
        epsilon: 1e-10,
        intercept: InterceptMode::Unpenalized,
        ..Default::default()
    };
    let solve = solve_lfp(&data, &kernel, None, &cfg)?;

    let residual = interpolation_residual(&solve.dual);
    println!("max |h(x_i) - y_i| = {residual:.3e}");
    println!("intercept (free zero mode) = {:+.6}", solve.spectrum.intercept());
    for i in 0..data.len() {
        println!(
            "  x = {:+.2}  y = {:+.3}  h(x) = {:+.6}",
            data.x(i)[0],
            data.y(i),
            solve.spectrum.evaluate(data.x(i))
        );
    }

    let out = std::path::Path::new("target/examples-out/solve_interpolant");
    std::fs::create_dir_all(out)?;
    solve.spectrum.write_csv(&out.join("spectrum.csv"))?;
    let mut predictions = String::from("x,h\n");
    for i in 0..=400 {
        let x = -1.0 + 2.0 * i as f64 / 400.0;
        predictions.push_str(&format!("{x},{}\n", solve.spectrum.evaluate(&[x])));
    }
    std::fs::write(out.join("predictions.csv"), predictions)?;
    println!("\nwrote {}/spectrum.csv and predictions.csv", out.display());
    Ok(())
}
