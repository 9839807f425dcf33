//! Two coefficient regimes, one dataset: smoothness is set by the rate tail.
//!
//! When the `A/|xi|^4` term dominates, the minimum-norm interpolant is
//! smooth; when `B/|xi|^2` dominates, it tends toward piecewise-linear and
//! keeps far more energy at high frequencies. This example solves both on
//! identical data, prints the high-frequency energy fractions, and writes an
//! overlay plot to `target/examples-out/smooth_vs_rough/overlay.svg`.
//!
//! Run with `cargo run --example smooth_vs_rough`.

use lfp::experiment::data::{gen_dataset, GenKind};
use lfp::plot::{line_plot, write_svg, PlotConfig, Series};
use lfp::{
    preset, solve_lfp, FrequencyLattice, InterceptMode, LfpKernel, RidgeConfig, TwoLayerNet,
};
use std::sync::Arc;

fn main() -> lfp::Result<()> {
    let data = gen_dataset(&GenKind::Random1d { m: 12 }, 101)?;
    let ridge = RidgeConfig {
        epsilon: 1e-8,
        intercept: InterceptMode::None,
        ..Default::default()
    };

    let mut series = vec![Series::scatter(
        "training data",
        data.xs().iter().zip(data.ys()).map(|(&x, &y)| (x, y)).collect(),
    )];

    for name in ["fig1_smooth", "fig1_rough"] {
        let p = preset(name)?;
        let lattice = Arc::new(FrequencyLattice::build(
            1,
            p.lattice_l_prime,
            p.lattice_k_max,
        )?);
        // the rate coefficients come from a sampled initialization
        let net = TwoLayerNet::init(1, p.default_width / 2, p.form, &p.init, 1)?.apply_asi();
        let coeffs = net.lfp_coefficients()?;
        println!(
            "{name}: A = {:.4e}, B = {:.4e} (A-term {} at |xi| = 1)",
            coeffs.a(),
            coeffs.b(),
            if coeffs.a() > coeffs.b() { "dominates" } else { "is dominated" },
        );
        let kernel = LfpKernel::new(lattice, coeffs)?;
        let solve = solve_lfp(&data, &kernel, None, &ridge)?;
        println!(
            "  energy fraction above |xi| > 5: {:.4e}",
            solve.spectrum.high_freq_energy_fraction(5.0)
        );
        let curve: Vec<(f64, f64)> = (0..=600)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / 600.0;
                (x, solve.spectrum.evaluate(&[x]))
            })
            .collect();
        series.push(Series::line(name, curve));
    }

    let out = std::path::Path::new("target/examples-out/smooth_vs_rough");
    std::fs::create_dir_all(out)?;
    let svg = line_plot(
        &PlotConfig::new(
            "minimum-norm interpolants under two rate regimes",
            "x",
            "h(x)",
        ),
        &series,
    );
    write_svg(&out.join("overlay.svg"), &svg)?;
    println!("\nwrote {}/overlay.svg", out.display());
    Ok(())
}
