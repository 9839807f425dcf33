//! A priori risk bounds for minimum-norm interpolation of sine targets.
//!
//! For each frequency v, the target `sin(2*pi*v*x)` is sampled at 20 points,
//! interpolated by the weighted minimum-norm solver, and its grid-estimated
//! population risk is compared with the bound computed from the target's
//! FP-norm alone (no trained model needed). Higher v means a larger FP-norm,
//! a larger bound, and a larger measured risk.
//!
//! Run with `cargo run --example generalization_bound`.

use lfp::bounds::{
    empirical_rademacher_mc, generalization_bound, rademacher_bound, BoundInputs, BoundVariant,
};
use lfp::experiment::data::{gen_dataset, sine_target, GenKind};
use lfp::{
    fp_norm, gamma_l2_norm, solve_lfp, FrequencyLattice, LfpCoefficients, LfpKernel, RidgeConfig,
    SpectralSolution,
};
use std::sync::Arc;

fn main() -> lfp::Result<()> {
    let lattice = Arc::new(FrequencyLattice::build(1, 1.0, 1024)?);
    let coeffs = LfpCoefficients::new(0.08, 1.2, 1)?;
    let kernel = LfpKernel::new(Arc::clone(&lattice), coeffs.clone())?;
    let gamma = gamma_l2_norm(&lattice, &coeffs)?;
    let m = 20;
    let delta = 0.1;
    let grid: Vec<f64> = (0..500).map(|i| (i as f64 + 0.5) / 500.0).collect();

    println!("v    FP-norm      grid risk    bound        holds");
    for v in 1..=5u32 {
        let data = gen_dataset(&GenKind::Sine { v, m }, 0)?;
        let solve = solve_lfp(&data, &kernel, None, &RidgeConfig::default())?;
        let target = sine_target(v);
        let risk = grid
            .iter()
            .map(|&x| {
                let e = solve.spectrum.evaluate(&[x]) - target(x);
                e * e
            })
            .sum::<f64>()
            / grid.len() as f64;
        let sine = SpectralSolution::sine(Arc::clone(&lattice), v as i64, 1.0)?;
        let inputs = BoundInputs {
            fp_norm: fp_norm(&sine, &coeffs)?,
            gamma_l2: gamma,
            sup_norm: Some(1.0),
            m,
            delta,
        };
        let bound = generalization_bound(&inputs, BoundVariant::WithSup)?;
        println!(
            "{v}    {:.4e}   {risk:.4e}   {bound:.4e}   {}",
            inputs.fp_norm,
            risk <= bound
        );
    }

    // the capacity side: a Monte-Carlo estimate of the empirical Rademacher
    // complexity of the unit FP-norm ball stays under its closed-form cap
    let xs: Vec<f64> = (0..m).map(|i| i as f64 / m as f64).collect();
    let est = empirical_rademacher_mc(&xs, &kernel, 1.0, 500, 3)?;
    let cap = rademacher_bound(1.0, gamma, m, None)?;
    println!(
        "\nRademacher: Monte-Carlo {:.5} +- {:.5}  vs  bound {:.5}",
        est.mean, est.stderr, cap
    );
    Ok(())
}
