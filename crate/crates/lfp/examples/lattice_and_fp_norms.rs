//! Frequency lattices, rate coefficients, and weighted spectral norms.
//!
//! The model weights every lattice frequency xi by
//! `c(xi) = A/|xi|^(d+3) + B/|xi|^(d+1)`; the FP-norm divides spectral mass
//! by `c`, so high frequencies are expensive and pure tones get costlier
//! with their frequency.
//!
//! Run with `cargo run --example lattice_and_fp_norms`.

use lfp::{fp_norm, gamma_l2_norm, FrequencyLattice, LfpCoefficients, SpectralSolution};
use std::sync::Arc;

fn main() -> lfp::Result<()> {
    // 1-d lattice on a period-1 torus, frequencies -64..=64
    let lattice = Arc::new(FrequencyLattice::build(1, 1.0, 64)?);
    let coeffs = LfpCoefficients::new(1.0, 0.5, 1)?;

    println!("lattice: d=1, period 1, {} half-lattice modes", lattice.len_half());
    println!("rate c(xi) = A/xi^4 + B/xi^2 with A=1, B=0.5:");
    for v in [1i64, 2, 4, 8, 16, 32] {
        println!("  c({v:2}) = {:.6e}", coeffs.rate(&[v as f64])?);
    }

    println!("\nFP-norms of unit-amplitude sines (higher tone => larger norm):");
    let mut last = 0.0;
    for v in 1..=8i64 {
        let sine = SpectralSolution::sine(Arc::clone(&lattice), v, 1.0)?;
        let norm = fp_norm(&sine, &coeffs)?;
        assert!(norm > last, "FP-norm must increase with frequency");
        last = norm;
        println!("  ||sin(2*pi*{v}x)||_gamma = {norm:10.4}");
    }

    let gamma = gamma_l2_norm(&lattice, &coeffs)?;
    println!("\nweight-sequence norm ||gamma||_l2 = {gamma:.6}");
    println!("(equals the kernel diagonal sum: it caps the Rademacher bound)");

    // the same machinery in d=2
    let lattice2 = Arc::new(FrequencyLattice::build(2, 2.0, 8)?);
    let coeffs2 = LfpCoefficients::new(1.0, 0.5, 2)?;
    println!(
        "\n2-d lattice (period 2, |k|_inf <= 8): {} half modes, ||gamma|| = {:.4}",
        lattice2.len_half(),
        gamma_l2_norm(&lattice2, &coeffs2)?
    );
    Ok(())
}
