//! Conjugate-symmetric spectra of real functions on the periodized domain.
//!
//! A [`SpectralSolution`] stores one complex coefficient per lex-positive
//! lattice frequency plus a real intercept for the zero mode. Coefficients at
//! mirrored frequencies are the complex conjugates of the stored ones, so
//! every represented function is real-valued by construction; evaluation
//! therefore sums `2 Re` over the stored half and never materializes an
//! imaginary part.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::coeff::LfpCoefficients;
use crate::error::{LfpError, Result};
use crate::lattice::FrequencyLattice;
use crate::util::KahanSum;

/// A real function represented by the stored half of its spectrum together
/// with an intercept (the zero-frequency mode).
#[derive(Debug, Clone)]
pub struct SpectralSolution {
    lattice: Arc<FrequencyLattice>,
    half: Vec<Complex64>,
    intercept: f64,
}

fn same_lattice(a: &FrequencyLattice, b: &FrequencyLattice) -> bool {
    a.dim() == b.dim() && a.l_prime() == b.l_prime() && a.k_max() == b.k_max()
}

impl SpectralSolution {
    /// The zero function on the given lattice.
    pub fn zero(lattice: Arc<FrequencyLattice>) -> Self {
        let n = lattice.len_half();
        Self {
            lattice,
            half: vec![Complex64::new(0.0, 0.0); n],
            intercept: 0.0,
        }
    }

    /// Wraps coefficients aligned with the lattice's half enumeration.
    pub fn from_half(
        lattice: Arc<FrequencyLattice>,
        half: Vec<Complex64>,
        intercept: f64,
    ) -> Result<Self> {
        if half.len() != lattice.len_half() {
            return Err(LfpError::DimensionMismatch {
                expected: lattice.len_half(),
                got: half.len(),
            });
        }
        if !intercept.is_finite() || half.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(LfpError::InvalidParameter(
                "spectral coefficients must be finite".into(),
            ));
        }
        Ok(Self {
            lattice,
            half,
            intercept,
        })
    }

    /// Builds a solution from a full two-sided coefficient list, validating
    /// conjugate symmetry: for every entry at `k` the entry at `-k` must be
    /// present and match its conjugate within `tol * max(1, |h(k)|)`.
    /// Unlisted frequencies are zero.
    pub fn from_full(
        lattice: Arc<FrequencyLattice>,
        entries: &[(Vec<i64>, Complex64)],
        intercept: f64,
        tol: f64,
    ) -> Result<Self> {
        let mut half = vec![Complex64::new(0.0, 0.0); lattice.len_half()];
        let mut seen = vec![0u8; lattice.len_half()]; // bit 0: positive side, bit 1: mirrored
        for (k, value) in entries {
            let (pos, conj) = lattice.position_of(k).ok_or_else(|| {
                LfpError::InvalidParameter(format!("frequency {k:?} is off-lattice"))
            })?;
            let bit = if conj { 2 } else { 1 };
            if seen[pos] & bit != 0 {
                return Err(LfpError::InvalidParameter(format!(
                    "frequency {k:?} listed twice"
                )));
            }
            let as_positive = if conj { value.conj() } else { *value };
            if seen[pos] != 0 {
                let deviation = (half[pos] - as_positive).norm();
                if deviation > tol * half[pos].norm().max(1.0) {
                    return Err(LfpError::ConjugateSymmetry {
                        k: k.clone(),
                        deviation,
                    });
                }
            } else {
                half[pos] = as_positive;
            }
            seen[pos] |= bit;
        }
        for (pos, &s) in seen.iter().enumerate() {
            if s == 1 || s == 2 {
                return Err(LfpError::ConjugateSymmetry {
                    k: lattice.half_index(pos).to_vec(),
                    deviation: half[pos].norm(),
                });
            }
        }
        Self::from_half(lattice, half, intercept)
    }

    /// The spectrum of `amplitude * sin(2 pi v x / l_prime)` on a 1-d
    /// lattice: coefficients `-+ i * amplitude / 2` at `k = +-v`.
    pub fn sine(lattice: Arc<FrequencyLattice>, v: i64, amplitude: f64) -> Result<Self> {
        if lattice.dim() != 1 {
            return Err(LfpError::DimensionMismatch {
                expected: 1,
                got: lattice.dim(),
            });
        }
        if v <= 0 || v > lattice.k_max() - 1 {
            return Err(LfpError::InvalidParameter(format!(
                "sine frequency v={v} outside the lattice (1..={})",
                lattice.k_max() - 1
            )));
        }
        let mut sol = Self::zero(lattice);
        let (pos, conj) = sol.lattice.position_of(&[v]).expect("validated above");
        debug_assert!(!conj);
        sol.half[pos] = Complex64::new(0.0, -amplitude / 2.0);
        Ok(sol)
    }

    pub fn lattice(&self) -> &Arc<FrequencyLattice> {
        &self.lattice
    }

    /// Stored coefficients, aligned with the lattice half enumeration.
    pub fn half(&self) -> &[Complex64] {
        &self.half
    }

    #[cfg(test)]
    pub(crate) fn half_mut(&mut self) -> &mut [Complex64] {
        &mut self.half
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn with_intercept(mut self, intercept: f64) -> Self {
        self.intercept = intercept;
        self
    }

    /// Coefficient at an arbitrary on-lattice frequency (conjugating for the
    /// mirrored half); `None` off-lattice or at the origin.
    pub fn coefficient(&self, k: &[i64]) -> Option<Complex64> {
        let (pos, conj) = self.lattice.position_of(k)?;
        Some(if conj {
            self.half[pos].conj()
        } else {
            self.half[pos]
        })
    }

    /// Evaluates the represented real function at `x`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let table = self.lattice.phase_table(x);
        let mut acc = 0.0;
        for (i, k) in self.lattice.half_iter() {
            let h = self.half[i];
            if h.re != 0.0 || h.im != 0.0 {
                let p = table.phase(k);
                acc += h.re * p.re - h.im * p.im;
            }
        }
        self.intercept + 2.0 * acc
    }

    /// Evaluates at every row of a flattened point list (row-major, `d`
    /// coordinates per point).
    pub fn evaluate_flat(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let d = self.lattice.dim();
        if xs.len() % d != 0 {
            return Err(LfpError::DimensionMismatch {
                expected: d,
                got: xs.len(),
            });
        }
        Ok(xs.chunks_exact(d).map(|x| self.evaluate(x)).collect())
    }

    /// Coefficient-wise sum; lattices must agree.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b, self.intercept + other.intercept)
    }

    /// Coefficient-wise difference; lattices must agree.
    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b, self.intercept - other.intercept)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
        intercept: f64,
    ) -> Result<Self> {
        if !same_lattice(&self.lattice, &other.lattice) {
            return Err(LfpError::InvalidParameter(
                "spectra live on different lattices".into(),
            ));
        }
        let half = self
            .half
            .iter()
            .zip(&other.half)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            lattice: Arc::clone(&self.lattice),
            half,
            intercept,
        })
    }

    /// Scales all coefficients and the intercept.
    pub fn scale(&self, s: f64) -> Self {
        Self {
            lattice: Arc::clone(&self.lattice),
            half: self.half.iter().map(|&c| c * s).collect(),
            intercept: self.intercept * s,
        }
    }

    /// L2 norm of the represented function on the periodized box (Parseval:
    /// intercept plus both lattice halves).
    pub fn l2_norm(&self) -> f64 {
        let mut acc = KahanSum::new();
        acc.add(self.intercept * self.intercept);
        for c in &self.half {
            acc.add(2.0 * c.norm_sqr());
        }
        acc.value().sqrt()
    }

    /// L2 distance to another spectrum on the same lattice.
    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        Ok(self.try_sub(other)?.l2_norm())
    }

    /// Distance scaled by the larger of the two norms (0 when both vanish).
    pub fn rel_l2_distance(&self, other: &Self) -> Result<f64> {
        let scale = self.l2_norm().max(other.l2_norm());
        let dist = self.l2_distance(other)?;
        Ok(if scale == 0.0 { 0.0 } else { dist / scale })
    }

    /// Fraction of (zero-mode-excluded) spectral energy at frequencies with
    /// `|xi| > cut`. Returns 0 for an all-zero spectrum.
    pub fn high_freq_energy_fraction(&self, cut: f64) -> f64 {
        let mut total = KahanSum::new();
        let mut high = KahanSum::new();
        for (i, &c) in self.half.iter().enumerate() {
            let e = c.norm_sqr();
            total.add(e);
            if self.lattice.xi_norm(i) > cut {
                high.add(e);
            }
        }
        let t = total.value();
        if t == 0.0 {
            0.0
        } else {
            high.value() / t
        }
    }

    /// Writes the full two-sided spectrum as CSV (`k_1,..,k_d,re,im`) in
    /// lexicographic frequency order.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let d = self.lattice.dim();
        for j in 0..d {
            write!(out, "k{},", j + 1)?;
        }
        writeln!(out, "re,im")?;
        for k in self.lattice.full_iter() {
            let c = self.coefficient(&k).expect("full_iter stays on-lattice");
            for &kj in &k {
                write!(out, "{kj},")?;
            }
            // `+ 0.0` canonicalizes the negative zeros conjugation produces
            writeln!(out, "{},{}", c.re + 0.0, c.im + 0.0)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// The weighted norm `( sum_{xi != 0} |h(xi)|^2 / c(xi) )^(1/2)` over the
/// full two-sided lattice. The zero frequency carries no weight (its inverse
/// weight is zero by convention), so the intercept does not contribute.
pub fn fp_norm(solution: &SpectralSolution, coeffs: &LfpCoefficients) -> Result<f64> {
    if coeffs.dim() != solution.lattice().dim() {
        return Err(LfpError::DimensionMismatch {
            expected: solution.lattice().dim(),
            got: coeffs.dim(),
        });
    }
    let lattice = solution.lattice();
    let mut acc = KahanSum::new();
    for (i, &c) in solution.half().iter().enumerate() {
        acc.add(2.0 * c.norm_sqr() / coeffs.rate_at_norm(lattice.xi_norm(i)));
    }
    Ok(acc.value().sqrt())
}

/// The norm `( sum_{xi != 0} c(xi) )^(1/2)` of the weight sequence over the
/// full two-sided lattice; enters the capacity bounds as the scale of the
/// hypothesis ball.
pub fn gamma_l2_norm(lattice: &FrequencyLattice, coeffs: &LfpCoefficients) -> Result<f64> {
    if coeffs.dim() != lattice.dim() {
        return Err(LfpError::DimensionMismatch {
            expected: lattice.dim(),
            got: coeffs.dim(),
        });
    }
    let mut acc = KahanSum::new();
    for &norm in lattice.xi_norms() {
        acc.add(2.0 * coeffs.rate_at_norm(norm));
    }
    Ok(acc.value().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_spectrum(lattice: &Arc<FrequencyLattice>, seed: u64) -> SpectralSolution {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = (0..lattice.len_half())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SpectralSolution::from_half(Arc::clone(lattice), half, rng.gen_range(-1.0..1.0)).unwrap()
    }

    /// Direct two-sided complex summation, the independent evaluation oracle.
    fn direct_eval(sol: &SpectralSolution, x: &[f64]) -> (f64, f64) {
        let lat = sol.lattice();
        let mut acc = Complex64::new(sol.intercept(), 0.0);
        for k in lat.full_iter() {
            let arg = 2.0 * std::f64::consts::PI
                * k.iter()
                    .zip(x)
                    .map(|(&kj, &xj)| kj as f64 * xj)
                    .sum::<f64>()
                / lat.l_prime();
            acc += sol.coefficient(&k).unwrap() * Complex64::new(arg.cos(), arg.sin());
        }
        (acc.re, acc.im)
    }

    #[test]
    fn evaluation_is_real_and_matches_direct_summation() {
        let lattice = Arc::new(FrequencyLattice::build(2, 3.0, 6).unwrap());
        let sol = random_spectrum(&lattice, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let (re, im) = direct_eval(&sol, &x);
            let scale = re.abs().max(1.0);
            assert!(im.abs() < 1e-10 * scale, "direct sum must be real");
            assert_relative_eq!(sol.evaluate(&x), re, max_relative = 1e-10, epsilon = 1e-10);
        }
    }

    #[test]
    fn evaluation_is_linear() {
        let lattice = Arc::new(FrequencyLattice::build(1, 2.0, 9).unwrap());
        let s1 = random_spectrum(&lattice, 1);
        let s2 = random_spectrum(&lattice, 2);
        let combo = s1.try_add(&s2.scale(0.5)).unwrap();
        for &x in &[-0.9, 0.0, 0.31, 1.7] {
            assert_relative_eq!(
                combo.evaluate(&[x]),
                s1.evaluate(&[x]) + 0.5 * s2.evaluate(&[x]),
                max_relative = 1e-12,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn from_full_accepts_symmetric_and_rejects_asymmetric() {
        let lattice = Arc::new(FrequencyLattice::build(1, 1.0, 4).unwrap());
        let good = vec![
            (vec![1], Complex64::new(0.5, -0.25)),
            (vec![-1], Complex64::new(0.5, 0.25)),
            (vec![3], Complex64::new(0.0, 1.0)),
            (vec![-3], Complex64::new(0.0, -1.0)),
        ];
        let sol = SpectralSolution::from_full(Arc::clone(&lattice), &good, 2.0, 1e-12).unwrap();
        assert_eq!(sol.coefficient(&[1]), Some(Complex64::new(0.5, -0.25)));
        assert_eq!(sol.coefficient(&[-1]), Some(Complex64::new(0.5, 0.25)));
        assert_eq!(sol.coefficient(&[2]), Some(Complex64::new(0.0, 0.0)));
        assert_eq!(sol.intercept(), 2.0);

        let broken = vec![
            (vec![1], Complex64::new(0.5, -0.25)),
            (vec![-1], Complex64::new(0.5, 0.2)),
        ];
        assert!(matches!(
            SpectralSolution::from_full(Arc::clone(&lattice), &broken, 0.0, 1e-12),
            Err(LfpError::ConjugateSymmetry { .. })
        ));

        // a one-sided entry cannot be validated
        let lonely = vec![(vec![2], Complex64::new(1.0, 1.0))];
        assert!(SpectralSolution::from_full(Arc::clone(&lattice), &lonely, 0.0, 1e-12).is_err());

        let off = vec![(vec![9], Complex64::new(1.0, 0.0))];
        assert!(SpectralSolution::from_full(lattice, &off, 0.0, 1e-12).is_err());
    }

    #[test]
    fn sine_spectrum_evaluates_to_the_sine() {
        let lattice = Arc::new(FrequencyLattice::build(1, 1.0, 16).unwrap());
        let sol = SpectralSolution::sine(Arc::clone(&lattice), 3, 0.8).unwrap();
        for &x in &[0.0, 0.11, 0.5, 0.93] {
            let expected = 0.8 * (2.0 * std::f64::consts::PI * 3.0 * x).sin();
            assert_relative_eq!(sol.evaluate(&[x]), expected, epsilon = 1e-12);
        }
        assert!(SpectralSolution::sine(Arc::clone(&lattice), 0, 1.0).is_err());
        assert!(SpectralSolution::sine(lattice, 16, 1.0).is_err());
    }

    #[test]
    fn fp_norm_of_sine_has_closed_form() {
        // || A sin(2 pi v x) ||_gamma^2 = 2 * (A/2)^2 / c(v)
        let lattice = Arc::new(FrequencyLattice::build(1, 1.0, 8).unwrap());
        let coeffs = LfpCoefficients::new(1.0, 1.0, 1).unwrap();
        let sol = SpectralSolution::sine(Arc::clone(&lattice), 2, 1.0).unwrap();
        let c2: f64 = 1.0 / 16.0 + 1.0 / 4.0;
        assert_relative_eq!(
            fp_norm(&sol, &coeffs).unwrap(),
            (1.0 / (2.0 * c2)).sqrt(),
            max_relative = 1e-14
        );
        // the intercept is weightless: shifting the function leaves the norm
        let shifted = sol.clone().with_intercept(7.0);
        assert_eq!(
            fp_norm(&sol, &coeffs).unwrap(),
            fp_norm(&shifted, &coeffs).unwrap()
        );
    }

    #[test]
    fn fp_norm_is_monotone_in_sine_frequency() {
        let lattice = Arc::new(FrequencyLattice::build(1, 1.0, 16).unwrap());
        let coeffs = LfpCoefficients::new(0.5, 2.0, 1).unwrap();
        let norms: Vec<f64> = (1..=10)
            .map(|v| {
                let s = SpectralSolution::sine(Arc::clone(&lattice), v, 1.0).unwrap();
                fp_norm(&s, &coeffs).unwrap()
            })
            .collect();
        for w in norms.windows(2) {
            assert!(w[0] < w[1], "rougher sines must carry larger norms");
        }
    }

    #[test]
    fn gamma_norm_truncation_approaches_basel_limit() {
        // B-only weights on the unit-period line give sum 2 * sum_{k>=1} 1/k^2
        // -> pi^2 / 3; the truncation tail is below 2/(k_max - 1).
        let lattice = FrequencyLattice::build(1, 1.0, 20_000).unwrap();
        let coeffs = LfpCoefficients::new(0.0, 1.0, 1).unwrap();
        let g = gamma_l2_norm(&lattice, &coeffs).unwrap();
        let limit = std::f64::consts::PI * std::f64::consts::PI / 3.0;
        assert!((g * g - limit).abs() < 2.0 / 19_999.0);
    }

    #[test]
    fn parseval_distance_and_energy_fraction() {
        let lattice = Arc::new(FrequencyLattice::build(1, 1.0, 16).unwrap());
        let mut sol = SpectralSolution::zero(Arc::clone(&lattice));
        // energy 2*(1)^2 at |xi|=1 and 2*(0.5)^2 at |xi|=10
        let (p1, _) = lattice.position_of(&[1]).unwrap();
        let (p10, _) = lattice.position_of(&[10]).unwrap();
        sol.half_mut()[p1] = Complex64::new(1.0, 0.0);
        sol.half_mut()[p10] = Complex64::new(0.0, 0.5);
        let frac = sol.high_freq_energy_fraction(5.0);
        assert_relative_eq!(frac, 0.25 / 1.25, max_relative = 1e-14);

        let zero = SpectralSolution::zero(Arc::clone(&lattice));
        assert_relative_eq!(sol.l2_distance(&zero).unwrap(), sol.l2_norm());
        assert_eq!(zero.high_freq_energy_fraction(1.0), 0.0);
        assert_relative_eq!(sol.l2_norm(), (2.0f64 + 0.5).sqrt());
    }

    #[test]
    fn csv_export_covers_the_full_lattice_in_lex_order() {
        let dir = std::env::temp_dir().join("lfp_spectrum_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("spectrum.csv");
        let lattice = Arc::new(FrequencyLattice::build(1, 1.0, 3).unwrap());
        let sol = SpectralSolution::from_full(
            Arc::clone(&lattice),
            &[
                (vec![1], Complex64::new(0.25, -0.5)),
                (vec![-1], Complex64::new(0.25, 0.5)),
            ],
            0.0,
            1e-12,
        )
        .unwrap();
        sol.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines,
            vec!["k1,re,im", "-2,0,0", "-1,0.25,0.5", "1,0.25,-0.5", "2,0,0"]
        );
        std::fs::remove_dir_all(&dir).ok();
    }
}
