//! Truncated integer frequency lattice with conjugate-symmetric storage.
//!
//! Periodizing a problem on a box of side `l_prime` turns every spectral
//! object into a map on `(1/l_prime) * Z^d`. We truncate indices to
//! `[-k_max+1, k_max-1]^d`, drop the origin (an intercept carries it), and
//! store only the lexicographically positive half: real-valued functions have
//! conjugate-symmetric spectra, so the negative half is redundant. All
//! enumerations are lexicographic, which keeps downstream reductions and file
//! exports byte-deterministic.

use num_complex::Complex64;

use crate::error::{LfpError, Result};

/// Default cap on the number of stored (half) frequencies.
pub const DEFAULT_FREQ_CAP: u64 = 10_000_000;

/// A truncated lattice of nonzero integer frequency indices.
///
/// Physical frequencies are `xi = k / l_prime` with `k` an integer vector,
/// `0 < max_j |k_j| <= k_max - 1`.
#[derive(Debug, Clone)]
pub struct FrequencyLattice {
    d: usize,
    l_prime: f64,
    k_max: i64,
    /// Lex-positive half of the nonzero lattice, flattened row-major,
    /// sorted lexicographically.
    half: Vec<i64>,
    /// Euclidean norms |k|/l_prime aligned with `half`.
    xi_norms: Vec<f64>,
}

/// True when the first nonzero component of `k` is positive.
#[inline]
pub(crate) fn is_lex_positive(k: &[i64]) -> bool {
    for &c in k {
        if c != 0 {
            return c > 0;
        }
    }
    false
}

impl FrequencyLattice {
    /// Builds the lattice for dimension `d`, period `l_prime` and index
    /// bound `k_max` (indices range over `[-k_max+1, k_max-1]`), with the
    /// default size cap.
    pub fn build(d: usize, l_prime: f64, k_max: i64) -> Result<Self> {
        Self::build_with_cap(d, l_prime, k_max, DEFAULT_FREQ_CAP)
    }

    /// As [`build`](Self::build) with an explicit cap on stored frequencies.
    pub fn build_with_cap(d: usize, l_prime: f64, k_max: i64, cap: u64) -> Result<Self> {
        if d == 0 {
            return Err(LfpError::InvalidParameter("dimension must be >= 1".into()));
        }
        if !(l_prime.is_finite() && l_prime > 0.0) {
            return Err(LfpError::InvalidParameter(format!(
                "period l_prime must be positive and finite, got {l_prime}"
            )));
        }
        if k_max < 2 {
            return Err(LfpError::InvalidParameter(format!(
                "k_max must be >= 2 so the lattice is nonempty, got {k_max}"
            )));
        }
        let side = 2 * k_max as u128 - 1;
        let full = side.pow(d as u32) - 1;
        if full / 2 > cap as u128 {
            return Err(LfpError::LatticeTooLarge {
                requested: full / 2,
                cap,
            });
        }

        let n_half = (full / 2) as usize;
        let mut half = Vec::with_capacity(n_half * d);
        let mut xi_norms = Vec::with_capacity(n_half);
        let mut k = vec![-(k_max - 1); d];
        loop {
            if is_lex_positive(&k) {
                half.extend_from_slice(&k);
                let norm_sq: f64 = k.iter().map(|&c| (c * c) as f64).sum();
                xi_norms.push(norm_sq.sqrt() / l_prime);
            }
            // lexicographic odometer over the box
            let mut axis = d;
            loop {
                if axis == 0 {
                    return Ok(Self {
                        d,
                        l_prime,
                        k_max,
                        half,
                        xi_norms,
                    });
                }
                axis -= 1;
                if k[axis] < k_max - 1 {
                    k[axis] += 1;
                    for c in k[axis + 1..].iter_mut() {
                        *c = -(k_max - 1);
                    }
                    break;
                }
            }
        }
    }

    /// Spatial dimension `d`.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Period of the frequency grid.
    pub fn l_prime(&self) -> f64 {
        self.l_prime
    }

    /// Index bound (indices satisfy `|k_j| <= k_max - 1`).
    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    /// Number of nonzero frequencies on the full (two-sided) lattice.
    pub fn len_full(&self) -> usize {
        2 * self.len_half()
    }

    /// Number of stored lex-positive representatives.
    pub fn len_half(&self) -> usize {
        self.xi_norms.len()
    }

    /// Integer index vector of the `i`-th stored representative.
    #[inline]
    pub fn half_index(&self, i: usize) -> &[i64] {
        &self.half[i * self.d..(i + 1) * self.d]
    }

    /// Euclidean physical norm `|k| / l_prime` of the `i`-th representative.
    #[inline]
    pub fn xi_norm(&self, i: usize) -> f64 {
        self.xi_norms[i]
    }

    /// All stored physical norms, aligned with the half enumeration.
    pub fn xi_norms(&self) -> &[f64] {
        &self.xi_norms
    }

    /// Iterates `(position, k)` over the stored half in lexicographic order.
    pub fn half_iter(&self) -> impl Iterator<Item = (usize, &[i64])> {
        self.half.chunks_exact(self.d).enumerate()
    }

    /// Physical frequency vector `k / l_prime` of the `i`-th representative.
    pub fn xi(&self, i: usize) -> Vec<f64> {
        self.half_index(i)
            .iter()
            .map(|&c| c as f64 / self.l_prime)
            .collect()
    }

    /// Whether `k` lies on the (nonzero) lattice.
    pub fn contains(&self, k: &[i64]) -> bool {
        k.len() == self.d
            && k.iter().any(|&c| c != 0)
            && k.iter().all(|&c| c.abs() <= self.k_max - 1)
    }

    /// Locates `k`: `(half_position, conjugate)` where `conjugate` is true
    /// when `k` is stored through its mirrored representative `-k`.
    /// Returns `None` off-lattice (including the origin).
    pub fn position_of(&self, k: &[i64]) -> Option<(usize, bool)> {
        if !self.contains(k) {
            return None;
        }
        let (repr, conj): (Vec<i64>, bool) = if is_lex_positive(k) {
            (k.to_vec(), false)
        } else {
            (k.iter().map(|&c| -c).collect(), true)
        };
        let n = self.len_half();
        let mut lo = 0usize;
        let mut hi = n;
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.half_index(mid).cmp(repr.as_slice()) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some((mid, conj)),
            }
        }
        None
    }

    /// Enumerates the full nonzero lattice in lexicographic order.
    pub fn full_iter(&self) -> FullLatticeIter<'_> {
        FullLatticeIter {
            lattice: self,
            next: Some(vec![-(self.k_max - 1); self.d]),
        }
    }

    /// Per-axis tables of `exp(2 pi i x_j k / l_prime)` enabling phase
    /// evaluation without per-frequency trigonometry.
    pub fn phase_table(&self, x: &[f64]) -> PhaseTable {
        assert_eq!(x.len(), self.d, "point dimension mismatch");
        let span = (2 * self.k_max - 1) as usize;
        let offset = (self.k_max - 1) as usize;
        let axes = x
            .iter()
            .map(|&xj| {
                let theta = 2.0 * std::f64::consts::PI * xj / self.l_prime;
                let step = Complex64::new(theta.cos(), theta.sin());
                let mut table = vec![Complex64::new(0.0, 0.0); span];
                table[offset] = Complex64::new(1.0, 0.0);
                for t in 1..=offset {
                    table[offset + t] = table[offset + t - 1] * step;
                    table[offset - t] = table[offset + t].conj();
                }
                table
            })
            .collect();
        PhaseTable {
            axes,
            offset: offset as i64,
        }
    }
}

/// Lexicographic enumeration of the full nonzero lattice.
pub struct FullLatticeIter<'a> {
    lattice: &'a FrequencyLattice,
    next: Option<Vec<i64>>,
}

impl Iterator for FullLatticeIter<'_> {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        loop {
            let current = self.next.take()?;
            // advance the odometer before filtering the origin
            let mut succ = current.clone();
            let mut axis = succ.len();
            self.next = loop {
                if axis == 0 {
                    break None;
                }
                axis -= 1;
                if succ[axis] < self.lattice.k_max - 1 {
                    succ[axis] += 1;
                    for c in succ[axis + 1..].iter_mut() {
                        *c = -(self.lattice.k_max - 1);
                    }
                    break Some(succ);
                }
            };
            if current.iter().any(|&c| c != 0) {
                return Some(current);
            }
        }
    }
}

/// Precomputed complex exponentials for one spatial point.
pub struct PhaseTable {
    axes: Vec<Vec<Complex64>>,
    offset: i64,
}

impl PhaseTable {
    /// `exp(2 pi i (k . x) / l_prime)` for an on-lattice index vector.
    #[inline]
    pub fn phase(&self, k: &[i64]) -> Complex64 {
        let mut p = self.axes[0][(k[0] + self.offset) as usize];
        for (axis, &kj) in self.axes.iter().zip(k).skip(1) {
            p *= axis[(kj + self.offset) as usize];
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn line_lattice_counts() {
        // d=1, l'=20, k_max=2000: 3999 box points including the origin,
        // 3998 nonzero frequencies, 1999 stored representatives.
        let lat = FrequencyLattice::build(1, 20.0, 2000).unwrap();
        assert_eq!(lat.len_full(), 3998);
        assert_eq!(lat.len_half(), 1999);
        assert_eq!(lat.full_iter().count(), 3998);
    }

    #[test]
    fn plane_lattice_counts() {
        // d=2, l'=24, k_max=120: 239^2 - 1 nonzero frequencies.
        let lat = FrequencyLattice::build(2, 24.0, 120).unwrap();
        assert_eq!(lat.len_full(), 239 * 239 - 1);
        assert_eq!(lat.len_half(), (239 * 239 - 1) / 2);
        // lex-smallest stored representative has a zero leading component
        assert_eq!(lat.half_index(0), &[0, 1]);
    }

    #[test]
    fn smallest_line_lattice_is_plus_minus_one() {
        let lat = FrequencyLattice::build(1, 1.0, 2).unwrap();
        let full: Vec<Vec<i64>> = lat.full_iter().collect();
        assert_eq!(full, vec![vec![-1], vec![1]]);
        assert_eq!(lat.half_index(0), &[1]);
        assert_relative_eq!(lat.xi_norm(0), 1.0);
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(FrequencyLattice::build(0, 1.0, 4).is_err());
        assert!(FrequencyLattice::build(1, 0.0, 4).is_err());
        assert!(FrequencyLattice::build(1, -2.0, 4).is_err());
        assert!(FrequencyLattice::build(1, 1.0, 1).is_err());
        assert!(matches!(
            FrequencyLattice::build(3, 1.0, 1000),
            Err(LfpError::LatticeTooLarge { .. })
        ));
    }

    #[test]
    fn half_is_lex_sorted_and_mirror_free() {
        let lat = FrequencyLattice::build(2, 1.0, 5).unwrap();
        let stored: Vec<&[i64]> = lat.half_iter().map(|(_, k)| k).collect();
        for w in stored.windows(2) {
            assert!(w[0] < w[1], "half enumeration must be strictly lex-sorted");
        }
        for k in &stored {
            assert!(is_lex_positive(k));
            let neg: Vec<i64> = k.iter().map(|&c| -c).collect();
            let (pos, conj) = lat.position_of(&neg).unwrap();
            assert!(conj);
            assert_eq!(lat.half_index(pos), *k);
        }
        // every nonzero box point is reachable through exactly one representative
        assert_eq!(lat.full_iter().count(), 2 * stored.len());
    }

    #[test]
    fn position_lookup() {
        let lat = FrequencyLattice::build(1, 20.0, 2000).unwrap();
        assert_eq!(lat.position_of(&[5]), Some((4, false)));
        assert_eq!(lat.position_of(&[-5]), Some((4, true)));
        assert_eq!(lat.position_of(&[0]), None);
        assert_eq!(lat.position_of(&[2000]), None);
        assert_eq!(lat.position_of(&[1999]), Some((1998, false)));
    }

    #[test]
    fn phase_table_matches_direct_trigonometry() {
        let lat = FrequencyLattice::build(2, 24.0, 60).unwrap();
        let x = [0.37, -0.81];
        let table = lat.phase_table(&x);
        for (i, k) in lat.half_iter() {
            let arg = 2.0 * std::f64::consts::PI * (k[0] as f64 * x[0] + k[1] as f64 * x[1]) / 24.0;
            let direct = Complex64::new(arg.cos(), arg.sin());
            let fast = table.phase(k);
            assert!(
                (fast - direct).norm() < 1e-12,
                "phase recurrence drifted at i={i}, k={k:?}"
            );
        }
    }
}
