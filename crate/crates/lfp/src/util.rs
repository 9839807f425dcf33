//! Small numeric helpers: compensated summation and rank statistics.

/// Neumaier-compensated accumulator.
///
/// Keeps long reductions (spectral norms, parameter statistics) accurate to a
/// few ulps independent of length, which some downstream identities rely on
/// at the 1e-14 level.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Ranks with ties assigned their average rank (1-based).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // indices i..=j share a value; average of ranks i+1 ..= j+1
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation of two equally long samples.
///
/// Returns `None` for samples shorter than 2 or with zero rank variance.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..a.len() {
        let dx = ra[i] - mean;
        let dy = rb[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kahan_recovers_cancelling_series() {
        // 1 + 1e-16 repeated: naive summation loses the small terms entirely.
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..1_000_000 {
            acc.add(1e-16);
        }
        assert_relative_eq!(acc.value(), 1.0 + 1e-10, max_relative = 1e-12);
    }

    #[test]
    fn spearman_perfect_and_reversed() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let up = [2.0, 4.0, 6.0, 8.0, 10.0];
        let down = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert_relative_eq!(spearman(&a, &up).unwrap(), 1.0);
        assert_relative_eq!(spearman(&a, &down).unwrap(), -1.0);
    }

    #[test]
    fn spearman_handles_ties_and_degenerate_input() {
        let a = [1.0, 1.0, 2.0, 3.0];
        let b = [1.0, 2.0, 3.0, 4.0];
        let rho = spearman(&a, &b).unwrap();
        assert!(rho > 0.8 && rho <= 1.0);
        assert!(spearman(&[1.0, 1.0], &[1.0, 2.0]).is_none());
        assert!(spearman(&[1.0], &[2.0]).is_none());
    }
}
