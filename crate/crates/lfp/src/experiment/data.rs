//! Seeded dataset generators for the bundled experiment pipelines.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{LfpError, Result};

/// Built-in dataset recipes. All generators are deterministic in the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenKind {
    /// `m` nonuniform samples of a seeded random low-frequency target on
    /// `[-1, 1]`.
    Random1d { m: usize },
    /// The four corner points `(+-a, +-a)` on `[-1, 1]^2`, labelled `+1`
    /// where the coordinates share a sign and `-1` otherwise.
    Xor2d { a: f64 },
    /// Five seeded points in `[-1, 1]^2` with random labels and no symmetry.
    Asym2d,
    /// `m` uniform samples of `sin(2 pi v x)` on `[0, 1)`: `x_i = i / m`.
    Sine { v: u32, m: usize },
}

impl GenKind {
    /// Stable file stem for generated artifacts.
    pub fn file_stem(&self) -> String {
        match self {
            GenKind::Random1d { m } => format!("random_1d_m{m}"),
            GenKind::Xor2d { .. } => "xor_2d".to_string(),
            GenKind::Asym2d => "asym_2d".to_string(),
            GenKind::Sine { v, m } => format!("sine_v{v}_m{m}"),
        }
    }
}

/// Minimum pairwise separation enforced on randomly placed sample points,
/// as a fraction of the domain edge divided by the point count.
const SEPARATION_FACTOR: f64 = 0.25;
const PLACEMENT_ATTEMPTS: usize = 100_000;

/// Generates a dataset from a recipe. Identical `(kind, seed)` pairs yield
/// byte-identical CSV serializations.
pub fn gen_dataset(kind: &GenKind, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *kind {
        GenKind::Random1d { m } => random_1d(m, &mut rng),
        GenKind::Xor2d { a } => xor_2d(a),
        GenKind::Asym2d => scattered(5, 2, &mut rng),
        GenKind::Sine { v, m } => sine(v, m),
    }
}

/// Rejection-samples `m` points in `[-1, 1]^d` keeping pairwise (Euclidean)
/// separation at least `SEPARATION_FACTOR * 2 / m`.
fn place_points(m: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let sep = SEPARATION_FACTOR * 2.0 / m as f64;
    let mut xs: Vec<f64> = Vec::with_capacity(m * d);
    let mut attempts = 0;
    while xs.len() < m * d {
        if attempts > PLACEMENT_ATTEMPTS {
            return Err(LfpError::Dataset(format!(
                "could not place {m} separated points in d={d}"
            )));
        }
        attempts += 1;
        let candidate: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ok = xs.chunks(d).all(|p| {
            let dist2: f64 = p
                .iter()
                .zip(&candidate)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dist2.sqrt() >= sep
        });
        if ok {
            xs.extend_from_slice(&candidate);
        }
    }
    Ok(xs)
}

fn random_1d(m: usize, rng: &mut ChaCha8Rng) -> Result<Dataset> {
    if m < 2 {
        return Err(LfpError::InvalidParameter(
            "random_1d needs at least 2 samples".into(),
        ));
    }
    // Low-frequency random trigonometric target: smooth, seeded, bounded.
    let c0 = rng.gen_range(-0.5..0.5);
    let coeffs: Vec<(f64, f64)> = (1..=3)
        .map(|j| {
            let scale = 0.8 / j as f64;
            (
                rng.gen_range(-scale..scale),
                rng.gen_range(-scale..scale),
            )
        })
        .collect();
    let target = |x: f64| {
        c0 + coeffs
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let arg = std::f64::consts::PI * (i + 1) as f64 * x;
                a * arg.sin() + b * arg.cos()
            })
            .sum::<f64>()
    };
    let mut xs = place_points(m, 1, rng)?;
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ys: Vec<f64> = xs.iter().map(|&x| target(x)).collect();
    Dataset::with_domain(1, xs, ys, vec![(-1.0, 1.0)])
}

fn xor_2d(a: f64) -> Result<Dataset> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(LfpError::InvalidParameter(format!(
            "xor_2d offset must lie in (0, 1], got {a}"
        )));
    }
    // Corners in lexicographic order; +1 where the signs agree.
    let xs = vec![-a, -a, -a, a, a, -a, a, a];
    let ys = vec![1.0, -1.0, -1.0, 1.0];
    Dataset::with_domain(2, xs, ys, vec![(-1.0, 1.0), (-1.0, 1.0)])
}

fn scattered(m: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Dataset> {
    let xs = place_points(m, d, rng)?;
    let ys: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Dataset::with_domain(d, xs, ys, vec![(-1.0, 1.0); d])
}

fn sine(v: u32, m: usize) -> Result<Dataset> {
    if v == 0 {
        return Err(LfpError::InvalidParameter(
            "sine frequency must be at least 1".into(),
        ));
    }
    if m < 2 {
        return Err(LfpError::InvalidParameter(
            "sine needs at least 2 samples".into(),
        ));
    }
    let xs: Vec<f64> = (0..m).map(|i| i as f64 / m as f64).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| (2.0 * std::f64::consts::PI * v as f64 * x).sin())
        .collect();
    Dataset::with_domain(1, xs, ys, vec![(0.0, 1.0)])
}

/// The sine target itself, for test grids and risk estimates.
pub fn sine_target(v: u32) -> impl Fn(f64) -> f64 {
    move |x| (2.0 * std::f64::consts::PI * v as f64 * x).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn same_seed_gives_identical_bytes() {
        for kind in [
            GenKind::Random1d { m: 12 },
            GenKind::Xor2d { a: 0.5 },
            GenKind::Asym2d,
            GenKind::Sine { v: 3, m: 20 },
        ] {
            let a = gen_dataset(&kind, 11).unwrap().to_csv_string();
            let b = gen_dataset(&kind, 11).unwrap().to_csv_string();
            assert_eq!(a, b, "{kind:?} must be deterministic");
        }
    }

    #[test]
    fn different_seeds_differ_for_random_kinds() {
        let a = gen_dataset(&GenKind::Random1d { m: 12 }, 1).unwrap();
        let b = gen_dataset(&GenKind::Random1d { m: 12 }, 2).unwrap();
        assert_ne!(a.to_csv_string(), b.to_csv_string());
    }

    #[test]
    fn sine_uses_the_uniform_grid_recipe() {
        let data = gen_dataset(&GenKind::Sine { v: 1, m: 20 }, 0).unwrap();
        assert_eq!(data.len(), 20);
        for i in 0..20 {
            assert_eq!(data.x(i)[0], i as f64 / 20.0);
            assert_relative_eq!(
                data.y(i),
                (2.0 * std::f64::consts::PI * (i as f64 / 20.0)).sin(),
                epsilon = 1e-15
            );
        }
        assert_eq!(data.domain(), &[(0.0, 1.0)]);
    }

    #[test]
    fn xor_corners_in_lexicographic_order() {
        let data = gen_dataset(&GenKind::Xor2d { a: 0.5 }, 0).unwrap();
        assert_eq!(data.len(), 4);
        assert_eq!(data.x(0), &[-0.5, -0.5]);
        assert_eq!(data.x(1), &[-0.5, 0.5]);
        assert_eq!(data.x(2), &[0.5, -0.5]);
        assert_eq!(data.x(3), &[0.5, 0.5]);
        assert_eq!(data.ys(), &[1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn random_points_respect_the_separation_floor() {
        let data = gen_dataset(&GenKind::Random1d { m: 12 }, 5).unwrap();
        let sep = SEPARATION_FACTOR * 2.0 / 12.0;
        for i in 0..data.len() {
            for j in (i + 1)..data.len() {
                assert!((data.x(i)[0] - data.x(j)[0]).abs() >= sep);
            }
        }
    }

    #[test]
    fn asym_2d_has_five_points_without_symmetry() {
        let data = gen_dataset(&GenKind::Asym2d, 3).unwrap();
        assert_eq!(data.len(), 5);
        assert_eq!(data.dim(), 2);
        // no point is the negation of another (asymmetry)
        for i in 0..5 {
            for j in 0..5 {
                let mirrored = (data.x(i)[0] + data.x(j)[0]).abs() < 1e-12
                    && (data.x(i)[1] + data.x(j)[1]).abs() < 1e-12;
                assert!(!mirrored);
            }
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(gen_dataset(&GenKind::Sine { v: 0, m: 20 }, 0).is_err());
        assert!(gen_dataset(&GenKind::Sine { v: 1, m: 1 }, 0).is_err());
        assert!(gen_dataset(&GenKind::Random1d { m: 1 }, 0).is_err());
        assert!(gen_dataset(&GenKind::Xor2d { a: 0.0 }, 0).is_err());
        assert!(gen_dataset(&GenKind::Xor2d { a: 1.5 }, 0).is_err());
    }

    #[test]
    fn kind_round_trips_through_json() {
        let kind = GenKind::Sine { v: 4, m: 20 };
        let text = serde_json::to_string(&kind).unwrap();
        assert_eq!(text, r#"{"kind":"sine","v":4,"m":20}"#);
        let back: GenKind = serde_json::from_str(&text).unwrap();
        assert_eq!(back, kind);
    }
}
