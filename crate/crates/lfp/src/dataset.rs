//! Training data: sample points with scalar targets and a bounding domain.

use std::io::Write;
use std::path::Path;

use crate::error::{LfpError, Result};

/// A finite set of distinct sample points `x_i` in `R^d` with scalar targets
/// `y_i`, plus an axis-aligned box containing every `x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    d: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
    domain: Vec<(f64, f64)>,
}

impl Dataset {
    /// Builds a dataset from flattened row-major points; the domain becomes
    /// the bounding box of the samples.
    pub fn new(d: usize, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let domain = bounding_box(d, &xs)?;
        Self::with_domain(d, xs, ys, domain)
    }

    /// Builds a dataset with an explicit domain box, which must contain all
    /// sample points.
    pub fn with_domain(
        d: usize,
        xs: Vec<f64>,
        ys: Vec<f64>,
        domain: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if d == 0 {
            return Err(LfpError::Dataset("dimension must be >= 1".into()));
        }
        if ys.is_empty() {
            return Err(LfpError::Dataset("dataset must contain a sample".into()));
        }
        if xs.len() != ys.len() * d {
            return Err(LfpError::DimensionMismatch {
                expected: ys.len() * d,
                got: xs.len(),
            });
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(LfpError::Dataset("values must be finite".into()));
        }
        if domain.len() != d {
            return Err(LfpError::DimensionMismatch {
                expected: d,
                got: domain.len(),
            });
        }
        for (j, &(lo, hi)) in domain.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(LfpError::Dataset(format!(
                    "domain axis {j} is not a finite interval: [{lo}, {hi}]"
                )));
            }
        }
        for (i, x) in xs.chunks_exact(d).enumerate() {
            for (j, (&xj, &(lo, hi))) in x.iter().zip(&domain).enumerate() {
                if xj < lo || xj > hi {
                    return Err(LfpError::Dataset(format!(
                        "sample {i} coordinate {j} = {xj} escapes the domain [{lo}, {hi}]"
                    )));
                }
            }
        }
        for i in 0..ys.len() {
            for j in (i + 1)..ys.len() {
                if xs[i * d..(i + 1) * d] == xs[j * d..(j + 1) * d] {
                    return Err(LfpError::Dataset(format!(
                        "samples {i} and {j} share the same point"
                    )));
                }
            }
        }
        Ok(Self { d, xs, ys, domain })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    /// Spatial dimension.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Coordinates of the `i`-th sample.
    pub fn x(&self, i: usize) -> &[f64] {
        &self.xs[i * self.d..(i + 1) * self.d]
    }

    /// Target of the `i`-th sample.
    pub fn y(&self, i: usize) -> f64 {
        self.ys[i]
    }

    /// All coordinates, flattened row-major.
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// All targets.
    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Axis-aligned box containing every sample.
    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    /// Serializes as CSV with header `x1,..,xd,y`. Floats are written in
    /// Rust's shortest round-trip form, so output is byte-deterministic.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for j in 1..=self.d {
            out.push_str(&format!("x{j},"));
        }
        out.push_str("y\n");
        for i in 0..self.len() {
            for &xj in self.x(i) {
                out.push_str(&format!("{xj},"));
            }
            out.push_str(&format!("{}\n", self.y(i)));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    /// Parses the CSV schema produced by [`to_csv_string`](Self::to_csv_string).
    /// The derived domain is the samples' bounding box.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| LfpError::Dataset("empty csv".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 2 || cols[cols.len() - 1] != "y" {
            return Err(LfpError::Dataset(format!(
                "expected header x1,..,xd,y; got {header:?}"
            )));
        }
        let d = cols.len() - 1;
        for (j, &c) in cols[..d].iter().enumerate() {
            if c != format!("x{}", j + 1) {
                return Err(LfpError::Dataset(format!(
                    "expected header column x{}, got {c:?}",
                    j + 1
                )));
            }
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != d + 1 {
                return Err(LfpError::Dataset(format!(
                    "row {} has {} fields, expected {}",
                    lineno + 2,
                    fields.len(),
                    d + 1
                )));
            }
            for (j, f) in fields.iter().enumerate() {
                let v: f64 = f.parse().map_err(|_| {
                    LfpError::Dataset(format!("row {}: cannot parse {f:?}", lineno + 2))
                })?;
                if j < d {
                    xs.push(v);
                } else {
                    ys.push(v);
                }
            }
        }
        Self::new(d, xs, ys)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }
}

fn bounding_box(d: usize, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
    if d == 0 || xs.is_empty() || xs.len() % d != 0 {
        return Err(LfpError::Dataset(
            "cannot derive a domain from empty or ragged coordinates".into(),
        ));
    }
    let mut domain = vec![(f64::INFINITY, f64::NEG_INFINITY); d];
    for x in xs.chunks_exact(d) {
        for (j, &xj) in x.iter().enumerate() {
            domain[j].0 = domain[j].0.min(xj);
            domain[j].1 = domain[j].1.max(xj);
        }
    }
    Ok(domain)
}
