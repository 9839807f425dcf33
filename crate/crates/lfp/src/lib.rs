//! Frequency-domain modeling of wide two-layer ReLU network training.
//!
//! Gradient descent on a wide two-layer ReLU network fits its target from
//! low frequencies to high. This crate turns that observation into a
//! quantitative linear model and the tooling to test it end to end:
//!
//! - [`lattice`] / [`coeff`] / [`spectrum`]: a truncated frequency lattice,
//!   the per-frequency rate `c(xi) = A/|xi|^(d+3) + B/|xi|^(d+1)` whose
//!   constants come from the network's initial parameters, and Hermitian
//!   spectra of real functions with their weighted capacity norms.
//! - [`solver`]: the long-time limit of the model as a kernel ridge
//!   regression in dual form, with a vanishing-regularization path to the
//!   minimum-norm interpolant.
//! - [`flow`]: direct time integration of the per-frequency dynamics, a
//!   finite-dimensional minimum-norm template, and a three-route
//!   equivalence harness (flow limit vs ridge limit vs closed form).
//! - [`nn`] / [`train`]: the reference network and from-scratch full-batch
//!   training so the model can be checked against the real thing.
//! - [`bounds`]: Rademacher-complexity and a priori generalization bounds
//!   driven by the same capacity norm.
//! - [`experiment`] / [`plot`] / [`presets`]: reproducible pipelines
//!   (dataset generation, NN-vs-model comparison, frequency sweep,
//!   cross-verification) with manifests and deterministic CSV/SVG output.
//!
//! Everything is deterministic given seeds: fixed-order reductions, seeded
//! generators and shortest-round-trip float formatting make reruns
//! byte-identical.

pub mod bounds;
pub mod coeff;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod flow;
pub mod lattice;
pub mod nn;
pub mod plot;
pub mod presets;
pub mod solver;
pub mod spectrum;
pub mod train;
mod util;

pub use coeff::LfpCoefficients;
pub use dataset::Dataset;
pub use error::{LfpError, Result};
pub use lattice::FrequencyLattice;
pub use nn::{InitSpec, NetForm, ParamDist, TwoLayerNet};
pub use presets::preset;
pub use solver::{solve_lfp, InterceptMode, LfpKernel, LfpSolve, RidgeConfig};
pub use spectrum::{fp_norm, gamma_l2_norm, SpectralSolution};
pub use train::{train, Optimizer, ParamSelection, StopReason, TrainConfig, TrainRecord};
