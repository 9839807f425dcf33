//! Experiment orchestration: dataset generation, reproducibility manifests,
//! and the bundled pipelines (solver/flow cross-verification, NN-vs-LFP
//! comparison, frequency sweep with capacity bounds).

pub mod compare;
pub mod data;
pub mod manifest;
pub mod sweep;
pub mod verify;
