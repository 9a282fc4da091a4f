// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded Monte-Carlo runs, batches and the named experiments.

use thiserror::Error;

use crate::algorithms::{AlgorithmError, RegistryError};

mod batch;
mod config;
mod experiments;
mod placement;
mod replay;
mod run;

pub use batch::{run_batch, run_batch_detailed, AggregateStats, BatchError, ElectionCounts, BLOCK_SIZE};
pub use config::{Prepared, ScenarioConfig, ScriptSpec, CONFIG_VERSION, DEFAULT_MAX_ITERATIONS};
pub use experiments::{
    election_curve, election_point, election_sweep, float_pathology_config,
    float_pathology_experiment, with_tries, CurvePoint, ElectionClass, ElectionPoint, ElectionSweep,
    LeaderView, Mover, PathologyResult,
};
pub use placement::{sample_initial, Bounds, PlacementRule, ELECTION_BOUNDS};
pub use replay::{
    read_witness, replay, write_witness, ReplayError, ReplayReport, ReplayStep, WitnessFile,
    WitnessHeader, WITNESS_VERSION,
};
pub use run::{
    baseline, build_simulation, run_indexed, run_recorded, run_single, Built, RunOutcome,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed configuration: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}
