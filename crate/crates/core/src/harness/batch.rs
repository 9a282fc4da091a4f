// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Parallel batches.
//!
//! Runs are grouped in blocks of [`BLOCK_SIZE`] consecutive indices. Each
//! block is folded sequentially and blocks are merged in index order, so the
//! floating-point sums, and therefore the output, do not depend on how many
//! workers ran the blocks.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::experiments::ElectionClass;
use super::run::{run_indexed, RunOutcome};
use super::{ConfigError, Prepared};
use crate::termination::{Verdict, VerdictKind};

pub const BLOCK_SIZE: u64 = 1024;

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("batch has no runs: set `runs` or `budget_secs`")]
    Empty,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionCounts {
    pub valid: u64,
    pub detected: u64,
    pub undetected: u64,
}

impl ElectionCounts {
    pub fn add(&mut self, class: ElectionClass) {
        match class {
            ElectionClass::Valid => self.valid += 1,
            ElectionClass::DetectedPossibleError => self.detected += 1,
            ElectionClass::UndetectedError => self.undetected += 1,
        }
    }

    pub fn merge(&mut self, other: &ElectionCounts) {
        self.valid += other.valid;
        self.detected += other.detected;
        self.undetected += other.undetected;
    }

    pub fn total(&self) -> u64 {
        self.valid + self.detected + self.undetected
    }

    fn fraction(&self, v: u64) -> f64 {
        match self.total() {
            0 => 0.0,
            t => v as f64 / t as f64,
        }
    }

    pub fn valid_fraction(&self) -> f64 {
        self.fraction(self.valid)
    }

    pub fn detected_fraction(&self) -> f64 {
        self.fraction(self.detected)
    }

    pub fn undetected_fraction(&self) -> f64 {
        self.fraction(self.undetected)
    }
}

/// Summary of a batch. Fuel statistics skip timeouts and divergent runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub master_seed: u64,
    pub runs: u64,
    pub fuel_runs: u64,
    pub min_fuel: f64,
    pub max_fuel: f64,
    pub sum_fuel: f64,
    /// Over every run, timeouts included.
    pub max_total_traveled: f64,
    pub max_segment_deviation: f64,
    pub divergences: u64,
    pub timeouts: u64,
    pub failed_computes: u64,
    pub verdicts: BTreeMap<String, u64>,
    pub election: ElectionCounts,
    pub wall_time_secs: f64,
}

impl AggregateStats {
    pub fn empty(master_seed: u64) -> Self {
        Self {
            master_seed,
            runs: 0,
            fuel_runs: 0,
            min_fuel: f64::INFINITY,
            max_fuel: f64::NEG_INFINITY,
            sum_fuel: 0.0,
            max_total_traveled: 0.0,
            max_segment_deviation: 0.0,
            divergences: 0,
            timeouts: 0,
            failed_computes: 0,
            verdicts: BTreeMap::new(),
            election: ElectionCounts::default(),
            wall_time_secs: 0.0,
        }
    }

    pub fn add(&mut self, o: &RunOutcome) {
        self.runs += 1;
        *self.verdicts.entry(o.verdict.label()).or_insert(0) += 1;
        let diverged = matches!(
            o.verdict,
            Verdict::Defeat {
                kind: VerdictKind::Divergence,
                ..
            }
        );
        self.divergences += diverged as u64;
        self.timeouts += o.verdict.is_timeout() as u64;
        if !diverged && !o.verdict.is_timeout() {
            self.fuel_runs += 1;
            self.min_fuel = self.min_fuel.min(o.normalized_fuel);
            self.max_fuel = self.max_fuel.max(o.normalized_fuel);
            self.sum_fuel += o.normalized_fuel;
        }
        self.max_total_traveled = self.max_total_traveled.max(o.total_traveled);
        self.max_segment_deviation = self.max_segment_deviation.max(o.max_segment_deviation);
        self.failed_computes += o.failed_computes;
        if let Some(c) = o.election_class {
            self.election.add(c);
        }
    }

    /// Appends `other`, which must cover later run indices.
    pub fn merge(&mut self, other: &AggregateStats) {
        self.runs += other.runs;
        self.fuel_runs += other.fuel_runs;
        self.min_fuel = self.min_fuel.min(other.min_fuel);
        self.max_fuel = self.max_fuel.max(other.max_fuel);
        self.sum_fuel += other.sum_fuel;
        self.max_total_traveled = self.max_total_traveled.max(other.max_total_traveled);
        self.max_segment_deviation = self.max_segment_deviation.max(other.max_segment_deviation);
        self.divergences += other.divergences;
        self.timeouts += other.timeouts;
        self.failed_computes += other.failed_computes;
        for (k, v) in &other.verdicts {
            *self.verdicts.entry(k.clone()).or_insert(0) += v;
        }
        self.election.merge(&other.election);
    }

    pub fn avg_fuel(&self) -> f64 {
        if self.fuel_runs == 0 {
            f64::NAN
        } else {
            self.sum_fuel / self.fuel_runs as f64
        }
    }

    pub fn divergence_fraction(&self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            self.divergences as f64 / self.runs as f64
        }
    }

    pub fn count(&self, label: &str) -> u64 {
        self.verdicts.get(label).copied().unwrap_or(0)
    }
}

pub(crate) fn pool(parallelism: usize) -> Result<rayon::ThreadPool, BatchError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| BatchError::Pool(e.to_string()))
}

/// Runs blocks `[first, last)` of a `total`-run batch in parallel and
/// returns their results in block order.
pub(crate) fn run_blocks<T, F>(
    pool: &rayon::ThreadPool,
    first: u64,
    last: u64,
    total: u64,
    block: F,
) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> T + Sync,
{
    pool.install(|| {
        (first..last)
            .into_par_iter()
            .map(|b| {
                let start = b * BLOCK_SIZE;
                block(start..(start + BLOCK_SIZE).min(total))
            })
            .collect()
    })
}

type BlockResult = (AggregateStats, Vec<(u64, RunOutcome)>);

fn fold_block(
    prepared: &Prepared,
    indices: std::ops::Range<u64>,
    keep: bool,
) -> Result<BlockResult, ConfigError> {
    let seed = prepared.config.seed;
    let mut stats = AggregateStats::empty(seed);
    let mut kept = Vec::new();
    for i in indices {
        let o = run_indexed(prepared, seed, i)?;
        stats.add(&o);
        if keep {
            kept.push((i, o));
        }
    }
    Ok((stats, kept))
}

fn batch(
    prepared: &Prepared,
    parallelism: usize,
    keep: bool,
) -> Result<(AggregateStats, Vec<(u64, RunOutcome)>), BatchError> {
    let cfg = &prepared.config;
    let started = Instant::now();
    let pool = pool(parallelism)?;
    let mut stats = AggregateStats::empty(cfg.seed);
    let mut kept = Vec::new();
    let mut absorb = |parts: Vec<Result<BlockResult, ConfigError>>| {
        for part in parts {
            let (s, k) = part?;
            stats.merge(&s);
            kept.extend(k);
        }
        Ok::<(), BatchError>(())
    };
    match (cfg.runs, cfg.budget_secs) {
        (Some(0), _) | (None, None) => return Err(BatchError::Empty),
        (Some(runs), _) => {
            let blocks = runs.div_ceil(BLOCK_SIZE);
            absorb(run_blocks(&pool, 0, blocks, runs, |r| fold_block(prepared, r, keep)))?;
        }
        (None, Some(budget)) => {
            // Whole waves of full blocks, so the achieved count can be
            // replayed exactly with `runs`.
            let wave = parallelism.max(1) as u64;
            let mut next = 0;
            while started.elapsed().as_secs_f64() < budget {
                let total = (next + wave) * BLOCK_SIZE;
                absorb(run_blocks(&pool, next, next + wave, total, |r| {
                    fold_block(prepared, r, keep)
                }))?;
                next += wave;
            }
        }
    }
    stats.wall_time_secs = started.elapsed().as_secs_f64();
    Ok((stats, kept))
}

pub fn run_batch(prepared: &Prepared, parallelism: usize) -> Result<AggregateStats, BatchError> {
    batch(prepared, parallelism, false).map(|(s, _)| s)
}

/// Like [`run_batch`], also returning every outcome in run order.
pub fn run_batch_detailed(
    prepared: &Prepared,
    parallelism: usize,
) -> Result<(AggregateStats, Vec<(u64, RunOutcome)>), BatchError> {
    batch(prepared, parallelism, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::AlgorithmSpec;
    use crate::harness::{PlacementRule, ScenarioConfig};
    use crate::scheduler::SchedulerKind;

    fn fec(runs: u64) -> Prepared {
        let mut c = ScenarioConfig::new(AlgorithmSpec::Fec, 2);
        c.scheduler.kind = SchedulerKind::Async;
        c.placement = PlacementRule::UnitCirclePair;
        c.runs = Some(runs);
        c.seed = 17;
        c.prepare().unwrap()
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let p = fec(3000);
        let mut a = run_batch(&p, 1).unwrap();
        let mut b = run_batch(&p, 4).unwrap();
        a.wall_time_secs = 0.0;
        b.wall_time_secs = 0.0;
        assert_eq!(a, b);
        assert_eq!(a.runs, 3000);
        assert!(a.min_fuel <= a.avg_fuel() && a.avg_fuel() <= a.max_fuel);
        assert!(a.max_fuel <= 1.0 + 1e-9);
    }

    #[test]
    fn empty_batch_is_an_error() {
        let p = fec(0);
        assert!(matches!(run_batch(&p, 2), Err(BatchError::Empty)));
    }

    #[test]
    fn detailed_keeps_order() {
        let p = fec(2100);
        let (stats, runs) = run_batch_detailed(&p, 3).unwrap();
        assert_eq!(runs.len() as u64, stats.runs);
        assert!(runs.windows(2).all(|w| w[0].0 + 1 == w[1].0));
    }

    #[test]
    fn budget_runs_whole_blocks() {
        let mut p = fec(0);
        p.config.runs = None;
        p.config.budget_secs = Some(0.05);
        let s = run_batch(&p, 2).unwrap();
        assert!(s.runs > 0);
        assert_eq!(s.runs % BLOCK_SIZE, 0);
    }
}
