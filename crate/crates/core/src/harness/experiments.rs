// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Named experiments: election error maps and the adjacent-float stall.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::batch::{pool, run_batch, run_blocks, BatchError, ElectionCounts, BLOCK_SIZE};
use super::run::{build_simulation, Built};
use super::{ConfigError, PlacementRule, Prepared, ScenarioConfig, ScriptSpec};
use crate::algorithms::AlgorithmSpec;
use crate::geometry::Point2;
use crate::rng::derive_run_seed;
use crate::robot::FrameMode;
use crate::scheduler::{SchedulerKind, StepDecision};
use crate::termination::TerminationConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElectionClass {
    Valid,
    DetectedPossibleError,
    UndetectedError,
}

impl ElectionClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ElectionClass::Valid => "valid",
            ElectionClass::DetectedPossibleError => "detected_possible_error",
            ElectionClass::UndetectedError => "undetected_error",
        }
    }
}

impl fmt::Display for ElectionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElectionClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "valid" => Ok(ElectionClass::Valid),
            "detected_possible_error" => Ok(ElectionClass::DetectedPossibleError),
            "undetected_error" => Ok(ElectionClass::UndetectedError),
            other => Err(format!("unknown election class `{other}`")),
        }
    }
}

/// What one robot concluded at an election point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeaderView {
    /// Network index of the chosen leader.
    Robot(usize),
    Moved,
    Undecided,
}

impl fmt::Display for LeaderView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeaderView::Robot(i) => write!(f, "r{}", i + 1),
            LeaderView::Moved => f.write_str("moved"),
            LeaderView::Undecided => f.write_str("none"),
        }
    }
}

impl FromStr for LeaderView {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "moved" => Ok(LeaderView::Moved),
            "none" => Ok(LeaderView::Undecided),
            _ => s
                .strip_prefix('r')
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&n| n >= 1)
                .map(|n| LeaderView::Robot(n - 1))
                .ok_or_else(|| format!("bad leader `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectionPoint {
    pub index: u64,
    pub positions: Vec<Point2>,
    pub class: ElectionClass,
    pub leaders: Vec<LeaderView>,
}

/// Every robot looks (with its own error draws) and runs the election once.
pub fn election_point(
    prepared: &Prepared,
    master_seed: u64,
    index: u64,
) -> Result<ElectionPoint, ConfigError> {
    let seed = derive_run_seed(master_seed, index);
    let Built { mut sim, initial, .. } = build_simulation(prepared, seed, index)?;
    sim.step(&StepDecision::Fsync);
    let leaders: Vec<LeaderView> = sim
        .network
        .iter()
        .map(|r| {
            if r.scrambled || r.pending_local_nonzero {
                LeaderView::Moved
            } else {
                r.leader.map_or(LeaderView::Undecided, LeaderView::Robot)
            }
        })
        .collect();
    let class = if leaders.contains(&LeaderView::Moved) {
        ElectionClass::DetectedPossibleError
    } else if matches!(leaders[0], LeaderView::Robot(_)) && leaders.iter().all(|l| *l == leaders[0])
    {
        ElectionClass::Valid
    } else {
        ElectionClass::UndetectedError
    };
    Ok(ElectionPoint {
        index,
        positions: initial,
        class,
        leaders,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectionSweep {
    pub counts: ElectionCounts,
    /// Empty unless points were requested.
    pub points: Vec<ElectionPoint>,
    pub wall_time_secs: f64,
}

pub fn election_sweep(
    prepared: &Prepared,
    points: u64,
    parallelism: usize,
    keep_points: bool,
) -> Result<ElectionSweep, BatchError> {
    if points == 0 {
        return Err(BatchError::Empty);
    }
    let started = Instant::now();
    let pool = pool(parallelism)?;
    let seed = prepared.config.seed;
    let blocks = run_blocks(&pool, 0, points.div_ceil(BLOCK_SIZE), points, |range| {
        let mut counts = ElectionCounts::default();
        let mut kept = Vec::new();
        for i in range {
            let p = election_point(prepared, seed, i)?;
            counts.add(p.class);
            if keep_points {
                kept.push(p);
            }
        }
        Ok::<_, ConfigError>((counts, kept))
    });
    let mut sweep = ElectionSweep {
        counts: ElectionCounts::default(),
        points: Vec::new(),
        wall_time_secs: 0.0,
    };
    for b in blocks {
        let (c, k) = b?;
        sweep.counts.merge(&c);
        sweep.points.extend(k);
    }
    sweep.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(sweep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub nb_tries: u32,
    pub counts: ElectionCounts,
}

/// Same points, each number of virtual checks in `tries`.
pub fn election_curve(
    config: &ScenarioConfig,
    points: u64,
    tries: &[u32],
    parallelism: usize,
) -> Result<Vec<CurvePoint>, BatchError> {
    tries
        .iter()
        .map(|&t| {
            let mut cfg = config.clone();
            cfg.algorithm = with_tries(&cfg.algorithm, t);
            let prepared = cfg.prepare()?;
            let sweep = election_sweep(&prepared, points, parallelism, false)?;
            Ok(CurvePoint {
                nb_tries: t,
                counts: sweep.counts,
            })
        })
        .collect()
}

/// The reliable variant of an election spec with `nb_tries` virtual checks.
/// Other algorithms are returned unchanged.
pub fn with_tries(spec: &AlgorithmSpec, nb_tries: u32) -> AlgorithmSpec {
    match spec.clone() {
        AlgorithmSpec::Election { params } => AlgorithmSpec::ReliableElection {
            params,
            nb_tries,
            scramble_radius: None,
            vision: None,
        },
        AlgorithmSpec::ReliableElection {
            params,
            scramble_radius,
            vision,
            ..
        } => AlgorithmSpec::ReliableElection {
            params,
            nb_tries,
            scramble_radius,
            vision,
        },
        other => other,
    }
}

/// Which robot of the adjacent-float pair keeps moving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mover {
    R1,
    R2,
}

impl Mover {
    fn index(self) -> u32 {
        match self {
            Mover::R1 => 0,
            Mover::R2 => 1,
        }
    }
}

/// One robot repeatedly jumps to the midpoint while the other stays put,
/// until the pair either meets exactly or the midpoint rounds onto the
/// mover.
pub fn float_pathology_config(mover: Mover, attempts: u64, seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(AlgorithmSpec::Midpoint, 2);
    cfg.scheduler.kind = SchedulerKind::Ssync;
    cfg.frames = FrameMode::Identity;
    cfg.placement = PlacementRule::FloatPathologyPair;
    cfg.termination = TerminationConfig {
        gathering_victory: Some(true),
        gathering_defeat: Some(false),
        convergence_victory: Some(false),
        convergence_defeat: Some(true),
        divergence: Some(false),
        ..TerminationConfig::default()
    };
    cfg.script = Some(ScriptSpec {
        decisions: vec![StepDecision::Ssync {
            robots: vec![mover.index()],
        }],
        loop_from: Some(0),
    });
    cfg.runs = Some(attempts);
    cfg.seed = seed;
    cfg
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathologyResult {
    pub mover: Mover,
    pub attempts: u64,
    /// Runs declared a convergence failure because of a stalled midpoint.
    pub float_stuck: u64,
    pub gathered: u64,
    pub other: u64,
}

impl PathologyResult {
    pub fn stuck_fraction(&self) -> f64 {
        self.float_stuck as f64 / self.attempts as f64
    }
}

pub fn float_pathology_experiment(
    mover: Mover,
    attempts: u64,
    seed: u64,
    parallelism: usize,
) -> Result<PathologyResult, BatchError> {
    let prepared = float_pathology_config(mover, attempts, seed).prepare()?;
    let stats = run_batch(&prepared, parallelism)?;
    let float_stuck = stats.count("defeat_convergence_float_stuck");
    let gathered = stats.count("victory_gathering");
    Ok(PathologyResult {
        mover,
        attempts: stats.runs,
        float_stuck,
        gathered,
        other: stats.runs - float_stuck - gathered,
    })
}
