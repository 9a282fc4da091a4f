// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! One seeded execution from placement to verdict.

use serde::{Deserialize, Serialize};

use super::experiments::ElectionClass;
use super::placement::sample_initial;
use super::{ConfigError, Prepared};
use crate::error_models::ErrorDrawTiming;
use crate::geometry::{centroid, distance, LocalFrame, Point2};
use crate::rng::{derive_run_seed, RunStreams, SimRng};
use crate::robot::{random_frame, FrameMode, LookParams, RobotId, RobotState};
use crate::scheduler::{EngineParams, Schedule, Simulation, StepDecision};
use crate::termination::{
    convergence_reached, divergence_detected, gathering_victory, max_pairwise_distance,
    ExecutionTrace, Verdict, VerdictKind,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub run_seed: u64,
    pub verdict: Verdict,
    pub steps: u64,
    pub traveled: Vec<f64>,
    pub total_traveled: f64,
    /// Initial distance for two robots, otherwise the summed distance to
    /// the initial center of gravity.
    pub baseline: f64,
    pub normalized_fuel: f64,
    pub initial_positions: Vec<Point2>,
    pub final_positions: Vec<Point2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub election_class: Option<ElectionClass>,
    /// Largest distance of a two-robot target from the segment joining the
    /// robot to where it saw the other one.
    pub max_segment_deviation: f64,
    pub stuck_moves: u64,
    pub failed_computes: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// A simulation ready to step, with its adversary.
#[derive(Debug, Clone)]
pub struct Built {
    pub sim: Simulation,
    pub schedule: Schedule,
    pub schedule_rng: SimRng,
    pub initial: Vec<Point2>,
}

pub fn build_simulation(
    prepared: &Prepared,
    run_seed: u64,
    point_index: u64,
) -> Result<Built, ConfigError> {
    let cfg = &prepared.config;
    let mut streams = RunStreams::new(run_seed);
    let initial = sample_initial(&cfg.placement, cfg.robots, point_index, &mut streams.placement)?;
    let mut network = Vec::with_capacity(cfg.robots);
    for (i, &pos) in initial.iter().enumerate() {
        let frame = match cfg.frames {
            FrameMode::Identity => LocalFrame::identity(),
            FrameMode::Random | FrameMode::PerLook => random_frame(&mut streams.frames),
        };
        let mut robot =
            RobotState::new(RobotId(i as u32), pos, frame).with_color(prepared.initial_color);
        robot.compass = cfg.compass;
        robot.compass.initialize(&mut streams.frames);
        network.push(robot);
    }
    if cfg.error_draw == ErrorDrawTiming::Init && !cfg.vision.is_identity() {
        for robot in network.iter_mut() {
            robot.fixed_draws = (0..cfg.robots)
                .map(|_| cfg.vision.draw(&mut streams.perception))
                .collect();
        }
    }
    let schedule = match &cfg.script {
        Some(s) => Schedule::scripted(s.decisions.clone(), s.loop_from),
        None => Schedule::Random(cfg.scheduler.kind),
    };
    let params = EngineParams {
        scheduler: cfg.scheduler,
        look: LookParams {
            vision: cfg.vision,
            timing: cfg.error_draw,
            perception: cfg.scheduler.async_perception,
        },
        frames: cfg.frames,
        monitor_segment: cfg.robots == 2,
    };
    let schedule_rng = streams.schedule.clone();
    Ok(Built {
        sim: Simulation::new(network, prepared.algorithm.clone(), params, streams),
        schedule,
        schedule_rng,
        initial,
    })
}

pub fn baseline(initial: &[Point2]) -> f64 {
    match initial {
        [a, b] => distance(*a, *b),
        _ => match centroid(initial) {
            Ok(c) => initial.iter().map(|&p| distance(p, c)).sum(),
            Err(_) => 0.0,
        },
    }
}

fn evaluate(
    prepared: &Prepared,
    sim: &Simulation,
    trace: Option<&mut ExecutionTrace>,
    positions: &[Point2],
    initial_spread: f64,
) -> Option<Verdict> {
    let term = &prepared.termination;
    if term.divergence
        && divergence_detected(
            max_pairwise_distance(positions),
            initial_spread,
            term.divergence_factor,
        )
    {
        return Some(Verdict::Defeat {
            kind: VerdictKind::Divergence,
            witness: None,
        });
    }
    let trace = trace.map(|t| {
        t.record(sim);
        &*t
    });
    if let Some(t) = trace {
        if term.gathering_victory
            && gathering_victory(t, sim, prepared.config.scheduler.kind, term.expansion_limit)
        {
            return Some(Verdict::Victory {
                kind: VerdictKind::Gathering,
            });
        }
    }
    if term.convergence_victory
        && convergence_reached(positions, term.convergence_abs, term.convergence_rel)
    {
        return Some(Verdict::Victory {
            kind: VerdictKind::Convergence,
        });
    }
    if term.election {
        if let Some(leaders) = sim.current_leaders() {
            let kind = VerdictKind::Election;
            return Some(if leaders.iter().all(|&l| l == leaders[0]) {
                Verdict::Victory { kind }
            } else {
                Verdict::Defeat {
                    kind,
                    witness: None,
                }
            });
        }
    }
    let t = trace?;
    if term.gathering_defeat {
        if let Some(w) = t.gathering_defeat() {
            return Some(Verdict::Defeat {
                kind: VerdictKind::Gathering,
                witness: Some(w),
            });
        }
    }
    if term.convergence_defeat {
        if let Some(w) = t.convergence_defeat() {
            return Some(Verdict::Defeat {
                kind: VerdictKind::Convergence,
                witness: Some(w),
            });
        }
    }
    None
}

fn execute(
    prepared: &Prepared,
    run_seed: u64,
    point_index: u64,
    record: bool,
) -> Result<(RunOutcome, Vec<StepDecision>), ConfigError> {
    let Built {
        mut sim,
        mut schedule,
        mut schedule_rng,
        initial,
    } = build_simulation(prepared, run_seed, point_index)?;
    let cfg = &prepared.config;
    let n = cfg.robots;
    let initial_spread = max_pairwise_distance(&initial);
    let mut trace = prepared.termination.needs_trace().then(ExecutionTrace::new);
    if let Some(t) = trace.as_mut() {
        t.record(&sim);
    }
    let mut decisions = Vec::new();
    let mut positions = Vec::with_capacity(n);
    let mut verdict = Verdict::Timeout;
    for _ in 0..cfg.max_iterations {
        let Some(d) = schedule.next_decision(n, &mut schedule_rng) else {
            break;
        };
        sim.step(&d);
        if record {
            decisions.push(d);
        }
        positions.clear();
        positions.extend(sim.positions());
        if let Some(v) = evaluate(prepared, &sim, trace.as_mut(), &positions, initial_spread) {
            verdict = v;
            break;
        }
    }
    let traveled = sim.traveled().to_vec();
    let total: f64 = traveled.iter().sum();
    let base = baseline(&initial);
    let election_class = match verdict {
        Verdict::Victory {
            kind: VerdictKind::Election,
        } => Some(ElectionClass::Valid),
        Verdict::Defeat {
            kind: VerdictKind::Election,
            ..
        } => Some(ElectionClass::UndetectedError),
        _ => None,
    };
    let outcome = RunOutcome {
        run_seed,
        verdict,
        steps: sim.steps(),
        traveled,
        total_traveled: total,
        baseline: base,
        normalized_fuel: if base > 0.0 { total / base } else { 0.0 },
        initial_positions: initial,
        final_positions: sim.positions().collect(),
        election_class,
        max_segment_deviation: sim.max_segment_deviation(),
        stuck_moves: sim.stuck_moves(),
        failed_computes: sim.failed_computes(),
        warnings: prepared.warnings.clone(),
    };
    Ok((outcome, decisions))
}

/// Deterministic in `(prepared.config, run_seed)`.
pub fn run_single(prepared: &Prepared, run_seed: u64) -> Result<RunOutcome, ConfigError> {
    execute(prepared, run_seed, 0, false).map(|(o, _)| o)
}

/// Run `index` of a batch seeded with `master_seed`.
pub fn run_indexed(
    prepared: &Prepared,
    master_seed: u64,
    index: u64,
) -> Result<RunOutcome, ConfigError> {
    execute(prepared, derive_run_seed(master_seed, index), index, false).map(|(o, _)| o)
}

/// Also returns every scheduler decision, for witness files.
pub fn run_recorded(
    prepared: &Prepared,
    run_seed: u64,
    point_index: u64,
) -> Result<(RunOutcome, Vec<StepDecision>), ConfigError> {
    execute(prepared, run_seed, point_index, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::AlgorithmSpec;
    use crate::harness::{PlacementRule, ScenarioConfig};
    use crate::scheduler::SchedulerKind;

    fn config(alg: AlgorithmSpec, kind: SchedulerKind) -> ScenarioConfig {
        let mut c = ScenarioConfig::new(alg, 2);
        c.scheduler.kind = kind;
        c.placement = PlacementRule::UnitCirclePair;
        c.frames = FrameMode::Identity;
        c
    }

    #[test]
    fn fsync_midpoint_fuel_is_one() {
        let p = config(AlgorithmSpec::Midpoint, SchedulerKind::Fsync).prepare().unwrap();
        for seed in 0..50 {
            let o = run_single(&p, seed).unwrap();
            assert_eq!(
                o.verdict,
                Verdict::Victory {
                    kind: VerdictKind::Gathering
                }
            );
            assert_eq!(o.steps, 2);
            assert!((o.normalized_fuel - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_outcome() {
        let p = config(AlgorithmSpec::Fec, SchedulerKind::Async).prepare().unwrap();
        let a = run_single(&p, 99).unwrap();
        let b = run_single(&p, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn fec_converges_without_extra_fuel() {
        let p = config(AlgorithmSpec::Fec, SchedulerKind::Async).prepare().unwrap();
        for seed in 0..500 {
            let o = run_single(&p, seed).unwrap();
            assert!(o.verdict.is_victory(), "{:?}", o.verdict);
            assert!(o.total_traveled <= 1.0 + 1e-9);
            assert!(o.max_segment_deviation < 1e-9);
        }
    }

    #[test]
    fn multiplicity_fsync_wins_at_step_two() {
        let p = config(AlgorithmSpec::MidpointMultiplicity, SchedulerKind::Fsync)
            .prepare()
            .unwrap();
        let o = run_single(&p, 5).unwrap();
        assert!(o.verdict.is_victory());
        assert_eq!(o.steps, 2);
    }

    #[test]
    fn cog_large_errors_can_diverge() {
        let mut c = config(AlgorithmSpec::Cog, SchedulerKind::Fsync);
        c.vision = crate::error_models::VisionErrorSpec::relative(1.5, 0.95 * std::f64::consts::PI);
        let p = c.prepare().unwrap();
        let diverged = (0..2000)
            .filter(|&s| {
                matches!(
                    run_single(&p, s).unwrap().verdict,
                    Verdict::Defeat {
                        kind: VerdictKind::Divergence,
                        ..
                    }
                )
            })
            .count();
        assert!(diverged > 0);
    }

    #[test]
    fn random_frames_break_exact_midpoints() {
        let mut c = config(AlgorithmSpec::Midpoint, SchedulerKind::Fsync);
        c.frames = FrameMode::Random;
        let p = c.prepare().unwrap();
        let defeats = (0..200)
            .filter(|&s| !run_single(&p, s).unwrap().verdict.is_victory())
            .count();
        assert!(defeats > 0);
    }
}
