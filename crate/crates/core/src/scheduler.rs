// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! FSYNC, SSYNC and ASYNC activation and the step engine.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::algorithms::{Algorithm, ComputeInput, LeaderChoice};
use crate::geometry::{distance, Point2};
use crate::rng::{RunStreams, SimRng};
use crate::robot::{
    advance_move, look, random_frame, AsyncPerception, FrameMode, LookParams, NonRigidAdversary,
    Phase, Rigidity, RobotState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerKind {
    #[serde(alias = "FSYNC")]
    Fsync,
    #[serde(alias = "SSYNC")]
    Ssync,
    #[default]
    #[serde(alias = "ASYNC")]
    Async,
}

impl std::fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SchedulerKind::Fsync => "FSYNC",
            SchedulerKind::Ssync => "SSYNC",
            SchedulerKind::Async => "ASYNC",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerConfig {
    pub kind: SchedulerKind,
    pub rigidity: Rigidity,
    pub async_perception: AsyncPerception,
    pub non_rigid_adversary: NonRigidAdversary,
}

impl SchedulerConfig {
    pub fn new(kind: SchedulerKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self.rigidity {
            Rigidity::NonRigid { delta } if !(delta > 0.0 && delta.is_finite()) => {
                Err("non-rigid delta must be positive and finite".into())
            }
            _ => Ok(()),
        }
    }
}

/// Which robots act in one step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepDecision {
    Fsync,
    Ssync { robots: Vec<u32> },
    Async { robot: u32 },
}

impl StepDecision {
    pub fn activates(&self, robot: usize) -> bool {
        match self {
            StepDecision::Fsync => true,
            StepDecision::Ssync { robots } => robots.contains(&(robot as u32)),
            StepDecision::Async { robot: r } => *r as usize == robot,
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), String> {
        match self {
            StepDecision::Fsync => Ok(()),
            StepDecision::Ssync { robots } => {
                if robots.is_empty() {
                    return Err("SSYNC step activates nobody".into());
                }
                match robots.iter().find(|&&r| r as usize >= n) {
                    Some(r) => Err(format!("robot {r} out of range")),
                    None => Ok(()),
                }
            }
            StepDecision::Async { robot } if *robot as usize >= n => {
                Err(format!("robot {robot} out of range"))
            }
            StepDecision::Async { .. } => Ok(()),
        }
    }
}

/// Draws the randomized adversary's next choice.
pub fn draw_decision<R: Rng + ?Sized>(kind: SchedulerKind, n: usize, rng: &mut R) -> StepDecision {
    match kind {
        SchedulerKind::Fsync => StepDecision::Fsync,
        SchedulerKind::Async => StepDecision::Async {
            robot: rng.random_range(0..n as u32),
        },
        SchedulerKind::Ssync => {
            let robots = if n < 64 {
                let mask = rng.random_range(1..(1u64 << n));
                (0..n as u32).filter(|i| mask >> i & 1 == 1).collect()
            } else {
                loop {
                    let v: Vec<u32> = (0..n as u32).filter(|_| rng.random_bool(0.5)).collect();
                    if !v.is_empty() {
                        break v;
                    }
                }
            };
            StepDecision::Ssync { robots }
        }
    }
}

/// Every choice the adversary could make in one step.
pub fn all_decisions(kind: SchedulerKind, n: usize) -> Vec<StepDecision> {
    match kind {
        SchedulerKind::Fsync => vec![StepDecision::Fsync],
        SchedulerKind::Async => (0..n as u32).map(|robot| StepDecision::Async { robot }).collect(),
        SchedulerKind::Ssync => {
            assert!(n < 20, "SSYNC expansion over {n} robots is not tractable");
            (1..(1u64 << n))
                .map(|mask| StepDecision::Ssync {
                    robots: (0..n as u32).filter(|i| mask >> i & 1 == 1).collect(),
                })
                .collect()
        }
    }
}

/// Source of step decisions for a run.
#[derive(Debug, Clone)]
pub enum Schedule {
    Random(SchedulerKind),
    /// Plays `decisions`, then repeats from `loop_from` if set.
    Scripted {
        decisions: Vec<StepDecision>,
        loop_from: Option<usize>,
        position: usize,
    },
}

impl Schedule {
    pub fn scripted(decisions: Vec<StepDecision>, loop_from: Option<usize>) -> Self {
        Schedule::Scripted {
            decisions,
            loop_from,
            position: 0,
        }
    }

    /// `None` once a non-looping script runs out.
    pub fn next_decision(&mut self, n: usize, rng: &mut SimRng) -> Option<StepDecision> {
        match self {
            Schedule::Random(kind) => Some(draw_decision(*kind, n, rng)),
            Schedule::Scripted {
                decisions,
                loop_from,
                position,
            } => {
                if *position >= decisions.len() {
                    match *loop_from {
                        Some(start) if start < decisions.len() => *position = start,
                        _ => return None,
                    }
                }
                let d = decisions[*position].clone();
                *position += 1;
                Some(d)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseOp {
    Look,
    Compute,
    Move,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub decision: StepDecision,
    /// Phases in the order they ran.
    pub ops: SmallVec<[(u32, PhaseOp); 6]>,
    /// Distance covered by each robot that moved in this step.
    pub traveled: SmallVec<[(u32, f64); 4]>,
    pub stuck_moves: u32,
}

/// True iff no robot waits more than `window` consecutive steps.
pub fn fairness_guard<'a, I>(decisions: I, n: usize, window: usize) -> bool
where
    I: IntoIterator<Item = &'a StepDecision>,
{
    let mut idle = vec![0usize; n];
    for d in decisions {
        for (i, gap) in idle.iter_mut().enumerate() {
            if d.activates(i) {
                *gap = 0;
            } else {
                *gap += 1;
                if *gap > window {
                    return false;
                }
            }
        }
    }
    true
}

pub fn default_fairness_window(n: usize) -> usize {
    10 * n * 3
}

/// Engine settings fixed for a run.
#[derive(Debug, Clone, Copy)]
pub struct EngineParams {
    pub scheduler: SchedulerConfig,
    pub look: LookParams,
    pub frames: FrameMode,
    /// Track how far two-robot targets stray from the observed segment.
    pub monitor_segment: bool,
}

/// One run's network, algorithm and random streams.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub network: Vec<RobotState>,
    algorithm: Arc<dyn Algorithm>,
    params: EngineParams,
    traveled: Vec<f64>,
    steps: u64,
    stuck_moves: u64,
    failed_computes: u64,
    /// Number of non-null moves so far.
    move_epoch: u64,
    max_segment_deviation: f64,
    perception: SimRng,
    motion: SimRng,
    compute: SimRng,
    frames: SimRng,
}

impl Simulation {
    /// `streams.frames` must be the stream left over after initial frames
    /// were drawn, so per-LOOK frames continue it.
    pub fn new(
        network: Vec<RobotState>,
        algorithm: Arc<dyn Algorithm>,
        params: EngineParams,
        streams: RunStreams,
    ) -> Self {
        let n = network.len();
        Self {
            network,
            algorithm,
            params,
            traveled: vec![0.0; n],
            steps: 0,
            stuck_moves: 0,
            failed_computes: 0,
            move_epoch: 0,
            max_segment_deviation: 0.0,
            perception: streams.perception,
            motion: streams.motion,
            compute: streams.compute,
            frames: streams.frames,
        }
    }

    pub fn algorithm(&self) -> &Arc<dyn Algorithm> {
        &self.algorithm
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.network.len()
    }

    pub fn is_empty(&self) -> bool {
        self.network.is_empty()
    }

    pub fn traveled(&self) -> &[f64] {
        &self.traveled
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn stuck_moves(&self) -> u64 {
        self.stuck_moves
    }

    pub fn failed_computes(&self) -> u64 {
        self.failed_computes
    }

    pub fn max_segment_deviation(&self) -> f64 {
        self.max_segment_deviation
    }

    pub fn positions(&self) -> impl Iterator<Item = Point2> + '_ {
        self.network.iter().map(|r| r.position)
    }

    /// Leaders if every robot elected one since the last actual move.
    pub fn current_leaders(&self) -> Option<SmallVec<[usize; 8]>> {
        self.network
            .iter()
            .map(|r| match r.leader {
                Some(l) if r.look_epoch == self.move_epoch && r.phase != Phase::Looked => Some(l),
                _ => None,
            })
            .collect()
    }

    pub fn step(&mut self, decision: &StepDecision) -> StepRecord {
        self.steps += 1;
        let mut record = StepRecord {
            step: self.steps,
            decision: decision.clone(),
            ops: SmallVec::new(),
            traveled: SmallVec::new(),
            stuck_moves: 0,
        };
        match decision {
            StepDecision::Fsync => {
                let all: SmallVec<[u32; 16]> = (0..self.network.len() as u32).collect();
                self.sync_cycle(&all, &mut record);
            }
            StepDecision::Ssync { robots } => self.sync_cycle(robots, &mut record),
            StepDecision::Async { robot } => {
                let i = *robot as usize;
                match self.network[i].phase {
                    Phase::Idle => self.look(i, &mut record),
                    Phase::Looked => self.compute(i, &mut record),
                    Phase::Computed | Phase::Moving => self.do_move(i, &mut record),
                }
            }
        }
        record
    }

    fn sync_cycle(&mut self, robots: &[u32], record: &mut StepRecord) {
        for &i in robots {
            if self.network[i as usize].phase == Phase::Idle {
                self.look(i as usize, record);
            }
        }
        for &i in robots {
            if self.network[i as usize].phase == Phase::Looked {
                self.compute(i as usize, record);
            }
        }
        for &i in robots {
            if self.network[i as usize].has_pending_move() {
                self.do_move(i as usize, record);
            }
        }
    }

    fn look(&mut self, i: usize, record: &mut StepRecord) {
        if self.params.frames == FrameMode::PerLook {
            let f = random_frame(&mut self.frames);
            self.network[i].frame = f;
        }
        look(i, &mut self.network, &self.params.look, &mut self.perception);
        let key = self.algorithm.input_set(&self.network[i], &self.network[i].snapshot);
        let robot = &mut self.network[i];
        robot.look_key = Some(key);
        robot.look_epoch = self.move_epoch;
        record.ops.push((i as u32, PhaseOp::Look));
    }

    fn compute(&mut self, i: usize, record: &mut StepRecord) {
        let robot = &mut self.network[i];
        let input = ComputeInput {
            snapshot: &robot.snapshot,
            my_color: robot.color,
            compass_offset: robot.compass.current_offset,
        };
        match self.algorithm.compute(&input, &mut self.compute) {
            Ok(out) => {
                robot.target = robot.frame.from_local(out.target);
                robot.pending_local_nonzero = out.target != Point2::ORIGIN;
                if let Some(c) = out.new_color {
                    robot.color = Some(c);
                }
                robot.leader = out.leader_choice.map(|choice| match choice {
                    LeaderChoice::Myself => i,
                    LeaderChoice::Perceived(k) => robot.observed[k],
                });
                robot.scrambled = out.wants_random_move;
                if self.params.monitor_segment && robot.snapshot.len() == 1 {
                    let seen = robot.frame.from_local(robot.snapshot[0].position);
                    let dev = segment_distance(robot.target, robot.position, seen);
                    if dev > self.max_segment_deviation {
                        self.max_segment_deviation = dev;
                    }
                }
            }
            Err(_) => {
                // Treated as a null move so a run survives e.g. a collinear
                // election input; the count is reported.
                robot.target = robot.position;
                robot.pending_local_nonzero = false;
                robot.leader = None;
                robot.scrambled = false;
                self.failed_computes += 1;
            }
        }
        robot.position_at_move_start = robot.position;
        robot.phase = Phase::Computed;
        record.ops.push((i as u32, PhaseOp::Compute));
    }

    fn do_move(&mut self, i: usize, record: &mut StepRecord) {
        let m = advance_move(
            &mut self.network[i],
            self.params.scheduler.rigidity,
            self.params.scheduler.non_rigid_adversary,
            &mut self.motion,
        );
        self.traveled[i] += m.traveled;
        if m.traveled > 0.0 {
            self.move_epoch += 1;
        }
        if m.stuck {
            self.stuck_moves += 1;
            record.stuck_moves += 1;
        }
        record.ops.push((i as u32, PhaseOp::Move));
        record.traveled.push((i as u32, m.traveled));
    }
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return distance(p, a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    distance(p, a + ab * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{AlgorithmSpec, BuildContext};
    use crate::error_models::{ErrorDrawTiming, VisionErrorSpec};
    use crate::geometry::LocalFrame;
    use crate::rng::{stream, Stream};
    use crate::robot::{Color, RobotId};

    fn params(kind: SchedulerKind) -> EngineParams {
        EngineParams {
            scheduler: SchedulerConfig::new(kind),
            look: LookParams {
                vision: VisionErrorSpec::NONE,
                timing: ErrorDrawTiming::EveryLook,
                perception: AsyncPerception::Initial,
            },
            frames: FrameMode::Identity,
            monitor_segment: true,
        }
    }

    fn sim(spec: AlgorithmSpec, kind: SchedulerKind, pts: &[(f64, f64)]) -> Simulation {
        let net = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| {
                RobotState::new(RobotId(i as u32), Point2::new(x, y), LocalFrame::identity())
                    .with_color(Some(Color::WHITE))
            })
            .collect();
        let alg = spec.build(&BuildContext::default()).unwrap();
        Simulation::new(net, alg, params(kind), RunStreams::new(1))
    }

    #[test]
    fn fsync_midpoint_gathers_in_one_step() {
        let mut s = sim(AlgorithmSpec::Midpoint, SchedulerKind::Fsync, &[(0.0, 0.0), (1.0, 0.0)]);
        let rec = s.step(&StepDecision::Fsync);
        assert_eq!(s.network[0].position, s.network[1].position);
        assert_eq!(s.network[0].position, Point2::new(0.5, 0.0));
        assert_eq!(s.traveled(), &[0.5, 0.5]);
        // Barrier: both LOOKs, then both COMPUTEs, then both MOVEs.
        let kinds: Vec<PhaseOp> = rec.ops.iter().map(|o| o.1).collect();
        assert_eq!(
            kinds,
            [
                PhaseOp::Look,
                PhaseOp::Look,
                PhaseOp::Compute,
                PhaseOp::Compute,
                PhaseOp::Move,
                PhaseOp::Move
            ]
        );
    }

    #[test]
    fn async_runs_one_phase() {
        let mut s = sim(AlgorithmSpec::Midpoint, SchedulerKind::Async, &[(0.0, 0.0), (2.0, 0.0)]);
        let d = StepDecision::Async { robot: 1 };
        assert_eq!(s.step(&d).ops.as_slice(), &[(1, PhaseOp::Look)]);
        assert_eq!(s.network[1].phase, Phase::Looked);
        assert_eq!(s.step(&d).ops.as_slice(), &[(1, PhaseOp::Compute)]);
        // r0 looks while r1 has a pending move: it sees r1 where it started.
        s.step(&StepDecision::Async { robot: 0 });
        assert_eq!(s.network[0].snapshot[0].position, Point2::new(2.0, 0.0));
        s.step(&d);
        assert_eq!(s.network[1].position, Point2::new(1.0, 0.0));
        assert_eq!(s.network[1].phase, Phase::Idle);
    }

    #[test]
    fn ssync_subset_law() {
        let mut rng = stream(11, Stream::Schedule);
        let draws = 1_000_000;
        let mut counts = [0u32; 8];
        for _ in 0..draws {
            match draw_decision(SchedulerKind::Ssync, 3, &mut rng) {
                StepDecision::Ssync { robots } => {
                    let mask: usize = robots.iter().map(|r| 1 << r).sum();
                    counts[mask] += 1;
                }
                _ => unreachable!(),
            }
        }
        assert_eq!(counts[0], 0);
        for c in &counts[1..] {
            let f = *c as f64 / draws as f64;
            assert!((f - 1.0 / 7.0).abs() < 0.01, "{f}");
        }
    }

    #[test]
    fn async_activation_law() {
        let mut rng = stream(12, Stream::Schedule);
        let draws = 1_000_000;
        let mut counts = [0u32; 4];
        for _ in 0..draws {
            if let StepDecision::Async { robot } = draw_decision(SchedulerKind::Async, 4, &mut rng) {
                counts[robot as usize] += 1;
            }
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn fairness() {
        let fsync = vec![StepDecision::Fsync; 100];
        assert!(fairness_guard(&fsync, 3, 30));
        let mut starve: Vec<StepDecision> = vec![StepDecision::Async { robot: 0 }; 31];
        starve.push(StepDecision::Async { robot: 1 });
        assert!(!fairness_guard(&starve, 2, 30));
        let mut rng = stream(13, Stream::Schedule);
        let random: Vec<StepDecision> = (0..100_000)
            .map(|_| draw_decision(SchedulerKind::Async, 3, &mut rng))
            .collect();
        assert!(fairness_guard(&random, 3, default_fairness_window(3)));
    }

    #[test]
    fn scripted_schedule_loops() {
        let a = StepDecision::Async { robot: 0 };
        let b = StepDecision::Async { robot: 1 };
        let mut s = Schedule::scripted(vec![a.clone(), b.clone()], Some(1));
        let mut rng = stream(0, Stream::Schedule);
        let got: Vec<_> = (0..4).map(|_| s.next_decision(2, &mut rng).unwrap()).collect();
        assert_eq!(got, [a.clone(), b.clone(), b.clone(), b]);
        let mut once = Schedule::scripted(vec![a], None);
        assert!(once.next_decision(2, &mut rng).is_some());
        assert!(once.next_decision(2, &mut rng).is_none());
    }

    #[test]
    fn all_decisions_counts() {
        assert_eq!(all_decisions(SchedulerKind::Fsync, 4).len(), 1);
        assert_eq!(all_decisions(SchedulerKind::Async, 4).len(), 4);
        assert_eq!(all_decisions(SchedulerKind::Ssync, 4).len(), 15);
    }

    #[test]
    fn decision_json() {
        let d = StepDecision::Ssync { robots: vec![0, 2] };
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"kind":"ssync","robots":[0,2]}"#);
        assert_eq!(serde_json::from_str::<StepDecision>(&s).unwrap(), d);
    }

    #[test]
    fn segment_distance_cases() {
        let a = Point2::new(0.0, 0.0);
        let b = Point2::new(2.0, 0.0);
        assert_eq!(segment_distance(Point2::new(1.0, 0.0), a, b), 0.0);
        assert_eq!(segment_distance(Point2::new(1.0, 1.0), a, b), 1.0);
        assert_eq!(segment_distance(Point2::new(3.0, 0.0), a, b), 1.0);
    }
}
