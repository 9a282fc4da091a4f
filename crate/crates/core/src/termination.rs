// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Victory and defeat conditions.
//!
//! Cycles are found by hashing a joint key per recorded step: each robot's
//! algorithm-declared input set, its phase, and what it has already decided
//! but not yet executed. Two records with equal keys have the same set of
//! possible futures, so a repeat is a loop the scheduler can replay forever.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::algorithms::{Algorithm, Goal, InputSetKey, KeySpace};
use crate::geometry::{distance, Point2};
use crate::robot::{exact_view_into, Phase, PerceivedRobot};
use crate::scheduler::{all_decisions, SchedulerKind, Simulation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Gathering,
    Convergence,
    Divergence,
    Election,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Cycle,
    /// Some move in the loop had a nonzero target but rounded to no motion.
    FloatStuck,
}

/// Two steps with equal joint keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub t0: u64,
    pub t1: u64,
    pub kind: WitnessKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Verdict {
    Victory {
        kind: VerdictKind,
    },
    Defeat {
        kind: VerdictKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        witness: Option<Witness>,
    },
    Timeout,
}

impl Verdict {
    pub fn is_victory(&self) -> bool {
        matches!(self, Verdict::Victory { .. })
    }

    pub fn is_timeout(&self) -> bool {
        matches!(self, Verdict::Timeout)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Defeat { witness, .. } => witness.as_ref(),
            _ => None,
        }
    }

    /// Stable label used in histograms and CSV output.
    pub fn label(&self) -> String {
        fn kind(k: VerdictKind) -> &'static str {
            match k {
                VerdictKind::Gathering => "gathering",
                VerdictKind::Convergence => "convergence",
                VerdictKind::Divergence => "divergence",
                VerdictKind::Election => "election",
            }
        }
        match self {
            Verdict::Victory { kind: k } => format!("victory_{}", kind(*k)),
            Verdict::Defeat {
                kind: k,
                witness: Some(Witness {
                    kind: WitnessKind::FloatStuck,
                    ..
                }),
            } => format!("defeat_{}_float_stuck", kind(*k)),
            Verdict::Defeat { kind: k, .. } => format!("defeat_{}", kind(*k)),
            Verdict::Timeout => "timeout".to_owned(),
        }
    }
}

/// Which conditions a run checks. `None` picks the algorithm's default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TerminationConfig {
    pub gathering_victory: Option<bool>,
    pub gathering_defeat: Option<bool>,
    pub convergence_victory: Option<bool>,
    pub convergence_defeat: Option<bool>,
    pub election: Option<bool>,
    pub divergence: Option<bool>,
    /// Spread growth, relative to the start, that counts as divergence.
    pub divergence_factor: f64,
    pub convergence_abs: f64,
    pub convergence_rel: f64,
    pub cycle_quantum: f64,
    /// Most states a gathering-victory expansion may visit.
    pub expansion_limit: usize,
}

impl Default for TerminationConfig {
    fn default() -> Self {
        Self {
            gathering_victory: None,
            gathering_defeat: None,
            convergence_victory: None,
            convergence_defeat: None,
            election: None,
            divergence: None,
            divergence_factor: 10.0,
            convergence_abs: 1e-10,
            convergence_rel: 1e-10,
            cycle_quantum: crate::algorithms::DEFAULT_CYCLE_QUANTUM,
            expansion_limit: 4096,
        }
    }
}

/// Conditions in force for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedTermination {
    pub gathering_victory: bool,
    pub gathering_defeat: bool,
    pub convergence_victory: bool,
    pub convergence_defeat: bool,
    pub election: bool,
    pub divergence: bool,
    pub divergence_factor: f64,
    pub convergence_abs: f64,
    pub convergence_rel: f64,
    pub expansion_limit: usize,
}

impl ResolvedTermination {
    pub fn needs_trace(&self) -> bool {
        self.gathering_victory || self.gathering_defeat || self.convergence_defeat
    }
}

impl TerminationConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("divergence_factor", self.divergence_factor),
            ("convergence_abs", self.convergence_abs),
            ("cycle_quantum", self.cycle_quantum),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("termination.{name} must be positive"));
            }
        }
        if !(self.convergence_rel >= 0.0 && self.convergence_rel.is_finite()) {
            return Err("termination.convergence_rel must be nonnegative".into());
        }
        if self.expansion_limit == 0 {
            return Err("termination.expansion_limit must be positive".into());
        }
        Ok(())
    }

    pub fn resolve(&self, algorithm: &dyn Algorithm, warnings: &mut Vec<String>) -> ResolvedTermination {
        let goal = algorithm.goal();
        let finite = algorithm.key_space() == KeySpace::Finite;
        let gathering = goal == Goal::Gathering;
        let mut r = ResolvedTermination {
            gathering_victory: self.gathering_victory.unwrap_or(gathering),
            gathering_defeat: self.gathering_defeat.unwrap_or(gathering),
            convergence_victory: self.convergence_victory.unwrap_or(goal == Goal::Convergence),
            // Finite-key convergence algorithms revisit keys while standing
            // still, which the distance test would misread as a stall.
            convergence_defeat: self
                .convergence_defeat
                .unwrap_or(goal == Goal::Convergence && !finite),
            election: self.election.unwrap_or(goal == Goal::Election),
            divergence: self.divergence.unwrap_or(goal != Goal::Election),
            divergence_factor: self.divergence_factor,
            convergence_abs: self.convergence_abs,
            convergence_rel: self.convergence_rel,
            expansion_limit: self.expansion_limit,
        };
        if r.gathering_victory && (!finite || !gathering) {
            warnings.push(format!(
                "{}: gathering victory needs a finite gathering key space; using convergence victory instead",
                algorithm.name()
            ));
            r.gathering_victory = false;
            r.convergence_victory = true;
        }
        r
    }
}

/// Every robot stands on the same point.
pub fn is_gathered<I: IntoIterator<Item = Point2>>(positions: I) -> bool {
    let mut it = positions.into_iter();
    match it.next() {
        None => true,
        Some(first) => it.all(|p| p == first),
    }
}

pub fn max_pairwise_distance(positions: &[Point2]) -> f64 {
    let mut best = 0.0f64;
    for (i, &a) in positions.iter().enumerate() {
        for &b in &positions[i + 1..] {
            best = best.max(distance(a, b));
        }
    }
    best
}

/// All robots within `max(abs, rel · farthest distance from the origin)`.
pub fn convergence_reached(positions: &[Point2], abs: f64, rel: f64) -> bool {
    let reach = positions.iter().map(|p| p.norm()).fold(0.0, f64::max);
    max_pairwise_distance(positions) < abs.max(reach * rel)
}

pub fn divergence_detected(current_spread: f64, initial_spread: f64, factor: f64) -> bool {
    current_spread >= factor * initial_spread
}

/// Per-robot keys plus the joint key of the simulation's current state.
pub fn joint_key(sim: &Simulation, scratch: &mut Vec<PerceivedRobot>) -> (Vec<InputSetKey>, Vec<u8>) {
    let algorithm = sim.algorithm();
    let mut keys = Vec::with_capacity(sim.len());
    let mut joint = Vec::with_capacity(16 * sim.len());
    for (i, robot) in sim.network.iter().enumerate() {
        exact_view_into(i, &sim.network, scratch);
        let key = algorithm.input_set(robot, scratch);
        joint.extend_from_slice(&(key.as_bytes().len() as u32).to_le_bytes());
        joint.extend_from_slice(key.as_bytes());
        joint.push(robot.phase.tag());
        match robot.phase {
            Phase::Looked => {
                let k = robot.look_key.as_ref().map(|k| k.as_bytes()).unwrap_or(&[]);
                joint.extend_from_slice(&(k.len() as u32).to_le_bytes());
                joint.extend_from_slice(k);
            }
            Phase::Computed | Phase::Moving => joint.push(robot.pending_local_nonzero as u8),
            Phase::Idle => {}
        }
        keys.push(key);
    }
    (keys, joint)
}

#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub step: u64,
    pub robot_keys: Vec<InputSetKey>,
    pub joint_key: Vec<u8>,
    pub max_distance: f64,
    pub gathered: bool,
    pub traveled: Vec<f64>,
    /// Stuck moves since the start of the run.
    pub stuck_total: u64,
}

#[derive(Debug, Clone, Copy)]
struct KeyStats {
    first: usize,
    last: usize,
    /// Smallest positive spread at which the key occurred, and where.
    min_positive: Option<(f64, usize)>,
}

#[derive(Debug, Clone, Default)]
pub struct ExecutionTrace {
    records: Vec<TraceRecord>,
    index: HashMap<Vec<u8>, KeyStats>,
    /// `nongathered[i]` counts non-gathered records among the first `i`.
    nongathered: Vec<u32>,
    /// Stats of the newest record's key from before it was added.
    prior: Option<KeyStats>,
    scratch: Vec<PerceivedRobot>,
}

impl ExecutionTrace {
    pub fn new() -> Self {
        Self {
            nongathered: vec![0],
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn record(&mut self, sim: &Simulation) {
        let (robot_keys, joint) = joint_key(sim, &mut self.scratch);
        let positions: Vec<Point2> = sim.positions().collect();
        let gathered = is_gathered(positions.iter().copied());
        let spread = max_pairwise_distance(&positions);
        let at = self.records.len();
        debug_assert!(self.records.last().is_none_or(|r| r.step < sim.steps()));
        let entry = self.index.entry(joint.clone());
        let prior = match entry {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                let before = *o.get();
                let stats = o.get_mut();
                stats.last = at;
                if spread > 0.0 && stats.min_positive.is_none_or(|(d, _)| spread < d) {
                    stats.min_positive = Some((spread, at));
                }
                Some(before)
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(KeyStats {
                    first: at,
                    last: at,
                    min_positive: (spread > 0.0).then_some((spread, at)),
                });
                None
            }
        };
        self.prior = prior;
        let count = self.nongathered[at] + (!gathered) as u32;
        self.nongathered.push(count);
        self.records.push(TraceRecord {
            step: sim.steps(),
            robot_keys,
            joint_key: joint,
            max_distance: spread,
            gathered,
            traveled: sim.traveled().to_vec(),
            stuck_total: sim.stuck_moves(),
        });
    }

    fn nongathered_between(&self, from: usize, to: usize) -> u32 {
        // Records in [from, to].
        self.nongathered[to + 1] - self.nongathered[from]
    }

    fn witness(&self, t0: usize, t1: usize) -> Witness {
        let stuck = self.records[t1].stuck_total > self.records[t0].stuck_total;
        Witness {
            t0: self.records[t0].step,
            t1: self.records[t1].step,
            kind: if stuck {
                WitnessKind::FloatStuck
            } else {
                WitnessKind::Cycle
            },
        }
    }

    /// Newest record repeats a key, with a non-gathered record after the
    /// earlier occurrence.
    pub fn gathering_defeat(&self) -> Option<Witness> {
        let prior = self.prior?;
        let t1 = self.records.len() - 1;
        (self.nongathered_between(prior.first + 1, t1) > 0).then(|| self.witness(prior.first, t1))
    }

    /// Newest record repeats a key seen at a positive spread no larger than
    /// the current one.
    pub fn convergence_defeat(&self) -> Option<Witness> {
        let (d0, t0) = self.prior?.min_positive?;
        let t1 = self.records.len() - 1;
        (d0 <= self.records[t1].max_distance).then(|| self.witness(t0, t1))
    }

    /// Newest record is gathered and closes a loop of gathered records.
    pub fn gathering_victory_candidate(&self) -> bool {
        let Some(prior) = self.prior else {
            return false;
        };
        let t1 = self.records.len() - 1;
        self.records[t1].gathered && self.nongathered_between(prior.last, t1) == 0
    }
}

/// Explores every schedule from `sim` breadth-first over joint keys.
/// Returns true iff no reachable state is non-gathered and the search
/// finished within `limit` states.
pub fn gathered_closure(sim: &Simulation, kind: SchedulerKind, limit: usize) -> bool {
    let choices = all_decisions(kind, sim.len());
    let mut scratch = Vec::new();
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    seen.insert(joint_key(sim, &mut scratch).1);
    let mut queue = VecDeque::from([sim.clone()]);
    while let Some(state) = queue.pop_front() {
        for d in &choices {
            let mut next = state.clone();
            next.step(d);
            if !is_gathered(next.positions()) {
                return false;
            }
            let key = joint_key(&next, &mut scratch).1;
            if seen.insert(key) {
                if seen.len() > limit {
                    return false;
                }
                queue.push_back(next);
            }
        }
    }
    true
}

pub fn gathering_victory(
    trace: &ExecutionTrace,
    sim: &Simulation,
    kind: SchedulerKind,
    limit: usize,
) -> bool {
    trace.gathering_victory_candidate() && gathered_closure(sim, kind, limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{AlgorithmSpec, BuildContext};
    use crate::error_models::{ErrorDrawTiming, VisionErrorSpec};
    use crate::geometry::LocalFrame;
    use crate::rng::RunStreams;
    use crate::robot::{AsyncPerception, Color, FrameMode, LookParams, RobotId, RobotState};
    use crate::scheduler::{EngineParams, SchedulerConfig, StepDecision};

    fn sim(spec: AlgorithmSpec, kind: SchedulerKind, pts: &[(f64, f64)]) -> Simulation {
        let net = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| {
                RobotState::new(RobotId(i as u32), Point2::new(x, y), LocalFrame::identity())
                    .with_color(Some(Color::WHITE))
            })
            .collect();
        let params = EngineParams {
            scheduler: SchedulerConfig::new(kind),
            look: LookParams {
                vision: VisionErrorSpec::NONE,
                timing: ErrorDrawTiming::EveryLook,
                perception: AsyncPerception::Initial,
            },
            frames: FrameMode::Identity,
            monitor_segment: false,
        };
        let alg = spec.build(&BuildContext::default()).unwrap();
        Simulation::new(net, alg, params, RunStreams::new(3))
    }

    #[test]
    fn verdict_labels() {
        assert_eq!(Verdict::Timeout.label(), "timeout");
        let v = Verdict::Defeat {
            kind: VerdictKind::Convergence,
            witness: Some(Witness {
                t0: 1,
                t1: 2,
                kind: WitnessKind::FloatStuck,
            }),
        };
        assert_eq!(v.label(), "defeat_convergence_float_stuck");
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<Verdict>(&json).unwrap(), v);
    }

    #[test]
    fn thresholds() {
        let p = |x, y| Point2::new(x, y);
        assert!(convergence_reached(&[p(5.0, 5.0), p(5.0, 5.0)], 1e-10, 1e-10));
        assert!(!convergence_reached(&[p(0.0, 0.0), p(1e-9, 0.0)], 1e-10, 1e-10));
        assert!(convergence_reached(&[p(1e3, 0.0), p(1e3 + 1e-9, 0.0)], 1e-10, 1e-10));
        assert!(divergence_detected(10.1, 1.0, 10.0));
        assert!(!divergence_detected(9.9, 1.0, 10.0));
    }

    #[test]
    fn first_record_and_equal_keys() {
        let s = sim(AlgorithmSpec::Midpoint, SchedulerKind::Ssync, &[(0.0, 0.0), (1.0, 0.0)]);
        let mut t = ExecutionTrace::new();
        t.record(&s);
        assert_eq!(t.len(), 1);
        assert!(t.gathering_defeat().is_none());
        let mut scratch = Vec::new();
        assert_eq!(joint_key(&s, &mut scratch), joint_key(&s.clone(), &mut scratch));
    }

    #[test]
    fn fec_color_flip_changes_key() {
        let mut s = sim(AlgorithmSpec::Fec, SchedulerKind::Fsync, &[(0.0, 0.0), (1.0, 0.0)]);
        let mut scratch = Vec::new();
        let before = joint_key(&s, &mut scratch).1;
        s.network[0].color = Some(Color::BLACK);
        assert_ne!(before, joint_key(&s, &mut scratch).1);
    }

    #[test]
    fn midpoint_single_mover_is_defeat() {
        let mut s = sim(AlgorithmSpec::Midpoint, SchedulerKind::Ssync, &[(0.0, 0.0), (1.0, 0.0)]);
        let mut t = ExecutionTrace::new();
        t.record(&s);
        s.step(&StepDecision::Ssync { robots: vec![0] });
        t.record(&s);
        let w = t.gathering_defeat().expect("defeat");
        assert_eq!((w.t0, w.t1, w.kind), (0, 1, WitnessKind::Cycle));
    }

    #[test]
    fn midpoint_fsync_gathers_without_defeat() {
        let mut s = sim(AlgorithmSpec::Midpoint, SchedulerKind::Fsync, &[(0.0, 0.0), (1.0, 0.0)]);
        let mut t = ExecutionTrace::new();
        t.record(&s);
        s.step(&StepDecision::Fsync);
        t.record(&s);
        assert!(t.last().unwrap().gathered);
        assert!(t.gathering_defeat().is_none());
        assert!(!gathering_victory(&t, &s, SchedulerKind::Fsync, 4096));
        s.step(&StepDecision::Fsync);
        t.record(&s);
        assert!(t.gathering_defeat().is_none());
        assert!(gathering_victory(&t, &s, SchedulerKind::Fsync, 4096));
    }

    #[test]
    fn multiplicity_gathered_cycle_is_victory() {
        let mut s = sim(
            AlgorithmSpec::MidpointMultiplicity,
            SchedulerKind::Fsync,
            &[(0.0, 0.0), (3.0, 1.0)],
        );
        let mut t = ExecutionTrace::new();
        t.record(&s);
        s.step(&StepDecision::Fsync);
        t.record(&s);
        assert!(!t.gathering_victory_candidate());
        s.step(&StepDecision::Fsync);
        t.record(&s);
        assert!(t.gathering_defeat().is_none());
        assert!(gathering_victory(&t, &s, SchedulerKind::Ssync, 4096));
        assert!(gathering_victory(&t, &s, SchedulerKind::Async, 4096));
    }

    #[test]
    fn static_robots_defeat_convergence() {
        // A table without rules never moves anyone.
        let idle = AlgorithmSpec::Luminous {
            table: crate::algorithms::LuminousTable {
                palette: 1,
                goal: Goal::Convergence,
                rules: vec![],
            },
        };
        let mut s = sim(idle, SchedulerKind::Fsync, &[(0.0, 0.0), (1.0, 0.0)]);
        let mut t = ExecutionTrace::new();
        t.record(&s);
        s.step(&StepDecision::Fsync);
        t.record(&s);
        assert!(t.convergence_defeat().is_some());
    }

    #[test]
    fn halving_is_not_convergence_defeat() {
        let mut s = sim(AlgorithmSpec::Midpoint, SchedulerKind::Ssync, &[(0.0, 0.0), (1.0, 0.0)]);
        let mut t = ExecutionTrace::new();
        t.record(&s);
        for _ in 0..20 {
            s.step(&StepDecision::Ssync { robots: vec![0] });
            t.record(&s);
            assert!(t.convergence_defeat().is_none());
        }
    }

    #[test]
    fn adjacent_floats_defeat_as_float_stuck() {
        let x = 0.7f64;
        let y = f64::from_bits(x.to_bits() + 1);
        assert_eq!(x + (y - x) / 2.0, x);
        let mut s = sim(AlgorithmSpec::Midpoint, SchedulerKind::Ssync, &[(x, 0.0), (y, 0.0)]);
        let mut t = ExecutionTrace::new();
        t.record(&s);
        s.step(&StepDecision::Ssync { robots: vec![0] });
        t.record(&s);
        let w = t.convergence_defeat().expect("defeat");
        assert_eq!(w.kind, WitnessKind::FloatStuck);
    }

    #[test]
    fn resolve_downgrades_quantized_gathering() {
        let cog = AlgorithmSpec::Cog.build(&BuildContext::default()).unwrap();
        let cfg = TerminationConfig {
            gathering_victory: Some(true),
            ..Default::default()
        };
        let mut warnings = Vec::new();
        let r = cfg.resolve(cog.as_ref(), &mut warnings);
        assert!(!r.gathering_victory);
        assert!(r.convergence_victory);
        assert_eq!(warnings.len(), 1);
        let fec = AlgorithmSpec::Fec.build(&BuildContext::default()).unwrap();
        let r = TerminationConfig::default().resolve(fec.as_ref(), &mut warnings);
        assert!(!r.gathering_victory && r.convergence_victory && !r.convergence_defeat);
    }
}
