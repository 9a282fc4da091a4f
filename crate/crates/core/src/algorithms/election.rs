// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Geometric leader election.
//!
//! Three robots: the robot at the strictly smallest interior angle of the
//! triangle wins. Without a strict minimum, the robot whose angle differs from
//! the two equal ones wins. A perfectly equilateral triangle falls back to a
//! randomized symmetry break.
//!
//! Four or more robots: the robot closest to the center of the smallest
//! enclosing circle wins, with the same kind of randomized fallback on ties.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::{
    configuration_key, Algorithm, AlgorithmError, ComputeInput, ComputeOutput, Goal, InputSetKey,
    KeySpace, LeaderChoice,
};
use crate::error_models::{perturb, VisionErrorKind, VisionErrorSpec};
use crate::geometry::{distance, interior_angles, smallest_enclosing_circle, Point2, PolarOffset};
use crate::rng::SimRng;
use crate::robot::{PerceivedRobot, RobotState};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElectionParams {
    /// Values closer than this compare equal. Zero means exact equality.
    pub tie_epsilon: f64,
    /// Length of the symmetry-breaking move of a three-robot tie. Defaults
    /// to a tenth of the shortest side.
    pub symmetry_break_step: Option<f64>,
}

impl ElectionParams {
    pub fn validate(&self) -> Result<(), AlgorithmError> {
        if !(self.tie_epsilon >= 0.0 && self.tie_epsilon.is_finite()) {
            return Err(AlgorithmError::InvalidParameter(
                "tie_epsilon must be finite and nonnegative".into(),
            ));
        }
        match self.symmetry_break_step {
            Some(s) if !(s > 0.0 && s.is_finite()) => Err(AlgorithmError::InvalidParameter(
                "symmetry_break_step must be positive".into(),
            )),
            _ => Ok(()),
        }
    }

    fn same(&self, a: f64, b: f64) -> bool {
        if self.tie_epsilon == 0.0 {
            a == b
        } else {
            (a - b).abs() <= self.tie_epsilon
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElectionOutcome {
    Leader(usize),
    /// No deterministic winner; these robots share the best score.
    Tie(SmallVec<[usize; 4]>),
}

/// Runs the election on `points`, indices referring to that slice.
pub fn elect(points: &[Point2], params: &ElectionParams) -> Result<ElectionOutcome, AlgorithmError> {
    match points.len() {
        0..=2 => Err(AlgorithmError::WrongArity {
            algorithm: "election",
            expected: "at least 3",
            got: points.len(),
        }),
        3 => elect_three(points[0], points[1], points[2], params),
        _ => elect_many(points, params).map(|(o, _)| o),
    }
}

fn elect_three(
    a: Point2,
    b: Point2,
    c: Point2,
    params: &ElectionParams,
) -> Result<ElectionOutcome, AlgorithmError> {
    if (b - a).cross(c - a) == 0.0 {
        return Err(AlgorithmError::Degenerate("collinear or coincident robots"));
    }
    let angles = interior_angles(a, b, c)
        .map_err(|_| AlgorithmError::Degenerate("coincident robots"))?;
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let strictly_smallest = |o: usize| angles[i] < angles[o] && !params.same(angles[i], angles[o]);
        if strictly_smallest(j) && strictly_smallest(k) {
            return Ok(ElectionOutcome::Leader(i));
        }
    }
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        if params.same(angles[j], angles[k])
            && !params.same(angles[i], angles[j])
            && !params.same(angles[i], angles[k])
        {
            return Ok(ElectionOutcome::Leader(i));
        }
    }
    Ok(ElectionOutcome::Tie(SmallVec::from_slice(&[0, 1, 2])))
}

fn elect_many(
    points: &[Point2],
    params: &ElectionParams,
) -> Result<(ElectionOutcome, Point2), AlgorithmError> {
    for (i, p) in points.iter().enumerate() {
        if points[..i].contains(p) {
            return Err(AlgorithmError::Degenerate("coincident robots"));
        }
    }
    let sec = smallest_enclosing_circle(points)
        .map_err(|_| AlgorithmError::Degenerate("no enclosing circle"))?;
    let d: SmallVec<[f64; 16]> = points.iter().map(|&p| distance(p, sec.center)).collect();
    let best = d.iter().copied().fold(f64::INFINITY, f64::min);
    let tied: SmallVec<[usize; 4]> = (0..d.len()).filter(|&i| params.same(d[i], best)).collect();
    let outcome = if tied.len() == 1 {
        ElectionOutcome::Leader(tied[0])
    } else {
        ElectionOutcome::Tie(tied)
    };
    Ok((outcome, sec.center))
}

fn observer_points(snapshot: &[PerceivedRobot]) -> SmallVec<[Point2; 16]> {
    let mut pts = SmallVec::with_capacity(snapshot.len() + 1);
    pts.push(Point2::ORIGIN);
    pts.extend(snapshot.iter().map(|p| p.position));
    pts
}

fn leader_choice(i: usize) -> LeaderChoice {
    if i == 0 {
        LeaderChoice::Myself
    } else {
        LeaderChoice::Perceived(i - 1)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Election {
    pub params: ElectionParams,
    pub quantum: f64,
}

impl Election {
    /// Turns an outcome computed with the observer at index 0 into a decision.
    fn decide(
        &self,
        pts: &[Point2],
        outcome: &ElectionOutcome,
        rng: &mut SimRng,
    ) -> Result<ComputeOutput, AlgorithmError> {
        let tied = match outcome {
            ElectionOutcome::Leader(i) => {
                let mut out = ComputeOutput::stay();
                out.leader_choice = Some(leader_choice(*i));
                return Ok(out);
            }
            ElectionOutcome::Tie(tied) => tied,
        };
        if !tied.contains(&0) {
            return Ok(ComputeOutput::stay());
        }
        let n = pts.len();
        if !rng.random_bool(1.0 / n as f64) {
            return Ok(ComputeOutput::stay());
        }
        let target = if n == 3 {
            let (b, c) = (pts[1], pts[2]);
            let side = c - b;
            let mut normal = Point2::new(-side.y, side.x) / side.norm();
            // Away from the opposite side, which means towards where we stand.
            if normal.dot(Point2::ORIGIN - b) < 0.0 {
                normal = -normal;
            }
            let shortest = distance(pts[0], b).min(distance(pts[0], c)).min(side.norm());
            normal * self.params.symmetry_break_step.unwrap_or(0.1 * shortest)
        } else {
            let (_, center) = elect_many(pts, &self.params)?;
            center / n as f64
        };
        Ok(ComputeOutput::to(target))
    }
}

impl Algorithm for Election {
    fn name(&self) -> &'static str {
        "election"
    }

    fn goal(&self) -> Goal {
        Goal::Election
    }

    fn key_space(&self) -> KeySpace {
        KeySpace::Quantized
    }

    fn check_robot_count(&self, n: usize) -> Result<(), AlgorithmError> {
        if n >= 3 {
            Ok(())
        } else {
            Err(AlgorithmError::WrongArity {
                algorithm: self.name(),
                expected: "at least 3",
                got: n,
            })
        }
    }

    fn compute(
        &self,
        input: &ComputeInput<'_>,
        rng: &mut SimRng,
    ) -> Result<ComputeOutput, AlgorithmError> {
        let pts = observer_points(input.snapshot);
        let outcome = elect(&pts, &self.params)?;
        self.decide(&pts, &outcome, rng)
    }

    fn input_set(&self, _robot: &RobotState, view: &[PerceivedRobot]) -> InputSetKey {
        configuration_key(view, self.quantum)
    }
}

/// Election that first re-runs itself on perturbed copies of the snapshot
/// and moves randomly if any copy disagrees.
#[derive(Debug, Clone, Copy)]
pub struct ReliableElection {
    pub election: Election,
    pub nb_tries: u32,
    pub scramble_radius: f64,
    pub vision: VisionErrorSpec,
}

impl ReliableElection {
    pub fn default_scramble_radius(vision: &VisionErrorSpec) -> f64 {
        let magnitude = match vision.kind {
            VisionErrorKind::None => 0.0,
            VisionErrorKind::Absolute => vision.err,
            VisionErrorKind::Relative | VisionErrorKind::AbsRel => vision.err_dist,
        };
        if magnitude > 0.0 {
            10.0 * magnitude
        } else {
            1e-3
        }
    }

    /// The configuration as seen by a perturbed stand-in for robot `v`.
    fn virtual_points(&self, pts: &[Point2], v: usize, rng: &mut SimRng) -> SmallVec<[Point2; 16]> {
        let observer = perturb(pts[v], &self.vision, rng);
        pts.iter()
            .enumerate()
            .map(|(k, &p)| {
                if k == v {
                    observer
                } else {
                    observer + perturb(p - observer, &self.vision, rng)
                }
            })
            .collect()
    }

    fn scramble(&self, rng: &mut SimRng) -> ComputeOutput {
        let theta = rng.random::<f64>() * TAU;
        let r = self.scramble_radius * (1.0 - rng.random::<f64>());
        let mut out = ComputeOutput::to(PolarOffset::new(r, theta).to_cartesian());
        out.wants_random_move = true;
        out
    }
}

impl Algorithm for ReliableElection {
    fn name(&self) -> &'static str {
        "reliable_election"
    }

    fn goal(&self) -> Goal {
        Goal::Election
    }

    fn key_space(&self) -> KeySpace {
        KeySpace::Quantized
    }

    fn check_robot_count(&self, n: usize) -> Result<(), AlgorithmError> {
        self.election.check_robot_count(n)
    }

    fn compute(
        &self,
        input: &ComputeInput<'_>,
        rng: &mut SimRng,
    ) -> Result<ComputeOutput, AlgorithmError> {
        let params = &self.election.params;
        let pts = observer_points(input.snapshot);
        let outcome = elect(&pts, params)?;
        if !self.vision.is_identity() {
            for _ in 0..self.nb_tries {
                for v in 0..pts.len() {
                    let virt = self.virtual_points(&pts, v, rng);
                    match elect(&virt, params) {
                        Ok(o) if o == outcome => {}
                        _ => return Ok(self.scramble(rng)),
                    }
                }
            }
        }
        self.election.decide(&pts, &outcome, rng)
    }

    fn input_set(&self, robot: &RobotState, view: &[PerceivedRobot]) -> InputSetKey {
        self.election.input_set(robot, view)
    }
}
