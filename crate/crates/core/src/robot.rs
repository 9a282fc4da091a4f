// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Robot state, snapshot construction and motion.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::InputSetKey;
use crate::error_models::{CompassErrorSpec, ErrorDraw, ErrorDrawTiming, VisionErrorSpec};
use crate::geometry::{distance, LocalFrame, Point2};
use crate::rng::SimRng;

/// Externally visible light of a luminous robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Color(pub u8);

impl Color {
    pub const WHITE: Color = Color(0);
    pub const BLACK: Color = Color(1);
}

/// Scheduler-side identity. Compute functions never see it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RobotId(pub u32);

impl std::fmt::Display for RobotId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Idle,
    Looked,
    Computed,
    Moving,
}

impl Phase {
    pub fn tag(self) -> u8 {
        match self {
            Phase::Idle => 0,
            Phase::Looked => 1,
            Phase::Computed => 2,
            Phase::Moving => 3,
        }
    }

    pub fn can_transition_to(self, next: Phase) -> bool {
        matches!(
            (self, next),
            (Phase::Idle, Phase::Looked)
                | (Phase::Looked, Phase::Computed)
                | (Phase::Computed, Phase::Moving)
                | (Phase::Moving, Phase::Idle)
        )
    }
}

/// How a LOOK sees a robot whose move is pending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsyncPerception {
    /// Always the position the move started from.
    #[default]
    Initial,
    /// Uniformly on the segment from the start to the target.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rigidity {
    #[default]
    Rigid,
    NonRigid { delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonRigidAdversary {
    /// Stop distance uniform in `[min(δ, d), d]`.
    #[default]
    Uniform,
    /// Always stop after exactly `min(δ, d)`.
    MinStop,
}

/// How robots' local coordinate systems are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameMode {
    /// One random rotation and handedness per robot for the whole run.
    #[default]
    Random,
    /// Every robot shares the global frame.
    Identity,
    /// A fresh random frame at every LOOK.
    PerLook,
}

pub fn random_frame<R: Rng + ?Sized>(rng: &mut R) -> LocalFrame {
    let rotation = rng.random::<f64>() * TAU;
    let reflect = rng.random_bool(0.5);
    LocalFrame::new(rotation, reflect, Point2::ORIGIN)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceivedRobot {
    /// Position in the observer's frame, observer at the origin.
    pub position: Point2,
    pub color: Option<Color>,
}

#[derive(Debug, Clone)]
pub struct RobotState {
    pub name: RobotId,
    pub position: Point2,
    pub position_at_move_start: Point2,
    /// Global coordinates; only meaningful once computed.
    pub target: Point2,
    pub phase: Phase,
    pub color: Option<Color>,
    pub frame: LocalFrame,
    pub snapshot: Vec<PerceivedRobot>,
    pub compass: CompassErrorSpec,
    /// Network index of each snapshot entry. Bookkeeping for the harness.
    pub(crate) observed: Vec<usize>,
    /// Per-observed-robot draws when errors are fixed at start-up.
    pub(crate) fixed_draws: Vec<ErrorDraw>,
    /// Algorithm input recorded at the last LOOK; part of the cycle key.
    pub(crate) look_key: Option<InputSetKey>,
    /// Network index of the robot this one elected, if any.
    pub leader: Option<usize>,
    /// Value of the network's move counter at the last LOOK.
    pub(crate) look_epoch: u64,
    /// Whether the last COMPUTE asked for a symmetry-breaking move.
    pub scrambled: bool,
    /// The last COMPUTE returned a nonzero local target.
    pub(crate) pending_local_nonzero: bool,
}

impl RobotState {
    pub fn new(name: RobotId, position: Point2, frame: LocalFrame) -> Self {
        Self {
            name,
            position,
            position_at_move_start: position,
            target: position,
            phase: Phase::Idle,
            color: None,
            frame: frame.with_origin(position),
            snapshot: Vec::new(),
            compass: CompassErrorSpec::default(),
            observed: Vec::new(),
            fixed_draws: Vec::new(),
            look_key: None,
            leader: None,
            look_epoch: 0,
            scrambled: false,
            pending_local_nonzero: false,
        }
    }

    pub fn with_color(mut self, color: Option<Color>) -> Self {
        self.color = color;
        self
    }

    /// Computed a move that has not finished yet.
    pub fn has_pending_move(&self) -> bool {
        matches!(self.phase, Phase::Computed | Phase::Moving)
    }

    /// Network indices of the robots in the current snapshot, in order.
    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    /// Where an observer sees this robot, before frame and error.
    fn apparent_position<R: Rng + ?Sized>(&self, mode: AsyncPerception, rng: &mut R) -> Point2 {
        if !self.has_pending_move() {
            return self.position;
        }
        match mode {
            AsyncPerception::Initial => self.position_at_move_start,
            AsyncPerception::Uniform => {
                let t: f64 = rng.random();
                let start = self.position_at_move_start;
                start + (self.target - start) * t
            }
        }
    }
}

/// Parameters of a LOOK shared by all robots of a run.
#[derive(Debug, Clone, Copy)]
pub struct LookParams {
    pub vision: VisionErrorSpec,
    pub timing: ErrorDrawTiming,
    pub perception: AsyncPerception,
}

/// Builds the snapshot `observer` would take of `network`.
///
/// `observer_index` is the observer's slot in `network`; it is skipped. Entries
/// are in network order. The network indices are written to `sources`.
pub fn build_snapshot_into(
    observer_index: usize,
    network: &[RobotState],
    params: &LookParams,
    rng: &mut SimRng,
    out: &mut Vec<PerceivedRobot>,
    sources: &mut Vec<usize>,
) {
    out.clear();
    sources.clear();
    let observer = &network[observer_index];
    let frame = observer.frame.with_origin(observer.position);
    for (j, other) in network.iter().enumerate() {
        if j == observer_index {
            continue;
        }
        let seen = other.apparent_position(params.perception, rng);
        let local = frame.to_local(seen);
        let position = if params.vision.is_identity() {
            local
        } else {
            let draw = match params.timing {
                ErrorDrawTiming::EveryLook => params.vision.draw(rng),
                ErrorDrawTiming::Init => observer.fixed_draws.get(j).copied().unwrap_or_default(),
            };
            params.vision.apply(local, draw)
        };
        out.push(PerceivedRobot {
            position,
            color: other.color,
        });
        sources.push(j);
    }
}

pub fn build_snapshot(
    observer_index: usize,
    network: &[RobotState],
    params: &LookParams,
    rng: &mut SimRng,
) -> Vec<PerceivedRobot> {
    let mut out = Vec::with_capacity(network.len().saturating_sub(1));
    let mut sources = Vec::with_capacity(network.len().saturating_sub(1));
    build_snapshot_into(observer_index, network, params, rng, &mut out, &mut sources);
    out
}

/// Error-free view of the current configuration from `observer_index`,
/// ignoring pending moves. Used for cycle keys, never for decisions.
pub fn exact_view_into(observer_index: usize, network: &[RobotState], out: &mut Vec<PerceivedRobot>) {
    out.clear();
    let observer = &network[observer_index];
    let frame = observer.frame.with_origin(observer.position);
    for (j, other) in network.iter().enumerate() {
        if j != observer_index {
            out.push(PerceivedRobot {
                position: frame.to_local(other.position),
                color: other.color,
            });
        }
    }
}

/// Performs the LOOK of robot `index` in place.
pub fn look(index: usize, network: &mut [RobotState], params: &LookParams, rng: &mut SimRng) {
    debug_assert_eq!(network[index].phase, Phase::Idle);
    let mut snapshot = std::mem::take(&mut network[index].snapshot);
    let mut sources = std::mem::take(&mut network[index].observed);
    network[index].compass.on_look(rng);
    build_snapshot_into(index, network, params, rng, &mut snapshot, &mut sources);
    let robot = &mut network[index];
    robot.frame = robot.frame.with_origin(robot.position);
    robot.snapshot = snapshot;
    robot.observed = sources;
    robot.phase = Phase::Looked;
}

/// Outcome of one MOVE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveResult {
    pub traveled: f64,
    /// A move towards a distinct target that left the robot where it was,
    /// because the displacement rounded away.
    pub stuck: bool,
}

/// Executes the pending move of `robot` and returns it to IDLE.
pub fn advance_move<R: Rng + ?Sized>(
    robot: &mut RobotState,
    rigidity: Rigidity,
    adversary: NonRigidAdversary,
    rng: &mut R,
) -> MoveResult {
    debug_assert!(robot.has_pending_move());
    robot.phase = Phase::Moving;
    let start = robot.position;
    let target = robot.target;
    let d = distance(start, target);
    let end = match rigidity {
        Rigidity::Rigid => target,
        Rigidity::NonRigid { delta } => {
            if d == 0.0 {
                target
            } else {
                let floor = delta.min(d);
                let stop = match adversary {
                    NonRigidAdversary::MinStop => floor,
                    NonRigidAdversary::Uniform => floor + (d - floor) * rng.random::<f64>(),
                };
                if stop >= d {
                    target
                } else {
                    start + (target - start) * (stop / d)
                }
            }
        }
    };
    robot.position = end;
    robot.position_at_move_start = end;
    robot.target = end;
    robot.phase = Phase::Idle;
    let traveled = distance(start, end);
    MoveResult {
        traveled,
        stuck: traveled == 0.0 && robot.pending_local_nonzero,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use std::f64::consts::PI;

    fn params() -> LookParams {
        LookParams {
            vision: VisionErrorSpec::NONE,
            timing: ErrorDrawTiming::EveryLook,
            perception: AsyncPerception::Initial,
        }
    }

    fn robot(id: u32, x: f64, y: f64) -> RobotState {
        RobotState::new(RobotId(id), Point2::new(x, y), LocalFrame::identity())
    }

    #[test]
    fn snapshot_identity_frames() {
        let net = vec![robot(1, 0.0, 0.0), robot(2, 1.0, 0.0)];
        let mut rng = stream(1, Stream::Perception);
        let snap = build_snapshot(0, &net, &params(), &mut rng);
        assert_eq!(snap.len(), 1);
        assert_eq!(snap[0].position, Point2::new(1.0, 0.0));
    }

    #[test]
    fn snapshot_sees_moving_robot_at_start() {
        let mut net = vec![robot(1, 0.0, 0.0), robot(2, 1.0, 0.0)];
        net[1].phase = Phase::Computed;
        net[1].target = Point2::new(0.5, 0.0);
        let mut rng = stream(1, Stream::Perception);
        let snap = build_snapshot(0, &net, &params(), &mut rng);
        assert_eq!(snap[0].position, Point2::new(1.0, 0.0));

        let uniform = LookParams {
            perception: AsyncPerception::Uniform,
            ..params()
        };
        for _ in 0..100 {
            let s = build_snapshot(0, &net, &uniform, &mut rng);
            assert!(s[0].position.y == 0.0);
            assert!((0.5..=1.0).contains(&s[0].position.x));
        }
    }

    #[test]
    fn snapshot_rotated_frame() {
        let mut net = vec![robot(1, 0.0, 0.0), robot(2, 1.0, 0.0)];
        net[0].frame = LocalFrame::new(PI, false, Point2::ORIGIN);
        let mut rng = stream(1, Stream::Perception);
        let snap = build_snapshot(0, &net, &params(), &mut rng);
        assert!(distance(snap[0].position, Point2::new(-1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn look_sets_phase_and_keeps_colors() {
        let mut net = vec![
            robot(1, 0.0, 0.0).with_color(Some(Color::WHITE)),
            robot(2, 2.0, 0.0).with_color(Some(Color::BLACK)),
        ];
        let mut rng = stream(1, Stream::Perception);
        look(0, &mut net, &params(), &mut rng);
        assert_eq!(net[0].phase, Phase::Looked);
        assert_eq!(net[0].snapshot[0].color, Some(Color::BLACK));
        assert_eq!(net[0].observed(), &[1]);
    }

    #[test]
    fn rigid_move_reaches_target() {
        let mut r = robot(1, 0.0, 0.0);
        r.phase = Phase::Computed;
        r.target = Point2::new(1.0, 0.0);
        let mut rng = stream(1, Stream::Motion);
        let m = advance_move(&mut r, Rigidity::Rigid, NonRigidAdversary::Uniform, &mut rng);
        assert_eq!(r.position, Point2::new(1.0, 0.0));
        assert_eq!(m.traveled, 1.0);
        assert_eq!(r.phase, Phase::Idle);
    }

    #[test]
    fn non_rigid_move_stops_after_delta() {
        let mut rng = stream(1, Stream::Motion);
        for _ in 0..1000 {
            let mut r = robot(1, 0.0, 0.0);
            r.phase = Phase::Computed;
            r.target = Point2::new(1.0, 0.0);
            let m = advance_move(
                &mut r,
                Rigidity::NonRigid { delta: 0.3 },
                NonRigidAdversary::Uniform,
                &mut rng,
            );
            assert!(m.traveled >= 0.3 - 1e-15 && m.traveled <= 1.0);
            assert_eq!(r.position.y, 0.0);
            assert!((m.traveled - r.position.x).abs() < 1e-15);
        }
        let mut r = robot(1, 0.0, 0.0);
        r.phase = Phase::Computed;
        r.target = Point2::new(1.0, 0.0);
        let m = advance_move(
            &mut r,
            Rigidity::NonRigid { delta: 0.3 },
            NonRigidAdversary::MinStop,
            &mut rng,
        );
        assert!((m.traveled - 0.3).abs() < 1e-15);
    }

    #[test]
    fn short_moves_complete_under_non_rigid() {
        let mut rng = stream(2, Stream::Motion);
        let mut r = robot(1, 0.0, 0.0);
        r.phase = Phase::Computed;
        r.target = Point2::new(0.1, 0.0);
        advance_move(
            &mut r,
            Rigidity::NonRigid { delta: 0.3 },
            NonRigidAdversary::MinStop,
            &mut rng,
        );
        assert_eq!(r.position, Point2::new(0.1, 0.0));
    }

    #[test]
    fn null_move() {
        let mut r = robot(1, 2.0, 2.0);
        r.phase = Phase::Computed;
        let mut rng = stream(1, Stream::Motion);
        let m = advance_move(&mut r, Rigidity::Rigid, NonRigidAdversary::Uniform, &mut rng);
        assert_eq!(m.traveled, 0.0);
        assert!(!m.stuck);
        assert_eq!(r.phase, Phase::Idle);
    }

    #[test]
    fn phase_transitions() {
        assert!(Phase::Idle.can_transition_to(Phase::Looked));
        assert!(Phase::Moving.can_transition_to(Phase::Idle));
        assert!(!Phase::Idle.can_transition_to(Phase::Computed));
        assert!(!Phase::Looked.can_transition_to(Phase::Idle));
    }
}
