// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! COMPUTE functions and the input-set keys used for cycle detection.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::error_models::VisionErrorSpec;
use crate::geometry::Point2;
use crate::rng::SimRng;
use crate::robot::{Color, PerceivedRobot, RobotState};

mod election;
mod luminous;
mod rendezvous;

pub use election::{elect, Election, ElectionOutcome, ElectionParams, ReliableElection};
pub use luminous::{Fec, Luminous, LuminousRule, LuminousTable, TargetRule};
pub use rendezvous::{CenterOfGravity, GeometricMedianTarget, Midpoint, MidpointMultiplicity};

pub const DEFAULT_CYCLE_QUANTUM: f64 = 1e-12;
pub const DEFAULT_MEDIAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgorithmError {
    #[error("{algorithm} needs {expected} robots, got {got}")]
    WrongArity {
        algorithm: &'static str,
        expected: &'static str,
        got: usize,
    },
    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),
    #[error("{0} requires every robot to carry a color")]
    MissingColor(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown algorithm `{0}` (known: {known})", known = REGISTRY.join(", "))]
pub struct RegistryError(pub String);

/// What a run of the algorithm is trying to achieve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    Gathering,
    Convergence,
    Election,
}

/// Whether the set of distinct input-set keys is finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeySpace {
    Finite,
    Quantized,
}

#[derive(Debug, Clone, Copy)]
pub struct ComputeInput<'a> {
    pub snapshot: &'a [PerceivedRobot],
    pub my_color: Option<Color>,
    /// Current compass error in radians. Zero without a compass model.
    pub compass_offset: f64,
}

impl<'a> ComputeInput<'a> {
    pub fn new(snapshot: &'a [PerceivedRobot]) -> Self {
        Self {
            snapshot,
            my_color: None,
            compass_offset: 0.0,
        }
    }

    pub fn with_color(mut self, color: Option<Color>) -> Self {
        self.my_color = color;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderChoice {
    Myself,
    /// Index into the snapshot.
    Perceived(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputeOutput {
    /// Local frame, observer at the origin.
    pub target: Point2,
    pub new_color: Option<Color>,
    pub leader_choice: Option<LeaderChoice>,
    pub wants_random_move: bool,
}

impl ComputeOutput {
    pub fn stay() -> Self {
        Self::to(Point2::ORIGIN)
    }

    pub fn to(target: Point2) -> Self {
        Self {
            target,
            new_color: None,
            leader_choice: None,
            wants_random_move: false,
        }
    }

    pub fn with_color(mut self, color: Color) -> Self {
        self.new_color = Some(color);
        self
    }
}

/// Canonical byte encoding of the inputs an algorithm depends on.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct InputSetKey(SmallVec<[u8; 24]>);

impl InputSetKey {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push_u8(&mut self, v: u8) {
        self.0.push(v);
    }

    pub fn push_i64(&mut self, v: i64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    pub fn push_color(&mut self, c: Option<Color>) {
        match c {
            None => self.push_u8(0),
            Some(Color(i)) => {
                self.push_u8(1);
                self.push_u8(i);
            }
        }
    }

    pub fn extend(&mut self, other: &InputSetKey) {
        self.0.extend_from_slice(&other.0);
    }
}

impl fmt::Debug for InputSetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InputSetKey(")?;
        for b in self.0.iter() {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}

/// Snaps a coordinate to the `quantum` grid.
pub fn quantize(v: f64, quantum: f64) -> i64 {
    // `as` saturates, which is what we want for absurd magnitudes.
    (v / quantum).round() as i64
}

/// Key of the multiset {origin} ∪ snapshot, coordinates snapped to `quantum`.
pub fn configuration_key(snapshot: &[PerceivedRobot], quantum: f64) -> InputSetKey {
    let mut cells: SmallVec<[(i64, i64, Option<Color>); 16]> = snapshot
        .iter()
        .map(|p| {
            (
                quantize(p.position.x, quantum),
                quantize(p.position.y, quantum),
                p.color,
            )
        })
        .collect();
    cells.push((0, 0, None));
    cells.sort_unstable();
    let mut key = InputSetKey::empty();
    for (x, y, c) in cells {
        key.push_i64(x);
        key.push_i64(y);
        key.push_color(c);
    }
    key
}

/// A COMPUTE function together with what it needs from the engine.
pub trait Algorithm: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn goal(&self) -> Goal;

    fn key_space(&self) -> KeySpace;

    /// Number of colors, for luminous algorithms.
    fn palette(&self) -> Option<u8> {
        None
    }

    fn check_robot_count(&self, n: usize) -> Result<(), AlgorithmError>;

    fn compute(
        &self,
        input: &ComputeInput<'_>,
        rng: &mut SimRng,
    ) -> Result<ComputeOutput, AlgorithmError>;

    /// Inputs relevant to this algorithm, for robot `robot` viewing `view`.
    /// Only colors and phase may be read from `robot`; never its name or
    /// global position.
    fn input_set(&self, robot: &RobotState, view: &[PerceivedRobot]) -> InputSetKey;
}

pub(crate) fn expect_exactly(
    algorithm: &'static str,
    expected: usize,
    n: usize,
) -> Result<(), AlgorithmError> {
    if n == expected {
        Ok(())
    } else {
        Err(AlgorithmError::WrongArity {
            algorithm,
            expected: match expected {
                2 => "exactly 2",
                3 => "exactly 3",
                _ => "a specific number of",
            },
            got: n,
        })
    }
}

/// Algorithm selection and parameters, as found in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Midpoint,
    MidpointMultiplicity,
    #[serde(alias = "center_of_gravity")]
    Cog,
    GeometricMedian {
        #[serde(default = "default_median_tolerance")]
        tolerance: f64,
    },
    Fec,
    Election {
        #[serde(default, flatten)]
        params: ElectionParams,
    },
    ReliableElection {
        #[serde(default, flatten)]
        params: ElectionParams,
        #[serde(default)]
        nb_tries: u32,
        /// Defaults to ten times the vision error magnitude.
        #[serde(default)]
        scramble_radius: Option<f64>,
        /// Model used for virtual checks. Defaults to the scenario's.
        #[serde(default)]
        vision: Option<VisionErrorSpec>,
    },
    Luminous {
        table: LuminousTable,
    },
}

fn default_median_tolerance() -> f64 {
    DEFAULT_MEDIAN_TOLERANCE
}

pub const REGISTRY: &[&str] = &[
    "midpoint",
    "midpoint_multiplicity",
    "cog",
    "geometric_median",
    "fec",
    "election",
    "reliable_election",
    "luminous",
];

/// Scenario-level settings an algorithm may pick up when built.
#[derive(Debug, Clone, Copy)]
pub struct BuildContext {
    pub vision: VisionErrorSpec,
    pub cycle_quantum: f64,
}

impl Default for BuildContext {
    fn default() -> Self {
        Self {
            vision: VisionErrorSpec::NONE,
            cycle_quantum: DEFAULT_CYCLE_QUANTUM,
        }
    }
}

impl AlgorithmSpec {
    /// Default parameters for a registered id.
    pub fn from_id(id: &str) -> Result<Self, RegistryError> {
        Ok(match id {
            "midpoint" => Self::Midpoint,
            "midpoint_multiplicity" => Self::MidpointMultiplicity,
            "cog" | "center_of_gravity" => Self::Cog,
            "geometric_median" => Self::GeometricMedian {
                tolerance: DEFAULT_MEDIAN_TOLERANCE,
            },
            "fec" => Self::Fec,
            "election" => Self::Election {
                params: ElectionParams::default(),
            },
            "reliable_election" => Self::ReliableElection {
                params: ElectionParams::default(),
                nb_tries: 0,
                scramble_radius: None,
                vision: None,
            },
            "luminous" => Self::Luminous {
                table: LuminousTable::fec(),
            },
            other => return Err(RegistryError(other.to_owned())),
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::Midpoint => "midpoint",
            Self::MidpointMultiplicity => "midpoint_multiplicity",
            Self::Cog => "cog",
            Self::GeometricMedian { .. } => "geometric_median",
            Self::Fec => "fec",
            Self::Election { .. } => "election",
            Self::ReliableElection { .. } => "reliable_election",
            Self::Luminous { .. } => "luminous",
        }
    }

    pub fn validate(&self) -> Result<(), AlgorithmError> {
        match self {
            Self::GeometricMedian { tolerance } if !(*tolerance > 0.0 && tolerance.is_finite()) => {
                Err(AlgorithmError::InvalidParameter(
                    "median tolerance must be positive".into(),
                ))
            }
            Self::Election { params } => params.validate(),
            Self::ReliableElection {
                params,
                scramble_radius,
                vision,
                ..
            } => {
                params.validate()?;
                if let Some(r) = scramble_radius {
                    if !(*r > 0.0 && r.is_finite()) {
                        return Err(AlgorithmError::InvalidParameter(
                            "scramble_radius must be positive".into(),
                        ));
                    }
                }
                if let Some(v) = vision {
                    v.validate().map_err(AlgorithmError::InvalidParameter)?;
                }
                Ok(())
            }
            Self::Luminous { table } => table.validate(),
            _ => Ok(()),
        }
    }

    pub fn build(&self, ctx: &BuildContext) -> Result<Arc<dyn Algorithm>, AlgorithmError> {
        self.validate()?;
        let q = ctx.cycle_quantum;
        Ok(match self {
            Self::Midpoint => Arc::new(Midpoint),
            Self::MidpointMultiplicity => Arc::new(MidpointMultiplicity),
            Self::Cog => Arc::new(CenterOfGravity { quantum: q }),
            Self::GeometricMedian { tolerance } => Arc::new(GeometricMedianTarget {
                tolerance: *tolerance,
                quantum: q,
            }),
            Self::Fec => Arc::new(Fec),
            Self::Election { params } => Arc::new(Election {
                params: *params,
                quantum: q,
            }),
            Self::ReliableElection {
                params,
                nb_tries,
                scramble_radius,
                vision,
            } => {
                let vision = vision.unwrap_or(ctx.vision);
                Arc::new(ReliableElection {
                    election: Election {
                        params: *params,
                        quantum: q,
                    },
                    nb_tries: *nb_tries,
                    scramble_radius: scramble_radius
                        .unwrap_or_else(|| ReliableElection::default_scramble_radius(&vision)),
                    vision,
                })
            }
            Self::Luminous { table } => Arc::new(Luminous::new(table.clone())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_roundtrip() {
        for id in REGISTRY {
            let spec = AlgorithmSpec::from_id(id).unwrap();
            assert_eq!(spec.id(), *id);
            spec.build(&BuildContext::default()).unwrap();
        }
        assert!(AlgorithmSpec::from_id("nope").is_err());
    }

    #[test]
    fn spec_json() {
        let spec: AlgorithmSpec =
            serde_json::from_str(r#"{"id":"reliable_election","nb_tries":10}"#).unwrap();
        match spec {
            AlgorithmSpec::ReliableElection { nb_tries, .. } => assert_eq!(nb_tries, 10),
            _ => panic!(),
        }
        let spec: AlgorithmSpec = serde_json::from_str(r#"{"id":"geometric_median"}"#).unwrap();
        assert_eq!(
            spec,
            AlgorithmSpec::GeometricMedian {
                tolerance: DEFAULT_MEDIAN_TOLERANCE
            }
        );
        let back: AlgorithmSpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn quantized_keys_ignore_order() {
        let a = [
            PerceivedRobot {
                position: Point2::new(1.0, 0.0),
                color: None,
            },
            PerceivedRobot {
                position: Point2::new(0.0, 2.0),
                color: None,
            },
        ];
        let b = [a[1], a[0]];
        assert_eq!(configuration_key(&a, 1e-12), configuration_key(&b, 1e-12));
        let mut c = a;
        c[0].position.x += 1e-9;
        assert_ne!(configuration_key(&a, 1e-12), configuration_key(&c, 1e-12));
    }
}
