// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Oblivious rendezvous and convergence targets.

use smallvec::SmallVec;

use super::{
    configuration_key, expect_exactly, Algorithm, AlgorithmError, ComputeInput, ComputeOutput,
    Goal, InputSetKey, KeySpace,
};
use crate::geometry::{centroid, geometric_median, Point2};
use crate::rng::SimRng;
use crate::robot::{PerceivedRobot, RobotState};

/// Everyone the observer sees sits exactly on the observer.
pub fn view_is_gathered(view: &[PerceivedRobot]) -> bool {
    view.iter().all(|p| p.position == Point2::ORIGIN)
}

fn with_origin(snapshot: &[PerceivedRobot]) -> SmallVec<[Point2; 16]> {
    let mut pts: SmallVec<[Point2; 16]> = SmallVec::with_capacity(snapshot.len() + 1);
    pts.push(Point2::ORIGIN);
    pts.extend(snapshot.iter().map(|p| p.position));
    pts
}

/// Move halfway to the other robot.
#[derive(Debug, Clone, Copy, Default)]
pub struct Midpoint;

impl Algorithm for Midpoint {
    fn name(&self) -> &'static str {
        "midpoint"
    }

    fn goal(&self) -> Goal {
        Goal::Gathering
    }

    fn key_space(&self) -> KeySpace {
        KeySpace::Finite
    }

    fn check_robot_count(&self, n: usize) -> Result<(), AlgorithmError> {
        expect_exactly(self.name(), 2, n)
    }

    fn compute(
        &self,
        input: &ComputeInput<'_>,
        _rng: &mut SimRng,
    ) -> Result<ComputeOutput, AlgorithmError> {
        expect_exactly(self.name(), 1, input.snapshot.len()).map_err(|_| {
            AlgorithmError::WrongArity {
                algorithm: self.name(),
                expected: "exactly 2",
                got: input.snapshot.len() + 1,
            }
        })?;
        Ok(ComputeOutput::to(input.snapshot[0].position / 2.0))
    }

    fn input_set(&self, _robot: &RobotState, _view: &[PerceivedRobot]) -> InputSetKey {
        InputSetKey::empty()
    }
}

/// Midpoint, but stay put once the robots share a location.
#[derive(Debug, Clone, Copy, Default)]
pub struct MidpointMultiplicity;

impl Algorithm for MidpointMultiplicity {
    fn name(&self) -> &'static str {
        "midpoint_multiplicity"
    }

    fn goal(&self) -> Goal {
        Goal::Gathering
    }

    fn key_space(&self) -> KeySpace {
        KeySpace::Finite
    }

    fn check_robot_count(&self, n: usize) -> Result<(), AlgorithmError> {
        expect_exactly(self.name(), 2, n)
    }

    fn compute(
        &self,
        input: &ComputeInput<'_>,
        rng: &mut SimRng,
    ) -> Result<ComputeOutput, AlgorithmError> {
        if input.snapshot.len() == 1 && view_is_gathered(input.snapshot) {
            return Ok(ComputeOutput::stay());
        }
        Midpoint.compute(input, rng)
    }

    fn input_set(&self, _robot: &RobotState, view: &[PerceivedRobot]) -> InputSetKey {
        let mut key = InputSetKey::empty();
        key.push_u8(view_is_gathered(view) as u8);
        key
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CenterOfGravity {
    pub quantum: f64,
}

impl Algorithm for CenterOfGravity {
    fn name(&self) -> &'static str {
        "cog"
    }

    fn goal(&self) -> Goal {
        Goal::Convergence
    }

    fn key_space(&self) -> KeySpace {
        KeySpace::Quantized
    }

    fn check_robot_count(&self, n: usize) -> Result<(), AlgorithmError> {
        if n >= 2 {
            Ok(())
        } else {
            Err(AlgorithmError::WrongArity {
                algorithm: self.name(),
                expected: "at least 2",
                got: n,
            })
        }
    }

    fn compute(
        &self,
        input: &ComputeInput<'_>,
        _rng: &mut SimRng,
    ) -> Result<ComputeOutput, AlgorithmError> {
        let pts = with_origin(input.snapshot);
        // Never empty: the origin is always there.
        let c = centroid(&pts).map_err(|_| AlgorithmError::Degenerate("empty view"))?;
        Ok(ComputeOutput::to(c))
    }

    fn input_set(&self, _robot: &RobotState, view: &[PerceivedRobot]) -> InputSetKey {
        configuration_key(view, self.quantum)
    }
}

/// Approximate geometric median of everyone seen, observer included.
#[derive(Debug, Clone, Copy)]
pub struct GeometricMedianTarget {
    pub tolerance: f64,
    pub quantum: f64,
}

impl Algorithm for GeometricMedianTarget {
    fn name(&self) -> &'static str {
        "geometric_median"
    }

    fn goal(&self) -> Goal {
        Goal::Convergence
    }

    fn key_space(&self) -> KeySpace {
        KeySpace::Quantized
    }

    fn check_robot_count(&self, n: usize) -> Result<(), AlgorithmError> {
        CenterOfGravity {
            quantum: self.quantum,
        }
        .check_robot_count(n)
    }

    fn compute(
        &self,
        input: &ComputeInput<'_>,
        _rng: &mut SimRng,
    ) -> Result<ComputeOutput, AlgorithmError> {
        let pts = with_origin(input.snapshot);
        let m = geometric_median(&pts, self.tolerance)
            .map_err(|_| AlgorithmError::Degenerate("empty view"))?;
        Ok(ComputeOutput::to(m))
    }

    fn input_set(&self, _robot: &RobotState, view: &[PerceivedRobot]) -> InputSetKey {
        configuration_key(view, self.quantum)
    }
}
