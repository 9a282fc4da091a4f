// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-robot algorithms whose robots carry a visible color.

use serde::{Deserialize, Serialize};

use super::{
    expect_exactly, Algorithm, AlgorithmError, ComputeInput, ComputeOutput, Goal, InputSetKey,
    KeySpace,
};
use crate::geometry::Point2;
use crate::rng::SimRng;
use crate::robot::{Color, PerceivedRobot, RobotState};

fn colored_pair(
    name: &'static str,
    input: &ComputeInput<'_>,
) -> Result<(Color, Color, Point2), AlgorithmError> {
    if input.snapshot.len() != 1 {
        return Err(AlgorithmError::WrongArity {
            algorithm: name,
            expected: "exactly 2",
            got: input.snapshot.len() + 1,
        });
    }
    let other = input.snapshot[0];
    match (input.my_color, other.color) {
        (Some(me), Some(seen)) => Ok((me, seen, other.position)),
        _ => Err(AlgorithmError::MissingColor(name)),
    }
}

fn colored_pair_key(robot: &RobotState, view: &[PerceivedRobot]) -> InputSetKey {
    let mut key = InputSetKey::empty();
    key.push_color(robot.color);
    key.push_color(view.first().and_then(|p| p.color));
    key.push_u8(robot.phase.tag());
    key
}

/// Two-color fuel-efficient convergence.
///
/// | me    | seen  | becomes | target        |
/// |-------|-------|---------|---------------|
/// | WHITE | WHITE | BLACK   | halfway there |
/// | WHITE | BLACK | BLACK   | stay          |
/// | BLACK | BLACK | WHITE   | stay          |
/// | BLACK | WHITE | BLACK   | stay          |
#[derive(Debug, Clone, Copy, Default)]
pub struct Fec;

impl Algorithm for Fec {
    fn name(&self) -> &'static str {
        "fec"
    }

    fn goal(&self) -> Goal {
        Goal::Convergence
    }

    fn key_space(&self) -> KeySpace {
        KeySpace::Finite
    }

    fn palette(&self) -> Option<u8> {
        Some(2)
    }

    fn check_robot_count(&self, n: usize) -> Result<(), AlgorithmError> {
        expect_exactly(self.name(), 2, n)
    }

    fn compute(
        &self,
        input: &ComputeInput<'_>,
        _rng: &mut SimRng,
    ) -> Result<ComputeOutput, AlgorithmError> {
        let (me, seen, other) = colored_pair(self.name(), input)?;
        Ok(match (me, seen) {
            (Color::WHITE, Color::WHITE) => ComputeOutput::to(other / 2.0).with_color(Color::BLACK),
            (Color::WHITE, _) => ComputeOutput::stay().with_color(Color::BLACK),
            (_, Color::BLACK) => ComputeOutput::stay().with_color(Color::WHITE),
            _ => ComputeOutput::stay(),
        })
    }

    fn input_set(&self, robot: &RobotState, view: &[PerceivedRobot]) -> InputSetKey {
        colored_pair_key(robot, view)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetRule {
    Stay,
    Midpoint,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LuminousRule {
    pub me: u8,
    pub seen: u8,
    pub becomes: u8,
    pub target: TargetRule,
}

/// Transition table for a two-robot luminous algorithm. Missing entries
/// mean: stay, keep the color.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LuminousTable {
    pub palette: u8,
    #[serde(default = "default_goal")]
    pub goal: Goal,
    pub rules: Vec<LuminousRule>,
}

fn default_goal() -> Goal {
    Goal::Convergence
}

impl LuminousTable {
    /// The FEC algorithm written as a table.
    pub fn fec() -> Self {
        let rule = |me, seen, becomes, target| LuminousRule {
            me,
            seen,
            becomes,
            target,
        };
        Self {
            palette: 2,
            goal: Goal::Convergence,
            rules: vec![
                rule(0, 0, 1, TargetRule::Midpoint),
                rule(0, 1, 1, TargetRule::Stay),
                rule(1, 1, 0, TargetRule::Stay),
                rule(1, 0, 1, TargetRule::Stay),
            ],
        }
    }

    pub fn validate(&self) -> Result<(), AlgorithmError> {
        if self.palette == 0 {
            return Err(AlgorithmError::InvalidParameter(
                "palette must be positive".into(),
            ));
        }
        let mut seen = vec![false; self.palette as usize * self.palette as usize];
        for r in &self.rules {
            if r.me >= self.palette || r.seen >= self.palette || r.becomes >= self.palette {
                return Err(AlgorithmError::InvalidParameter(format!(
                    "rule ({}, {}) uses a color outside the palette",
                    r.me, r.seen
                )));
            }
            let slot = &mut seen[r.me as usize * self.palette as usize + r.seen as usize];
            if *slot {
                return Err(AlgorithmError::InvalidParameter(format!(
                    "duplicate rule for ({}, {})",
                    r.me, r.seen
                )));
            }
            *slot = true;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Luminous {
    table: LuminousTable,
    lookup: Vec<Option<LuminousRule>>,
}

impl Luminous {
    pub fn new(table: LuminousTable) -> Self {
        let p = table.palette as usize;
        let mut lookup = vec![None; p * p];
        for r in &table.rules {
            lookup[r.me as usize * p + r.seen as usize] = Some(*r);
        }
        Self { table, lookup }
    }

    pub fn table(&self) -> &LuminousTable {
        &self.table
    }
}

impl Algorithm for Luminous {
    fn name(&self) -> &'static str {
        "luminous"
    }

    fn goal(&self) -> Goal {
        self.table.goal
    }

    fn key_space(&self) -> KeySpace {
        KeySpace::Finite
    }

    fn palette(&self) -> Option<u8> {
        Some(self.table.palette)
    }

    fn check_robot_count(&self, n: usize) -> Result<(), AlgorithmError> {
        expect_exactly(self.name(), 2, n)
    }

    fn compute(
        &self,
        input: &ComputeInput<'_>,
        _rng: &mut SimRng,
    ) -> Result<ComputeOutput, AlgorithmError> {
        let (me, seen, other) = colored_pair(self.name(), input)?;
        let p = self.table.palette;
        if me.0 >= p || seen.0 >= p {
            return Err(AlgorithmError::InvalidParameter(format!(
                "color outside palette of {p}"
            )));
        }
        let Some(rule) = self.lookup[me.0 as usize * p as usize + seen.0 as usize] else {
            return Ok(ComputeOutput::stay());
        };
        let target = match rule.target {
            TargetRule::Stay => Point2::ORIGIN,
            TargetRule::Midpoint => other / 2.0,
            TargetRule::Other => other,
        };
        let out = ComputeOutput::to(target);
        Ok(if rule.becomes == me.0 {
            out
        } else {
            out.with_color(Color(rule.becomes))
        })
    }

    fn input_set(&self, robot: &RobotState, view: &[PerceivedRobot]) -> InputSetKey {
        colored_pair_key(robot, view)
    }
}
