// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Witness files and replay.
//!
//! A witness is newline-delimited JSON: one header line holding the scenario,
//! the run seed and the loop bounds, then one line per scheduler decision up
//! to the end of the loop.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::run::{build_simulation, Built};
use super::{ConfigError, ScenarioConfig};
use crate::geometry::Point2;
use crate::scheduler::StepDecision;
use crate::termination::{is_gathered, joint_key, Witness};

pub const WITNESS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessHeader {
    pub version: u32,
    pub config: ScenarioConfig,
    pub run_seed: u64,
    pub point_index: u64,
    pub witness: Witness,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessFile {
    pub header: WitnessHeader,
    /// Decisions for steps `1..=t1`.
    pub decisions: Vec<StepDecision>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line {
    Header(Box<WitnessHeader>),
    Step { step: u64, decision: StepDecision },
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("reading witness: {0}")]
    Io(#[from] io::Error),
    #[error("witness line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("malformed witness: {0}")]
    Malformed(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

pub fn write_witness<W: Write>(file: &WitnessFile, mut out: W) -> io::Result<()> {
    let header = Line::Header(Box::new(file.header.clone()));
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for (i, d) in file.decisions.iter().enumerate() {
        let line = Line::Step {
            step: i as u64 + 1,
            decision: d.clone(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_witness<R: BufRead>(input: R) -> Result<WitnessFile, ReplayError> {
    let mut header = None;
    let mut decisions = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line =
            serde_json::from_str(&line).map_err(|source| ReplayError::Parse { line: i + 1, source })?;
        match parsed {
            Line::Header(h) if header.is_none() && decisions.is_empty() => header = Some(*h),
            Line::Header(_) => {
                return Err(ReplayError::Malformed(format!("unexpected header on line {}", i + 1)))
            }
            Line::Step { step, decision } => {
                if header.is_none() {
                    return Err(ReplayError::Malformed("step before header".into()));
                }
                if step != decisions.len() as u64 + 1 {
                    return Err(ReplayError::Malformed(format!(
                        "expected step {}, found {step}",
                        decisions.len() + 1
                    )));
                }
                decisions.push(decision);
            }
        }
    }
    let header = header.ok_or_else(|| ReplayError::Malformed("missing header".into()))?;
    if header.version != WITNESS_VERSION {
        return Err(ReplayError::Malformed(format!(
            "unsupported witness version {}",
            header.version
        )));
    }
    let w = header.witness;
    if w.t0 >= w.t1 || w.t1 != decisions.len() as u64 {
        return Err(ReplayError::Malformed(format!(
            "loop [{}, {}] does not fit {} decisions",
            w.t0,
            w.t1,
            decisions.len()
        )));
    }
    Ok(WitnessFile { header, decisions })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayStep {
    pub step: u64,
    pub positions: Vec<Point2>,
    pub gathered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub t0: u64,
    pub t1: u64,
    /// Whether the joint keys at `t0` and `t1` agree on re-execution.
    pub endpoints_match: bool,
    pub repetitions: u32,
    /// Loop repetitions that ended on the joint key of `t1`.
    pub repetitions_matching: u32,
    pub gathered_in_loop: bool,
    pub steps: Vec<ReplayStep>,
}

impl ReplayReport {
    pub fn loop_confirmed(&self) -> bool {
        self.endpoints_match && self.repetitions_matching == self.repetitions
    }
}

/// Re-executes the recorded prefix, then runs the loop `repetitions` more
/// times.
pub fn replay(file: &WitnessFile, repetitions: u32) -> Result<ReplayReport, ReplayError> {
    let h = &file.header;
    let prepared = h.config.prepare()?;
    let Built { mut sim, .. } = build_simulation(&prepared, h.run_seed, h.point_index)?;
    let (t0, t1) = (h.witness.t0, h.witness.t1);
    let mut scratch = Vec::new();
    let snapshot = |sim: &crate::scheduler::Simulation| {
        let positions: Vec<Point2> = sim.positions().collect();
        ReplayStep {
            step: sim.steps(),
            gathered: is_gathered(positions.iter().copied()),
            positions,
        }
    };
    let mut steps = vec![snapshot(&sim)];
    let mut key_t0 = (t0 == 0).then(|| joint_key(&sim, &mut scratch).1);
    for d in &file.decisions {
        sim.step(d);
        steps.push(snapshot(&sim));
        if sim.steps() == t0 {
            key_t0 = Some(joint_key(&sim, &mut scratch).1);
        }
    }
    let key_t1 = joint_key(&sim, &mut scratch).1;
    let endpoints_match = key_t0.as_ref() == Some(&key_t1);
    let body = &file.decisions[t0 as usize..];
    let mut repetitions_matching = 0;
    let mut gathered_in_loop = false;
    for _ in 0..repetitions {
        for d in body {
            sim.step(d);
            let s = snapshot(&sim);
            gathered_in_loop |= s.gathered;
            steps.push(s);
        }
        repetitions_matching += (joint_key(&sim, &mut scratch).1 == key_t1) as u32;
    }
    Ok(ReplayReport {
        t0,
        t1,
        endpoints_match,
        repetitions,
        repetitions_matching,
        gathered_in_loop,
        steps,
    })
}
