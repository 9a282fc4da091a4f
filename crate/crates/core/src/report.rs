// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Flat CSV rows for batches, single runs, election maps and curves.
//!
//! Reals are written in scientific notation with 17 significant digits,
//! which round-trips every `f64` and ignores the locale.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use thiserror::Error;

use crate::harness::{AggregateStats, CurvePoint, ElectionClass, ElectionPoint, LeaderView, RunOutcome};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("expected {expected} columns, found {found}")]
    Width { expected: usize, found: usize },
    #[error("column `{column}`: cannot parse `{value}`")]
    Field { column: String, value: String },
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
}

pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// A row type with a fixed header.
pub trait CsvRow: Sized {
    fn header(&self) -> Vec<String>;
    fn to_record(&self) -> Vec<String>;
    fn from_record(header: &[String], record: &[String]) -> Result<Self, ReportError>;
}

fn field<T: std::str::FromStr>(header: &[String], record: &[String], i: usize) -> Result<T, ReportError> {
    record[i].parse().map_err(|_| ReportError::Field {
        column: header[i].clone(),
        value: record[i].clone(),
    })
}

fn check_width(expected: usize, record: &[String]) -> Result<(), ReportError> {
    if record.len() == expected {
        Ok(())
    } else {
        Err(ReportError::Width {
            expected,
            found: record.len(),
        })
    }
}

fn owned(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

pub fn write_csv<W: Write, R: CsvRow>(out: W, rows: &[R]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = rows.first() {
        w.write_record(first.header())?;
    }
    for r in rows {
        w.write_record(r.to_record())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads rows back; `template` supplies the expected header.
pub fn read_csv<Rd: Read, R: CsvRow>(input: Rd, template: &R) -> Result<Vec<R>, ReportError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let expected = template.header();
    if header != expected {
        return Err(ReportError::Header {
            expected: expected.join(","),
            found: header.join(","),
        });
    }
    rdr.records()
        .map(|rec| {
            let rec: Vec<String> = rec?.iter().map(str::to_owned).collect();
            R::from_record(&header, &rec)
        })
        .collect()
}

/// One line per batch. The wall time is the last column.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub master_seed: u64,
    pub runs: u64,
    pub fuel_runs: u64,
    pub min_fuel: f64,
    pub max_fuel: f64,
    pub avg_fuel: f64,
    pub max_total_traveled: f64,
    pub max_segment_deviation: f64,
    pub divergence_fraction: f64,
    pub divergences: u64,
    pub timeouts: u64,
    pub failed_computes: u64,
    pub valid: u64,
    pub detected: u64,
    pub undetected: u64,
    /// `label=count` pairs joined by `;`, sorted by label.
    pub verdicts: String,
    pub wall_time_secs: f64,
}

const AGGREGATE_COLUMNS: [&str; 17] = [
    "master_seed",
    "runs",
    "fuel_runs",
    "min_fuel",
    "max_fuel",
    "avg_fuel",
    "max_total_traveled",
    "max_segment_deviation",
    "divergence_fraction",
    "divergences",
    "timeouts",
    "failed_computes",
    "election_valid",
    "election_detected",
    "election_undetected",
    "verdicts",
    "wall_time_secs",
];

pub fn verdict_histogram(verdicts: &BTreeMap<String, u64>) -> String {
    verdicts
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

impl From<&AggregateStats> for AggregateRow {
    fn from(s: &AggregateStats) -> Self {
        Self {
            master_seed: s.master_seed,
            runs: s.runs,
            fuel_runs: s.fuel_runs,
            min_fuel: s.min_fuel,
            max_fuel: s.max_fuel,
            avg_fuel: s.avg_fuel(),
            max_total_traveled: s.max_total_traveled,
            max_segment_deviation: s.max_segment_deviation,
            divergence_fraction: s.divergence_fraction(),
            divergences: s.divergences,
            timeouts: s.timeouts,
            failed_computes: s.failed_computes,
            valid: s.election.valid,
            detected: s.election.detected,
            undetected: s.election.undetected,
            verdicts: verdict_histogram(&s.verdicts),
            wall_time_secs: s.wall_time_secs,
        }
    }
}

impl CsvRow for AggregateRow {
    fn header(&self) -> Vec<String> {
        owned(&AGGREGATE_COLUMNS)
    }

    fn to_record(&self) -> Vec<String> {
        vec![
            self.master_seed.to_string(),
            self.runs.to_string(),
            self.fuel_runs.to_string(),
            fmt_real(self.min_fuel),
            fmt_real(self.max_fuel),
            fmt_real(self.avg_fuel),
            fmt_real(self.max_total_traveled),
            fmt_real(self.max_segment_deviation),
            fmt_real(self.divergence_fraction),
            self.divergences.to_string(),
            self.timeouts.to_string(),
            self.failed_computes.to_string(),
            self.valid.to_string(),
            self.detected.to_string(),
            self.undetected.to_string(),
            self.verdicts.clone(),
            fmt_real(self.wall_time_secs),
        ]
    }

    fn from_record(h: &[String], r: &[String]) -> Result<Self, ReportError> {
        check_width(AGGREGATE_COLUMNS.len(), r)?;
        Ok(Self {
            master_seed: field(h, r, 0)?,
            runs: field(h, r, 1)?,
            fuel_runs: field(h, r, 2)?,
            min_fuel: field(h, r, 3)?,
            max_fuel: field(h, r, 4)?,
            avg_fuel: field(h, r, 5)?,
            max_total_traveled: field(h, r, 6)?,
            max_segment_deviation: field(h, r, 7)?,
            divergence_fraction: field(h, r, 8)?,
            divergences: field(h, r, 9)?,
            timeouts: field(h, r, 10)?,
            failed_computes: field(h, r, 11)?,
            valid: field(h, r, 12)?,
            detected: field(h, r, 13)?,
            undetected: field(h, r, 14)?,
            verdicts: r[15].clone(),
            wall_time_secs: field(h, r, 16)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub index: u64,
    pub run_seed: u64,
    pub verdict: String,
    pub steps: u64,
    pub total_traveled: f64,
    pub baseline: f64,
    pub normalized_fuel: f64,
    pub max_segment_deviation: f64,
    pub stuck_moves: u64,
    pub failed_computes: u64,
}

const RUN_COLUMNS: [&str; 10] = [
    "index",
    "run_seed",
    "verdict",
    "steps",
    "total_traveled",
    "baseline",
    "normalized_fuel",
    "max_segment_deviation",
    "stuck_moves",
    "failed_computes",
];

impl RunRow {
    pub fn new(index: u64, o: &RunOutcome) -> Self {
        Self {
            index,
            run_seed: o.run_seed,
            verdict: o.verdict.label(),
            steps: o.steps,
            total_traveled: o.total_traveled,
            baseline: o.baseline,
            normalized_fuel: o.normalized_fuel,
            max_segment_deviation: o.max_segment_deviation,
            stuck_moves: o.stuck_moves,
            failed_computes: o.failed_computes,
        }
    }
}

impl CsvRow for RunRow {
    fn header(&self) -> Vec<String> {
        owned(&RUN_COLUMNS)
    }

    fn to_record(&self) -> Vec<String> {
        vec![
            self.index.to_string(),
            self.run_seed.to_string(),
            self.verdict.clone(),
            self.steps.to_string(),
            fmt_real(self.total_traveled),
            fmt_real(self.baseline),
            fmt_real(self.normalized_fuel),
            fmt_real(self.max_segment_deviation),
            self.stuck_moves.to_string(),
            self.failed_computes.to_string(),
        ]
    }

    fn from_record(h: &[String], r: &[String]) -> Result<Self, ReportError> {
        check_width(RUN_COLUMNS.len(), r)?;
        Ok(Self {
            index: field(h, r, 0)?,
            run_seed: field(h, r, 1)?,
            verdict: r[2].clone(),
            steps: field(h, r, 3)?,
            total_traveled: field(h, r, 4)?,
            baseline: field(h, r, 5)?,
            normalized_fuel: field(h, r, 6)?,
            max_segment_deviation: field(h, r, 7)?,
            stuck_moves: field(h, r, 8)?,
            failed_computes: field(h, r, 9)?,
        })
    }
}

/// Election map point: the third robot's position, the class and each
/// robot's conclusion.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterRow {
    pub x: f64,
    pub y: f64,
    pub class: ElectionClass,
    pub leaders: Vec<LeaderView>,
}

impl From<&ElectionPoint> for ScatterRow {
    fn from(p: &ElectionPoint) -> Self {
        let probe = p.positions.get(2).or(p.positions.last()).copied().unwrap_or_default();
        Self {
            x: probe.x,
            y: probe.y,
            class: p.class,
            leaders: p.leaders.clone(),
        }
    }
}

impl CsvRow for ScatterRow {
    fn header(&self) -> Vec<String> {
        let mut h = owned(&["x", "y", "class"]);
        h.extend((1..=self.leaders.len()).map(|i| format!("leader_r{i}")));
        h
    }

    fn to_record(&self) -> Vec<String> {
        let mut r = vec![fmt_real(self.x), fmt_real(self.y), self.class.to_string()];
        r.extend(self.leaders.iter().map(|l| l.to_string()));
        r
    }

    fn from_record(h: &[String], r: &[String]) -> Result<Self, ReportError> {
        check_width(h.len().max(3), r)?;
        Ok(Self {
            x: field(h, r, 0)?,
            y: field(h, r, 1)?,
            class: field(h, r, 2)?,
            leaders: (3..r.len()).map(|i| field(h, r, i)).collect::<Result<_, _>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub nb_tries: u32,
    pub points: u64,
    pub valid: u64,
    pub detected: u64,
    pub undetected: u64,
    pub valid_fraction: f64,
    pub detected_fraction: f64,
    pub undetected_fraction: f64,
}

const CURVE_COLUMNS: [&str; 8] = [
    "nb_tries",
    "points",
    "valid",
    "detected",
    "undetected",
    "valid_fraction",
    "detected_fraction",
    "undetected_fraction",
];

impl From<&CurvePoint> for CurveRow {
    fn from(p: &CurvePoint) -> Self {
        let c = &p.counts;
        Self {
            nb_tries: p.nb_tries,
            points: c.total(),
            valid: c.valid,
            detected: c.detected,
            undetected: c.undetected,
            valid_fraction: c.valid_fraction(),
            detected_fraction: c.detected_fraction(),
            undetected_fraction: c.undetected_fraction(),
        }
    }
}

impl CsvRow for CurveRow {
    fn header(&self) -> Vec<String> {
        owned(&CURVE_COLUMNS)
    }

    fn to_record(&self) -> Vec<String> {
        vec![
            self.nb_tries.to_string(),
            self.points.to_string(),
            self.valid.to_string(),
            self.detected.to_string(),
            self.undetected.to_string(),
            fmt_real(self.valid_fraction),
            fmt_real(self.detected_fraction),
            fmt_real(self.undetected_fraction),
        ]
    }

    fn from_record(h: &[String], r: &[String]) -> Result<Self, ReportError> {
        check_width(CURVE_COLUMNS.len(), r)?;
        Ok(Self {
            nb_tries: field(h, r, 0)?,
            points: field(h, r, 1)?,
            valid: field(h, r, 2)?,
            detected: field(h, r, 3)?,
            undetected: field(h, r, 4)?,
            valid_fraction: field(h, r, 5)?,
            detected_fraction: field(h, r, 6)?,
            undetected_fraction: field(h, r, 7)?,
        })
    }
}
