// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario files.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::placement::PlacementRule;
use super::ConfigError;
use crate::algorithms::{Algorithm, AlgorithmSpec, BuildContext};
use crate::error_models::{CompassErrorSpec, ErrorDrawTiming, VisionErrorSpec};
use crate::robot::{Color, FrameMode};
use crate::scheduler::{SchedulerConfig, StepDecision};
use crate::termination::{ResolvedTermination, TerminationConfig};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_MAX_ITERATIONS: u64 = 10_000;

fn config_version() -> u32 {
    CONFIG_VERSION
}

fn default_max_iterations() -> u64 {
    DEFAULT_MAX_ITERATIONS
}

/// A fixed activation sequence replacing the random adversary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptSpec {
    pub decisions: Vec<StepDecision>,
    /// Where to restart once the list is exhausted. Without it the run
    /// times out at the end of the script.
    #[serde(default)]
    pub loop_from: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "config_version")]
    pub version: u32,
    pub algorithm: AlgorithmSpec,
    pub robots: usize,
    #[serde(default)]
    pub scheduler: SchedulerConfig,
    #[serde(default)]
    pub vision: VisionErrorSpec,
    #[serde(default)]
    pub error_draw: ErrorDrawTiming,
    #[serde(default)]
    pub compass: CompassErrorSpec,
    #[serde(default)]
    pub frames: FrameMode,
    #[serde(default)]
    pub placement: PlacementRule,
    /// Starting color of every robot. Luminous algorithms default to 0.
    #[serde(default)]
    pub initial_color: Option<u8>,
    #[serde(default)]
    pub termination: TerminationConfig,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub runs: Option<u64>,
    /// Wall-clock budget for batches without a run count.
    #[serde(default)]
    pub budget_secs: Option<f64>,
    #[serde(default)]
    pub script: Option<ScriptSpec>,
}

impl ScenarioConfig {
    pub fn new(algorithm: AlgorithmSpec, robots: usize) -> Self {
        Self {
            version: CONFIG_VERSION,
            algorithm,
            robots,
            scheduler: SchedulerConfig::default(),
            vision: VisionErrorSpec::NONE,
            error_draw: ErrorDrawTiming::default(),
            compass: CompassErrorSpec::default(),
            frames: FrameMode::default(),
            placement: PlacementRule::default(),
            initial_color: None,
            termination: TerminationConfig::default(),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seed: 0,
            runs: None,
            budget_secs: None,
            script: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Sets a dotted `path` (e.g. `vision.err`) to `value`, which is parsed
    /// as JSON when possible and taken as a string otherwise.
    pub fn with_override(&self, path: &str, value: &str) -> Result<Self, ConfigError> {
        let mut doc = serde_json::to_value(self)?;
        let parsed: Value =
            serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_owned()));
        let mut slot = &mut doc;
        for part in path.split('.') {
            if part.is_empty() {
                return Err(ConfigError::Invalid(format!("bad override path `{path}`")));
            }
            let obj = match slot {
                Value::Object(map) => map,
                Value::Null => {
                    *slot = Value::Object(Default::default());
                    slot.as_object_mut().expect("just created")
                }
                _ => {
                    return Err(ConfigError::Invalid(format!(
                        "override `{path}`: `{part}` is inside a non-object"
                    )))
                }
            };
            slot = obj.entry(part.to_owned()).or_insert(Value::Null);
        }
        *slot = parsed;
        let cfg: Self = serde_json::from_value(doc)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.version != CONFIG_VERSION {
            return invalid(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            ));
        }
        if self.robots == 0 {
            return invalid("robots must be positive".into());
        }
        if self.max_iterations == 0 {
            return invalid("max_iterations must be positive".into());
        }
        self.algorithm.validate()?;
        self.scheduler.validate().map_err(ConfigError::Invalid)?;
        self.vision.validate().map_err(ConfigError::Invalid)?;
        if !(self.compass.max_error >= 0.0 && self.compass.max_error.is_finite()) {
            return invalid("compass.max_error must be finite and nonnegative".into());
        }
        self.termination.validate().map_err(ConfigError::Invalid)?;
        self.placement.validate(self.robots)?;
        if let Some(b) = self.budget_secs {
            if !(b > 0.0 && b.is_finite()) {
                return invalid("budget_secs must be positive".into());
            }
        }
        if let Some(script) = &self.script {
            if script.decisions.is_empty() {
                return invalid("script has no decisions".into());
            }
            for d in &script.decisions {
                d.validate(self.robots).map_err(ConfigError::Invalid)?;
            }
            if matches!(script.loop_from, Some(l) if l >= script.decisions.len()) {
                return invalid("script.loop_from is past the end".into());
            }
        }
        Ok(())
    }

    /// Validates and builds everything a run needs.
    pub fn prepare(&self) -> Result<Prepared, ConfigError> {
        self.validate()?;
        let ctx = BuildContext {
            vision: self.vision,
            cycle_quantum: self.termination.cycle_quantum,
        };
        let algorithm = self.algorithm.build(&ctx)?;
        algorithm.check_robot_count(self.robots)?;
        if let (Some(c), Some(p)) = (self.initial_color, algorithm.palette()) {
            if c >= p {
                return Err(ConfigError::Invalid(format!(
                    "initial_color {c} is outside the palette of {p}"
                )));
            }
        }
        let mut warnings = Vec::new();
        let termination = self.termination.resolve(algorithm.as_ref(), &mut warnings);
        let initial_color = match algorithm.palette() {
            Some(_) => Some(Color(self.initial_color.unwrap_or(0))),
            None => self.initial_color.map(Color),
        };
        Ok(Prepared {
            config: self.clone(),
            algorithm,
            termination,
            initial_color,
            warnings,
        })
    }
}

/// A validated scenario with its algorithm built.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ScenarioConfig,
    pub algorithm: Arc<dyn Algorithm>,
    pub termination: ResolvedTermination,
    pub initial_color: Option<Color>,
    pub warnings: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json() {
        let cfg = ScenarioConfig::from_json(
            r#"{"algorithm":{"id":"fec"},"robots":2,"placement":{"rule":"unit_circle_pair"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.max_iterations, 10_000);
        assert_eq!(cfg.version, 1);
        let back = ScenarioConfig::from_json(&cfg.to_json_pretty()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ScenarioConfig::from_json(r#"{"algorithm":{"id":"fec"},"robots":2,"bogus":1}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"algorithm":{"id":"fec"},"robots":2,"version":7}"#).is_err());
        let cfg = ScenarioConfig::new(AlgorithmSpec::Fec, 3);
        assert!(cfg.prepare().is_err());
        let mut cfg = ScenarioConfig::new(AlgorithmSpec::Cog, 2);
        cfg.scheduler.rigidity = crate::robot::Rigidity::NonRigid { delta: 0.0 };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn overrides() {
        let cfg = ScenarioConfig::new(AlgorithmSpec::Cog, 2);
        let cfg = cfg.with_override("vision.kind", "relative").unwrap();
        let cfg = cfg.with_override("vision.err_dist", "0.1").unwrap();
        let cfg = cfg.with_override("scheduler.kind", "fsync").unwrap();
        let cfg = cfg.with_override("runs", "100").unwrap();
        assert_eq!(cfg.vision, VisionErrorSpec::relative(0.1, 0.0));
        assert_eq!(cfg.runs, Some(100));
        assert!(cfg.with_override("robots", "\"many\"").is_err());
        assert!(cfg.with_override("runs.x", "1").is_err());
    }

    #[test]
    fn luminous_colors_default_to_zero() {
        let p = ScenarioConfig::new(AlgorithmSpec::Fec, 2).prepare().unwrap();
        assert_eq!(p.initial_color, Some(Color::WHITE));
        let p = ScenarioConfig::new(AlgorithmSpec::Cog, 2).prepare().unwrap();
        assert_eq!(p.initial_color, None);
    }
}
