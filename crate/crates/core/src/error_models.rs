// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Vision and compass error models.
//!
//! Positions are perturbed in the observer's own frame, relative to the
//! observer.
//!
//! * absolute: `p + R·(cos φ, sin φ)` with `R ~ U[0, err]`, `φ ~ U[0, 2π]`
//! * relative: polar `(r + r·R, θ + φ)` with `R ~ U[-err_dist, err_dist]`,
//!   `φ ~ U[-err_angle, err_angle]`
//! * abs-rel: polar `(r + R, θ + φ)` with the same draws as relative
//!
//! A perturbed radius below zero is clamped to zero.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, PolarOffset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisionErrorKind {
    #[default]
    None,
    Absolute,
    Relative,
    #[serde(alias = "abs-rel")]
    AbsRel,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VisionErrorSpec {
    pub kind: VisionErrorKind,
    /// Absolute model radius.
    pub err: f64,
    /// Relative model: fraction of the distance. Abs-rel: plane units.
    pub err_dist: f64,
    /// Radians.
    pub err_angle: f64,
}

/// When perception errors are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorDrawTiming {
    /// Once per observer/observed pair, when the run starts.
    Init,
    /// Fresh draws for every perceived robot on every LOOK.
    #[default]
    EveryLook,
}

/// One realization of the random quantities of an error model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorDraw {
    pub radius: f64,
    pub angle: f64,
}

impl VisionErrorSpec {
    pub const NONE: VisionErrorSpec = VisionErrorSpec {
        kind: VisionErrorKind::None,
        err: 0.0,
        err_dist: 0.0,
        err_angle: 0.0,
    };

    pub fn absolute(err: f64) -> Self {
        Self {
            kind: VisionErrorKind::Absolute,
            err,
            ..Self::NONE
        }
    }

    pub fn relative(err_dist: f64, err_angle: f64) -> Self {
        Self {
            kind: VisionErrorKind::Relative,
            err_dist,
            err_angle,
            ..Self::NONE
        }
    }

    pub fn abs_rel(err_dist: f64, err_angle: f64) -> Self {
        Self {
            kind: VisionErrorKind::AbsRel,
            err_dist,
            err_angle,
            ..Self::NONE
        }
    }

    /// True when perturbation can never change a position.
    pub fn is_identity(&self) -> bool {
        match self.kind {
            VisionErrorKind::None => true,
            VisionErrorKind::Absolute => self.err == 0.0,
            VisionErrorKind::Relative | VisionErrorKind::AbsRel => {
                self.err_dist == 0.0 && self.err_angle == 0.0
            }
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("err", self.err),
            ("err_dist", self.err_dist),
            ("err_angle", self.err_angle),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value >= 0.0) {
                return Err(format!("vision.{name} must be finite and nonnegative"));
            }
        }
        Ok(())
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ErrorDraw {
        match self.kind {
            VisionErrorKind::None => ErrorDraw::default(),
            VisionErrorKind::Absolute => ErrorDraw {
                radius: rng.random::<f64>() * self.err,
                angle: rng.random::<f64>() * TAU,
            },
            VisionErrorKind::Relative | VisionErrorKind::AbsRel => ErrorDraw {
                radius: symmetric(rng, self.err_dist),
                angle: symmetric(rng, self.err_angle),
            },
        }
    }

    /// Applies a given draw to an observer-centred position.
    pub fn apply(&self, p: Point2, draw: ErrorDraw) -> Point2 {
        if self.is_identity() {
            return p;
        }
        match self.kind {
            VisionErrorKind::None => p,
            VisionErrorKind::Absolute => {
                let (sin, cos) = draw.angle.sin_cos();
                Point2::new(p.x + draw.radius * cos, p.y + draw.radius * sin)
            }
            VisionErrorKind::Relative => {
                let polar = p.to_polar();
                PolarOffset::new(polar.r + polar.r * draw.radius, polar.theta + draw.angle)
                    .to_cartesian()
            }
            VisionErrorKind::AbsRel => {
                let polar = p.to_polar();
                PolarOffset::new(polar.r + draw.radius, polar.theta + draw.angle).to_cartesian()
            }
        }
    }
}

fn symmetric<R: Rng + ?Sized>(rng: &mut R, bound: f64) -> f64 {
    if bound == 0.0 {
        0.0
    } else {
        (rng.random::<f64>() * 2.0 - 1.0) * bound
    }
}

/// Perturbs an observer-centred position with fresh draws.
pub fn perturb<R: Rng + ?Sized>(p: Point2, spec: &VisionErrorSpec, rng: &mut R) -> Point2 {
    if spec.is_identity() {
        return p;
    }
    let draw = spec.draw(rng);
    spec.apply(p, draw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompassKind {
    #[default]
    None,
    Static,
    Dynamic,
}

/// Compass offset carried by a robot and handed to compute functions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompassErrorSpec {
    pub kind: CompassKind,
    pub max_error: f64,
    #[serde(skip)]
    pub current_offset: f64,
}

impl CompassErrorSpec {
    /// Draws the static offset; dynamic compasses start at zero and redraw
    /// on every LOOK.
    pub fn initialize<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.current_offset = match self.kind {
            CompassKind::None | CompassKind::Dynamic => 0.0,
            CompassKind::Static => symmetric(rng, self.max_error),
        };
    }

    pub fn on_look<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        if self.kind == CompassKind::Dynamic {
            self.current_offset = symmetric(rng, self.max_error);
        }
    }
}
