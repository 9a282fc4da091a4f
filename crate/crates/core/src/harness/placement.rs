// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Initial positions.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ConfigError;
use crate::geometry::Point2;
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min_x: f64,
    pub max_x: f64,
    pub min_y: f64,
    pub max_y: f64,
}

impl Bounds {
    pub const fn square(half: f64) -> Self {
        Self {
            min_x: -half,
            max_x: half,
            min_y: -half,
            max_y: half,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let ok = [self.min_x, self.max_x, self.min_y, self.max_y]
            .iter()
            .all(|v| v.is_finite())
            && self.min_x < self.max_x
            && self.min_y < self.max_y;
        if ok {
            Ok(())
        } else {
            Err(ConfigError::Invalid("placement bounds must be finite and non-empty".into()))
        }
    }

    fn sample(&self, rng: &mut SimRng) -> Point2 {
        Point2::new(
            self.min_x + (self.max_x - self.min_x) * rng.random::<f64>(),
            self.min_y + (self.max_y - self.min_y) * rng.random::<f64>(),
        )
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Self::square(1.0)
    }
}

/// Box the third robot of the election experiments is drawn from.
pub const ELECTION_BOUNDS: Bounds = Bounds::square(1.5);

fn election_bounds() -> Bounds {
    ELECTION_BOUNDS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlacementRule {
    /// First robot at the origin, second uniformly on the unit circle.
    UnitCirclePair,
    UniformBox {
        #[serde(default)]
        bounds: Bounds,
    },
    /// Robots at (-0.5, 0) and (0.5, 0); the others uniform in `bounds`.
    FixedPairPlusRandom {
        #[serde(default = "election_bounds")]
        bounds: Bounds,
    },
    /// Like the fixed pair, but the third robot walks a
    /// `resolution × resolution` grid over `bounds`, one cell per run index.
    GridSweep {
        #[serde(default = "election_bounds")]
        bounds: Bounds,
        resolution: u32,
    },
    Explicit {
        points: Vec<Point2>,
    },
    /// `(U[0,1], 0)` and `(U[2,3], 0)`.
    FloatPathologyPair,
}

impl Default for PlacementRule {
    fn default() -> Self {
        PlacementRule::UniformBox {
            bounds: Bounds::default(),
        }
    }
}

const FIXED_PAIR: [Point2; 2] = [Point2 { x: -0.5, y: 0.0 }, Point2 { x: 0.5, y: 0.0 }];

impl PlacementRule {
    pub fn validate(&self, n: usize) -> Result<(), ConfigError> {
        let arity = |ok: bool, want: &str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!(
                    "placement needs {want} robots, scenario has {n}"
                )))
            }
        };
        match self {
            PlacementRule::UnitCirclePair | PlacementRule::FloatPathologyPair => {
                arity(n == 2, "exactly 2")
            }
            PlacementRule::UniformBox { bounds } => {
                bounds.validate()?;
                arity(n >= 1, "at least 1")
            }
            PlacementRule::FixedPairPlusRandom { bounds } => {
                bounds.validate()?;
                arity(n >= 3, "at least 3")
            }
            PlacementRule::GridSweep { bounds, resolution } => {
                bounds.validate()?;
                if *resolution == 0 {
                    return Err(ConfigError::Invalid("grid resolution must be positive".into()));
                }
                arity(n >= 3, "at least 3")
            }
            PlacementRule::Explicit { points } => {
                arity(points.len() == n, &points.len().to_string())?;
                if points.iter().any(|p| !p.is_finite()) {
                    return Err(ConfigError::Invalid("explicit points must be finite".into()));
                }
                for (i, p) in points.iter().enumerate() {
                    if points[..i].contains(p) {
                        return Err(ConfigError::Invalid(format!(
                            "explicit placement repeats point ({}, {})",
                            p.x, p.y
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Cell centre of grid index `index`.
    fn grid_point(bounds: &Bounds, resolution: u32, index: u64) -> Point2 {
        let r = resolution as u64;
        let cell = index % (r * r);
        let (ix, iy) = ((cell % r) as f64, (cell / r) as f64);
        let w = (bounds.max_x - bounds.min_x) / r as f64;
        let h = (bounds.max_y - bounds.min_y) / r as f64;
        Point2::new(bounds.min_x + (ix + 0.5) * w, bounds.min_y + (iy + 0.5) * h)
    }
}

/// Positions for `n` robots. `point_index` only matters for grid sweeps.
/// Random draws that land exactly on an earlier robot are redrawn.
pub fn sample_initial(
    rule: &PlacementRule,
    n: usize,
    point_index: u64,
    rng: &mut SimRng,
) -> Result<Vec<Point2>, ConfigError> {
    rule.validate(n)?;
    let mut pts: Vec<Point2> = Vec::with_capacity(n);
    let push_distinct = |pts: &mut Vec<Point2>, rng: &mut SimRng, draw: &dyn Fn(&mut SimRng) -> Point2| {
        loop {
            let p = draw(rng);
            if !pts.contains(&p) {
                pts.push(p);
                break;
            }
        }
    };
    match rule {
        PlacementRule::UnitCirclePair => {
            pts.push(Point2::ORIGIN);
            let theta = rng.random::<f64>() * TAU;
            let (s, c) = theta.sin_cos();
            pts.push(Point2::new(c, s));
        }
        PlacementRule::UniformBox { bounds } => {
            for _ in 0..n {
                push_distinct(&mut pts, rng, &|r| bounds.sample(r));
            }
        }
        PlacementRule::FixedPairPlusRandom { bounds } => {
            pts.extend(FIXED_PAIR);
            for _ in 2..n {
                push_distinct(&mut pts, rng, &|r| bounds.sample(r));
            }
        }
        PlacementRule::GridSweep { bounds, resolution } => {
            pts.extend(FIXED_PAIR);
            let p = PlacementRule::grid_point(bounds, *resolution, point_index);
            if pts.contains(&p) {
                return Err(ConfigError::Invalid(format!(
                    "grid cell {point_index} coincides with a fixed robot"
                )));
            }
            pts.push(p);
            for _ in 3..n {
                push_distinct(&mut pts, rng, &|r| bounds.sample(r));
            }
        }
        PlacementRule::Explicit { points } => pts.extend_from_slice(points),
        PlacementRule::FloatPathologyPair => {
            pts.push(Point2::new(rng.random::<f64>(), 0.0));
            pts.push(Point2::new(2.0 + rng.random::<f64>(), 0.0));
        }
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::distance;
    use crate::rng::{stream, Stream};

    #[test]
    fn unit_circle_pair_distance() {
        let mut rng = stream(1, Stream::Placement);
        for _ in 0..1000 {
            let p = sample_initial(&PlacementRule::UnitCirclePair, 2, 0, &mut rng).unwrap();
            assert_eq!(p[0], Point2::ORIGIN);
            assert!((distance(p[0], p[1]) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn fixed_pair() {
        let mut rng = stream(1, Stream::Placement);
        let rule = PlacementRule::FixedPairPlusRandom {
            bounds: ELECTION_BOUNDS,
        };
        let p = sample_initial(&rule, 3, 0, &mut rng).unwrap();
        assert_eq!(p[0], Point2::new(-0.5, 0.0));
        assert_eq!(p[1], Point2::new(0.5, 0.0));
        assert!(p[2].x.abs() <= 1.5 && p[2].y.abs() <= 1.5);
    }

    #[test]
    fn explicit_is_verbatim() {
        let mut rng = stream(1, Stream::Placement);
        let pts = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)];
        let rule = PlacementRule::Explicit {
            points: pts.clone(),
        };
        assert_eq!(sample_initial(&rule, 2, 0, &mut rng).unwrap(), pts);
        assert!(sample_initial(&rule, 3, 0, &mut rng).is_err());
        let dup = PlacementRule::Explicit {
            points: vec![Point2::ORIGIN, Point2::ORIGIN],
        };
        assert!(dup.validate(2).is_err());
    }

    #[test]
    fn grid_walks_cells() {
        let mut rng = stream(1, Stream::Placement);
        let rule = PlacementRule::GridSweep {
            bounds: Bounds::square(1.0),
            resolution: 4,
        };
        let a = sample_initial(&rule, 3, 0, &mut rng).unwrap()[2];
        let b = sample_initial(&rule, 3, 5, &mut rng).unwrap()[2];
        assert_eq!(a, Point2::new(-0.75, -0.75));
        assert_eq!(b, Point2::new(-0.25, -0.25));
        let p = sample_initial(&rule, 4, 5, &mut rng).unwrap();
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn pathology_ranges() {
        let mut rng = stream(1, Stream::Placement);
        let p = sample_initial(&PlacementRule::FloatPathologyPair, 2, 0, &mut rng).unwrap();
        assert!((0.0..1.0).contains(&p[0].x) && (2.0..3.0).contains(&p[1].x));
        assert_eq!((p[0].y, p[1].y), (0.0, 0.0));
    }

    #[test]
    fn json_shape() {
        let r: PlacementRule =
            serde_json::from_str(r#"{"rule":"grid_sweep","resolution":1000}"#).unwrap();
        assert_eq!(
            r,
            PlacementRule::GridSweep {
                bounds: ELECTION_BOUNDS,
                resolution: 1000
            }
        );
    }
}
