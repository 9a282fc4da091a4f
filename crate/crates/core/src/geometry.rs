// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Planar primitives shared by every algorithm.
//!
//! Everything here is binary64 on purpose: several experiments exist only to
//! expose rounding behaviour, so no extended precision is used anywhere.

use std::f64::consts::TAU;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default band used by [`banded_compare`].
pub const DEFAULT_BAND: f64 = 1e-6;

const SEC_EPS: f64 = 1e-12;
const MEDIAN_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("operation requires at least one point")]
    Empty,
    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn to_polar(self) -> PolarOffset {
        PolarOffset::new(self.norm(), self.y.atan2(self.x))
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Div<f64> for Point2 {
    type Output = Point2;
    fn div(self, rhs: f64) -> Point2 {
        Point2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Polar offset with `theta` normalized to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarOffset {
    pub r: f64,
    pub theta: f64,
}

impl PolarOffset {
    pub fn new(r: f64, theta: f64) -> Self {
        Self {
            r: r.max(0.0),
            theta: normalize_angle(theta),
        }
    }

    pub fn to_cartesian(self) -> Point2 {
        let (sin, cos) = self.theta.sin_cos();
        Point2::new(self.r * cos, self.r * sin)
    }
}

/// Maps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if t >= TAU {
        0.0
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    pub fn contains(&self, p: Point2, slack: f64) -> bool {
        distance(self.center, p) <= self.radius + slack
    }
}

/// A robot's private coordinate system: origin at the robot, arbitrary
/// orientation, optionally mirrored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    rotation: f64,
    reflect: bool,
    origin: Point2,
    cos: f64,
    sin: f64,
}

impl LocalFrame {
    pub fn new(rotation: f64, reflect: bool, origin: Point2) -> Self {
        let (sin, cos) = rotation.sin_cos();
        Self {
            rotation,
            reflect,
            origin,
            cos,
            sin,
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, false, Point2::ORIGIN)
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn reflect(&self) -> bool {
        self.reflect
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    /// Same orientation, re-anchored at `origin`.
    pub fn with_origin(&self, origin: Point2) -> Self {
        Self { origin, ..*self }
    }

    pub fn to_local(&self, p: Point2) -> Point2 {
        let d = p - self.origin;
        let x = d.x * self.cos + d.y * self.sin;
        let y = -d.x * self.sin + d.y * self.cos;
        if self.reflect {
            Point2::new(x, -y)
        } else {
            Point2::new(x, y)
        }
    }

    pub fn from_local(&self, p: Point2) -> Point2 {
        let y = if self.reflect { -p.y } else { p.y };
        let gx = p.x * self.cos - y * self.sin;
        let gy = p.x * self.sin + y * self.cos;
        Point2::new(gx, gy) + self.origin
    }
}

pub fn to_local(frame: &LocalFrame, p: Point2) -> Point2 {
    frame.to_local(p)
}

pub fn from_local(frame: &LocalFrame, p: Point2) -> Point2 {
    frame.from_local(p)
}

pub fn distance(a: Point2, b: Point2) -> f64 {
    (b - a).norm()
}

/// Componentwise mean, computed as `(a + b) / 2` so adjacent-float rounding
/// behaves the way a naive implementation would.
pub fn midpoint(a: Point2, b: Point2) -> Point2 {
    Point2::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0)
}

pub fn centroid(points: &[Point2]) -> Result<Point2, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::Empty);
    }
    let sum = points
        .iter()
        .fold(Point2::ORIGIN, |acc, &p| acc + p);
    Ok(sum / points.len() as f64)
}

/// Unsigned angle at `vertex` between the rays towards `a` and `b`.
fn vertex_angle(vertex: Point2, a: Point2, b: Point2) -> f64 {
    let u = a - vertex;
    let v = b - vertex;
    u.cross(v).abs().atan2(u.dot(v))
}

/// Interior angles at `a`, `b` and `c` respectively.
///
/// Angles are unsigned, so a configuration and its mirror image give the same
/// triple.
pub fn interior_angles(a: Point2, b: Point2, c: Point2) -> Result<[f64; 3], GeometryError> {
    if a == b || b == c || a == c {
        return Err(GeometryError::Degenerate("coincident triangle vertices"));
    }
    Ok([
        vertex_angle(a, b, c),
        vertex_angle(b, c, a),
        vertex_angle(c, a, b),
    ])
}

fn diametral_circle(a: Point2, b: Point2) -> Circle {
    let center = midpoint(a, b);
    let radius = distance(a, center).max(distance(b, center));
    Circle { center, radius }
}

/// Circumscribed circle, or `None` when the points are collinear.
pub fn circumcircle(a: Point2, b: Point2, c: Point2) -> Option<Circle> {
    let ab = b - a;
    let ac = c - a;
    let d = 2.0 * ab.cross(ac);
    if d == 0.0 {
        return None;
    }
    let ab2 = ab.dot(ab);
    let ac2 = ac.dot(ac);
    let ux = (ac.y * ab2 - ab.y * ac2) / d;
    let uy = (ab.x * ac2 - ac.x * ab2) / d;
    let center = a + Point2::new(ux, uy);
    if !center.is_finite() {
        return None;
    }
    let radius = distance(center, a)
        .max(distance(center, b))
        .max(distance(center, c));
    Some(Circle { center, radius })
}

fn circle_through_three(a: Point2, b: Point2, c: Point2) -> Circle {
    circumcircle(a, b, c).unwrap_or_else(|| {
        // Collinear: the farthest pair spans the other point.
        let candidates = [(a, b), (a, c), (b, c)];
        let (p, q) = candidates
            .into_iter()
            .max_by(|x, y| distance(x.0, x.1).total_cmp(&distance(y.0, y.1)))
            .expect("three candidates");
        diametral_circle(p, q)
    })
}

/// Smallest enclosing circle by randomized incremental construction.
///
/// The insertion order is shuffled with a fixed seed so the function stays
/// pure and deterministic.
pub fn smallest_enclosing_circle(points: &[Point2]) -> Result<Circle, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::Empty);
    }
    let mut pts = points.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ec0_5ec0 ^ pts.len() as u64);
    pts.shuffle(&mut rng);

    let slack = |c: &Circle| SEC_EPS * c.radius.max(1.0);
    let mut circle = Circle {
        center: pts[0],
        radius: 0.0,
    };
    for i in 1..pts.len() {
        if circle.contains(pts[i], slack(&circle)) {
            continue;
        }
        circle = Circle {
            center: pts[i],
            radius: 0.0,
        };
        for j in 0..i {
            if circle.contains(pts[j], slack(&circle)) {
                continue;
            }
            circle = diametral_circle(pts[i], pts[j]);
            for k in 0..j {
                if !circle.contains(pts[k], slack(&circle)) {
                    circle = circle_through_three(pts[i], pts[j], pts[k]);
                }
            }
        }
    }
    Ok(circle)
}

/// Sum of Euclidean distances from `y` to every point.
pub fn distance_sum(points: &[Point2], y: Point2) -> f64 {
    points.iter().map(|&p| distance(p, y)).sum()
}

/// Weiszfeld iteration for the point minimizing the sum of distances.
///
/// When an iterate lands on an input point (within `tolerance`) the
/// Vardi–Zhang optimality test decides between returning that point and
/// stepping off it. The result never scores worse than the centroid.
pub fn geometric_median(points: &[Point2], tolerance: f64) -> Result<Point2, GeometryError> {
    let start = centroid(points)?;
    if points.len() <= 2 {
        return Ok(start);
    }
    // A data point is the median iff the unit pulls of the others do not
    // outweigh its multiplicity.
    for &candidate in points {
        let mut pull = Point2::ORIGIN;
        let mut multiplicity = 0usize;
        for &p in points {
            let d = distance(p, candidate);
            if d == 0.0 {
                multiplicity += 1;
            } else {
                pull = pull + (p - candidate) / d;
            }
        }
        if pull.norm() <= multiplicity as f64 {
            return Ok(candidate);
        }
    }
    let tolerance = tolerance.max(f64::MIN_POSITIVE);
    let mut y = start;
    for _ in 0..MEDIAN_MAX_ITERATIONS {
        let mut num = Point2::ORIGIN;
        let mut den = 0.0;
        let mut pull = Point2::ORIGIN;
        let mut coincident = 0usize;
        let mut anchor = y;
        for &p in points {
            let d = distance(p, y);
            if d <= tolerance {
                coincident += 1;
                anchor = p;
                continue;
            }
            num = num + p / d;
            den += 1.0 / d;
            pull = pull + (p - y) / d;
        }
        if den == 0.0 {
            return Ok(anchor);
        }
        let next = if coincident > 0 {
            let strength = pull.norm();
            if strength <= coincident as f64 {
                return Ok(anchor);
            }
            let weiszfeld = num / den;
            let w = coincident as f64 / strength;
            weiszfeld * (1.0 - w) + anchor * w
        } else {
            num / den
        };
        if distance(next, y) < tolerance {
            y = next;
            break;
        }
        y = next;
    }
    if distance_sum(points, y) > distance_sum(points, start) {
        Ok(start)
    } else {
        Ok(y)
    }
}

/// Which ends of an interval are closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    /// `[lo, hi]`
    Closed,
    /// `[lo, hi[`
    ClosedOpen,
    /// `]lo, hi]`
    OpenClosed,
    /// `]lo, hi[`
    Open,
}

/// Interval membership with the bounds moved by `band` so conditions on
/// angles survive accumulated rounding:
///
/// | nominal   | tested as                 |
/// |-----------|---------------------------|
/// | `[A,B[`   | `[A-band, B-band[`        |
/// | `[A,B]`   | `[A-band, B+band]`        |
/// | `]A,B]`   | `]A+band, B+band]`        |
/// | `]A,B[`   | `]A+band, B-band[`        |
pub fn banded_compare(value: f64, lo: f64, hi: f64, band: f64, kind: IntervalKind) -> bool {
    match kind {
        IntervalKind::ClosedOpen => value >= lo - band && value < hi - band,
        IntervalKind::Closed => value >= lo - band && value <= hi + band,
        IntervalKind::OpenClosed => value > lo + band && value <= hi + band,
        IntervalKind::Open => value > lo + band && value < hi - band,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(Point2::new(0.0, 0.0), Point2::new(3.0, 4.0)), 5.0);
        assert_eq!(distance(Point2::new(1.0, 1.0), Point2::new(1.0, 1.0)), 0.0);
        assert_eq!(distance(Point2::new(-0.5, 0.0), Point2::new(0.5, 0.0)), 1.0);
    }

    #[test]
    fn midpoint_examples() {
        assert_eq!(
            midpoint(Point2::new(0.0, 0.0), Point2::new(2.0, 0.0)),
            Point2::new(1.0, 0.0)
        );
        let p = Point2::new(0.3, -7.25);
        assert_eq!(midpoint(p, p), p);
        // Adjacent floats: the mean rounds back onto one of the endpoints.
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let m = midpoint(Point2::new(a, 0.0), Point2::new(b, 0.0)).x;
        assert!(m == a || m == b);
    }

    #[test]
    fn centroid_examples() {
        let c = centroid(&[
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        assert!(close(c.x, 1.0 / 3.0, 1e-15) && close(c.y, 1.0 / 3.0, 1e-15));
        let p = Point2::new(4.0, -2.0);
        assert_eq!(centroid(&[p]).unwrap(), p);
        let sq = [
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(0.0, 2.0),
            Point2::new(2.0, 2.0),
        ];
        assert_eq!(centroid(&sq).unwrap(), Point2::new(1.0, 1.0));
        assert_eq!(centroid(&[]), Err(GeometryError::Empty));
    }

    #[test]
    fn interior_angle_examples() {
        let a = interior_angles(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        )
        .unwrap();
        assert!(close(a[0], FRAC_PI_2, 1e-12));
        assert!(close(a[1], FRAC_PI_4, 1e-12));
        assert!(close(a[2], FRAC_PI_4, 1e-12));

        let h = 3f64.sqrt() / 2.0;
        let eq = interior_angles(
            Point2::new(-0.5, 0.0),
            Point2::new(0.5, 0.0),
            Point2::new(0.0, h),
        )
        .unwrap();
        for angle in eq {
            assert!(close(angle, FRAC_PI_3, 1e-12));
        }

        // Dot-product oracle: acos(u·v / |u||v|).
        let oracle = |v: Point2, p: Point2, q: Point2| {
            let u = p - v;
            let w = q - v;
            (u.dot(w) / (u.norm() * w.norm())).acos()
        };
        let (r1, r2, r3) = (
            Point2::new(-0.5, 0.0),
            Point2::new(0.5, 0.0),
            Point2::new(0.0, 2.0),
        );
        let got = interior_angles(r1, r2, r3).unwrap();
        let expected = [oracle(r1, r2, r3), oracle(r2, r3, r1), oracle(r3, r1, r2)];
        for (g, e) in got.iter().zip(expected) {
            assert!(close(*g, e, 1e-12));
        }
        assert!(close(got[0], 1.3258176636680326, 1e-9));
        assert!(close(got[2], 0.4899573262537283, 1e-9));
        assert!(close(got.iter().sum::<f64>(), PI, 1e-12));
    }

    #[test]
    fn interior_angles_reject_coincident_points() {
        let p = Point2::new(1.0, 1.0);
        assert!(matches!(
            interior_angles(p, p, Point2::ORIGIN),
            Err(GeometryError::Degenerate(_))
        ));
    }

    #[test]
    fn sec_examples() {
        let c = smallest_enclosing_circle(&[
            Point2::new(1.0, 0.0),
            Point2::new(-1.0, 0.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        assert!(distance(c.center, Point2::ORIGIN) < 1e-12);
        assert!(close(c.radius, 1.0, 1e-12));

        let c = smallest_enclosing_circle(&[Point2::new(0.0, 0.0), Point2::new(2.0, 0.0)]).unwrap();
        assert_eq!(c.center, Point2::new(1.0, 0.0));
        assert_eq!(c.radius, 1.0);

        let single = smallest_enclosing_circle(&[Point2::new(3.0, 3.0)]).unwrap();
        assert_eq!(single.radius, 0.0);
        assert!(smallest_enclosing_circle(&[]).is_err());
    }

    #[test]
    fn sec_handles_collinear_points() {
        let pts: Vec<_> = (0..6).map(|i| Point2::new(i as f64, 2.0 * i as f64)).collect();
        let c = smallest_enclosing_circle(&pts).unwrap();
        let expected = diametral_circle(pts[0], pts[5]);
        assert!(distance(c.center, expected.center) < 1e-9);
        assert!(close(c.radius, expected.radius, 1e-9));
    }

    #[test]
    fn median_examples() {
        let sq = [
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
        ];
        let m = geometric_median(&sq, 1e-10).unwrap();
        assert!(distance(m, Point2::new(0.5, 0.5)) < 1e-9);

        let h = 3f64.sqrt() / 2.0;
        let tri = [
            Point2::new(-0.5, 0.0),
            Point2::new(0.5, 0.0),
            Point2::new(0.0, h),
        ];
        let m = geometric_median(&tri, 1e-10).unwrap();
        assert!(distance(m, centroid(&tri).unwrap()) < 1e-9);

        // On a line the median is the 1-D median.
        let line = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(10.0, 0.0),
        ];
        let m = geometric_median(&line, 1e-10).unwrap();
        assert!(distance(m, Point2::new(1.0, 0.0)) < 1e-9, "{m:?}");
    }

    #[test]
    fn median_with_duplicated_points() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        let m = geometric_median(&pts, 1e-12).unwrap();
        assert_eq!(m, Point2::ORIGIN);
    }

    #[test]
    fn banded_compare_rules() {
        let b = DEFAULT_BAND;
        assert!(banded_compare(1e-6, 0.0, 0.0, b, IntervalKind::Closed));
        assert!(banded_compare(-1e-6, 0.0, 0.0, b, IntervalKind::Closed));
        assert!(!banded_compare(1.1e-6, 0.0, 0.0, b, IntervalKind::Closed));

        assert!(!banded_compare(2.0, 1.0, 2.0, b, IntervalKind::ClosedOpen));
        assert!(banded_compare(1.0 - 1e-6, 1.0, 2.0, b, IntervalKind::ClosedOpen));
        assert!(!banded_compare(1.0, 1.0, 2.0, b, IntervalKind::OpenClosed));
        assert!(banded_compare(2.0 + 1e-6, 1.0, 2.0, b, IntervalKind::OpenClosed));
        assert!(!banded_compare(2.0 - 1e-6, 1.0, 2.0, b, IntervalKind::Open));

        for kind in [
            IntervalKind::Closed,
            IntervalKind::ClosedOpen,
            IntervalKind::OpenClosed,
            IntervalKind::Open,
        ] {
            for v in [0.5, 1.0, 1.5, 2.0, 2.5] {
                let plain = match kind {
                    IntervalKind::Closed => (1.0..=2.0).contains(&v),
                    IntervalKind::ClosedOpen => (1.0..2.0).contains(&v),
                    IntervalKind::OpenClosed => v > 1.0 && v <= 2.0,
                    IntervalKind::Open => v > 1.0 && v < 2.0,
                };
                assert_eq!(banded_compare(v, 1.0, 2.0, 0.0, kind), plain);
            }
        }
    }

    #[test]
    fn frame_examples() {
        let p = Point2::new(0.25, -3.5);
        assert_eq!(LocalFrame::identity().to_local(p), p);

        let f = LocalFrame::new(FRAC_PI_2, false, Point2::ORIGIN);
        let q = f.to_local(Point2::new(1.0, 0.0));
        assert!(distance(q, Point2::new(0.0, -1.0)) < 1e-15);

        let f = LocalFrame::new(2.1, true, Point2::new(-4.0, 9.5));
        let back = f.from_local(f.to_local(p));
        assert!(distance(back, p) < 1e-12);
    }

    #[test]
    fn normalize_angle_range() {
        assert_eq!(normalize_angle(0.0), 0.0);
        assert!(close(normalize_angle(-FRAC_PI_2), 1.5 * PI, 1e-15));
        assert!(normalize_angle(-1e-18) < TAU);
        let p = PolarOffset::new(2.0, -PI);
        assert!(close(p.theta, PI, 1e-15));
    }
}
