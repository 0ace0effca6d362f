//! Planar geometry for the sensing sector.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn add_scaled(self, dir: Point2, s: f64) -> Point2 {
        Point2::new(self.x + dir.x * s, self.y + dir.y * s)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn unit_from_angle(theta: f64) -> Point2 {
        Point2::new(theta.cos(), theta.sin())
    }

    /// Bearing of the vector from `self` to `other`, in `(-π, π]`.
    pub fn bearing_to(self, other: Point2) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;

    fn sub(self, other: Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }
}

/// Smallest absolute difference between two angles, in `[0, π]`.
pub fn angle_between(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % std::f64::consts::TAU;
    d.min(std::f64::consts::TAU - d)
}

/// Closed circular sector: apex, heading, radius and full opening angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sector {
    pub apex: Point2,
    pub heading: f64,
    pub radius: f64,
    /// Full opening angle in radians, `(0, 2π]`.
    pub opening: f64,
}

/// Slack for closed-boundary membership tests.
pub const BOUNDARY_EPS: f64 = 1e-9;

impl Sector {
    /// Closed membership test, with `tol` meters of slack on the boundary.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        let q = p - self.apex;
        let r = q.norm();
        if r > self.radius + tol {
            return false;
        }
        if r <= tol || self.opening >= std::f64::consts::TAU {
            return true;
        }
        let off = angle_between(q.y.atan2(q.x), self.heading);
        // angular slack equivalent to `tol` meters of arc at radius r
        off <= 0.5 * self.opening + tol / r
    }

    /// Parameter intervals `[s0, s1] ⊆ [0, len]` where the segment
    /// `start + s·dir` (|dir| = 1) lies inside the sector, ascending.
    pub fn clip_segment(&self, start: Point2, dir: Point2, len: f64) -> Vec<(f64, f64)> {
        let w = start - self.apex;
        // disc: |w + s dir|^2 <= R^2
        let b = w.dot(dir);
        let c = w.dot(w) - self.radius * self.radius;
        let disc = b * b - c;
        if disc < 0.0 {
            return Vec::new();
        }
        let root = disc.sqrt();
        let lo = (-b - root).max(0.0);
        let hi = (-b + root).min(len);
        if lo > hi {
            return Vec::new();
        }
        if self.opening >= std::f64::consts::TAU {
            return vec![(lo, hi)];
        }

        let half = 0.5 * self.opening;
        let right = Point2::unit_from_angle(self.heading - half);
        let left = Point2::unit_from_angle(self.heading + half);
        // q(s) is counter-clockwise of `right`: cross(right, w + s dir) >= 0
        let ccw_of_right = halfline(right.cross(w), right.cross(dir));
        // q(s) is clockwise of `left`: cross(w + s dir, left) >= 0
        let cw_of_left = halfline(w.cross(left), dir.cross(left));

        let pieces = if half <= 0.5 * std::f64::consts::PI {
            // convex wedge: both half-planes
            intersect(ccw_of_right, cw_of_left).into_iter().collect::<Vec<_>>()
        } else {
            // reflex wedge: union of the half-planes
            union(ccw_of_right, cw_of_left)
        };
        pieces
            .into_iter()
            .filter_map(|(a, b)| {
                let a = a.max(lo);
                let b = b.min(hi);
                (a <= b).then_some((a, b))
            })
            .collect()
    }
}

/// Solution set of `c0 + c1·s >= 0` as an interval on the real line.
fn halfline(c0: f64, c1: f64) -> Option<(f64, f64)> {
    if c1.abs() < 1e-15 {
        return (c0 >= -BOUNDARY_EPS).then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let s = -c0 / c1;
    if c1 > 0.0 {
        Some((s, f64::INFINITY))
    } else {
        Some((f64::NEG_INFINITY, s))
    }
}

fn intersect(a: Option<(f64, f64)>, b: Option<(f64, f64)>) -> Option<(f64, f64)> {
    let (a, b) = (a?, b?);
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    (lo <= hi).then_some((lo, hi))
}

fn union(a: Option<(f64, f64)>, b: Option<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = [a, b].into_iter().flatten().collect();
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for iv in v {
        match out.last_mut() {
            Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
            _ => out.push(iv),
        }
    }
    out
}
