use std::ops::{Add, Mul, Neg, Sub};

use super::{GeoError, UtmPoint};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at an east-based CCW angle.
    pub fn from_angle_deg(deg: f64) -> Self {
        let r = deg.to_radians();
        Self::new(r.cos(), r.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0).then(|| self * (1.0 / n))
    }

    /// Perpendicular pointing left (CCW by 90°).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotate_deg(self, deg: f64) -> Vec2 {
        let (s, c) = deg.to_radians().sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// East-based CCW angle in `[0, 360)`.
    pub fn angle_deg(self) -> f64 {
        normalize_deg(self.y.atan2(self.x).to_degrees())
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Maps any angle into `[0, 360)`.
pub fn normalize_deg(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Projection of `p` onto the line through `a`, `b`: the unclamped line
/// parameter and the foot clamped to the closed segment.
pub fn project_on_segment(p: Vec2, a: Vec2, b: Vec2) -> (f64, Vec2) {
    let ab = b - a;
    let t = (p - a).dot(ab) / ab.norm_sq();
    let foot = a + ab * t.clamp(0.0, 1.0);
    (t, foot)
}

pub fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> Result<f64, GeoError> {
    if a == b {
        return Err(GeoError::DegenerateSegment);
    }
    let (_, foot) = project_on_segment(p, a, b);
    Ok((p - foot).norm())
}

/// Distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance(p: &UtmPoint, a: &UtmPoint, b: &UtmPoint) -> Result<f64, GeoError> {
    p.same_zone(a)?;
    p.same_zone(b)?;
    segment_distance(p.xy(), a.xy(), b.xy())
}

#[cfg(test)]
mod tests {
    use super::super::Hemisphere;
    use super::*;
    use proptest::prelude::*;

    fn u(x: f64, y: f64) -> UtmPoint {
        UtmPoint::new(x, y, 32, Hemisphere::North)
    }

    #[test]
    fn simple_cases() {
        assert_eq!(point_segment_distance(&u(1.0, 0.0), &u(0.0, 0.0), &u(2.0, 0.0)).unwrap(), 0.0);
        assert_eq!(point_segment_distance(&u(0.0, 1.0), &u(0.0, 0.0), &u(2.0, 0.0)).unwrap(), 1.0);
        // beyond the end: distance to endpoint
        assert_eq!(point_segment_distance(&u(5.0, 4.0), &u(0.0, 0.0), &u(2.0, 0.0)).unwrap(), 5.0);
        assert_eq!(point_segment_distance(&u(0.0, 1.0), &u(1.0, 1.0), &u(1.0, 1.0)), Err(GeoError::DegenerateSegment));
        let other = UtmPoint::new(0.0, 0.0, 33, Hemisphere::North);
        assert!(matches!(point_segment_distance(&other, &u(0.0, 0.0), &u(1.0, 0.0)), Err(GeoError::ZoneMismatch(..))));
    }

    #[test]
    fn normalize() {
        assert_eq!(normalize_deg(-90.0), 270.0);
        assert_eq!(normalize_deg(720.0), 0.0);
        assert_eq!(normalize_deg(-1e-18), 0.0);
    }

    proptest! {
        #[test]
        fn symmetric_and_rigid_invariant(
            px in -100.0..100.0f64, py in -100.0..100.0f64,
            ax in -100.0..100.0f64, ay in -100.0..100.0f64,
            bx in -100.0..100.0f64, by in -100.0..100.0f64,
            tx in -1e4..1e4f64, ty in -1e4..1e4f64, rot in 0.0..360.0f64,
        ) {
            let (p, a, b) = (Vec2::new(px, py), Vec2::new(ax, ay), Vec2::new(bx, by));
            prop_assume!((a - b).norm() > 1e-3);
            let d = segment_distance(p, a, b).unwrap();
            let d_rev = segment_distance(p, b, a).unwrap();
            prop_assert!((d - d_rev).abs() <= 1e-9 * d.max(1.0));
            let m = |v: Vec2| v.rotate_deg(rot) + Vec2::new(tx, ty);
            let d_moved = segment_distance(m(p), m(a), m(b)).unwrap();
            prop_assert!((d - d_moved).abs() <= 1e-9 * d.max(1.0) + 1e-8);
        }
    }
}
