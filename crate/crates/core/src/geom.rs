//! Primitive geometry: vectors, axis-aligned rectangles, segments, and
//! yaw-oriented boxes.
//!
//! This module deliberately stops at primitives. Higher-level measurements
//! (box-to-box distances, egocentric angles, area computations) live with the
//! stage that owns them, and the validation oracles reimplement them
//! independently — see the validation notes in the README. Only the plain
//! types below are shared across that boundary.

use serde::{Deserialize, Serialize};

/// 2D point/vector in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// Perpendicular dot product (z of the 3D cross product).
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        self.sub(o).norm()
    }

    /// Rotate counterclockwise by `angle` radians.
    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        Vec2::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }
}

/// 3D point/vector in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn scale(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Vec3) -> f64 {
        self.sub(o).norm()
    }

    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Axis-aligned rectangle, `min` inclusive corner to `max` inclusive corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new((self.min.x + self.max.x) / 2.0, (self.min.y + self.max.y) / 2.0)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn contains_with_margin(&self, p: Vec2, margin: f64) -> bool {
        p.x >= self.min.x - margin
            && p.x <= self.max.x + margin
            && p.y >= self.min.y - margin
            && p.y <= self.max.y + margin
    }

    /// True if the interiors overlap (shared edges don't count).
    pub fn overlaps(&self, o: &Rect) -> bool {
        self.min.x < o.max.x && o.min.x < self.max.x && self.min.y < o.max.y && o.min.y < self.max.y
    }

    pub fn corners(&self) -> [Vec2; 4] {
        [
            self.min,
            Vec2::new(self.max.x, self.min.y),
            self.max,
            Vec2::new(self.min.x, self.max.y),
        ]
    }
}

/// 2D line segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seg2 {
    pub a: Vec2,
    pub b: Vec2,
}

impl Seg2 {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        Seg2 { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn eval(&self, t: f64) -> Vec2 {
        self.a.lerp(self.b, t)
    }

    /// Distance from a point to this segment.
    pub fn dist_to_point(&self, p: Vec2) -> f64 {
        let d = self.b.sub(self.a);
        let len2 = d.dot(d);
        if len2 <= 0.0 {
            return self.a.dist(p);
        }
        let t = (p.sub(self.a).dot(d) / len2).clamp(0.0, 1.0);
        self.eval(t).dist(p)
    }

    /// If this segment properly crosses `other`, the parameter along `self`
    /// at the crossing. Collinear overlaps and shared endpoints count as a
    /// crossing at the nearest parameter.
    pub fn crossing_param(&self, other: &Seg2) -> Option<f64> {
        let r = self.b.sub(self.a);
        let s = other.b.sub(other.a);
        let denom = r.cross(s);
        let qp = other.a.sub(self.a);
        if denom.abs() < 1e-12 {
            if qp.cross(r).abs() > 1e-12 {
                return None; // parallel, not collinear
            }
            // Collinear: overlap test on the projection.
            let len2 = r.dot(r);
            if len2 <= 0.0 {
                return None;
            }
            let t0 = qp.dot(r) / len2;
            let t1 = other.b.sub(self.a).dot(r) / len2;
            let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
            if hi < 0.0 || lo > 1.0 {
                return None;
            }
            return Some(lo.clamp(0.0, 1.0));
        }
        let t = qp.cross(s) / denom;
        let u = qp.cross(r) / denom;
        if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
            Some(t)
        } else {
            None
        }
    }
}

/// A 3D box with yaw-only orientation: centered at `center`, half-extents
/// `half` along its local axes, rotated by `yaw` radians about the vertical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub center: Vec3,
    pub half: Vec3,
    pub yaw: f64,
}

impl OrientedBox {
    pub fn new(center: Vec3, half: Vec3, yaw: f64) -> Self {
        OrientedBox { center, half, yaw }
    }

    pub fn z_min(&self) -> f64 {
        self.center.z - self.half.z
    }

    pub fn z_max(&self) -> f64 {
        self.center.z + self.half.z
    }

    /// Corners of the ground-plane footprint, counterclockwise.
    pub fn footprint(&self) -> [Vec2; 4] {
        let c = self.center.xy();
        [
            Vec2::new(-self.half.x, -self.half.y),
            Vec2::new(self.half.x, -self.half.y),
            Vec2::new(self.half.x, self.half.y),
            Vec2::new(-self.half.x, self.half.y),
        ]
        .map(|p| c.add(p.rotate(self.yaw)))
    }

    /// All eight corners.
    pub fn corners(&self) -> [Vec3; 8] {
        let fp = self.footprint();
        let mut out = [Vec3::new(0.0, 0.0, 0.0); 8];
        for (i, p) in fp.iter().enumerate() {
            out[i] = Vec3::new(p.x, p.y, self.z_min());
            out[i + 4] = Vec3::new(p.x, p.y, self.z_max());
        }
        out
    }

    /// Map a world point into box-local coordinates (rotation undone,
    /// center at origin).
    pub fn to_local(&self, p: Vec3) -> Vec3 {
        let d = p.sub(self.center);
        let xy = d.xy().rotate(-self.yaw);
        Vec3::new(xy.x, xy.y, d.z)
    }

    /// Map a box-local point back to world coordinates.
    pub fn from_local(&self, p: Vec3) -> Vec3 {
        let xy = p.xy().rotate(self.yaw);
        Vec3::new(xy.x + self.center.x, xy.y + self.center.y, p.z + self.center.z)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        let l = self.to_local(p);
        l.x.abs() <= self.half.x && l.y.abs() <= self.half.y && l.z.abs() <= self.half.z
    }

    /// Does the segment `p`→`q` pass through this box? Standard slab test in
    /// local coordinates.
    pub fn intersects_segment(&self, p: Vec3, q: Vec3) -> bool {
        let a = self.to_local(p);
        let b = self.to_local(q);
        let d = b.sub(a);
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for (start, delta, half) in [
            (a.x, d.x, self.half.x),
            (a.y, d.y, self.half.y),
            (a.z, d.z, self.half.z),
        ] {
            if delta.abs() < 1e-12 {
                if start.abs() > half {
                    return false;
                }
            } else {
                let inv = 1.0 / delta;
                let (mut near, mut far) = ((-half - start) * inv, (half - start) * inv);
                if near > far {
                    std::mem::swap(&mut near, &mut far);
                }
                t0 = t0.max(near);
                t1 = t1.min(far);
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }
}

/// Shortest-turn difference `b - a` wrapped into (-pi, pi].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let mut d = (b - a) % (2.0 * std::f64::consts::PI);
    if d <= -std::f64::consts::PI {
        d += 2.0 * std::f64::consts::PI;
    } else if d > std::f64::consts::PI {
        d -= 2.0 * std::f64::consts::PI;
    }
    d
}

/// Normalize an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    angle_diff(0.0, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_basics() {
        let r = Rect::new(Vec2::new(0.0, 0.0), Vec2::new(4.0, 3.0));
        assert_eq!(r.area(), 12.0);
        assert_eq!(r.center(), Vec2::new(2.0, 1.5));
        assert!(r.contains(Vec2::new(4.0, 3.0)));
        assert!(!r.contains(Vec2::new(4.01, 3.0)));
    }

    #[test]
    fn segment_crossing() {
        let a = Seg2::new(Vec2::new(0.0, 0.0), Vec2::new(2.0, 2.0));
        let b = Seg2::new(Vec2::new(0.0, 2.0), Vec2::new(2.0, 0.0));
        let t = a.crossing_param(&b).unwrap();
        assert!((t - 0.5).abs() < 1e-12);
        let c = Seg2::new(Vec2::new(3.0, 0.0), Vec2::new(3.0, 2.0));
        assert!(a.crossing_param(&c).is_none());
    }

    #[test]
    fn segment_point_distance() {
        let s = Seg2::new(Vec2::new(0.0, 0.0), Vec2::new(4.0, 0.0));
        assert_eq!(s.dist_to_point(Vec2::new(2.0, 3.0)), 3.0);
        assert_eq!(s.dist_to_point(Vec2::new(-3.0, 4.0)), 5.0);
    }

    #[test]
    fn box_rotation_roundtrip() {
        let b = OrientedBox::new(Vec3::new(1.0, 2.0, 0.5), Vec3::new(0.5, 0.3, 0.5), 0.7);
        let p = Vec3::new(1.3, 2.1, 0.2);
        let back = b.from_local(b.to_local(p));
        assert!(back.dist(p) < 1e-12);
    }

    #[test]
    fn box_segment_intersection() {
        let b = OrientedBox::new(Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 1.0, 1.0), 0.0);
        // Straight through the middle.
        assert!(b.intersects_segment(Vec3::new(-5.0, 0.0, 1.0), Vec3::new(5.0, 0.0, 1.0)));
        // Passes above.
        assert!(!b.intersects_segment(Vec3::new(-5.0, 0.0, 3.0), Vec3::new(5.0, 0.0, 3.0)));
        // Stops short.
        assert!(!b.intersects_segment(Vec3::new(-5.0, 0.0, 1.0), Vec3::new(-2.0, 0.0, 1.0)));
        // Rotated 45 degrees: a corner pokes out to sqrt(2).
        let r = OrientedBox::new(Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 1.0, 1.0), std::f64::consts::FRAC_PI_4);
        assert!(r.intersects_segment(Vec3::new(1.2, -5.0, 1.0), Vec3::new(1.2, 5.0, 1.0)));
        assert!(!b.intersects_segment(Vec3::new(1.2, -5.0, 1.0), Vec3::new(1.2, 5.0, 1.0)));
    }

    #[test]
    fn angle_wrapping() {
        let pi = std::f64::consts::PI;
        assert!((angle_diff(0.1, 0.3) - 0.2).abs() < 1e-12);
        assert!((angle_diff(-3.0, 3.0) - (6.0 - 2.0 * pi)).abs() < 1e-12);
        assert_eq!(wrap_angle(pi), pi);
        assert!((wrap_angle(3.0 * pi) - pi).abs() < 1e-12);
    }
}
