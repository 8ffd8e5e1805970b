//! Measurement geometry for question synthesis.
//!
//! Everything here is analytic: box-to-box distances decompose into a 2D
//! footprint distance plus a vertical interval gap (exact for upright boxes,
//! since the horizontal and vertical choices are independent), and egocentric
//! direction comes from a single signed-angle computation on ground-plane
//! centroids.

use serde::{Deserialize, Serialize};

use crate::geom::{Seg2, Vec2, Vec3};
use crate::scene::ObjectInstance;
use crate::OrientedBox;

/// Difficulty tier for egocentric direction questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

/// Ground-plane centroid of an object: the footprint center, ignoring height.
pub fn ground_centroid(obj: &ObjectInstance) -> Vec2 {
    obj.bbox.center.xy()
}

/// Minimum distance between two solid upright boxes; zero if they intersect.
///
/// Upright boxes are prisms, so the minimizing pair separates into an
/// independent horizontal problem (footprint-to-footprint distance) and a
/// vertical one (interval gap), combined with `hypot`.
pub fn closest_point_distance(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let dz = interval_gap(a.z_min(), a.z_max(), b.z_min(), b.z_max());
    let dxy = footprint_distance(&a.footprint(), &b.footprint());
    dxy.hypot(dz)
}

/// Distance from a point to a solid upright box; zero inside.
pub fn point_to_box_distance(p: Vec3, b: &OrientedBox) -> f64 {
    let local = b.to_local(p);
    let dx = (local.x.abs() - b.half.x).max(0.0);
    let dy = (local.y.abs() - b.half.y).max(0.0);
    let dz = (local.z.abs() - b.half.z).max(0.0);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

fn interval_gap(a_min: f64, a_max: f64, b_min: f64, b_max: f64) -> f64 {
    (a_min - b_max).max(b_min - a_max).max(0.0)
}

/// Distance between two convex quads; zero when they overlap.
///
/// Overlap is decided by separating-axis projection onto every edge normal.
/// For separated convex polygons the closest pair is realized at a vertex of
/// one against an edge of the other, so checking all vertex/edge pairs in
/// both directions is exhaustive.
pub fn footprint_distance(a: &[Vec2; 4], b: &[Vec2; 4]) -> f64 {
    if quads_overlap(a, b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..4 {
        let ea = Seg2 {
            a: a[i],
            b: a[(i + 1) % 4],
        };
        let eb = Seg2 {
            a: b[i],
            b: b[(i + 1) % 4],
        };
        for j in 0..4 {
            best = best.min(ea.dist_to_point(b[j]));
            best = best.min(eb.dist_to_point(a[j]));
        }
    }
    best
}

fn quads_overlap(a: &[Vec2; 4], b: &[Vec2; 4]) -> bool {
    for quad in [a, b] {
        for i in 0..4 {
            let edge = quad[(i + 1) % 4].sub(quad[i]);
            let axis = Vec2::new(-edge.y, edge.x);
            let (a_lo, a_hi) = project(a, axis);
            let (b_lo, b_hi) = project(b, axis);
            if a_hi < b_lo || b_hi < a_lo {
                return false;
            }
        }
    }
    true
}

fn project(quad: &[Vec2; 4], axis: Vec2) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in quad {
        let d = p.dot(axis);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (lo, hi)
}

/// Centroids closer than this are too entangled for a direction question.
pub const DEGENERATE_CENTROID_DISTANCE: f64 = 0.01;

/// Signed egocentric angle, in degrees within `(-180, 180]`.
///
/// The observer stands at `positioning` facing `orienting`; the result is the
/// rotation from that forward direction to the direction of `querying`.
/// Positive angles are counter-clockwise, i.e. to the observer's left.
/// Returns `None` when any two centroids are within 1 cm, which leaves the
/// frame ill-defined.
pub fn ego_frame_angle(positioning: Vec2, orienting: Vec2, querying: Vec2) -> Option<f64> {
    if positioning.dist(orienting) < DEGENERATE_CENTROID_DISTANCE
        || positioning.dist(querying) < DEGENERATE_CENTROID_DISTANCE
        || orienting.dist(querying) < DEGENERATE_CENTROID_DISTANCE
    {
        return None;
    }
    let forward = orienting.sub(positioning);
    let target = querying.sub(positioning);
    let mut deg = forward.cross(target).atan2(forward.dot(target)).to_degrees();
    if deg <= -180.0 {
        deg += 360.0;
    }
    Some(deg)
}

/// All direction labels a given difficulty can produce, in a fixed order.
pub fn direction_labels(difficulty: Difficulty) -> &'static [&'static str] {
    match difficulty {
        Difficulty::Easy => &["left", "right"],
        Difficulty::Medium => &["left", "right", "back"],
        Difficulty::Hard => &["front-left", "front-right", "back-left", "back-right"],
    }
}

/// Map a signed egocentric angle to its direction label.
///
/// Hard uses the four quadrants of the ego frame (facing along +y); medium
/// folds the rear cone (at least 135 degrees away from forward) into "back";
/// easy splits purely by sign. Exact boundary angles are assigned to a fixed
/// side for determinism, but candidates that close to a boundary are rejected
/// by the quality gate before classification matters.
pub fn classify_direction(angle_deg: f64, difficulty: Difficulty) -> &'static str {
    match difficulty {
        Difficulty::Easy => {
            if angle_deg > 0.0 {
                "left"
            } else {
                "right"
            }
        }
        Difficulty::Medium => {
            if angle_deg.abs() >= 135.0 {
                "back"
            } else if angle_deg > 0.0 {
                "left"
            } else {
                "right"
            }
        }
        Difficulty::Hard => {
            if angle_deg > 90.0 {
                "back-left"
            } else if angle_deg > 0.0 {
                "front-left"
            } else if angle_deg >= -90.0 {
                "front-right"
            } else {
                "back-right"
            }
        }
    }
}

/// Circular distance (degrees) from an angle to the nearest class boundary
/// of the given difficulty.
pub fn direction_boundary_margin(angle_deg: f64, difficulty: Difficulty) -> f64 {
    let boundaries: &[f64] = match difficulty {
        Difficulty::Easy => &[0.0, 180.0],
        Difficulty::Medium => &[0.0, 135.0, -135.0],
        Difficulty::Hard => &[0.0, 90.0, -90.0, 180.0],
    };
    boundaries
        .iter()
        .map(|b| circular_diff_deg(angle_deg, *b))
        .fold(f64::INFINITY, f64::min)
}

fn circular_diff_deg(a: f64, b: f64) -> f64 {
    let mut d = (a - b).rem_euclid(360.0);
    if d > 180.0 {
        d = 360.0 - d;
    }
    d
}
