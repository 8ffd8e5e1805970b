//! Independent answer verification.
//!
//! Every question the generator emits is re-answered here from the raw
//! artifacts, through code paths that deliberately avoid the generator's
//! geometry: room areas come from the shoelace formula instead of rectangle
//! sums, box distances from minimization over sampled surface points plus
//! the exhaustive vertex/edge feature set instead of the analytic footprint
//! decomposition, directions from a rotation-matrix frame change instead of
//! signed angles, first appearances from a frame scan instead of the
//! precomputed map, and route fills from an in-module breadth-first search
//! replay. The only things shared with the question engine are primitive
//! types ([`crate::geom`], the scene/trajectory/annotation data structs) and
//! the pinned rounding contract ([`crate::canon`] via
//! [`crate::qa::format_numeric_answer`]), which both sides must apply
//! identically by definition. A test at the bottom of this file enforces
//! textually that the non-test code never touches the generator's geometry
//! module.
//!
//! The navigation grid itself is rebuilt from the scene with shared
//! [`crate::nav`] construction code — the grid defines the world, like the
//! scene does — but the route search and turn derivation on top of it are
//! re-implemented here with the same pinned tie-breaking contract
//! (neighbor order left, down, up, right; lexicographic nearest-cell scan).

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{OrientedBox, Vec2, Vec3};
use crate::nav::{build_navgrid, NavConfig, NavGrid, Trajectory};
use crate::observe::DenseAnnotations;
use crate::qa::{format_numeric_answer, QAItem, QType};
use crate::scene::{ObjectInstance, Scene};

/// Frames the downstream consumer is assumed to sample from each video.
pub const DEFAULT_SUBSAMPLE_FRAMES: usize = 64;

/// Everything the oracle needs to re-answer questions about one trajectory.
///
/// The trajectory is required even though several question types never read
/// it: visited-room areas, last-frame positions, and route replays are
/// trajectory-dependent by construction. `nav` must be the configuration the
/// trajectory was planned with, or route replays will disagree about the
/// grid.
#[derive(Debug, Clone, Copy)]
pub struct OracleContext<'a> {
    pub scene: &'a Scene,
    pub trajectory: &'a Trajectory,
    pub annotations: &'a DenseAnnotations,
    pub nav: &'a NavConfig,
}

/// The oracle's judgement of one item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationVerdict {
    pub item_id: String,
    pub oracle_answer: String,
    /// True iff `oracle_answer` equals the stored answer byte-for-byte.
    #[serde(rename = "match")]
    pub matched: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsample_ok: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("UNRESOLVABLE_PROVENANCE: {0}")]
    UnresolvableProvenance(String),
    #[error("DEGENERATE_GEOMETRY: {0}")]
    Degenerate(String),
}

fn resolve<'a>(scene: &'a Scene, id: u32) -> Result<&'a ObjectInstance, OracleError> {
    scene.object(id).ok_or_else(|| {
        OracleError::UnresolvableProvenance(format!("object {id} not in scene {}", scene.id))
    })
}

fn ids_of(item: &QAItem, expected: usize) -> Result<&[u32], OracleError> {
    let ids = &item.provenance.object_ids;
    if ids.len() != expected {
        return Err(OracleError::UnresolvableProvenance(format!(
            "{} item carries {} object ids, expected {expected}",
            item.qtype,
            ids.len()
        )));
    }
    Ok(ids)
}

/// Re-answer one item from raw artifacts. The returned string applies the
/// same rounding and formatting rules as the generator, so a correct item
/// matches byte-for-byte.
pub fn oracle_answer(item: &QAItem, ctx: &OracleContext) -> Result<String, OracleError> {
    if item.provenance.scene_id != ctx.scene.id {
        return Err(OracleError::UnresolvableProvenance(format!(
            "item references scene {} but context holds {}",
            item.provenance.scene_id, ctx.scene.id
        )));
    }
    match item.qtype {
        QType::ObjCount => {
            let ids = &item.provenance.object_ids;
            let first = *ids.first().ok_or_else(|| {
                OracleError::UnresolvableProvenance("count item carries no object ids".into())
            })?;
            let category = &resolve(ctx.scene, first)?.category;
            let count = ctx
                .scene
                .objects
                .iter()
                .filter(|o| o.category == *category)
                .count();
            Ok(format_numeric_answer(QType::ObjCount, count as f64))
        }
        QType::ObjSize => {
            let ids = ids_of(item, 1)?;
            let bbox = &resolve(ctx.scene, ids[0])?.bbox;
            Ok(format_numeric_answer(
                QType::ObjSize,
                100.0 * max_extent_from_corners(bbox),
            ))
        }
        QType::RoomSize => {
            let visited: BTreeSet<u32> = ctx.trajectory.visit_order.iter().copied().collect();
            let mut area = 0.0;
            for room_id in &visited {
                let room = ctx
                    .scene
                    .rooms
                    .iter()
                    .find(|r| r.id == *room_id)
                    .ok_or_else(|| {
                        OracleError::UnresolvableProvenance(format!(
                            "visited room {room_id} not in scene {}",
                            ctx.scene.id
                        ))
                    })?;
                area += shoelace(&room.footprint.corners());
            }
            Ok(format_numeric_answer(QType::RoomSize, area))
        }
        QType::AbsDist => {
            let ids = ids_of(item, 2)?;
            let a = &resolve(ctx.scene, ids[0])?.bbox;
            let b = &resolve(ctx.scene, ids[1])?.bbox;
            Ok(format_numeric_answer(QType::AbsDist, box_distance(a, b)))
        }
        QType::RelDist => {
            let ids = ids_of(item, 5)?;
            let anchor = resolve(ctx.scene, ids[0])?.category.clone();
            let anchors: Vec<&OrientedBox> = instances_of(ctx.scene, &anchor).collect();
            let mut winner: Option<(&str, f64)> = None;
            for id in &ids[1..] {
                let category = &resolve(ctx.scene, *id)?.category;
                let mut d = f64::INFINITY;
                for candidate in instances_of(ctx.scene, category) {
                    for a in &anchors {
                        d = d.min(box_distance(a, candidate));
                    }
                }
                if winner.map_or(true, |(_, best)| d < best) {
                    winner = Some((category, d));
                }
            }
            Ok(winner.expect("four candidates").0.to_string())
        }
        QType::RelDirEasy | QType::RelDirMed | QType::RelDirHard => {
            let ids = ids_of(item, 3)?;
            let p = resolve(ctx.scene, ids[0])?.bbox.center.xy();
            let o = resolve(ctx.scene, ids[1])?.bbox.center.xy();
            let q = resolve(ctx.scene, ids[2])?.bbox.center.xy();
            classify_by_rotation(item.qtype, p, o, q)
        }
        QType::AppearanceOrder => {
            let ids = ids_of(item, 4)?;
            let mut entries: Vec<(u32, &str)> = Vec::with_capacity(4);
            for id in ids {
                let category = resolve(ctx.scene, *id)?.category.as_str();
                let frame =
                    first_salient_frame(ctx.scene, ctx.annotations, category).ok_or_else(|| {
                        OracleError::Degenerate(format!("category {category} is never salient"))
                    })?;
                entries.push((frame, category));
            }
            entries.sort();
            Ok(entries
                .iter()
                .map(|(_, c)| *c)
                .collect::<Vec<_>>()
                .join(", "))
        }
        QType::SpatiotemporalDist => {
            let ids = ids_of(item, 4)?;
            let last = ctx.trajectory.poses.last().ok_or_else(|| {
                OracleError::UnresolvableProvenance("trajectory has no poses".into())
            })?;
            let ego = Vec3::new(last.x, last.y, ctx.trajectory.camera.eye_height);
            let mut winner: Option<(&str, f64)> = None;
            for id in ids {
                let category = &resolve(ctx.scene, *id)?.category;
                let mut d = f64::INFINITY;
                for bbox in instances_of(ctx.scene, category) {
                    d = d.min(point_box_distance(ego, bbox));
                }
                if winner.map_or(true, |(_, best)| d < best) {
                    winner = Some((category, d));
                }
            }
            Ok(winner.expect("four candidates").0.to_string())
        }
        QType::RoutePlan => {
            let ids = ids_of(item, 3)?;
            let start = resolve(ctx.scene, ids[0])?.bbox.center.xy();
            let orienting = resolve(ctx.scene, ids[1])?.bbox.center.xy();
            let end = resolve(ctx.scene, ids[2])?.bbox.center.xy();
            replay_route(ctx, start, orienting, end)
        }
    }
}

fn instances_of<'a>(
    scene: &'a Scene,
    category: &'a str,
) -> impl Iterator<Item = &'a OrientedBox> + 'a {
    scene
        .objects
        .iter()
        .filter(move |o| o.category == category)
        .map(|o| &o.bbox)
}

// ---------------------------------------------------------------------------
// Independent geometry paths.

/// Largest box dimension, reconstructed from the world-space corners by
/// projecting onto the box's own axes rather than reading the half extents.
fn max_extent_from_corners(b: &OrientedBox) -> f64 {
    let corners = b.corners();
    let axes = [
        Vec2::new(b.yaw.cos(), b.yaw.sin()),
        Vec2::new(-b.yaw.sin(), b.yaw.cos()),
    ];
    let mut best: f64 = 0.0;
    for axis in axes {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in &corners {
            let t = c.xy().dot(axis);
            lo = lo.min(t);
            hi = hi.max(t);
        }
        best = best.max(hi - lo);
    }
    let z_lo = corners.iter().map(|c| c.z).fold(f64::INFINITY, f64::min);
    let z_hi = corners
        .iter()
        .map(|c| c.z)
        .fold(f64::NEG_INFINITY, f64::max);
    best.max(z_hi - z_lo)
}

/// Polygon area by the shoelace formula.
fn shoelace(corners: &[Vec2]) -> f64 {
    let mut twice = 0.0;
    for i in 0..corners.len() {
        let j = (i + 1) % corners.len();
        twice += corners[i].x * corners[j].y - corners[j].x * corners[i].y;
    }
    twice.abs() / 2.0
}

/// Distance from a point to a solid oriented box (own local-frame clamp).
fn point_box_distance(p: Vec3, b: &OrientedBox) -> f64 {
    let l = b.to_local(p);
    let c = Vec3::new(
        l.x.clamp(-b.half.x, b.half.x),
        l.y.clamp(-b.half.y, b.half.y),
        l.z.clamp(-b.half.z, b.half.z),
    );
    l.sub(c).norm()
}

fn box_edges(b: &OrientedBox) -> [(Vec3, Vec3); 12] {
    let c = b.corners();
    [
        (c[0], c[1]),
        (c[1], c[2]),
        (c[2], c[3]),
        (c[3], c[0]),
        (c[4], c[5]),
        (c[5], c[6]),
        (c[6], c[7]),
        (c[7], c[4]),
        (c[0], c[4]),
        (c[1], c[5]),
        (c[2], c[6]),
        (c[3], c[7]),
    ]
}

fn boxes_intersect(a: &OrientedBox, b: &OrientedBox) -> bool {
    a.corners().iter().any(|p| b.contains(*p))
        || b.corners().iter().any(|p| a.contains(*p))
        || box_edges(a)
            .iter()
            .any(|(p, q)| b.intersects_segment(*p, *q))
        || box_edges(b)
            .iter()
            .any(|(p, q)| a.intersects_segment(*p, *q))
}

/// Closest distance between two 3D segments (clamped quadratic minimization).
fn seg_seg_distance(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> f64 {
    let d1 = q1.sub(p1);
    let d2 = q2.sub(p2);
    let r = p1.sub(p2);
    let a = d1.dot(d1);
    let e = d2.dot(d2);
    let b = d1.dot(d2);
    let c = d1.dot(r);
    let f = d2.dot(r);
    debug_assert!(a > 0.0 && e > 0.0, "box edges have positive length");
    let denom = a * e - b * b;
    let mut s = if denom > 1e-12 {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    p1.add(d1.scale(s)).dist(p2.add(d2.scale(t)))
}

/// Surface sample grid: `k × k` points on each of the six faces.
fn surface_samples(b: &OrientedBox, k: usize) -> Vec<Vec3> {
    let h = b.half;
    let lin = |i: usize, half: f64| {
        if k == 1 {
            0.0
        } else {
            -half + 2.0 * half * i as f64 / (k - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(6 * k * k);
    for i in 0..k {
        for j in 0..k {
            out.push(b.from_local(Vec3::new(lin(i, h.x), lin(j, h.y), -h.z)));
            out.push(b.from_local(Vec3::new(lin(i, h.x), lin(j, h.y), h.z)));
            out.push(b.from_local(Vec3::new(lin(i, h.x), -h.y, lin(j, h.z))));
            out.push(b.from_local(Vec3::new(lin(i, h.x), h.y, lin(j, h.z))));
            out.push(b.from_local(Vec3::new(-h.x, lin(i, h.y), lin(j, h.z))));
            out.push(b.from_local(Vec3::new(h.x, lin(i, h.y), lin(j, h.z))));
        }
    }
    out
}

/// Closest distance between two solid oriented boxes, by minimization over a
/// finite candidate set: sampled surface points projected onto the other box,
/// all sixteen vertex projections, and all 144 edge pairs. For disjoint boxes
/// the closest pair lies on a vertex, an edge pair, or a face contact whose
/// extremes reduce to those features, so the candidate set attains the exact
/// minimum; the surface grid is kept as an extra guard.
fn box_distance(a: &OrientedBox, b: &OrientedBox) -> f64 {
    if boxes_intersect(a, b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for p in a.corners() {
        best = best.min(point_box_distance(p, b));
    }
    for p in b.corners() {
        best = best.min(point_box_distance(p, a));
    }
    for (p1, q1) in box_edges(a) {
        for (p2, q2) in box_edges(b) {
            best = best.min(seg_seg_distance(p1, q1, p2, q2));
        }
    }
    for p in surface_samples(a, 5) {
        best = best.min(point_box_distance(p, b));
    }
    for p in surface_samples(b, 5) {
        best = best.min(point_box_distance(p, a));
    }
    best
}

/// Direction classification by frame rotation: rotate the world so the
/// facing direction becomes +y and read the class off the target's signs.
fn classify_by_rotation(
    qtype: QType,
    positioning: Vec2,
    orienting: Vec2,
    querying: Vec2,
) -> Result<String, OracleError> {
    let degenerate = positioning.dist(orienting) < 0.01
        || positioning.dist(querying) < 0.01
        || orienting.dist(querying) < 0.01;
    if degenerate {
        return Err(OracleError::Degenerate(
            "direction triple has coincident centroids".into(),
        ));
    }
    let f = orienting.sub(positioning);
    let t = querying.sub(positioning);
    let n = f.norm();
    let (c, s) = (f.y / n, f.x / n);
    let x = c * t.x - s * t.y;
    let y = s * t.x + c * t.y;
    let label = match qtype {
        QType::RelDirEasy => {
            if x < 0.0 {
                "left"
            } else {
                "right"
            }
        }
        QType::RelDirMed => {
            if y < 0.0 && x.abs() <= -y {
                "back"
            } else if x < 0.0 {
                "left"
            } else {
                "right"
            }
        }
        QType::RelDirHard => match (x < 0.0, y > 0.0) {
            (true, true) => "front-left",
            (true, false) => "back-left",
            (false, true) => "front-right",
            (false, false) => "back-right",
        },
        other => unreachable!("not a direction type: {other}"),
    };
    Ok(label.to_string())
}

/// Earliest frame where any instance of the category is salient, by scanning
/// the raw per-frame observations with the annotation run's own threshold.
fn first_salient_frame(scene: &Scene, annotations: &DenseAnnotations, category: &str) -> Option<u32> {
    let threshold = annotations.config.salience_area_fraction - 1e-12;
    for frame in &annotations.frames {
        for obs in &frame.visible {
            if obs.area_fraction >= threshold
                && scene
                    .object(obs.object_id)
                    .map_or(false, |o| o.category == category)
            {
                return Some(frame.frame);
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Route replay.

fn oracle_nearest_free_cell(grid: &NavGrid, p: Vec2) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), f64)> = None;
    for ix in 0..grid.nx {
        for iy in 0..grid.ny {
            if !grid.is_free(ix, iy) {
                continue;
            }
            let d = grid.cell_center(ix, iy).dist(p);
            if best.map_or(true, |(_, bd)| d < bd - 1e-12) {
                best = Some(((ix, iy), d));
            }
        }
    }
    best.map(|(c, _)| c)
}

fn oracle_bfs(grid: &NavGrid, start: (usize, usize)) -> (Vec<u32>, Vec<u32>) {
    let n = grid.nx * grid.ny;
    let mut dist = vec![u32::MAX; n];
    let mut parent = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    dist[start.1 * grid.nx + start.0] = 0;
    queue.push_back(start);
    while let Some((ix, iy)) = queue.pop_front() {
        let here = iy * grid.nx + ix;
        let d = dist[here];
        let candidates = [
            (ix.wrapping_sub(1), iy, ix > 0),
            (ix, iy.wrapping_sub(1), iy > 0),
            (ix, iy + 1, iy + 1 < grid.ny),
            (ix + 1, iy, ix + 1 < grid.nx),
        ];
        for (jx, jy, in_bounds) in candidates {
            if !in_bounds || !grid.is_free(jx, jy) {
                continue;
            }
            let j = jy * grid.nx + jx;
            if dist[j] == u32::MAX {
                dist[j] = d + 1;
                parent[j] = here as u32;
                queue.push_back((jx, jy));
            }
        }
    }
    (dist, parent)
}

/// Re-derive the route's turn fills with an in-module search and integer
/// turn classification, and return them joined as the generator joins them.
fn replay_route(
    ctx: &OracleContext,
    start: Vec2,
    orienting: Vec2,
    end: Vec2,
) -> Result<String, OracleError> {
    let grid = build_navgrid(ctx.scene, ctx.nav).map_err(|e| {
        OracleError::UnresolvableProvenance(format!("scene {} has no nav grid: {e}", ctx.scene.id))
    })?;
    let start_cell = oracle_nearest_free_cell(&grid, start)
        .ok_or_else(|| OracleError::Degenerate("no free cell near route start".into()))?;
    let end_cell = oracle_nearest_free_cell(&grid, end)
        .ok_or_else(|| OracleError::Degenerate("no free cell near route end".into()))?;
    if start_cell == end_cell {
        return Err(OracleError::Degenerate(
            "route start and end share a cell".into(),
        ));
    }
    let (dist, parent) = oracle_bfs(&grid, start_cell);
    if dist[end_cell.1 * grid.nx + end_cell.0] == u32::MAX {
        return Err(OracleError::Degenerate("route end unreachable".into()));
    }
    let mut cells = vec![end_cell];
    let mut cursor = end_cell.1 * grid.nx + end_cell.0;
    let start_index = start_cell.1 * grid.nx + start_cell.0;
    while cursor != start_index {
        cursor = parent[cursor] as usize;
        cells.push((cursor % grid.nx, cursor / grid.nx));
    }
    cells.reverse();

    // Straight runs as integer step directions.
    let mut runs: Vec<(i64, i64)> = Vec::new();
    for w in cells.windows(2) {
        let step = (w[1].0 as i64 - w[0].0 as i64, w[1].1 as i64 - w[0].1 as i64);
        if runs.last() != Some(&step) {
            runs.push(step);
        }
    }

    let mut fills: Vec<&'static str> = Vec::new();
    let facing = orienting.sub(grid.cell_center(start_cell.0, start_cell.1));
    let facing_deg = facing.y.atan2(facing.x).to_degrees();
    let first_deg = (runs[0].1 as f64).atan2(runs[0].0 as f64).to_degrees();
    let mut delta = (first_deg - facing_deg).rem_euclid(360.0);
    if delta > 180.0 {
        delta -= 360.0;
    }
    match (delta / 90.0).round() as i64 {
        1 => fills.push("turn left"),
        -1 => fills.push("turn right"),
        2 | -2 => fills.push("turn back"),
        _ => {}
    }
    for w in runs.windows(2) {
        let cross = w[0].0 * w[1].1 - w[0].1 * w[1].0;
        let dot = w[0].0 * w[1].0 + w[0].1 * w[1].1;
        fills.push(if cross > 0 {
            "turn left"
        } else if cross < 0 {
            "turn right"
        } else {
            debug_assert!(dot < 0, "deduped runs cannot continue straight");
            "turn back"
        });
    }
    Ok(fills.join(", "))
}

// ---------------------------------------------------------------------------
// Frame subsampling.

/// Would the item still be answerable if the consumer saw only `n_frames`
/// uniformly sampled frames?
///
/// Sampled indices are `floor(i × (N−1) / (n−1))`. Temporal questions are
/// re-derived from the sampled observations alone: appearance order holds iff
/// every category is salient somewhere in the sample and the sampled first
/// appearances preserve the stored order strictly; the last frame is always
/// sampled, so spatiotemporal questions reduce to their referenced objects
/// being seen. Geometry questions require every referenced object to be
/// salient in at least one sampled frame.
pub fn subsample_check(
    item: &QAItem,
    scene: &Scene,
    trajectory: &Trajectory,
    annotations: &DenseAnnotations,
    n_frames: usize,
) -> bool {
    assert!(n_frames >= 2, "subsampling needs at least two frames");
    debug_assert_eq!(trajectory.poses.len(), annotations.frames.len());
    let n = annotations.frames.len();
    if n == 0 {
        return false;
    }
    let sampled: BTreeSet<usize> = (0..n_frames).map(|i| i * (n - 1) / (n_frames - 1)).collect();
    let threshold = annotations.config.salience_area_fraction - 1e-12;
    let salient_in_sample = |object_id: u32| {
        sampled.iter().any(|&f| {
            annotations.frames[f]
                .visible
                .iter()
                .any(|o| o.object_id == object_id && o.area_fraction >= threshold)
        })
    };
    match item.qtype {
        QType::AppearanceOrder => {
            let mut previous: Option<u32> = None;
            for id in &item.provenance.object_ids {
                let Some(obj) = scene.object(*id) else {
                    return false;
                };
                let first = sampled.iter().find_map(|&f| {
                    let frame = &annotations.frames[f];
                    frame
                        .visible
                        .iter()
                        .any(|o| {
                            o.area_fraction >= threshold
                                && scene
                                    .object(o.object_id)
                                    .map_or(false, |other| other.category == obj.category)
                        })
                        .then_some(frame.frame)
                });
                match (previous, first) {
                    (_, None) => return false,
                    (Some(p), Some(f)) if f <= p => return false,
                    (_, Some(f)) => previous = Some(f),
                }
            }
            true
        }
        _ => item
            .provenance
            .object_ids
            .iter()
            .all(|id| salient_in_sample(*id)),
    }
}

// ---------------------------------------------------------------------------
// Aggregate report.

/// Judge one item end to end: recomputed answer, byte match, subsample
/// answerability, notes for anything that went wrong.
pub fn validate_item(item: &QAItem, ctx: &OracleContext, n_frames: usize) -> ValidationVerdict {
    let mut notes = Vec::new();
    if let Err(e) = item.check_invariants() {
        notes.push(format!("invariant violation: {e}"));
    }
    let (oracle, matched) = match oracle_answer(item, ctx) {
        Ok(ans) => {
            let matched = ans == item.answer;
            if !matched {
                notes.push(format!("stored answer {:?} disagrees", item.answer));
            }
            (ans, matched)
        }
        Err(e) => {
            notes.push(e.to_string());
            (String::new(), false)
        }
    };
    let subsample_ok = Some(subsample_check(
        item,
        ctx.scene,
        ctx.trajectory,
        ctx.annotations,
        n_frames,
    ));
    ValidationVerdict {
        item_id: item.id.clone(),
        oracle_answer: oracle,
        matched,
        subsample_ok,
        notes,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeReport {
    pub total: usize,
    pub matches: usize,
    pub subsample_pass: usize,
}

/// Outcome of validating a whole dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub total: usize,
    pub matches: usize,
    pub mismatched_ids: Vec<String>,
    pub per_type: BTreeMap<String, TypeReport>,
    pub load_errors: Vec<String>,
    pub verdicts: Vec<ValidationVerdict>,
}

impl RoundtripReport {
    pub fn clean(&self) -> bool {
        self.load_errors.is_empty() && self.matches == self.total
    }

    /// Process exit status: 0 clean, 2 any mismatch, 3 any load error.
    pub fn exit_code(&self) -> i32 {
        if !self.load_errors.is_empty() {
            3
        } else if self.matches < self.total {
            2
        } else {
            0
        }
    }
}

/// Validate every item, resolving artifacts through `lookup` (items whose
/// artifacts cannot be resolved become load errors, not mismatches).
/// Items are judged in parallel; the report lists verdicts in input order.
pub fn roundtrip_report<'a, F>(items: &[QAItem], lookup: F, n_frames: usize) -> RoundtripReport
where
    F: Fn(&QAItem) -> Option<OracleContext<'a>> + Sync,
{
    let judged: Vec<Result<ValidationVerdict, String>> = items
        .par_iter()
        .map(|item| match lookup(item) {
            Some(ctx) => Ok(validate_item(item, &ctx, n_frames)),
            None => Err(format!(
                "{}: artifacts for trajectory {} not loadable",
                item.id, item.provenance.trajectory_id
            )),
        })
        .collect();
    let mut report = RoundtripReport::default();
    for (item, outcome) in items.iter().zip(judged) {
        match outcome {
            Ok(verdict) => {
                report.total += 1;
                let entry = report.per_type.entry(item.qtype.as_str().into()).or_default();
                entry.total += 1;
                if verdict.matched {
                    report.matches += 1;
                    entry.matches += 1;
                } else {
                    report.mismatched_ids.push(verdict.item_id.clone());
                }
                if verdict.subsample_ok == Some(true) {
                    entry.subsample_pass += 1;
                }
                report.verdicts.push(verdict);
            }
            Err(e) => report.load_errors.push(e),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ObjectCatalog;
    use crate::nav::{trajectory_for_scene, CameraConfig, SpeedConfig};
    use crate::observe::{annotate_trajectory, FrameAnnotation, Observation, VisibilityConfig};
    use crate::qa::{
        expand_with_multiple_choice, generate_for_trajectory, geometry, Format, Provenance,
        QualityConfig,
    };
    use crate::scene::{generate_scene, MinMax, Room, RoomKind, SceneParams};
    use crate::seeds;
    use rand::Rng;
    use std::sync::OnceLock;

    struct Fixture {
        scene: Scene,
        trajectory: Trajectory,
        annotations: DenseAnnotations,
        nav: NavConfig,
        pool: Vec<QAItem>,
    }

    impl Fixture {
        fn ctx(&self) -> OracleContext<'_> {
            OracleContext {
                scene: &self.scene,
                trajectory: &self.trajectory,
                annotations: &self.annotations,
                nav: &self.nav,
            }
        }
    }

    fn fixture() -> &'static Fixture {
        static FIX: OnceLock<Fixture> = OnceLock::new();
        FIX.get_or_init(|| {
            let scene = generate_scene(
                &SceneParams {
                    seed: 81,
                    room_count: MinMax::new(4, 5),
                    object_count: MinMax::new(38, 45),
                    ..SceneParams::default()
                },
                ObjectCatalog::builtin(),
            )
            .expect("fixture scene generates");
            let nav = NavConfig::default();
            let (grid, trajectory) = trajectory_for_scene(
                &scene,
                &nav,
                &SpeedConfig::default(),
                &CameraConfig::default(),
                10.0,
            )
            .expect("fixture tour plans");
            let annotations = annotate_trajectory(&scene, &trajectory, &VisibilityConfig::default());
            let trajectory_id = format!("{}/t0", scene.id);
            let output = generate_for_trajectory(
                &scene,
                &grid,
                &trajectory,
                &annotations,
                &trajectory_id,
                &QualityConfig::default(),
            );
            let scenes: BTreeMap<String, &Scene> =
                BTreeMap::from([(scene.id.clone(), &scene)]);
            let (twins, _) = expand_with_multiple_choice(&output.items, &scenes, 4242);
            let mut pool = output.items;
            pool.extend(twins);
            Fixture {
                scene,
                trajectory,
                annotations,
                nav,
                pool,
            }
        })
    }

    fn random_box(rng: &mut impl Rng) -> OrientedBox {
        OrientedBox::new(
            Vec3::new(
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(0.2..1.5),
            ),
            Vec3::new(
                rng.gen_range(0.05..1.2),
                rng.gen_range(0.05..1.2),
                rng.gen_range(0.05..1.2),
            ),
            rng.gen_range(-3.2..3.2),
        )
    }

    #[test]
    fn generated_pool_round_trips_with_zero_mismatches() {
        let fix = fixture();
        let ctx = fix.ctx();
        assert!(
            fix.pool.len() > 40,
            "fixture pool unexpectedly small: {}",
            fix.pool.len()
        );
        let mut failures = Vec::new();
        for item in &fix.pool {
            let verdict = validate_item(item, &ctx, DEFAULT_SUBSAMPLE_FRAMES);
            if !verdict.matched {
                failures.push(format!(
                    "{}: oracle {:?} vs stored {:?} ({:?})",
                    verdict.item_id, verdict.oracle_answer, item.answer, verdict.notes
                ));
            }
        }
        assert!(
            failures.is_empty(),
            "{} of {} items disagree with the oracle:\n{}",
            failures.len(),
            fix.pool.len(),
            failures.join("\n")
        );
    }

    #[test]
    fn tampered_answers_are_flagged() {
        let fix = fixture();
        let ctx = fix.ctx();
        for qtype in [QType::AbsDist, QType::RelDist, QType::RoutePlan] {
            let original = fix
                .pool
                .iter()
                .find(|i| i.qtype == qtype && i.format == Format::OpenEnded)
                .expect("fixture covers the type");
            let mut tampered = original.clone();
            tampered.answer = format!("{} ", tampered.answer);
            let verdict = validate_item(&tampered, &ctx, DEFAULT_SUBSAMPLE_FRAMES);
            assert!(!verdict.matched, "{qtype}: padding must break byte equality");
            assert_eq!(
                verdict.oracle_answer, original.answer,
                "{qtype}: oracle must still produce the untampered answer"
            );
        }
    }

    #[test]
    fn box_distance_agrees_with_sampled_refinement() {
        // Third path: dense surface sampling plus alternating projections,
        // checked against the feature-set minimum.
        let project = |b: &OrientedBox, p: Vec3| {
            let l = b.to_local(p);
            b.from_local(Vec3::new(
                l.x.clamp(-b.half.x, b.half.x),
                l.y.clamp(-b.half.y, b.half.y),
                l.z.clamp(-b.half.z, b.half.z),
            ))
        };
        let mut rng = seeds::rng(2026, "oracle-box-distance", 0);
        let mut checked = 0;
        while checked < 40 {
            let a = random_box(&mut rng);
            let b = random_box(&mut rng);
            let exact = box_distance(&a, &b);
            if exact == 0.0 {
                continue;
            }
            let mut best = (f64::INFINITY, Vec3::new(0.0, 0.0, 0.0));
            for p in surface_samples(&a, 9) {
                let q = project(&b, p);
                let d = q.dist(p);
                if d < best.0 {
                    best = (d, p);
                }
            }
            let mut p = best.1;
            let mut q = project(&b, p);
            for _ in 0..200 {
                p = project(&a, q);
                q = project(&b, p);
            }
            let refined = p.dist(q);
            assert!(
                refined >= exact - 1e-9,
                "feature minimum {exact} must lower-bound the refined sample {refined}"
            );
            assert!(
                (refined - exact).abs() < 1e-6,
                "feature minimum {exact} vs sampled refinement {refined}"
            );
            checked += 1;
        }
    }

    #[test]
    fn box_distance_known_configurations() {
        let unit = |cx: f64, cy: f64| {
            OrientedBox::new(Vec3::new(cx, cy, 0.5), Vec3::new(0.5, 0.5, 0.5), 0.0)
        };
        let d = box_distance(&unit(0.0, 0.0), &unit(2.0, 2.0));
        assert!(
            (d - std::f64::consts::SQRT_2).abs() < 1e-12,
            "corner-to-corner diagonal: {d}"
        );
        let d = box_distance(&unit(0.0, 0.0), &unit(3.0, 0.0));
        assert!((d - 2.0).abs() < 1e-12, "face gap: {d}");
        let d = box_distance(&unit(0.0, 0.0), &unit(0.5, 0.5));
        assert_eq!(d, 0.0, "overlapping boxes have distance zero");
    }

    #[test]
    fn segment_distance_covers_the_standard_cases() {
        let p = |x: f64, y: f64, z: f64| Vec3::new(x, y, z);
        // Crossing segments in a plane.
        let d = seg_seg_distance(p(-1.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.0, -1.0, 0.0), p(0.0, 1.0, 0.0));
        assert!(d.abs() < 1e-12, "crossing: {d}");
        // Skew perpendicular lines 1 apart.
        let d = seg_seg_distance(p(-1.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.0, -1.0, 1.0), p(0.0, 1.0, 1.0));
        assert!((d - 1.0).abs() < 1e-12, "skew: {d}");
        // Parallel, overlapping in projection.
        let d = seg_seg_distance(p(0.0, 0.0, 0.0), p(4.0, 0.0, 0.0), p(1.0, 3.0, 0.0), p(3.0, 3.0, 0.0));
        assert!((d - 3.0).abs() < 1e-12, "parallel: {d}");
        // Clamped to endpoints.
        let d = seg_seg_distance(p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(3.0, 4.0, 0.0), p(5.0, 4.0, 0.0));
        assert!((d - (4.0 + 16.0f64).sqrt()).abs() < 1e-12, "clamped: {d}");
    }

    #[test]
    fn shoelace_matches_rectangle_math() {
        let mut rng = seeds::rng(2026, "oracle-shoelace", 0);
        for _ in 0..50 {
            let w = rng.gen_range(0.5..9.0);
            let h = rng.gen_range(0.5..9.0);
            let x = rng.gen_range(-5.0..5.0);
            let y = rng.gen_range(-5.0..5.0);
            let rect = crate::geom::Rect::new(Vec2::new(x, y), Vec2::new(x + w, y + h));
            let area = shoelace(&rect.corners());
            assert!(
                (area - w * h).abs() < 1e-9,
                "shoelace {area} vs {w} x {h}"
            );
        }
    }

    #[test]
    fn rotation_classification_agrees_with_angle_path() {
        let mut rng = seeds::rng(2026, "oracle-rotation", 0);
        let mut checked = 0;
        while checked < 1000 {
            let pt = |rng: &mut rand_chacha::ChaCha8Rng| {
                Vec2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0))
            };
            let (p, o, q) = (pt(&mut rng), pt(&mut rng), pt(&mut rng));
            let Some(angle) = geometry::ego_frame_angle(p, o, q) else {
                continue;
            };
            for qtype in [QType::RelDirEasy, QType::RelDirMed, QType::RelDirHard] {
                let difficulty = qtype.difficulty().expect("direction type");
                if geometry::direction_boundary_margin(angle, difficulty) < 1e-3 {
                    continue;
                }
                let via_angle = geometry::classify_direction(angle, difficulty);
                let via_rotation = classify_by_rotation(qtype, p, o, q).expect("non-degenerate");
                assert_eq!(
                    via_rotation, via_angle,
                    "{qtype} at {angle:.6} deg: rotation {via_rotation} vs angle {via_angle}"
                );
            }
            checked += 1;
        }
    }

    fn tiny_scene() -> Scene {
        let obj = |id: u32, category: &str, x: f64| ObjectInstance {
            id,
            category: category.into(),
            bbox: OrientedBox::new(Vec3::new(x, 1.0, 0.4), Vec3::new(0.3, 0.3, 0.4), 0.0),
            room_id: 0,
            placement: crate::catalog::Placement::Floor,
        };
        Scene {
            id: "scene-tiny".into(),
            rooms: vec![Room {
                id: 0,
                footprint: crate::geom::Rect::new(Vec2::new(0.0, 0.0), Vec2::new(6.0, 3.0)),
                center: Vec2::new(3.0, 1.5),
                kind: RoomKind::Bedroom,
            }],
            doors: vec![],
            objects: vec![obj(1, "bed", 1.0), obj(2, "desk", 3.0)],
            ceiling_height: 2.8,
            seed: 1,
        }
    }

    fn synthetic_annotations(
        frames: usize,
        salient_spans: &[(std::ops::Range<usize>, u32)],
    ) -> (Trajectory, DenseAnnotations) {
        let cfg = VisibilityConfig::default();
        let mut frame_anns: Vec<FrameAnnotation> = (0..frames)
            .map(|f| FrameAnnotation {
                frame: f as u32,
                visible: vec![],
            })
            .collect();
        for (span, object_id) in salient_spans {
            for frame in span.clone() {
                frame_anns[frame].visible.push(Observation {
                    object_id: *object_id,
                    area_fraction: cfg.salience_area_fraction * 2.0,
                    extent_fraction: 0.1,
                });
            }
        }
        let poses = (0..frames)
            .map(|f| crate::nav::AgentPose {
                frame: f as u32,
                time: f as f64 / 10.0,
                x: 1.0,
                y: 1.0,
                yaw: 0.0,
            })
            .collect();
        let trajectory = Trajectory {
            scene_id: "scene-tiny".into(),
            fps: 10.0,
            camera: CameraConfig::default(),
            visit_order: vec![0],
            poses,
        };
        let annotations = DenseAnnotations {
            scene_id: "scene-tiny".into(),
            fps: 10.0,
            config: cfg,
            frames: frame_anns,
            first_appearance: BTreeMap::new(),
        };
        (trajectory, annotations)
    }

    fn synthetic_item(qtype: QType, object_ids: Vec<u32>, answer: &str) -> QAItem {
        QAItem {
            id: format!("scene-tiny/t0/{}/00/oe", qtype.as_str()),
            qtype,
            format: Format::OpenEnded,
            question: "q".into(),
            answer: answer.into(),
            choices: None,
            correct_letter: None,
            provenance: Provenance {
                scene_id: "scene-tiny".into(),
                trajectory_id: "scene-tiny/t0".into(),
                object_ids,
                ground_truth_raw: None,
            },
        }
    }

    #[test]
    fn subsampling_keeps_wide_gaps_and_drops_skipped_frames() {
        let scene = tiny_scene();
        // 1800 frames, sampled with n=64 (stride about 28.6). The categories
        // stay salient for long spans 300 frames apart: order survives.
        let (traj, anns) = synthetic_annotations(1800, &[(100..400, 1), (400..900, 2)]);
        let item = synthetic_item(QType::AppearanceOrder, vec![1, 2], "bed, desk");
        assert!(subsample_check(&item, &scene, &traj, &anns, 64));

        // Object 2 visible only in one frame that the sampler skips.
        let (traj, anns) = synthetic_annotations(1800, &[(100..400, 1), (401..402, 2)]);
        let item = synthetic_item(QType::AbsDist, vec![1, 2], "2.0");
        let sampled: BTreeSet<usize> = (0..64).map(|i| i * 1799 / 63).collect();
        assert!(!sampled.contains(&401), "401 must fall between samples");
        assert!(
            !subsample_check(&item, &scene, &traj, &anns, 64),
            "an object seen only in a skipped frame is not answerable"
        );

        // Same geometry item when both objects land on sampled frames.
        let (traj, anns) = synthetic_annotations(1800, &[(0..1, 1), (1799..1800, 2)]);
        assert!(subsample_check(&item, &scene, &traj, &anns, 64));

        // Appearance order collapses when both categories first show up
        // inside the same sampling window.
        let (traj, anns) = synthetic_annotations(1800, &[(600..900, 1), (601..900, 2)]);
        let item = synthetic_item(QType::AppearanceOrder, vec![1, 2], "bed, desk");
        assert!(
            !subsample_check(&item, &scene, &traj, &anns, 64),
            "ties inside one sampling window are ambiguous"
        );

        // Room size references no objects; vacuously answerable.
        let (traj, anns) = synthetic_annotations(120, &[]);
        let item = synthetic_item(QType::RoomSize, vec![], "18.0");
        assert!(subsample_check(&item, &scene, &traj, &anns, 64));
    }

    #[test]
    fn unresolvable_provenance_is_reported() {
        let fix = fixture();
        let ctx = fix.ctx();
        let mut item = fix.pool[0].clone();
        item.provenance.object_ids = vec![99_999];
        item.qtype = QType::ObjSize;
        let err = oracle_answer(&item, &ctx).unwrap_err();
        assert!(
            err.to_string().starts_with("UNRESOLVABLE_PROVENANCE:"),
            "{err}"
        );
        let verdict = validate_item(&item, &ctx, DEFAULT_SUBSAMPLE_FRAMES);
        assert!(!verdict.matched);
        assert!(verdict
            .notes
            .iter()
            .any(|n| n.contains("UNRESOLVABLE_PROVENANCE")));

        let mut foreign = fix.pool[0].clone();
        foreign.provenance.scene_id = "scene-elsewhere".into();
        assert!(oracle_answer(&foreign, &ctx).is_err());
    }

    #[test]
    fn roundtrip_report_aggregates_and_maps_exit_codes() {
        let fix = fixture();
        let report = roundtrip_report(
            &fix.pool,
            |_| Some(fix.ctx()),
            DEFAULT_SUBSAMPLE_FRAMES,
        );
        assert_eq!(report.total, fix.pool.len());
        assert_eq!(report.matches, report.total, "{:?}", report.mismatched_ids);
        assert!(report.clean());
        assert_eq!(report.exit_code(), 0);
        assert_eq!(report.verdicts.len(), fix.pool.len());
        let per_type_total: usize = report.per_type.values().map(|t| t.total).sum();
        assert_eq!(per_type_total, report.total);

        let mut tampered = fix.pool.clone();
        tampered[0].answer = "not the answer".into();
        let report = roundtrip_report(&tampered, |_| Some(fix.ctx()), DEFAULT_SUBSAMPLE_FRAMES);
        assert_eq!(report.exit_code(), 2);
        assert_eq!(report.mismatched_ids, vec![tampered[0].id.clone()]);

        let report = roundtrip_report(
            &fix.pool,
            |item| {
                if item.id == fix.pool[0].id {
                    None
                } else {
                    Some(fix.ctx())
                }
            },
            DEFAULT_SUBSAMPLE_FRAMES,
        );
        assert_eq!(report.exit_code(), 3, "load errors outrank mismatches");
        assert_eq!(report.load_errors.len(), 1);
        assert_eq!(report.total, fix.pool.len() - 1);
    }

    #[test]
    fn oracle_code_never_touches_generator_geometry() {
        let source = include_str!("oracle.rs");
        let non_test = source
            .split("#[cfg(test)]")
            .next()
            .expect("file has a test marker");
        for forbidden in [
            "qa::geometry",
            "closest_point_distance",
            "ego_frame_angle",
            "classify_direction",
            "point_to_box_distance",
            "direction_boundary_margin",
        ] {
            assert!(
                !non_test.contains(forbidden),
                "oracle must not reference the generator's geometry: found {forbidden:?}"
            );
        }
    }
}
