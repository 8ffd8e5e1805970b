//! Procedural indoor scenes: rooms, doors, and furniture.
//!
//! Layout generation is a two-level guillotine subdivision of a bounding
//! rectangle on a coarse grid: the bounding box splits into horizontal bands,
//! each band splits into rooms, so every room edge lands on the grid and
//! inside the configured edge range by construction. Doors open on shared
//! walls along a spanning tree of the adjacency graph (plus occasional
//! extras), which guarantees the door graph connects every room.
//!
//! Object placement is rejection sampling with a per-object attempt budget.
//! Floor objects additionally keep clear of the straight strips between each
//! room center and its door midpoints; those reserved strips are what make
//! every generated scene walkable for the navigation stage without a grid
//! search here.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::q4;
use crate::catalog::{ObjectCatalog, Placement};
use crate::geom::{OrientedBox, Rect, Seg2, Vec2, Vec3};
use crate::seeds;

pub const DEFAULT_CEILING_HEIGHT: f64 = 2.7;
pub const DOOR_WIDTH: f64 = 0.9;
pub const MIN_DOOR_WIDTH: f64 = 0.8;
pub const MIN_ROOM_AREA: f64 = 2.0;
pub const MIN_ROOM_EDGE: f64 = 1.5;
/// Placement attempts per object before generation gives up.
pub const PLACEMENT_RETRY_BUDGET: u32 = 1000;
/// Floor objects keep this far from walkway strips and leave this wall gap.
const WALKWAY_CLEARANCE: f64 = 0.55;
const WALL_GAP: f64 = 0.05;
/// Extra (non-spanning-tree) door probability per adjacent room pair.
const EXTRA_DOOR_PROB: f64 = 0.15;
/// Floor categories whose tops may carry `on_surface` objects.
const SUPPORTER_CATEGORIES: [&str; 9] = [
    "table",
    "coffee table",
    "desk",
    "nightstand",
    "dresser",
    "tv stand",
    "kitchen island",
    "counter",
    "side table",
];

/// Inclusive numeric range used throughout the params.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMax<T> {
    pub min: T,
    pub max: T,
}

impl<T: Copy> MinMax<T> {
    pub fn new(min: T, max: T) -> Self {
        MinMax { min, max }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoomKind {
    Bedroom,
    Kitchen,
    Livingroom,
    Bathroom,
    Office,
    Hallway,
}

impl RoomKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RoomKind::Bedroom => "bedroom",
            RoomKind::Kitchen => "kitchen",
            RoomKind::Livingroom => "livingroom",
            RoomKind::Bathroom => "bathroom",
            RoomKind::Office => "office",
            RoomKind::Hallway => "hallway",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub id: u32,
    pub footprint: Rect,
    pub center: Vec2,
    pub kind: RoomKind,
}

/// An opening in a wall. `room_b` is `None` for exterior doors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Door {
    pub id: u32,
    pub room_a: u32,
    pub room_b: Option<u32>,
    pub segment: Seg2,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub id: u32,
    pub category: String,
    pub bbox: OrientedBox,
    pub room_id: u32,
    pub placement: Placement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub id: String,
    pub rooms: Vec<Room>,
    pub doors: Vec<Door>,
    pub objects: Vec<ObjectInstance>,
    pub ceiling_height: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneParams {
    pub seed: u64,
    pub room_count: MinMax<u32>,
    pub object_count: MinMax<u32>,
    /// Allowed room edge lengths, meters. `min` must be at least 1.5.
    pub room_edge: MinMax<f64>,
    /// Layout grid pitch, meters; room edges land on multiples of this.
    pub cell: f64,
    pub ceiling_height: f64,
    /// `"builtin"` or a path to a catalog JSON.
    pub catalog_ref: String,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            seed: 0,
            room_count: MinMax::new(3, 8),
            object_count: MinMax::new(30, 50),
            room_edge: MinMax::new(2.5, 6.0),
            cell: 0.5,
            ceiling_height: DEFAULT_CEILING_HEIGHT,
            catalog_ref: "builtin".to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("invalid scene params: {0}")]
    BadParams(String),
    #[error("GENERATION_EXHAUSTED: gave up placing object {object_index} after {attempts} attempts")]
    GenerationExhausted { object_index: usize, attempts: u32 },
    #[error("unknown room id {0}")]
    UnknownRoom(u32),
}

// ---------------------------------------------------------------------------
// Generation

pub fn generate_scene(params: &SceneParams, catalog: &ObjectCatalog) -> Result<Scene, SceneError> {
    check_params(params)?;

    let mut rng = seeds::rng(params.seed, "scene-layout", 0);
    let n_rooms = rng.gen_range(params.room_count.min..=params.room_count.max) as usize;

    let rooms = layout_rooms(params, n_rooms, &mut rng)?;
    let doors = insert_doors(&rooms, &mut rng);

    let n_objects = rng.gen_range(params.object_count.min..=params.object_count.max) as usize;
    let mut obj_rng = seeds::rng(params.seed, "scene-objects", 0);
    let objects = place_objects(params, &rooms, &doors, catalog, n_objects, &mut obj_rng)?;

    Ok(Scene {
        id: format!("scene-{:016x}", params.seed),
        rooms,
        doors,
        objects,
        ceiling_height: q4(params.ceiling_height),
        seed: params.seed,
    })
}

fn check_params(params: &SceneParams) -> Result<(), SceneError> {
    let bad = |msg: String| Err(SceneError::BadParams(msg));
    if params.room_count.min < 1 || params.room_count.min > params.room_count.max {
        return bad(format!(
            "room_count range {}..{} is empty or zero",
            params.room_count.min, params.room_count.max
        ));
    }
    if params.object_count.min > params.object_count.max {
        return bad("object_count range is empty".into());
    }
    if params.room_edge.min < MIN_ROOM_EDGE {
        return bad(format!(
            "room_edge.min {} is below the {MIN_ROOM_EDGE} m floor",
            params.room_edge.min
        ));
    }
    if params.room_edge.min > params.room_edge.max {
        return bad("room_edge range is empty".into());
    }
    if !(params.cell > 0.0) {
        return bad("cell must be positive".into());
    }
    if !(params.ceiling_height > 1.0) {
        return bad("ceiling_height must exceed 1 m".into());
    }
    let lo = grid_ceil(params.room_edge.min, params.cell);
    let hi = grid_floor(params.room_edge.max, params.cell);
    if lo > hi {
        return bad(format!(
            "no grid-aligned edge length inside {}..{} at cell {}",
            params.room_edge.min, params.room_edge.max, params.cell
        ));
    }
    Ok(())
}

fn grid_ceil(x: f64, cell: f64) -> i64 {
    (x / cell - 1e-9).ceil() as i64
}

fn grid_floor(x: f64, cell: f64) -> i64 {
    (x / cell + 1e-9).floor() as i64
}

/// Split `total` grid steps into `k` parts, each within `[lo, hi]` steps.
/// Caller guarantees feasibility.
fn split_steps(total: i64, k: i64, lo: i64, hi: i64, rng: &mut impl Rng) -> Vec<i64> {
    let mut parts = Vec::with_capacity(k as usize);
    let mut remaining = total;
    for i in 0..k {
        let left = k - i - 1;
        let part_lo = (remaining - left * hi).max(lo);
        let part_hi = (remaining - left * lo).min(hi);
        let part = rng.gen_range(part_lo..=part_hi);
        parts.push(part);
        remaining -= part;
    }
    parts
}

fn layout_rooms(
    params: &SceneParams,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Room>, SceneError> {
    let cell = params.cell;
    let lo = grid_ceil(params.room_edge.min, cell);
    let hi = grid_floor(params.room_edge.max, cell);

    // Pick a band count whose per-band room counts admit a common width:
    // with k_i rooms in band i, the bounding width must lie in
    // [max(k_i)*lo, min(k_i)*hi]. Scan outward from the squarish choice.
    let ideal = (n as f64).sqrt().round().max(1.0) as usize;
    let mut chosen: Option<(usize, Vec<usize>)> = None;
    for delta in 0..n {
        for rows in [ideal.saturating_sub(delta), ideal + delta] {
            if rows == 0 || rows > n {
                continue;
            }
            let base = n / rows;
            let extra = n % rows;
            let counts: Vec<usize> = (0..rows).map(|i| base + usize::from(i < extra)).collect();
            let kmax = *counts.iter().max().unwrap() as i64;
            let kmin = *counts.iter().min().unwrap() as i64;
            if kmax * lo <= kmin * hi {
                chosen = Some((rows, counts));
                break;
            }
        }
        if chosen.is_some() {
            break;
        }
    }
    let (rows, counts) = chosen.ok_or_else(|| {
        SceneError::BadParams(format!(
            "cannot lay out {n} rooms with edges in {}..{}",
            params.room_edge.min, params.room_edge.max
        ))
    })?;

    let kmax = *counts.iter().max().unwrap() as i64;
    let kmin = *counts.iter().min().unwrap() as i64;
    let width_steps = rng.gen_range((kmax * lo)..=(kmin * hi));

    let mut rooms = Vec::with_capacity(n);
    let mut id = 0u32;
    let mut y = 0i64;
    for &k in &counts {
        let band_h = rng.gen_range(lo..=hi);
        let widths = split_steps(width_steps, k as i64, lo, hi, rng);
        let mut x = 0i64;
        for w in widths {
            let footprint = Rect::new(
                Vec2::new(q4(x as f64 * cell), q4(y as f64 * cell)),
                Vec2::new(q4((x + w) as f64 * cell), q4((y + band_h) as f64 * cell)),
            );
            rooms.push(Room {
                id,
                center: Vec2::new(q4(footprint.center().x), q4(footprint.center().y)),
                footprint,
                kind: sample_kind(rng),
            });
            id += 1;
            x += w;
        }
        y += band_h;
        let _ = rows;
    }
    Ok(rooms)
}

fn sample_kind(rng: &mut impl Rng) -> RoomKind {
    let kinds = [
        (RoomKind::Bedroom, 0.22),
        (RoomKind::Livingroom, 0.20),
        (RoomKind::Hallway, 0.18),
        (RoomKind::Kitchen, 0.14),
        (RoomKind::Office, 0.14),
        (RoomKind::Bathroom, 0.12),
    ];
    let mut t = rng.gen::<f64>();
    for (kind, w) in kinds {
        if t < w {
            return kind;
        }
        t -= w;
    }
    RoomKind::Bathroom
}

/// Shared-boundary overlap between two room rectangles, if long enough for a
/// door. Returns the overlap segment.
fn shared_wall(a: &Rect, b: &Rect) -> Option<Seg2> {
    const NEED: f64 = DOOR_WIDTH + 0.3;
    let tol = 1e-6;
    // Vertical shared wall: a.max.x == b.min.x or vice versa.
    for (x, lo_a, hi_a, lo_b, hi_b) in [
        (a.max.x, a.min.y, a.max.y, b.min.y, b.max.y),
        (a.min.x, a.min.y, a.max.y, b.min.y, b.max.y),
    ] {
        let matches = (x - b.min.x).abs() < tol || (x - b.max.x).abs() < tol;
        if matches && ((x - a.max.x).abs() < tol || (x - a.min.x).abs() < tol) {
            let lo = lo_a.max(lo_b);
            let hi = hi_a.min(hi_b);
            if hi - lo >= NEED {
                return Some(Seg2::new(Vec2::new(x, lo), Vec2::new(x, hi)));
            }
        }
    }
    for (y, lo_a, hi_a, lo_b, hi_b) in [
        (a.max.y, a.min.x, a.max.x, b.min.x, b.max.x),
        (a.min.y, a.min.x, a.max.x, b.min.x, b.max.x),
    ] {
        let matches = (y - b.min.y).abs() < tol || (y - b.max.y).abs() < tol;
        if matches && ((y - a.max.y).abs() < tol || (y - a.min.y).abs() < tol) {
            let lo = lo_a.max(lo_b);
            let hi = hi_a.min(hi_b);
            if hi - lo >= NEED {
                return Some(Seg2::new(Vec2::new(lo, y), Vec2::new(hi, y)));
            }
        }
    }
    None
}

fn door_on(seg: Seg2, id: u32, a: u32, b: u32) -> Door {
    let mid = seg.eval(0.5);
    let dir = seg.b.sub(seg.a);
    let len = dir.norm();
    let half = dir.scale(DOOR_WIDTH / (2.0 * len));
    Door {
        id,
        room_a: a.min(b),
        room_b: Some(a.max(b)),
        segment: Seg2::new(
            Vec2::new(q4(mid.x - half.x), q4(mid.y - half.y)),
            Vec2::new(q4(mid.x + half.x), q4(mid.y + half.y)),
        ),
        width: DOOR_WIDTH,
    }
}

fn insert_doors(rooms: &[Room], rng: &mut impl Rng) -> Vec<Door> {
    // All adjacency pairs able to host a door, in deterministic id order.
    let mut adjacency: Vec<(u32, u32, Seg2)> = Vec::new();
    for i in 0..rooms.len() {
        for j in (i + 1)..rooms.len() {
            if let Some(seg) = shared_wall(&rooms[i].footprint, &rooms[j].footprint) {
                adjacency.push((rooms[i].id, rooms[j].id, seg));
            }
        }
    }

    // Spanning tree by breadth-first growth from room 0.
    let mut connected: BTreeSet<u32> = BTreeSet::new();
    connected.insert(rooms[0].id);
    let mut doors = Vec::new();
    let mut in_tree: BTreeSet<usize> = BTreeSet::new();
    while connected.len() < rooms.len() {
        let next = adjacency.iter().enumerate().find(|(idx, (a, b, _))| {
            !in_tree.contains(idx) && (connected.contains(a) ^ connected.contains(b))
        });
        match next {
            Some((idx, &(a, b, seg))) => {
                in_tree.insert(idx);
                connected.insert(a);
                connected.insert(b);
                doors.push(door_on(seg, doors.len() as u32, a, b));
            }
            // Unreachable with banded layouts, which are always adjacent-connected.
            None => break,
        }
    }
    for (idx, &(a, b, seg)) in adjacency.iter().enumerate() {
        if !in_tree.contains(&idx) && rng.gen_bool(EXTRA_DOOR_PROB) {
            doors.push(door_on(seg, doors.len() as u32, a, b));
        }
    }
    doors
}

// --- object placement ------------------------------------------------------

struct PlacedGeom {
    corners: [Vec2; 4],
    z_min: f64,
    z_max: f64,
}

fn placed_geom(b: &OrientedBox) -> PlacedGeom {
    PlacedGeom {
        corners: b.footprint(),
        z_min: b.z_min(),
        z_max: b.z_max(),
    }
}

fn project_onto(corners: &[Vec2; 4], axis: Vec2) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in corners {
        let t = c.dot(axis);
        lo = lo.min(t);
        hi = hi.max(t);
    }
    (lo, hi)
}

/// Separating-axis overlap test for two convex quads (strict: touching is
/// not overlap).
fn footprints_overlap(a: &[Vec2; 4], b: &[Vec2; 4]) -> bool {
    for quad in [a, b] {
        for i in 0..4 {
            let edge = quad[(i + 1) % 4].sub(quad[i]);
            let axis = Vec2::new(-edge.y, edge.x);
            let (a_lo, a_hi) = project_onto(a, axis);
            let (b_lo, b_hi) = project_onto(b, axis);
            if a_hi <= b_lo + 1e-9 || b_hi <= a_lo + 1e-9 {
                return false;
            }
        }
    }
    true
}

fn boxes_interpenetrate(a: &PlacedGeom, b: &PlacedGeom) -> bool {
    let z_overlap = a.z_max > b.z_min + 1e-9 && b.z_max > a.z_min + 1e-9;
    z_overlap && footprints_overlap(&a.corners, &b.corners)
}

fn seg_seg_distance(a: &Seg2, b: &Seg2) -> f64 {
    if a.crossing_param(b).is_some() {
        return 0.0;
    }
    a.dist_to_point(b.a)
        .min(a.dist_to_point(b.b))
        .min(b.dist_to_point(a.a))
        .min(b.dist_to_point(a.b))
}

fn footprint_seg_distance(corners: &[Vec2; 4], seg: &Seg2) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..4 {
        let edge = Seg2::new(corners[i], corners[(i + 1) % 4]);
        best = best.min(seg_seg_distance(&edge, seg));
        if best == 0.0 {
            return 0.0;
        }
    }
    // A segment strictly inside the quad never reaches an edge crossing, but
    // then its endpoints are inside: cheap winding check via cross signs.
    if point_in_quad(corners, seg.a) || point_in_quad(corners, seg.b) {
        return 0.0;
    }
    best
}

fn point_in_quad(corners: &[Vec2; 4], p: Vec2) -> bool {
    let mut sign = 0.0f64;
    for i in 0..4 {
        let c = corners[(i + 1) % 4].sub(corners[i]).cross(p.sub(corners[i]));
        if c.abs() < 1e-12 {
            continue;
        }
        if sign == 0.0 {
            sign = c.signum();
        } else if sign != c.signum() {
            return false;
        }
    }
    true
}

/// Straight walkway strips (room center to each of its door midpoints) that
/// floor objects must keep clear of.
fn walkway_strips(rooms: &[Room], doors: &[Door]) -> BTreeMap<u32, Vec<Seg2>> {
    let mut strips: BTreeMap<u32, Vec<Seg2>> = BTreeMap::new();
    for room in rooms {
        strips.insert(room.id, Vec::new());
    }
    for door in doors {
        let mid = door.segment.eval(0.5);
        let mut rooms_of_door = vec![door.room_a];
        if let Some(b) = door.room_b {
            rooms_of_door.push(b);
        }
        for rid in rooms_of_door {
            if let Some(room) = rooms.iter().find(|r| r.id == rid) {
                strips
                    .entry(rid)
                    .or_default()
                    .push(Seg2::new(room.center, mid));
            }
        }
    }
    strips
}

struct Attempted {
    bbox: OrientedBox,
    room_id: u32,
    placement: Placement,
}

fn place_objects(
    params: &SceneParams,
    rooms: &[Room],
    doors: &[Door],
    catalog: &ObjectCatalog,
    n_objects: usize,
    rng: &mut impl Rng,
) -> Result<Vec<ObjectInstance>, SceneError> {
    let strips = walkway_strips(rooms, doors);
    let total_area: f64 = rooms.iter().map(|r| r.footprint.area()).sum();
    let weight_total: f64 = catalog.entries.iter().map(|e| e.salience).sum();

    let mut objects: Vec<ObjectInstance> = Vec::with_capacity(n_objects);
    let mut geoms: Vec<PlacedGeom> = Vec::new();
    let mut category_counts: BTreeMap<&str, u32> = BTreeMap::new();
    // Indices into `objects` that can support an on_surface item.
    let mut supporters: Vec<usize> = Vec::new();

    for object_index in 0..n_objects {
        let mut placed = false;
        for _attempt in 0..PLACEMENT_RETRY_BUDGET {
            // Category, weighted by salience, skipping full categories.
            let mut t = rng.gen::<f64>() * weight_total;
            let mut entry = &catalog.entries[0];
            for e in &catalog.entries {
                if t < e.salience {
                    entry = e;
                    break;
                }
                t -= e.salience;
            }
            if category_counts.get(entry.category.as_str()).copied().unwrap_or(0) >= 6 {
                continue;
            }
            let placement = entry.placements[rng.gen_range(0..entry.placements.len())];

            let half = Vec3::new(
                q4(rng.gen_range(entry.extents_min[0]..=entry.extents_max[0]) / 2.0),
                q4(rng.gen_range(entry.extents_min[1]..=entry.extents_max[1]) / 2.0),
                q4(rng.gen_range(entry.extents_min[2]..=entry.extents_max[2]) / 2.0),
            );

            let attempt = match placement {
                Placement::Floor => try_floor(rooms, &strips, total_area, half, params, rng),
                Placement::WallMounted => try_wall(rooms, doors, total_area, half, params, rng),
                Placement::OnSurface => try_surface(&objects, &supporters, half, rng),
            };
            let Some(attempt) = attempt else { continue };

            let geom = placed_geom(&attempt.bbox);
            let supporter_of = |idx: usize| -> bool {
                attempt.placement == Placement::OnSurface
                    && (objects[idx].bbox.z_max() - attempt.bbox.z_min()).abs() < 0.02
                    && point_in_quad(&geoms[idx].corners, attempt.bbox.center.xy())
            };
            let collides = geoms
                .iter()
                .enumerate()
                .any(|(i, g)| !supporter_of(i) && boxes_interpenetrate(g, &geom));
            if collides {
                continue;
            }

            *category_counts.entry(entry_category(catalog, &entry.category)).or_insert(0) += 1;
            if attempt.placement == Placement::Floor
                && SUPPORTER_CATEGORIES.contains(&entry.category.as_str())
            {
                supporters.push(objects.len());
            }
            objects.push(ObjectInstance {
                id: objects.len() as u32,
                category: entry.category.clone(),
                bbox: attempt.bbox,
                room_id: attempt.room_id,
                placement: attempt.placement,
            });
            geoms.push(geom);
            placed = true;
            break;
        }
        if !placed {
            return Err(SceneError::GenerationExhausted {
                object_index,
                attempts: PLACEMENT_RETRY_BUDGET,
            });
        }
    }
    Ok(objects)
}

// Borrow the 'static-ish category key from the catalog so the counts map can
// outlive the loop iteration.
fn entry_category<'a>(catalog: &'a ObjectCatalog, name: &str) -> &'a str {
    catalog
        .entries
        .iter()
        .find(|e| e.category == name)
        .map(|e| e.category.as_str())
        .expect("category from this catalog")
}

fn pick_room_by_area(rooms: &[Room], total_area: f64, rng: &mut impl Rng) -> usize {
    let mut t = rng.gen::<f64>() * total_area;
    for (i, r) in rooms.iter().enumerate() {
        let a = r.footprint.area();
        if t < a {
            return i;
        }
        t -= a;
    }
    rooms.len() - 1
}

fn try_floor(
    rooms: &[Room],
    strips: &BTreeMap<u32, Vec<Seg2>>,
    total_area: f64,
    half: Vec3,
    params: &SceneParams,
    rng: &mut impl Rng,
) -> Option<Attempted> {
    let room = &rooms[pick_room_by_area(rooms, total_area, rng)];
    let yaw = q4(rng.gen_range(0.0..(2.0 * std::f64::consts::PI)));
    let (s, c) = (yaw.sin().abs(), yaw.cos().abs());
    let ax = half.x * c + half.y * s;
    let ay = half.x * s + half.y * c;
    let fp = room.footprint;
    let x_lo = fp.min.x + ax + WALL_GAP;
    let x_hi = fp.max.x - ax - WALL_GAP;
    let y_lo = fp.min.y + ay + WALL_GAP;
    let y_hi = fp.max.y - ay - WALL_GAP;
    if x_lo >= x_hi || y_lo >= y_hi {
        return None;
    }
    if half.z * 2.0 > params.ceiling_height {
        return None;
    }
    let center = Vec3::new(
        q4(rng.gen_range(x_lo..x_hi)),
        q4(rng.gen_range(y_lo..y_hi)),
        half.z,
    );
    let bbox = OrientedBox::new(center, half, yaw);
    let corners = bbox.footprint();
    for strip in strips.get(&room.id).into_iter().flatten() {
        if footprint_seg_distance(&corners, strip) < WALKWAY_CLEARANCE {
            return None;
        }
    }
    Some(Attempted {
        bbox,
        room_id: room.id,
        placement: Placement::Floor,
    })
}

fn try_wall(
    rooms: &[Room],
    doors: &[Door],
    total_area: f64,
    half: Vec3,
    params: &SceneParams,
    rng: &mut impl Rng,
) -> Option<Attempted> {
    let room = &rooms[pick_room_by_area(rooms, total_area, rng)];
    let fp = room.footprint;
    // Wall 0..3: x=min, x=max, y=min, y=max. Local +x (depth) points inward.
    let wall = rng.gen_range(0..4u8);
    let (yaw, along_lo, along_hi) = match wall {
        0 | 1 => (
            if wall == 0 { 0.0 } else { std::f64::consts::PI },
            fp.min.y + half.y + WALL_GAP,
            fp.max.y - half.y - WALL_GAP,
        ),
        // Walls 2 and 3 rotate the box a quarter turn: depth (local x) runs
        // along world y, width (local y) along world x.
        _ => (
            if wall == 2 {
                std::f64::consts::FRAC_PI_2
            } else {
                -std::f64::consts::FRAC_PI_2
            },
            fp.min.x + half.y + WALL_GAP,
            fp.max.x - half.y - WALL_GAP,
        ),
    };
    if along_lo >= along_hi {
        return None;
    }
    let along = rng.gen_range(along_lo..along_hi);
    let z_lo = (half.z + 0.2).max(0.9);
    let z_hi = (params.ceiling_height - half.z - WALL_GAP).min(1.8);
    if z_lo >= z_hi {
        return None;
    }
    let z = q4(rng.gen_range(z_lo..z_hi));
    let center = match wall {
        0 => Vec3::new(fp.min.x + half.x, along, z),
        1 => Vec3::new(fp.max.x - half.x, along, z),
        2 => Vec3::new(along, fp.min.y + half.x, z),
        _ => Vec3::new(along, fp.max.y - half.x, z),
    };
    let center = Vec3::new(q4(center.x), q4(center.y), center.z);

    // Keep clear of door openings on this wall.
    let span = half.y; // half-width along the wall
    for door in doors {
        if door.room_a != room.id && door.room_b != Some(room.id) {
            continue;
        }
        let d = &door.segment;
        let vertical_wall = wall < 2;
        let door_vertical = (d.a.x - d.b.x).abs() < 1e-9;
        if vertical_wall != door_vertical {
            continue;
        }
        let wall_coord = match wall {
            0 => fp.min.x,
            1 => fp.max.x,
            2 => fp.min.y,
            _ => fp.max.y,
        };
        let door_coord = if door_vertical { d.a.x } else { d.a.y };
        if (door_coord - wall_coord).abs() > 1e-6 {
            continue;
        }
        let (d_lo, d_hi) = if door_vertical {
            (d.a.y.min(d.b.y), d.a.y.max(d.b.y))
        } else {
            (d.a.x.min(d.b.x), d.a.x.max(d.b.x))
        };
        if along + span + 0.1 > d_lo && d_hi + span + 0.1 > along {
            return None;
        }
    }

    Some(Attempted {
        bbox: OrientedBox::new(center, half, q4(yaw)),
        room_id: room.id,
        placement: Placement::WallMounted,
    })
}

fn try_surface(
    objects: &[ObjectInstance],
    supporters: &[usize],
    half: Vec3,
    rng: &mut impl Rng,
) -> Option<Attempted> {
    if supporters.is_empty() {
        return None;
    }
    let sup = &objects[supporters[rng.gen_range(0..supporters.len())]];
    let rel_yaw = rng.gen_range(0.0..(2.0 * std::f64::consts::PI));
    let (s, c) = (rel_yaw.sin().abs(), rel_yaw.cos().abs());
    // Item AABB in the supporter's local frame.
    let ax = half.x * c + half.y * s;
    let ay = half.x * s + half.y * c;
    let margin = 0.02;
    let x_hi = sup.bbox.half.x - ax - margin;
    let y_hi = sup.bbox.half.y - ay - margin;
    if x_hi <= 0.0 || y_hi <= 0.0 {
        return None;
    }
    let local = Vec2::new(rng.gen_range(-x_hi..x_hi), rng.gen_range(-y_hi..y_hi));
    let world = local.rotate(sup.bbox.yaw).add(sup.bbox.center.xy());
    let center = Vec3::new(q4(world.x), q4(world.y), q4(sup.bbox.z_max() + half.z));
    Some(Attempted {
        bbox: OrientedBox::new(center, half, q4(crate::geom::wrap_angle(sup.bbox.yaw + rel_yaw))),
        room_id: sup.room_id,
        placement: Placement::OnSurface,
    })
}

// ---------------------------------------------------------------------------
// Derived structure

impl Scene {
    pub fn room(&self, id: u32) -> Option<&Room> {
        self.rooms.iter().find(|r| r.id == id)
    }

    pub fn object(&self, id: u32) -> Option<&ObjectInstance> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn bounding_rect(&self) -> Rect {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for r in &self.rooms {
            min.x = min.x.min(r.footprint.min.x);
            min.y = min.y.min(r.footprint.min.y);
            max.x = max.x.max(r.footprint.max.x);
            max.y = max.y.max(r.footprint.max.y);
        }
        Rect::new(min, max)
    }

    /// Solid wall segments: every room edge minus the door openings on it.
    /// Shared walls appear once per adjacent room (same geometry twice),
    /// which is harmless for distance and crossing queries.
    pub fn wall_segments(&self) -> Vec<Seg2> {
        let mut out = Vec::new();
        for room in &self.rooms {
            let fp = room.footprint;
            let edges = [
                Seg2::new(fp.min, Vec2::new(fp.max.x, fp.min.y)),
                Seg2::new(Vec2::new(fp.max.x, fp.min.y), fp.max),
                Seg2::new(fp.max, Vec2::new(fp.min.x, fp.max.y)),
                Seg2::new(Vec2::new(fp.min.x, fp.max.y), fp.min),
            ];
            for edge in edges {
                let mut gaps: Vec<(f64, f64)> = Vec::new();
                let edge_len = edge.length();
                let dir = edge.b.sub(edge.a).scale(1.0 / edge_len);
                for door in &self.doors {
                    if door.room_a != room.id && door.room_b != Some(room.id) {
                        continue;
                    }
                    let d = &door.segment;
                    // Door lies on this edge if both endpoints hug the edge line.
                    if edge.dist_to_point(d.a) < 1e-6 && edge.dist_to_point(d.b) < 1e-6 {
                        let t0 = d.a.sub(edge.a).dot(dir);
                        let t1 = d.b.sub(edge.a).dot(dir);
                        gaps.push((t0.min(t1), t0.max(t1)));
                    }
                }
                gaps.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let mut cursor = 0.0f64;
                for (lo, hi) in gaps {
                    if lo > cursor + 1e-9 {
                        out.push(Seg2::new(
                            edge.a.add(dir.scale(cursor)),
                            edge.a.add(dir.scale(lo)),
                        ));
                    }
                    cursor = cursor.max(hi);
                }
                if cursor < edge_len - 1e-9 {
                    out.push(Seg2::new(edge.a.add(dir.scale(cursor)), edge.b));
                }
            }
        }
        out
    }
}

/// Total floor area of the given rooms, m^2.
pub fn floor_area(scene: &Scene, room_ids: &BTreeSet<u32>) -> Result<f64, SceneError> {
    let mut total = 0.0;
    for id in room_ids {
        let room = scene.room(*id).ok_or(SceneError::UnknownRoom(*id))?;
        total += room.footprint.area();
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SceneViolation {
    RoomTooSmall { room: u32 },
    RoomDegenerate { room: u32 },
    RoomsOverlap { a: u32, b: u32 },
    RoomCenterMismatch { room: u32 },
    DoorTooNarrow { door: u32 },
    DoorNotOnSharedWall { door: u32 },
    DoorGraphDisconnected { room: u32 },
    UnknownRoomRef { object: u32 },
    BadHalfExtents { object: u32 },
    ObjectOutsideRoom { object: u32 },
    ObjectAboveCeiling { object: u32 },
    ObjectBelowFloor { object: u32 },
    BadPlacement { object: u32 },
    ObjectsInterpenetrate { a: u32, b: u32 },
    CategoryCapExceeded { category: String, count: u32 },
    DuplicateObjectId { id: u32 },
}

impl std::fmt::Display for SceneViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SceneViolation::RoomTooSmall { room } => write!(f, "room {room} smaller than {MIN_ROOM_AREA} m^2"),
            SceneViolation::RoomDegenerate { room } => write!(f, "room {room} has a degenerate footprint"),
            SceneViolation::RoomsOverlap { a, b } => write!(f, "rooms {a} and {b} overlap"),
            SceneViolation::RoomCenterMismatch { room } => write!(f, "room {room} center disagrees with footprint"),
            SceneViolation::DoorTooNarrow { door } => write!(f, "door {door} narrower than {MIN_DOOR_WIDTH} m"),
            SceneViolation::DoorNotOnSharedWall { door } => write!(f, "door {door} is not on a shared wall"),
            SceneViolation::DoorGraphDisconnected { room } => write!(f, "room {room} unreachable through doors"),
            SceneViolation::UnknownRoomRef { object } => write!(f, "object {object} references an unknown room"),
            SceneViolation::BadHalfExtents { object } => write!(f, "object {object} has non-positive half extents"),
            SceneViolation::ObjectOutsideRoom { object } => write!(f, "object {object} pokes outside its room"),
            SceneViolation::ObjectAboveCeiling { object } => write!(f, "object {object} pokes above the ceiling"),
            SceneViolation::ObjectBelowFloor { object } => write!(f, "object {object} dips below the floor"),
            SceneViolation::BadPlacement { object } => write!(f, "object {object} violates its placement rule"),
            SceneViolation::ObjectsInterpenetrate { a, b } => write!(f, "objects {a} and {b} interpenetrate"),
            SceneViolation::CategoryCapExceeded { category, count } => {
                write!(f, "category {category:?} has {count} instances (cap 6)")
            }
            SceneViolation::DuplicateObjectId { id } => write!(f, "duplicate object id {id}"),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<SceneViolation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_scene(scene: &Scene) -> ValidationReport {
    let mut v = Vec::new();
    const TOL: f64 = 1e-3;

    for room in &scene.rooms {
        let fp = room.footprint;
        if fp.width() <= 0.0 || fp.height() <= 0.0 {
            v.push(SceneViolation::RoomDegenerate { room: room.id });
            continue;
        }
        if fp.area() <= MIN_ROOM_AREA {
            v.push(SceneViolation::RoomTooSmall { room: room.id });
        }
        if fp.center().dist(room.center) > TOL {
            v.push(SceneViolation::RoomCenterMismatch { room: room.id });
        }
    }
    for i in 0..scene.rooms.len() {
        for j in (i + 1)..scene.rooms.len() {
            if scene.rooms[i].footprint.overlaps(&scene.rooms[j].footprint) {
                v.push(SceneViolation::RoomsOverlap {
                    a: scene.rooms[i].id,
                    b: scene.rooms[j].id,
                });
            }
        }
    }

    for door in &scene.doors {
        if door.width < MIN_DOOR_WIDTH - 1e-9 || door.segment.length() < MIN_DOOR_WIDTH - 1e-9 {
            v.push(SceneViolation::DoorTooNarrow { door: door.id });
        }
        let on_boundary = |room_id: u32| -> bool {
            match scene.room(room_id) {
                None => false,
                Some(room) => {
                    let fp = room.footprint;
                    let edges = [
                        Seg2::new(fp.min, Vec2::new(fp.max.x, fp.min.y)),
                        Seg2::new(Vec2::new(fp.max.x, fp.min.y), fp.max),
                        Seg2::new(fp.max, Vec2::new(fp.min.x, fp.max.y)),
                        Seg2::new(Vec2::new(fp.min.x, fp.max.y), fp.min),
                    ];
                    edges.iter().any(|e| {
                        e.dist_to_point(door.segment.a) < TOL && e.dist_to_point(door.segment.b) < TOL
                    })
                }
            }
        };
        let mut ok = on_boundary(door.room_a);
        if let Some(b) = door.room_b {
            ok = ok && on_boundary(b);
        }
        if !ok {
            v.push(SceneViolation::DoorNotOnSharedWall { door: door.id });
        }
    }

    // Door-graph connectivity from the first room.
    if let Some(first) = scene.rooms.first() {
        let mut reached: BTreeSet<u32> = BTreeSet::new();
        reached.insert(first.id);
        let mut frontier = vec![first.id];
        while let Some(r) = frontier.pop() {
            for door in &scene.doors {
                let Some(b) = door.room_b else { continue };
                for (x, y) in [(door.room_a, b), (b, door.room_a)] {
                    if x == r && reached.insert(y) {
                        frontier.push(y);
                    }
                }
            }
        }
        for room in &scene.rooms {
            if !reached.contains(&room.id) {
                v.push(SceneViolation::DoorGraphDisconnected { room: room.id });
            }
        }
    }

    let mut ids = BTreeSet::new();
    let mut geoms = Vec::with_capacity(scene.objects.len());
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    for obj in &scene.objects {
        if !ids.insert(obj.id) {
            v.push(SceneViolation::DuplicateObjectId { id: obj.id });
        }
        *counts.entry(obj.category.as_str()).or_insert(0) += 1;
        if obj.bbox.half.x <= 0.0 || obj.bbox.half.y <= 0.0 || obj.bbox.half.z <= 0.0 {
            v.push(SceneViolation::BadHalfExtents { object: obj.id });
            geoms.push(None);
            continue;
        }
        let geom = placed_geom(&obj.bbox);
        match scene.room(obj.room_id) {
            None => v.push(SceneViolation::UnknownRoomRef { object: obj.id }),
            Some(room) => {
                if !geom
                    .corners
                    .iter()
                    .all(|c| room.footprint.contains_with_margin(*c, TOL))
                {
                    v.push(SceneViolation::ObjectOutsideRoom { object: obj.id });
                }
            }
        }
        if geom.z_max > scene.ceiling_height + TOL {
            v.push(SceneViolation::ObjectAboveCeiling { object: obj.id });
        }
        if geom.z_min < -TOL {
            v.push(SceneViolation::ObjectBelowFloor { object: obj.id });
        }
        let placement_ok = match obj.placement {
            Placement::Floor => geom.z_min.abs() <= TOL,
            Placement::WallMounted => geom.z_min > 0.05,
            Placement::OnSurface => scene.objects.iter().any(|sup| {
                sup.id != obj.id
                    && sup.placement == Placement::Floor
                    && (sup.bbox.z_max() - geom.z_min).abs() < 0.02
                    && point_in_quad(&sup.bbox.footprint(), obj.bbox.center.xy())
            }),
        };
        if !placement_ok {
            v.push(SceneViolation::BadPlacement { object: obj.id });
        }
        geoms.push(Some(geom));
    }

    for (cat, count) in &counts {
        if *count > 6 {
            v.push(SceneViolation::CategoryCapExceeded {
                category: (*cat).to_string(),
                count: *count,
            });
        }
    }

    for i in 0..scene.objects.len() {
        for j in (i + 1)..scene.objects.len() {
            let (Some(a), Some(b)) = (&geoms[i], &geoms[j]) else {
                continue;
            };
            // The supported-by exemption, either direction.
            let oi = &scene.objects[i];
            let oj = &scene.objects[j];
            let supported = |top: &ObjectInstance, under: &ObjectInstance| -> bool {
                top.placement == Placement::OnSurface
                    && under.placement == Placement::Floor
                    && (under.bbox.z_max() - top.bbox.z_min()).abs() < 0.02
                    && point_in_quad(&under.bbox.footprint(), top.bbox.center.xy())
            };
            if supported(oi, oj) || supported(oj, oi) {
                continue;
            }
            if boxes_interpenetrate(a, b) {
                v.push(SceneViolation::ObjectsInterpenetrate { a: oi.id, b: oj.id });
            }
        }
    }

    ValidationReport { violations: v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::to_canonical_json;

    fn small_params(seed: u64) -> SceneParams {
        SceneParams { seed, ..SceneParams::default() }
    }

    #[test]
    fn generation_is_byte_deterministic() {
        let catalog = ObjectCatalog::builtin();
        let a = generate_scene(&small_params(7), catalog).unwrap();
        let b = generate_scene(&small_params(7), catalog).unwrap();
        assert_eq!(to_canonical_json(&a), to_canonical_json(&b));
        let c = generate_scene(&small_params(8), catalog).unwrap();
        assert_ne!(to_canonical_json(&a), to_canonical_json(&c));
    }

    #[test]
    fn generated_scenes_respect_params_and_invariants() {
        let catalog = ObjectCatalog::builtin();
        for seed in 0..25 {
            let params = small_params(seed);
            let scene = generate_scene(&params, catalog).unwrap();
            assert!(
                (3..=8).contains(&(scene.rooms.len() as u32)),
                "seed {seed}: {} rooms",
                scene.rooms.len()
            );
            assert!(
                (30..=50).contains(&(scene.objects.len() as u32)),
                "seed {seed}: {} objects",
                scene.objects.len()
            );
            let report = validate_scene(&scene);
            assert!(
                report.ok(),
                "seed {seed} violations: {:?}",
                report.violations.iter().map(|x| x.to_string()).collect::<Vec<_>>()
            );
            for room in &scene.rooms {
                assert!(room.footprint.width() >= 2.5 - 1e-9);
                assert!(room.footprint.width() <= 6.0 + 1e-9);
                assert!(room.footprint.height() >= 2.5 - 1e-9);
                assert!(room.footprint.height() <= 6.0 + 1e-9);
            }
        }
    }

    #[test]
    fn degenerate_single_room_params() {
        let params = SceneParams {
            seed: 3,
            room_count: MinMax::new(1, 1),
            object_count: MinMax::new(1, 1),
            room_edge: MinMax::new(4.0, 4.0),
            ..SceneParams::default()
        };
        let scene = generate_scene(&params, ObjectCatalog::builtin()).unwrap();
        assert_eq!(scene.rooms.len(), 1);
        assert_eq!(scene.objects.len(), 1);
        assert_eq!(scene.doors.len(), 0);
        assert!((scene.rooms[0].footprint.area() - 16.0).abs() < 1e-9);
        assert!(validate_scene(&scene).ok());
    }

    #[test]
    fn impossible_params_exhaust_the_retry_budget() {
        // A lone 1.5 m x 1.5 m room cannot hold 40 objects.
        let params = SceneParams {
            seed: 1,
            room_count: MinMax::new(1, 1),
            object_count: MinMax::new(40, 40),
            room_edge: MinMax::new(1.5, 1.5),
            ..SceneParams::default()
        };
        match generate_scene(&params, ObjectCatalog::builtin()) {
            Err(SceneError::GenerationExhausted { attempts, .. }) => {
                assert_eq!(attempts, PLACEMENT_RETRY_BUDGET)
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = SceneParams::default();
        p.room_edge.min = 1.0; // below the 1.5 m floor
        assert!(matches!(
            generate_scene(&p, ObjectCatalog::builtin()),
            Err(SceneError::BadParams(_))
        ));
    }

    #[test]
    fn floor_area_matches_rect_math_and_flags_unknown_rooms() {
        let scene = generate_scene(&small_params(11), ObjectCatalog::builtin()).unwrap();
        let one: BTreeSet<u32> = [scene.rooms[0].id].into();
        let expect = scene.rooms[0].footprint.area();
        assert!((floor_area(&scene, &one).unwrap() - expect).abs() < 1e-9);

        let all: BTreeSet<u32> = scene.rooms.iter().map(|r| r.id).collect();
        let sum: f64 = scene.rooms.iter().map(|r| r.footprint.area()).sum();
        assert!((floor_area(&scene, &all).unwrap() - sum).abs() < 1e-9);

        assert!(matches!(
            floor_area(&scene, &[999u32].into()),
            Err(SceneError::UnknownRoom(999))
        ));
    }

    #[test]
    fn floor_area_agrees_with_one_centimeter_rasterization() {
        // Independent check: count 1 cm cells whose centers fall inside the
        // room rectangles. Agreement must be within 0.5%.
        let scene = generate_scene(&small_params(19), ObjectCatalog::builtin()).unwrap();
        let ids: BTreeSet<u32> = scene.rooms.iter().map(|r| r.id).collect();
        let analytic = floor_area(&scene, &ids).unwrap();

        let bounds = scene.bounding_rect();
        let pitch = 0.01;
        let nx = ((bounds.max.x - bounds.min.x) / pitch).round() as usize;
        let ny = ((bounds.max.y - bounds.min.y) / pitch).round() as usize;
        let mut cells = 0u64;
        for iy in 0..ny {
            let y = bounds.min.y + (iy as f64 + 0.5) * pitch;
            for ix in 0..nx {
                let x = bounds.min.x + (ix as f64 + 0.5) * pitch;
                if scene.rooms.iter().any(|r| r.footprint.contains(Vec2::new(x, y))) {
                    cells += 1;
                }
            }
        }
        let rastered = cells as f64 * pitch * pitch;
        let rel = (rastered - analytic).abs() / analytic;
        assert!(rel < 0.005, "analytic {analytic} vs rastered {rastered} ({rel})");
    }

    #[test]
    fn doors_connect_all_rooms_and_sit_on_shared_walls() {
        let catalog = ObjectCatalog::builtin();
        for seed in 30..40 {
            let scene = generate_scene(&small_params(seed), catalog).unwrap();
            assert!(scene.doors.len() >= scene.rooms.len() - 1);
            for door in &scene.doors {
                assert!(door.width >= MIN_DOOR_WIDTH);
                assert!((door.segment.length() - door.width).abs() < 1e-6);
            }
            let report = validate_scene(&scene);
            assert!(
                !report
                    .violations
                    .iter()
                    .any(|v| matches!(v, SceneViolation::DoorGraphDisconnected { .. })),
                "seed {seed} disconnected"
            );
        }
    }

    #[test]
    fn validator_catches_constructed_violations() {
        let catalog = ObjectCatalog::builtin();
        let mut scene = generate_scene(&small_params(5), catalog).unwrap();

        // Shove the first object outside its room.
        let room = scene.rooms[scene
            .rooms
            .iter()
            .position(|r| r.id == scene.objects[0].room_id)
            .unwrap()]
        .footprint;
        scene.objects[0].bbox.center.x = room.max.x + 5.0;
        let report = validate_scene(&scene);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, SceneViolation::ObjectOutsideRoom { object: 0 })));

        // Two coincident boxes interpenetrate.
        let mut scene = generate_scene(&small_params(5), catalog).unwrap();
        let clone_src = scene.objects[0].clone();
        scene.objects[1] = ObjectInstance { id: 1, ..clone_src };
        let report = validate_scene(&scene);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, SceneViolation::ObjectsInterpenetrate { .. })));

        // A skinny door.
        let mut scene = generate_scene(&small_params(5), catalog).unwrap();
        if let Some(door) = scene.doors.first_mut() {
            let mid = door.segment.eval(0.5);
            let txt = door.segment.b.sub(door.segment.a).scale(0.2 / door.segment.length());
            door.segment = Seg2::new(mid.sub(txt.scale(0.5)), mid.add(txt.scale(0.5)));
            door.width = 0.2;
            let report = validate_scene(&scene);
            assert!(report
                .violations
                .iter()
                .any(|v| matches!(v, SceneViolation::DoorTooNarrow { .. })));
        }
    }

    #[test]
    fn category_cap_is_respected() {
        let catalog = ObjectCatalog::builtin();
        for seed in 50..60 {
            let scene = generate_scene(&small_params(seed), catalog).unwrap();
            let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
            for o in &scene.objects {
                *counts.entry(o.category.as_str()).or_insert(0) += 1;
            }
            assert!(counts.values().all(|&c| c <= 6), "seed {seed}: {counts:?}");
        }
    }

    #[test]
    fn wall_segments_leave_door_gaps() {
        let scene = generate_scene(&small_params(2), ObjectCatalog::builtin()).unwrap();
        let walls = scene.wall_segments();
        assert!(!walls.is_empty());
        for door in &scene.doors {
            let mid = door.segment.eval(0.5);
            for wall in &walls {
                assert!(
                    wall.dist_to_point(mid) > 0.05,
                    "wall segment covers door {}",
                    door.id
                );
            }
        }
    }
}
