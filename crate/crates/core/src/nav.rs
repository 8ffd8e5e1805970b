//! Navigation grids and agent tour trajectories.
//!
//! A [`NavGrid`] rasterizes the scene at a fixed pitch; a cell is free iff a
//! disc of `agent_radius` at its center intersects no wall (door openings
//! excluded) and no floor-placed object footprint. Tours visit every room by
//! repeatedly walking to the nearest unvisited room center through a
//! breadth-first shortest path.
//!
//! Tie-breaks are pinned so that independent reimplementations reproduce the
//! same routes: the tour picks the lowest room id among equidistant rooms,
//! and the breadth-first search expands neighbor cells in ascending
//! lexicographic `(ix, iy)` order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::q4;
use crate::catalog::Placement;
use crate::geom::{wrap_angle, Seg2, Vec2};
use crate::scene::Scene;

pub const MIN_FRAMES: usize = 60;
pub const MAX_FRAMES: usize = 1800;
pub const MAX_WALK_SPEED: f64 = 2.0;
/// Heading changes above this trigger a turn-in-place segment.
const TURN_IN_PLACE_DEG: f64 = 45.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NavConfig {
    /// Grid pitch, meters.
    pub cell: f64,
    /// Agent disc radius, meters.
    pub agent_radius: f64,
}

impl Default for NavConfig {
    fn default() -> Self {
        NavConfig { cell: 0.25, agent_radius: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpeedConfig {
    /// Meters per second along walk segments.
    pub walk_speed: f64,
    /// Degrees per second for turns and room-center rotations.
    pub turn_speed_deg: f64,
}

impl Default for SpeedConfig {
    fn default() -> Self {
        SpeedConfig { walk_speed: 1.0, turn_speed_deg: 90.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraConfig {
    pub width: u32,
    pub height: u32,
    pub hfov_deg: f64,
    pub eye_height: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig { width: 680, height: 384, hfov_deg: 90.0, eye_height: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentPose {
    pub frame: u32,
    pub time: f64,
    pub x: f64,
    pub y: f64,
    /// Facing angle, radians, 0 along +x, counterclockwise positive.
    pub yaw: f64,
}

impl AgentPose {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub scene_id: String,
    pub fps: f64,
    pub camera: CameraConfig,
    /// Room ids in visit order; the first entry is the start room.
    pub visit_order: Vec<u32>,
    pub poses: Vec<AgentPose>,
}

#[derive(Debug, Error)]
pub enum NavError {
    #[error("UNREACHABLE_ROOM: room {room} has no free path from the start room")]
    UnreachableRoom { room: u32 },
    #[error(
        "TRAJECTORY_TOO_LONG: tour needs {required:.2} m/s walk speed to fit \
         {MAX_FRAMES} frames (cap {MAX_WALK_SPEED} m/s)"
    )]
    TrajectoryTooLong { required: f64 },
    #[error("invalid nav config: {0}")]
    BadConfig(String),
    #[error("scene has no rooms")]
    EmptyScene,
}

pub struct NavGrid {
    pub cell: f64,
    pub agent_radius: f64,
    pub origin: Vec2,
    pub nx: usize,
    pub ny: usize,
    free: Vec<bool>,
    /// Free cell closest to each room center, keyed by room id.
    room_cells: Vec<(u32, (usize, usize))>,
}

impl NavGrid {
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn is_free(&self, ix: usize, iy: usize) -> bool {
        ix < self.nx && iy < self.ny && self.free[self.index(ix, iy)]
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + (ix as f64 + 0.5) * self.cell,
            self.origin.y + (iy as f64 + 0.5) * self.cell,
        )
    }

    pub fn cell_of(&self, p: Vec2) -> (usize, usize) {
        let ix = ((p.x - self.origin.x) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64);
        let iy = ((p.y - self.origin.y) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64);
        (ix as usize, iy as usize)
    }

    pub fn free_count(&self) -> usize {
        self.free.iter().filter(|f| **f).count()
    }

    pub fn room_cell(&self, room: u32) -> Option<(usize, usize)> {
        self.room_cells.iter().find(|(r, _)| *r == room).map(|(_, c)| *c)
    }

    /// Distances and parent pointers of a breadth-first search over free
    /// cells. Neighbors expand in ascending lexicographic `(ix, iy)` order,
    /// which pins shortest-path tie-breaks.
    pub fn bfs(&self, start: (usize, usize)) -> (Vec<u32>, Vec<u32>) {
        let n = self.nx * self.ny;
        let mut dist = vec![u32::MAX; n];
        let mut parent = vec![u32::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        let s = self.index(start.0, start.1);
        dist[s] = 0;
        queue.push_back(start);
        while let Some((ix, iy)) = queue.pop_front() {
            let d = dist[self.index(ix, iy)];
            let mut push = |jx: usize, jy: usize, queue: &mut std::collections::VecDeque<_>| {
                if self.is_free(jx, jy) {
                    let j = self.index(jx, jy);
                    if dist[j] == u32::MAX {
                        dist[j] = d + 1;
                        parent[j] = self.index(ix, iy) as u32;
                        queue.push_back((jx, jy));
                    }
                }
            };
            if ix > 0 {
                push(ix - 1, iy, &mut queue);
            }
            if iy > 0 {
                push(ix, iy - 1, &mut queue);
            }
            if iy + 1 < self.ny {
                push(ix, iy + 1, &mut queue);
            }
            if ix + 1 < self.nx {
                push(ix + 1, iy, &mut queue);
            }
        }
        (dist, parent)
    }
}

fn dist_point_to_footprint(p: Vec2, center: Vec2, half: Vec2, yaw: f64) -> f64 {
    let local = p.sub(center).rotate(-yaw);
    let dx = (local.x.abs() - half.x).max(0.0);
    let dy = (local.y.abs() - half.y).max(0.0);
    (dx * dx + dy * dy).sqrt()
}

pub fn build_navgrid(scene: &Scene, cfg: &NavConfig) -> Result<NavGrid, NavError> {
    if scene.rooms.is_empty() {
        return Err(NavError::EmptyScene);
    }
    if !(cfg.cell > 0.0) || !(cfg.agent_radius > 0.0) {
        return Err(NavError::BadConfig("cell and agent_radius must be positive".into()));
    }
    let bounds = scene.bounding_rect();
    let nx = ((bounds.max.x - bounds.min.x) / cfg.cell).ceil().max(1.0) as usize;
    let ny = ((bounds.max.y - bounds.min.y) / cfg.cell).ceil().max(1.0) as usize;

    let walls: Vec<Seg2> = scene.wall_segments();
    let floor_objects: Vec<(Vec2, Vec2, f64)> = scene
        .objects
        .iter()
        .filter(|o| o.placement == Placement::Floor)
        .map(|o| (o.bbox.center.xy(), Vec2::new(o.bbox.half.x, o.bbox.half.y), o.bbox.yaw))
        .collect();

    let mut free = vec![false; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let c = Vec2::new(
                bounds.min.x + (ix as f64 + 0.5) * cfg.cell,
                bounds.min.y + (iy as f64 + 0.5) * cfg.cell,
            );
            let hits_wall = walls.iter().any(|w| w.dist_to_point(c) < cfg.agent_radius);
            let hits_object = !hits_wall
                && floor_objects
                    .iter()
                    .any(|(ctr, half, yaw)| {
                        dist_point_to_footprint(c, *ctr, *half, *yaw) < cfg.agent_radius
                    });
            free[iy * nx + ix] = !hits_wall && !hits_object;
        }
    }

    let mut grid = NavGrid {
        cell: cfg.cell,
        agent_radius: cfg.agent_radius,
        origin: bounds.min,
        nx,
        ny,
        free,
        room_cells: Vec::new(),
    };

    // Anchor cell per room: nearest free cell to the room center, scanning
    // outward ring by ring in lexicographic order.
    for room in &scene.rooms {
        let anchor = nearest_free_in_room(&grid, room.center, &room.footprint)
            .ok_or(NavError::UnreachableRoom { room: room.id })?;
        grid.room_cells.push((room.id, anchor));
    }

    // Every room anchor must reach the first room's anchor.
    let start = grid.room_cells[0].1;
    let (dist, _) = grid.bfs(start);
    for (room, cell) in &grid.room_cells {
        if dist[grid.index(cell.0, cell.1)] == u32::MAX {
            return Err(NavError::UnreachableRoom { room: *room });
        }
    }

    Ok(grid)
}

fn nearest_free_in_room(
    grid: &NavGrid,
    center: Vec2,
    footprint: &crate::geom::Rect,
) -> Option<(usize, usize)> {
    let (cx, cy) = grid.cell_of(center);
    let max_r = grid.nx.max(grid.ny);
    for r in 0..max_r {
        let mut candidates = Vec::new();
        let x_lo = cx.saturating_sub(r);
        let x_hi = (cx + r).min(grid.nx - 1);
        let y_lo = cy.saturating_sub(r);
        let y_hi = (cy + r).min(grid.ny - 1);
        for ix in x_lo..=x_hi {
            for iy in y_lo..=y_hi {
                let on_ring = ix.abs_diff(cx).max(iy.abs_diff(cy)) == r;
                if on_ring && grid.is_free(ix, iy) {
                    let c = grid.cell_center(ix, iy);
                    if footprint.contains_with_margin(c, -1e-9) {
                        candidates.push((ix, iy));
                    }
                }
            }
        }
        candidates.sort();
        if let Some(first) = candidates.first() {
            return Some(*first);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub to_room: u32,
    /// Grid cells walked, start cell included.
    pub cells: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourPlan {
    pub visit_order: Vec<u32>,
    pub legs: Vec<Leg>,
}

/// Greedy tour over all rooms: start at the lowest room id, repeatedly walk
/// to the unvisited room whose anchor cell is nearest by breadth-first
/// distance (ties to the lower room id).
pub fn plan_tour(scene: &Scene, grid: &NavGrid) -> Result<TourPlan, NavError> {
    if scene.rooms.is_empty() {
        return Err(NavError::EmptyScene);
    }
    let start_room = scene.rooms.iter().map(|r| r.id).min().unwrap();
    let mut current = grid
        .room_cell(start_room)
        .ok_or(NavError::UnreachableRoom { room: start_room })?;
    let mut unvisited: Vec<u32> =
        scene.rooms.iter().map(|r| r.id).filter(|id| *id != start_room).collect();
    unvisited.sort();

    let mut plan = TourPlan { visit_order: vec![start_room], legs: Vec::new() };
    while !unvisited.is_empty() {
        let (dist, parent) = grid.bfs(current);
        let mut best: Option<(u32, u32)> = None; // (distance, room)
        for &room in &unvisited {
            let cell = grid.room_cell(room).ok_or(NavError::UnreachableRoom { room })?;
            let d = dist[grid.index(cell.0, cell.1)];
            if d == u32::MAX {
                return Err(NavError::UnreachableRoom { room });
            }
            if best.map_or(true, |(bd, br)| d < bd || (d == bd && room < br)) {
                best = Some((d, room));
            }
        }
        let (_, room) = best.unwrap();
        let target = grid.room_cell(room).unwrap();

        // Backtrack the parent chain into a start-to-target cell path.
        let mut cells = vec![target];
        let mut at = grid.index(target.0, target.1);
        let start_idx = grid.index(current.0, current.1);
        while at != start_idx {
            let p = parent[at] as usize;
            cells.push((p % grid.nx, p / grid.nx));
            at = p;
        }
        cells.reverse();

        plan.visit_order.push(room);
        plan.legs.push(Leg { to_room: room, cells });
        unvisited.retain(|r| *r != room);
        current = target;
    }
    Ok(plan)
}

// ---------------------------------------------------------------------------
// Pose synthesis

#[derive(Debug, Clone)]
enum Segment {
    Walk { from: Vec2, to: Vec2, yaw: f64, dur: f64 },
    Turn { pos: Vec2, yaw0: f64, dyaw: f64, dur: f64 },
    Rotate { pos: Vec2, yaw0: f64, sweep: f64, dur: f64 },
}

impl Segment {
    fn dur(&self) -> f64 {
        match self {
            Segment::Walk { dur, .. } | Segment::Turn { dur, .. } | Segment::Rotate { dur, .. } => {
                *dur
            }
        }
    }

    fn pose_at(&self, t: f64) -> (Vec2, f64) {
        match self {
            Segment::Walk { from, to, yaw, dur } => {
                let s = if *dur > 0.0 { (t / dur).clamp(0.0, 1.0) } else { 1.0 };
                (from.lerp(*to, s), *yaw)
            }
            Segment::Turn { pos, yaw0, dyaw, dur } => {
                let s = if *dur > 0.0 { (t / dur).clamp(0.0, 1.0) } else { 1.0 };
                (*pos, yaw0 + dyaw * s)
            }
            Segment::Rotate { pos, yaw0, sweep, dur } => {
                let s = if *dur > 0.0 { (t / dur).clamp(0.0, 1.0) } else { 1.0 };
                (*pos, yaw0 + sweep * s)
            }
        }
    }

}

/// Straight runs of a cell path: consecutive same-direction steps merge into
/// one walk between their endpoint cell centers.
fn straight_runs(grid: &NavGrid, cells: &[(usize, usize)]) -> Vec<(Vec2, Vec2)> {
    let mut runs = Vec::new();
    if cells.len() < 2 {
        return runs;
    }
    let dir = |a: (usize, usize), b: (usize, usize)| {
        (b.0 as i64 - a.0 as i64, b.1 as i64 - a.1 as i64)
    };
    let mut run_start = cells[0];
    let mut current_dir = dir(cells[0], cells[1]);
    for w in cells.windows(2).skip(1) {
        let d = dir(w[0], w[1]);
        if d != current_dir {
            runs.push((
                grid.cell_center(run_start.0, run_start.1),
                grid.cell_center(w[0].0, w[0].1),
            ));
            run_start = w[0];
            current_dir = d;
        }
    }
    let last = *cells.last().unwrap();
    runs.push((grid.cell_center(run_start.0, run_start.1), grid.cell_center(last.0, last.1)));
    runs
}

pub fn synthesize_poses(
    scene: &Scene,
    grid: &NavGrid,
    plan: &TourPlan,
    speed: &SpeedConfig,
    camera: &CameraConfig,
    fps: f64,
) -> Result<Trajectory, NavError> {
    if !(fps > 0.0) {
        return Err(NavError::BadConfig("fps must be positive".into()));
    }
    if !(speed.walk_speed > 0.0) || speed.walk_speed > MAX_WALK_SPEED {
        return Err(NavError::BadConfig(format!(
            "walk_speed must be in (0, {MAX_WALK_SPEED}]"
        )));
    }
    if !(speed.turn_speed_deg > 0.0) {
        return Err(NavError::BadConfig("turn_speed_deg must be positive".into()));
    }
    let omega = speed.turn_speed_deg.to_radians();
    // Sweep a hair past a full turn so the sampled frames cover 360 degrees
    // even when frame ticks straddle the segment boundary.
    let sweep = 2.0 * std::f64::consts::PI + 2.0 * omega / fps;
    let rotate_dur = sweep / omega;

    let build = |walk_speed: f64| -> Vec<Segment> {
        let mut segs: Vec<Segment> = Vec::new();
        let start_cell = grid
            .room_cell(plan.visit_order[0])
            .expect("plan refers to rooms known to the grid");
        let start_pos = grid.cell_center(start_cell.0, start_cell.1);
        let mut yaw = 0.0f64;
        segs.push(Segment::Rotate { pos: start_pos, yaw0: yaw, sweep, dur: rotate_dur });
        yaw = wrap_angle(yaw + sweep);
        let mut pos = start_pos;
        for leg in &plan.legs {
            for (from, to) in straight_runs(grid, &leg.cells) {
                let heading = to.sub(from);
                let len = heading.norm();
                if len < 1e-12 {
                    continue;
                }
                let heading = heading.y.atan2(heading.x);
                let dyaw = crate::geom::angle_diff(heading, yaw);
                if dyaw.abs() > TURN_IN_PLACE_DEG.to_radians() {
                    segs.push(Segment::Turn {
                        pos: from,
                        yaw0: yaw,
                        dyaw,
                        dur: dyaw.abs() / omega,
                    });
                }
                yaw = heading;
                segs.push(Segment::Walk { from, to, yaw, dur: len / walk_speed });
                pos = to;
            }
            segs.push(Segment::Rotate { pos, yaw0: yaw, sweep, dur: rotate_dur });
            yaw = wrap_angle(yaw + sweep);
        }
        segs
    };

    let mut segs = build(speed.walk_speed);
    let total = |segs: &[Segment]| segs.iter().map(Segment::dur).sum::<f64>();
    let frame_count =
        |t: f64| -> usize { ((t * fps + 1e-9).floor() as usize + 1).max(1) };

    let mut n = frame_count(total(&segs));
    if n > MAX_FRAMES {
        let walk_time: f64 = segs
            .iter()
            .filter_map(|s| match s {
                Segment::Walk { dur, .. } => Some(*dur),
                _ => None,
            })
            .sum();
        let other_time = total(&segs) - walk_time;
        let distance = walk_time * speed.walk_speed;
        let budget = (MAX_FRAMES - 1) as f64 / fps - other_time - 1e-6;
        if budget <= 0.0 {
            return Err(NavError::TrajectoryTooLong {
                required: f64::INFINITY,
            });
        }
        let required = distance / budget;
        if required > MAX_WALK_SPEED {
            return Err(NavError::TrajectoryTooLong { required });
        }
        segs = build(required.max(speed.walk_speed));
        n = frame_count(total(&segs));
    }
    if n < MIN_FRAMES {
        // Extend the final rotation so the clip reaches the minimum length.
        let missing = (MIN_FRAMES - 1) as f64 / fps - total(&segs) + 1e-9;
        if let Some(Segment::Rotate { sweep, dur, .. }) = segs.last_mut() {
            *sweep += missing * omega;
            *dur += missing;
        }
        n = frame_count(total(&segs));
    }
    debug_assert!((MIN_FRAMES..=MAX_FRAMES).contains(&n));

    let starts: Vec<f64> = segs
        .iter()
        .scan(0.0, |acc, s| {
            let start = *acc;
            *acc += s.dur();
            Some(start)
        })
        .collect();
    let grand_total = total(&segs);

    let mut poses = Vec::with_capacity(n);
    let mut k = 0usize;
    for i in 0..n {
        let t = (i as f64 / fps).min(grand_total);
        while k + 1 < segs.len() && t >= starts[k] + segs[k].dur() - 1e-12 {
            k += 1;
        }
        let (p, yaw) = segs[k].pose_at(t - starts[k]);
        poses.push(AgentPose {
            frame: i as u32,
            time: q4(i as f64 / fps),
            x: q4(p.x),
            y: q4(p.y),
            yaw: q4(wrap_angle(yaw)),
        });
    }

    Ok(Trajectory {
        scene_id: scene.id.clone(),
        fps,
        camera: *camera,
        visit_order: plan.visit_order.clone(),
        poses,
    })
}

/// Convenience wrapper: grid, tour, and poses with the given configs.
pub fn trajectory_for_scene(
    scene: &Scene,
    nav: &NavConfig,
    speed: &SpeedConfig,
    camera: &CameraConfig,
    fps: f64,
) -> Result<(NavGrid, Trajectory), NavError> {
    let grid = build_navgrid(scene, nav)?;
    let plan = plan_tour(scene, &grid)?;
    let traj = synthesize_poses(scene, &grid, &plan, speed, camera, fps)?;
    Ok((grid, traj))
}
