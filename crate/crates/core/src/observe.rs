//! Per-frame visibility annotations along a trajectory.
//!
//! Screen coverage is approximated by sampling each object's surface with a
//! fixed stratified pattern (seeded by the scene, so annotations never depend
//! on evaluation order). Each in-range, camera-facing sample contributes
//! `area * cos(theta) / distance^2`; dividing the sum by the frame's own
//! solid-angle span gives a screen-area proxy for the whole box. The
//! `extent_fraction` scales that proxy by the fraction of samples inside the
//! view frustum; the `area_fraction` further scales it by the fraction of
//! samples whose sight line clears walls (door openings excluded) and every
//! other object box.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canon::q4;
use crate::geom::{Seg2, Vec2, Vec3};
use crate::nav::{CameraConfig, Trajectory};
use crate::scene::Scene;
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VisibilityConfig {
    /// Surface sample points per object.
    pub surface_samples: usize,
    /// Minimum `area_fraction` for an object to count as salient.
    pub salience_area_fraction: f64,
    /// Samples farther than this from the eye contribute nothing, meters.
    pub max_view_distance: f64,
}

impl Default for VisibilityConfig {
    fn default() -> Self {
        VisibilityConfig {
            surface_samples: 64,
            salience_area_fraction: 0.003,
            max_view_distance: 12.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub object_id: u32,
    /// Occlusion-aware screen-area fraction.
    pub area_fraction: f64,
    /// Screen-area fraction ignoring occlusion.
    #[serde(default)]
    pub extent_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameAnnotation {
    pub frame: u32,
    /// Observations with any in-frustum extent, ascending object id.
    pub visible: Vec<Observation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseAnnotations {
    pub scene_id: String,
    pub fps: f64,
    pub config: VisibilityConfig,
    pub frames: Vec<FrameAnnotation>,
    /// Earliest frame where each category is salient.
    pub first_appearance: BTreeMap<String, u32>,
}

impl DenseAnnotations {
    /// Object ids salient in the given frame.
    pub fn salient_in_frame(&self, frame: usize) -> Vec<u32> {
        let threshold = self.config.salience_area_fraction - 1e-12;
        self.frames
            .get(frame)
            .map(|f| {
                f.visible
                    .iter()
                    .filter(|o| o.area_fraction >= threshold)
                    .map(|o| o.object_id)
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Frames (ascending) where the object is salient.
    pub fn salient_frames_of(&self, object_id: u32) -> Vec<u32> {
        let threshold = self.config.salience_area_fraction - 1e-12;
        self.frames
            .iter()
            .filter(|f| {
                f.visible
                    .iter()
                    .any(|o| o.object_id == object_id && o.area_fraction >= threshold)
            })
            .map(|f| f.frame)
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Camera model

#[derive(Debug, Clone, Copy)]
pub struct CameraFrame {
    pub eye: Vec3,
    forward: Vec2,
    tan_half_h: f64,
    tan_half_v: f64,
    /// Solid-angle proxy of the full frame.
    omega: f64,
}

impl CameraFrame {
    pub fn new(x: f64, y: f64, yaw: f64, camera: &CameraConfig) -> Self {
        let tan_half_h = (camera.hfov_deg.to_radians() / 2.0).tan();
        let tan_half_v = tan_half_h * camera.height as f64 / camera.width as f64;
        CameraFrame {
            eye: Vec3::new(x, y, camera.eye_height),
            forward: Vec2::new(yaw.cos(), yaw.sin()),
            tan_half_h,
            tan_half_v,
            omega: 4.0 * tan_half_h * tan_half_v,
        }
    }

    /// Camera-space coordinates: x right, y up, z depth along the view axis.
    fn to_camera(&self, p: Vec3) -> Vec3 {
        let d = p.sub(self.eye);
        let depth = d.x * self.forward.x + d.y * self.forward.y;
        let right = d.x * self.forward.y - d.y * self.forward.x;
        Vec3::new(right, d.z, depth)
    }

    fn in_frustum(&self, p: Vec3) -> bool {
        let c = self.to_camera(p);
        c.z > 1e-9 && c.x.abs() <= self.tan_half_h * c.z && c.y.abs() <= self.tan_half_v * c.z
    }
}

// ---------------------------------------------------------------------------
// Surface samples

#[derive(Debug, Clone, Copy)]
struct SurfaceSample {
    pos: Vec3,
    normal: Vec3,
    area: f64,
}

#[derive(Debug, Clone)]
struct ObjectSamples {
    object_id: u32,
    center: Vec3,
    radius: f64,
    samples: Vec<SurfaceSample>,
}

/// Allocate `total` samples across the six faces, larger faces first in the
/// fixed order +x, -x, +y, -y, +z, -z.
fn face_allocation(total: usize) -> [usize; 6] {
    let base = total / 6;
    let extra = total % 6;
    let mut out = [base; 6];
    for item in out.iter_mut().take(extra) {
        *item += 1;
    }
    out
}

fn sample_object(scene: &Scene, object_idx: usize, surface_samples: usize) -> ObjectSamples {
    let obj = &scene.objects[object_idx];
    let b = &obj.bbox;
    let mut rng = seeds::rng(scene.seed, "observe-samples", obj.id as u64);
    let alloc = face_allocation(surface_samples);
    let h = b.half;
    // (normal, u axis, v axis, u half, v half) in box-local coordinates.
    let faces: [(Vec3, Vec3, Vec3, f64, f64); 6] = [
        (Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0), h.y, h.z),
        (Vec3::new(-1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0), h.y, h.z),
        (Vec3::new(0.0, 1.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0), h.x, h.z),
        (Vec3::new(0.0, -1.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0), h.x, h.z),
        (Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), h.x, h.y),
        (Vec3::new(0.0, 0.0, -1.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), h.x, h.y),
    ];
    let mut samples = Vec::with_capacity(surface_samples);
    for (face, (normal, u_axis, v_axis, hu, hv)) in faces.iter().enumerate() {
        let count = alloc[face];
        if count == 0 {
            continue;
        }
        let face_area = 4.0 * hu * hv;
        let per_sample = face_area / count as f64;
        let rows = (count as f64).sqrt().floor().max(1.0) as usize;
        let cols = count.div_ceil(rows);
        for k in 0..count {
            let row = k / cols;
            let col = k % cols;
            let u = ((col as f64 + rng.gen::<f64>()) / cols as f64) * 2.0 - 1.0;
            let v = ((row as f64 + rng.gen::<f64>()) / rows as f64) * 2.0 - 1.0;
            let face_center = Vec3::new(normal.x * h.x, normal.y * h.y, normal.z * h.z);
            let local = face_center.add(u_axis.scale(u * hu)).add(v_axis.scale(v * hv));
            let pos = b.from_local(local);
            let n = rotate_z(*normal, b.yaw);
            samples.push(SurfaceSample { pos, normal: n, area: per_sample });
        }
    }
    let radius = (h.x * h.x + h.y * h.y + h.z * h.z).sqrt();
    ObjectSamples { object_id: obj.id, center: b.center, radius, samples }
}

fn rotate_z(v: Vec3, yaw: f64) -> Vec3 {
    let (s, c) = yaw.sin_cos();
    Vec3::new(v.x * c - v.y * s, v.x * s + v.y * c, v.z)
}

// ---------------------------------------------------------------------------
// Occlusion

/// Precomputed occluder set for one scene.
pub struct Occluder<'a> {
    scene: &'a Scene,
    walls: Vec<Seg2>,
}

impl<'a> Occluder<'a> {
    pub fn new(scene: &'a Scene) -> Self {
        Occluder { scene, walls: scene.wall_segments() }
    }

    /// True when the sight line from `eye` to `target` is unobstructed by
    /// walls (door openings excluded) and by any object box other than
    /// `exclude`. The last sliver of the ray is ignored so surface points
    /// do not occlude themselves.
    pub fn visible(&self, eye: Vec3, target: Vec3, exclude: u32) -> bool {
        let ray2 = Seg2::new(eye.xy(), target.xy());
        for wall in &self.walls {
            if let Some(t) = ray2.crossing_param(wall) {
                if t < 1.0 - 1e-4 {
                    return false;
                }
            }
        }
        // Pull the endpoint a sliver back so a sample resting exactly on a
        // neighboring surface does not count as blocked by it.
        let short = eye.add(target.sub(eye).scale(1.0 - 1e-4));
        for obj in &self.scene.objects {
            if obj.id == exclude {
                continue;
            }
            if obj.bbox.intersects_segment(eye, short) {
                return false;
            }
        }
        true
    }
}

/// Standalone sight-line test; see [`Occluder::visible`].
pub fn occlusion_test(scene: &Scene, eye: Vec3, target: Vec3, exclude: u32) -> bool {
    Occluder::new(scene).visible(eye, target, exclude)
}

// ---------------------------------------------------------------------------
// Annotation

/// Screen-extent fraction of one object from one pose, ignoring occlusion.
pub fn project_extent(
    scene: &Scene,
    object_id: u32,
    x: f64,
    y: f64,
    yaw: f64,
    camera: &CameraConfig,
    cfg: &VisibilityConfig,
) -> f64 {
    let idx = scene
        .objects
        .iter()
        .position(|o| o.id == object_id)
        .expect("object id present in scene");
    let samples = sample_object(scene, idx, cfg.surface_samples);
    let frame = CameraFrame::new(x, y, yaw, camera);
    let (extent, _) = accumulate(&samples, &frame, cfg, None);
    q4(extent)
}

/// Extent and occlusion-aware area fractions of one object from one pose:
///
/// ```text
/// proxy  = clamp(sum over facing in-range samples of a*cos/d^2 / omega, 0, 1)
/// extent = proxy * |in-frustum samples| / |samples|
/// area   = extent * |in-frustum and unoccluded samples| / |samples|
/// ```
fn accumulate(
    obj: &ObjectSamples,
    cam: &CameraFrame,
    cfg: &VisibilityConfig,
    occluder: Option<&Occluder<'_>>,
) -> (f64, f64) {
    let n = obj.samples.len() as f64;
    let mut proxy_sum = 0.0;
    let mut in_frustum = 0usize;
    let mut unoccluded = 0usize;
    for s in &obj.samples {
        let d = s.pos.sub(cam.eye);
        let dist = d.norm();
        if dist > cfg.max_view_distance || dist < 1e-9 {
            continue;
        }
        let facing = -(d.dot(s.normal)) / dist;
        if facing > 0.0 {
            proxy_sum += s.area * facing / (dist * dist);
        }
        if cam.in_frustum(s.pos) {
            in_frustum += 1;
            if let Some(occ) = occluder {
                if occ.visible(cam.eye, s.pos, obj.object_id) {
                    unoccluded += 1;
                }
            }
        }
    }
    let proxy = (proxy_sum / cam.omega).clamp(0.0, 1.0);
    let extent = proxy * in_frustum as f64 / n;
    let area = extent * unoccluded as f64 / n;
    (extent, area)
}

/// Annotate a single pose. Results are ascending by object id and keep every
/// object with nonzero extent.
pub fn annotate_frame(
    scene: &Scene,
    frame_idx: u32,
    x: f64,
    y: f64,
    yaw: f64,
    camera: &CameraConfig,
    cfg: &VisibilityConfig,
) -> FrameAnnotation {
    let samples: Vec<ObjectSamples> = (0..scene.objects.len())
        .map(|i| sample_object(scene, i, cfg.surface_samples))
        .collect();
    let occluder = Occluder::new(scene);
    annotate_pose(&samples, &occluder, frame_idx, x, y, yaw, camera, cfg)
}

#[allow(clippy::too_many_arguments)]
fn annotate_pose(
    samples: &[ObjectSamples],
    occluder: &Occluder<'_>,
    frame_idx: u32,
    x: f64,
    y: f64,
    yaw: f64,
    camera: &CameraConfig,
    cfg: &VisibilityConfig,
) -> FrameAnnotation {
    let cam = CameraFrame::new(x, y, yaw, camera);
    let mut visible = Vec::new();
    for obj in samples {
        // Cheap rejection: the whole box is out of range or behind the eye.
        let center_dist = obj.center.sub(cam.eye).norm();
        if center_dist - obj.radius > cfg.max_view_distance {
            continue;
        }
        let c = cam.to_camera(obj.center);
        if c.z < -obj.radius {
            continue;
        }
        let (extent, area) = accumulate(obj, &cam, cfg, Some(occluder));
        let area = q4(area);
        if area > 0.0 {
            visible.push(Observation {
                object_id: obj.object_id,
                area_fraction: area,
                extent_fraction: q4(extent),
            });
        }
    }
    visible.sort_by_key(|o| o.object_id);
    FrameAnnotation { frame: frame_idx, visible }
}

/// Annotate every pose of a trajectory. Frames are processed in parallel and
/// collected in frame order, so the output is identical to a serial run.
pub fn annotate_trajectory(
    scene: &Scene,
    traj: &Trajectory,
    cfg: &VisibilityConfig,
) -> DenseAnnotations {
    let samples: Vec<ObjectSamples> = (0..scene.objects.len())
        .map(|i| sample_object(scene, i, cfg.surface_samples))
        .collect();
    let occluder = Occluder::new(scene);

    let frames: Vec<FrameAnnotation> = traj
        .poses
        .par_iter()
        .map(|pose| {
            annotate_pose(
                &samples,
                &occluder,
                pose.frame,
                pose.x,
                pose.y,
                pose.yaw,
                &traj.camera,
                cfg,
            )
        })
        .collect();

    let threshold = cfg.salience_area_fraction - 1e-12;
    let mut first_appearance: BTreeMap<String, u32> = BTreeMap::new();
    for frame in &frames {
        for obs in &frame.visible {
            if obs.area_fraction >= threshold {
                let category = &scene.object(obs.object_id).unwrap().category;
                first_appearance.entry(category.clone()).or_insert(frame.frame);
            }
        }
    }

    DenseAnnotations {
        scene_id: scene.id.clone(),
        fps: traj.fps,
        config: *cfg,
        frames,
        first_appearance,
    }
}
