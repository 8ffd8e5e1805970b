//! External scene-document ingestion.
//!
//! A scene document is a single versioned JSON file carrying a scene block
//! (rooms as rectangle polygons, objects as oriented boxes), a trajectory
//! block (timed poses), and an observations block (per-frame visibility,
//! either as area fractions or as pixel counts with a declared resolution).
//! Parsing converts it to the internal [`Scene`]/[`Trajectory`]/
//! [`DenseAnnotations`] triple so question synthesis can run downstream of
//! any renderer that can dump this metadata.
//!
//! The format is documented in `data/scene_doc.schema.json`. Reading is done
//! with a hand-rolled walker rather than derived deserialization so that
//! every failure names the exact JSON pointer (`/scene/objects/3/room`) and
//! unknown fields downgrade to warnings instead of errors. Writing uses
//! typed structs with pinned field order; serialize → parse → re-serialize
//! is byte-identical, and parsed values equal the originals exactly.
//!
//! Generated-tour length contracts (minimum frame counts, full room
//! coverage) are deliberately not enforced here: external captures may be
//! short. Scene geometry invariants are re-checked and reported as
//! `INVARIANT_ERROR`s.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::catalog::Placement;
use crate::geom::{OrientedBox, Rect, Seg2, Vec2, Vec3};
use crate::nav::{AgentPose, CameraConfig, Trajectory};
use crate::observe::{DenseAnnotations, FrameAnnotation, Observation, VisibilityConfig};
use crate::scene::{validate_scene, Door, ObjectInstance, Room, RoomKind, Scene};

/// The one schema version this build reads and writes.
pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("SCHEMA_ERROR at {path}: expected {expected}, found {found}")]
    Schema {
        path: String,
        expected: String,
        found: String,
    },
    #[error("INVARIANT_ERROR: {0}")]
    Invariant(String),
}

fn schema(path: &str, expected: impl Into<String>, found: impl Into<String>) -> IngestError {
    IngestError::Schema {
        path: path.to_string(),
        expected: expected.into(),
        found: found.into(),
    }
}

/// Everything a parsed document yields. Warnings carry the JSON pointers of
/// ignored unknown fields.
#[derive(Debug, Clone)]
pub struct ParsedDoc {
    pub scene: Scene,
    pub trajectory: Trajectory,
    pub annotations: DenseAnnotations,
    pub warnings: Vec<String>,
}

// ---------------------------------------------------------------------------
// Writing.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalSceneDoc {
    pub schema_version: u64,
    pub scene: DocScene,
    pub trajectory: DocTrajectory,
    pub observations: DocObservations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocScene {
    pub id: String,
    pub ceiling_height: f64,
    pub seed: u64,
    pub rooms: Vec<DocRoom>,
    pub doors: Vec<DocDoor>,
    pub objects: Vec<DocObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocRoom {
    pub id: u32,
    pub kind: String,
    /// Four corners in ring order; must form an axis-aligned rectangle.
    pub polygon: Vec<[f64; 2]>,
    pub center: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocDoor {
    pub id: u32,
    pub room_a: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub room_b: Option<u32>,
    pub segment: [[f64; 2]; 2],
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocObject {
    pub id: u32,
    pub category: String,
    pub center: [f64; 3],
    pub half_extents: [f64; 3],
    pub yaw: f64,
    pub room: u32,
    pub placement: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocTrajectory {
    pub fps: f64,
    pub camera: DocCamera,
    pub visit_order: Vec<u32>,
    pub poses: Vec<DocPose>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocCamera {
    pub width: u32,
    pub height: u32,
    pub hfov_deg: f64,
    pub eye_height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocPose {
    pub frame: u32,
    pub time: f64,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocObservations {
    pub config: DocVisibility,
    /// Frame resolution `[width, height]`; required whenever any observation
    /// uses `pixel_count` instead of `area_fraction`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub resolution: Option<[u32; 2]>,
    pub frames: Vec<DocFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocVisibility {
    pub surface_samples: u64,
    pub salience_area_fraction: f64,
    pub max_view_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocFrame {
    pub frame: u32,
    pub visible: Vec<DocObservation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocObservation {
    pub object: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub area_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pixel_count: Option<u64>,
    pub extent_fraction: f64,
}

/// Build the external document for internally generated artifacts.
pub fn scene_doc(
    scene: &Scene,
    trajectory: &Trajectory,
    annotations: &DenseAnnotations,
) -> ExternalSceneDoc {
    ExternalSceneDoc {
        schema_version: SCHEMA_VERSION,
        scene: DocScene {
            id: scene.id.clone(),
            ceiling_height: scene.ceiling_height,
            seed: scene.seed,
            rooms: scene
                .rooms
                .iter()
                .map(|r| DocRoom {
                    id: r.id,
                    kind: r.kind.as_str().into(),
                    polygon: r.footprint.corners().map(|c| [c.x, c.y]).to_vec(),
                    center: [r.center.x, r.center.y],
                })
                .collect(),
            doors: scene
                .doors
                .iter()
                .map(|d| DocDoor {
                    id: d.id,
                    room_a: d.room_a,
                    room_b: d.room_b,
                    segment: [[d.segment.a.x, d.segment.a.y], [d.segment.b.x, d.segment.b.y]],
                    width: d.width,
                })
                .collect(),
            objects: scene
                .objects
                .iter()
                .map(|o| DocObject {
                    id: o.id,
                    category: o.category.clone(),
                    center: [o.bbox.center.x, o.bbox.center.y, o.bbox.center.z],
                    half_extents: [o.bbox.half.x, o.bbox.half.y, o.bbox.half.z],
                    yaw: o.bbox.yaw,
                    room: o.room_id,
                    placement: placement_str(o.placement).into(),
                })
                .collect(),
        },
        trajectory: DocTrajectory {
            fps: trajectory.fps,
            camera: DocCamera {
                width: trajectory.camera.width,
                height: trajectory.camera.height,
                hfov_deg: trajectory.camera.hfov_deg,
                eye_height: trajectory.camera.eye_height,
            },
            visit_order: trajectory.visit_order.clone(),
            poses: trajectory
                .poses
                .iter()
                .map(|p| DocPose {
                    frame: p.frame,
                    time: p.time,
                    x: p.x,
                    y: p.y,
                    yaw: p.yaw,
                })
                .collect(),
        },
        observations: DocObservations {
            config: DocVisibility {
                surface_samples: annotations.config.surface_samples as u64,
                salience_area_fraction: annotations.config.salience_area_fraction,
                max_view_distance: annotations.config.max_view_distance,
            },
            resolution: None,
            frames: annotations
                .frames
                .iter()
                .map(|f| DocFrame {
                    frame: f.frame,
                    visible: f
                        .visible
                        .iter()
                        .map(|o| DocObservation {
                            object: o.object_id,
                            area_fraction: Some(o.area_fraction),
                            pixel_count: None,
                            extent_fraction: o.extent_fraction,
                        })
                        .collect(),
                })
                .collect(),
        },
    }
}

/// Serialize a document the way this tool always does: pretty-printed with a
/// trailing newline, so re-serialization of a parsed document is
/// byte-identical.
pub fn doc_to_bytes(doc: &ExternalSceneDoc) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(doc).expect("documents serialize");
    bytes.push(b'\n');
    bytes
}

fn placement_str(p: Placement) -> &'static str {
    match p {
        Placement::Floor => "floor",
        Placement::OnSurface => "on_surface",
        Placement::WallMounted => "wall_mounted",
    }
}

// ---------------------------------------------------------------------------
// Reading.

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn render(v: &Value) -> String {
    let s = v.to_string();
    if s.len() > 48 {
        format!("{} ({}...)", type_name(v), &s[..32])
    } else {
        s
    }
}

/// A value plus the JSON pointer that reached it.
struct Node<'a> {
    v: &'a Value,
    path: String,
}

impl<'a> Node<'a> {
    fn obj(&self) -> Result<&'a Map<String, Value>, IngestError> {
        self.v
            .as_object()
            .ok_or_else(|| schema(&self.path, "object", render(self.v)))
    }

    fn field(&self, name: &str) -> Result<Node<'a>, IngestError> {
        let path = format!("{}/{name}", self.path);
        match self.obj()?.get(name) {
            Some(v) => Ok(Node { v, path }),
            None => Err(schema(&path, "required field", "missing")),
        }
    }

    fn opt_field(&self, name: &str) -> Result<Option<Node<'a>>, IngestError> {
        Ok(self.obj()?.get(name).map(|v| Node {
            v,
            path: format!("{}/{name}", self.path),
        }))
    }

    fn array(&self) -> Result<Vec<Node<'a>>, IngestError> {
        let items = self
            .v
            .as_array()
            .ok_or_else(|| schema(&self.path, "array", render(self.v)))?;
        Ok(items
            .iter()
            .enumerate()
            .map(|(i, v)| Node {
                v,
                path: format!("{}/{i}", self.path),
            })
            .collect())
    }

    fn f64(&self) -> Result<f64, IngestError> {
        self.v
            .as_f64()
            .ok_or_else(|| schema(&self.path, "number", render(self.v)))
    }

    fn positive_f64(&self) -> Result<f64, IngestError> {
        let x = self.f64()?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(schema(&self.path, "positive number", render(self.v)))
        }
    }

    fn u64(&self) -> Result<u64, IngestError> {
        self.v
            .as_u64()
            .ok_or_else(|| schema(&self.path, "unsigned integer", render(self.v)))
    }

    fn u32(&self) -> Result<u32, IngestError> {
        u32::try_from(self.u64()?)
            .map_err(|_| schema(&self.path, "unsigned 32-bit integer", render(self.v)))
    }

    fn str(&self) -> Result<&'a str, IngestError> {
        self.v
            .as_str()
            .ok_or_else(|| schema(&self.path, "string", render(self.v)))
    }

    fn pair(&self) -> Result<Vec2, IngestError> {
        let items = self.array()?;
        if items.len() != 2 {
            return Err(schema(
                &self.path,
                "[x, y] pair",
                format!("array of {}", items.len()),
            ));
        }
        Ok(Vec2::new(items[0].f64()?, items[1].f64()?))
    }

    fn triple(&self) -> Result<Vec3, IngestError> {
        let items = self.array()?;
        if items.len() != 3 {
            return Err(schema(
                &self.path,
                "[x, y, z] triple",
                format!("array of {}", items.len()),
            ));
        }
        Ok(Vec3::new(items[0].f64()?, items[1].f64()?, items[2].f64()?))
    }

    /// Record warnings for fields this schema version does not know.
    fn warn_unknown(&self, known: &[&str], warnings: &mut Vec<String>) {
        if let Some(map) = self.v.as_object() {
            for key in map.keys() {
                if !known.contains(&key.as_str()) {
                    warnings.push(format!("unknown field ignored at {}/{key}", self.path));
                }
            }
        }
    }
}

fn rect_from_polygon(node: &Node) -> Result<Rect, IngestError> {
    let points: Vec<Vec2> = node
        .array()?
        .iter()
        .map(|p| p.pair())
        .collect::<Result<_, _>>()?;
    if points.len() != 4 {
        return Err(schema(
            &node.path,
            "axis-aligned rectangle (4 corners)",
            format!("polygon with {} points", points.len()),
        ));
    }
    const TOL: f64 = 1e-9;
    let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
    let (x0, x1) = (
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = (
        ys.iter().cloned().fold(f64::INFINITY, f64::min),
        ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let is_corner = |p: &Vec2| {
        ((p.x - x0).abs() < TOL || (p.x - x1).abs() < TOL)
            && ((p.y - y0).abs() < TOL || (p.y - y1).abs() < TOL)
    };
    let all_corners = points.iter().all(is_corner);
    let ring = (0..4).all(|i| {
        let (a, b) = (&points[i], &points[(i + 1) % 4]);
        let dx = (a.x - b.x).abs() > TOL;
        let dy = (a.y - b.y).abs() > TOL;
        dx != dy // exactly one coordinate changes along each edge
    });
    if !all_corners || !ring || x1 - x0 < TOL || y1 - y0 < TOL {
        return Err(schema(
            &node.path,
            "axis-aligned rectangle (4 corners)",
            "non-rectangular polygon",
        ));
    }
    Ok(Rect::new(Vec2::new(x0, y0), Vec2::new(x1, y1)))
}

fn room_kind(node: &Node) -> Result<RoomKind, IngestError> {
    let s = node.str()?;
    let all = [
        RoomKind::Bedroom,
        RoomKind::Kitchen,
        RoomKind::Livingroom,
        RoomKind::Bathroom,
        RoomKind::Office,
        RoomKind::Hallway,
    ];
    all.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
        schema(
            &node.path,
            "one of bedroom, kitchen, livingroom, bathroom, office, hallway",
            format!("{s:?}"),
        )
    })
}

fn placement(node: &Node) -> Result<Placement, IngestError> {
    match node.str()? {
        "floor" => Ok(Placement::Floor),
        "on_surface" => Ok(Placement::OnSurface),
        "wall_mounted" => Ok(Placement::WallMounted),
        other => Err(schema(
            &node.path,
            "one of floor, on_surface, wall_mounted",
            format!("{other:?}"),
        )),
    }
}

/// Parse and validate a scene document.
///
/// Fails with `SCHEMA_ERROR` (naming the exact JSON pointer) on structural
/// problems, or `INVARIANT_ERROR` when the document is well-formed but the
/// described scene violates internal geometry invariants.
pub fn parse_scene_doc(bytes: &[u8]) -> Result<ParsedDoc, IngestError> {
    let value: Value = serde_json::from_slice(bytes)
        .map_err(|e| schema("/", "UTF-8 JSON document", e.to_string()))?;
    let mut warnings = Vec::new();
    let root = Node {
        v: &value,
        path: String::new(),
    };
    root.obj()
        .map_err(|_| schema("/", "object", render(&value)))?;
    root.warn_unknown(
        &["schema_version", "scene", "trajectory", "observations"],
        &mut warnings,
    );

    let version = root.field("schema_version")?;
    if version.u64()? != SCHEMA_VERSION {
        return Err(schema(
            &version.path,
            format!("supported version {SCHEMA_VERSION}"),
            render(version.v),
        ));
    }

    // --- scene block ---
    let scene_node = root.field("scene")?;
    scene_node.warn_unknown(
        &["id", "ceiling_height", "seed", "rooms", "doors", "objects"],
        &mut warnings,
    );
    let id = scene_node.field("id")?.str()?.to_string();
    let ceiling_height = scene_node.field("ceiling_height")?.positive_f64()?;
    let seed = scene_node.field("seed")?.u64()?;

    let mut rooms = Vec::new();
    let mut room_ids = BTreeSet::new();
    for room_node in scene_node.field("rooms")?.array()? {
        room_node.warn_unknown(&["id", "kind", "polygon", "center"], &mut warnings);
        let room_id = room_node.field("id")?.u32()?;
        if !room_ids.insert(room_id) {
            return Err(schema(
                &room_node.field("id")?.path,
                "unique room id",
                format!("duplicate {room_id}"),
            ));
        }
        rooms.push(Room {
            id: room_id,
            kind: room_kind(&room_node.field("kind")?)?,
            footprint: rect_from_polygon(&room_node.field("polygon")?)?,
            center: room_node.field("center")?.pair()?,
        });
    }

    let mut doors = Vec::new();
    for door_node in scene_node.field("doors")?.array()? {
        door_node.warn_unknown(&["id", "room_a", "room_b", "segment", "width"], &mut warnings);
        let room_ref = |n: Node| -> Result<u32, IngestError> {
            let r = n.u32()?;
            if room_ids.contains(&r) {
                Ok(r)
            } else {
                Err(schema(&n.path, "id of a declared room", r.to_string()))
            }
        };
        let room_b = match door_node.opt_field("room_b")? {
            None => None,
            Some(n) if n.v.is_null() => None,
            Some(n) => Some(room_ref(n)?),
        };
        let seg_node = door_node.field("segment")?;
        let ends = seg_node.array()?;
        if ends.len() != 2 {
            return Err(schema(
                &seg_node.path,
                "segment [[x, y], [x, y]]",
                format!("array of {}", ends.len()),
            ));
        }
        doors.push(Door {
            id: door_node.field("id")?.u32()?,
            room_a: room_ref(door_node.field("room_a")?)?,
            room_b,
            segment: Seg2::new(ends[0].pair()?, ends[1].pair()?),
            width: door_node.field("width")?.positive_f64()?,
        });
    }

    let mut objects = Vec::new();
    let mut object_ids = BTreeSet::new();
    for obj_node in scene_node.field("objects")?.array()? {
        obj_node.warn_unknown(
            &["id", "category", "center", "half_extents", "yaw", "room", "placement"],
            &mut warnings,
        );
        let object_id = obj_node.field("id")?.u32()?;
        if !object_ids.insert(object_id) {
            return Err(schema(
                &obj_node.field("id")?.path,
                "unique object id",
                format!("duplicate {object_id}"),
            ));
        }
        let category = obj_node.field("category")?.str()?.to_string();
        if category.is_empty() {
            return Err(schema(
                &obj_node.field("category")?.path,
                "non-empty category name",
                "\"\"",
            ));
        }
        let half_node = obj_node.field("half_extents")?;
        let half = half_node.triple()?;
        if half.x <= 0.0 || half.y <= 0.0 || half.z <= 0.0 {
            return Err(schema(
                &half_node.path,
                "positive half extents",
                render(half_node.v),
            ));
        }
        let room_node = obj_node.field("room")?;
        let room_id = room_node.u32()?;
        if !room_ids.contains(&room_id) {
            return Err(schema(
                &room_node.path,
                "id of a declared room",
                room_id.to_string(),
            ));
        }
        objects.push(ObjectInstance {
            id: object_id,
            category,
            bbox: OrientedBox::new(obj_node.field("center")?.triple()?, half, obj_node.field("yaw")?.f64()?),
            room_id,
            placement: placement(&obj_node.field("placement")?)?,
        });
    }

    let scene = Scene {
        id,
        rooms,
        doors,
        objects,
        ceiling_height,
        seed,
    };

    // --- trajectory block ---
    let traj_node = root.field("trajectory")?;
    traj_node.warn_unknown(&["fps", "camera", "visit_order", "poses"], &mut warnings);
    let fps = traj_node.field("fps")?.positive_f64()?;
    let cam_node = traj_node.field("camera")?;
    cam_node.warn_unknown(&["width", "height", "hfov_deg", "eye_height"], &mut warnings);
    let hfov_node = cam_node.field("hfov_deg")?;
    let hfov_deg = hfov_node.f64()?;
    if !(0.0..180.0).contains(&hfov_deg) || hfov_deg == 0.0 {
        return Err(schema(&hfov_node.path, "degrees in (0, 180)", render(hfov_node.v)));
    }
    let camera = CameraConfig {
        width: cam_node.field("width")?.u32()?,
        height: cam_node.field("height")?.u32()?,
        hfov_deg,
        eye_height: cam_node.field("eye_height")?.positive_f64()?,
    };
    let mut visit_order = Vec::new();
    for entry in traj_node.field("visit_order")?.array()? {
        let r = entry.u32()?;
        if !room_ids.contains(&r) {
            return Err(schema(&entry.path, "id of a declared room", r.to_string()));
        }
        visit_order.push(r);
    }
    let mut poses: Vec<AgentPose> = Vec::new();
    for pose_node in traj_node.field("poses")?.array()? {
        pose_node.warn_unknown(&["frame", "time", "x", "y", "yaw"], &mut warnings);
        let frame_node = pose_node.field("frame")?;
        let frame = frame_node.u32()?;
        if let Some(prev) = poses.last() {
            if frame <= prev.frame {
                return Err(schema(
                    &frame_node.path,
                    format!("frame greater than predecessor {}", prev.frame),
                    frame.to_string(),
                ));
            }
        }
        poses.push(AgentPose {
            frame,
            time: pose_node.field("time")?.f64()?,
            x: pose_node.field("x")?.f64()?,
            y: pose_node.field("y")?.f64()?,
            yaw: pose_node.field("yaw")?.f64()?,
        });
    }
    let trajectory = Trajectory {
        scene_id: scene.id.clone(),
        fps,
        camera,
        visit_order,
        poses,
    };

    // --- observations block ---
    let obs_node = root.field("observations")?;
    obs_node.warn_unknown(&["config", "resolution", "frames"], &mut warnings);
    let cfg_node = obs_node.field("config")?;
    cfg_node.warn_unknown(
        &["surface_samples", "salience_area_fraction", "max_view_distance"],
        &mut warnings,
    );
    let salience_node = cfg_node.field("salience_area_fraction")?;
    let salience_area_fraction = salience_node.f64()?;
    if !(0.0..=1.0).contains(&salience_area_fraction) {
        return Err(schema(
            &salience_node.path,
            "fraction in [0, 1]",
            render(salience_node.v),
        ));
    }
    let config = VisibilityConfig {
        surface_samples: cfg_node.field("surface_samples")?.u64()? as usize,
        salience_area_fraction,
        max_view_distance: cfg_node.field("max_view_distance")?.positive_f64()?,
    };
    let resolution = match obs_node.opt_field("resolution")? {
        None => None,
        Some(n) if n.v.is_null() => None,
        Some(n) => {
            let items = n.array()?;
            if items.len() != 2 {
                return Err(schema(
                    &n.path,
                    "[width, height]",
                    format!("array of {}", items.len()),
                ));
            }
            let w = items[0].u32()?;
            let h = items[1].u32()?;
            if w == 0 || h == 0 {
                return Err(schema(&n.path, "positive dimensions", render(n.v)));
            }
            Some((w, h))
        }
    };

    let mut frames: Vec<FrameAnnotation> = Vec::new();
    for frame_node in obs_node.field("frames")?.array()? {
        frame_node.warn_unknown(&["frame", "visible"], &mut warnings);
        let frame_no_node = frame_node.field("frame")?;
        let frame = frame_no_node.u32()?;
        if let Some(prev) = frames.last() {
            if frame <= prev.frame {
                return Err(schema(
                    &frame_no_node.path,
                    format!("frame greater than predecessor {}", prev.frame),
                    frame.to_string(),
                ));
            }
        }
        let mut visible = Vec::new();
        for entry in frame_node.field("visible")?.array()? {
            entry.warn_unknown(
                &["object", "area_fraction", "pixel_count", "extent_fraction"],
                &mut warnings,
            );
            let object_node = entry.field("object")?;
            let object_id = object_node.u32()?;
            if !object_ids.contains(&object_id) {
                return Err(schema(
                    &object_node.path,
                    "id of a declared object",
                    object_id.to_string(),
                ));
            }
            let area_node = entry.opt_field("area_fraction")?;
            let pixel_node = entry.opt_field("pixel_count")?;
            let area_fraction = match (&area_node, &pixel_node) {
                (Some(_), Some(_)) => {
                    return Err(schema(
                        &entry.path,
                        "exactly one of area_fraction, pixel_count",
                        "both",
                    ));
                }
                (None, None) => {
                    return Err(schema(
                        &entry.path,
                        "exactly one of area_fraction, pixel_count",
                        "neither",
                    ));
                }
                (Some(a), None) => {
                    let x = a.f64()?;
                    if !(0.0..=1.0).contains(&x) {
                        return Err(schema(&a.path, "fraction in [0, 1]", render(a.v)));
                    }
                    x
                }
                (None, Some(p)) => {
                    let count = p.u64()?;
                    let (w, h) = resolution.ok_or_else(|| {
                        schema(
                            &p.path,
                            "resolution declared when pixel counts are used",
                            "no /observations/resolution",
                        )
                    })?;
                    let total = w as u64 * h as u64;
                    if count > total {
                        return Err(schema(
                            &p.path,
                            format!("pixel count at most {total}"),
                            count.to_string(),
                        ));
                    }
                    count as f64 / total as f64
                }
            };
            let extent_fraction = match entry.opt_field("extent_fraction")? {
                None => 0.0,
                Some(n) => {
                    let x = n.f64()?;
                    if !(0.0..=1.0).contains(&x) {
                        return Err(schema(&n.path, "fraction in [0, 1]", render(n.v)));
                    }
                    x
                }
            };
            visible.push(Observation {
                object_id,
                area_fraction,
                extent_fraction,
            });
        }
        frames.push(FrameAnnotation { frame, visible });
    }

    // --- cross-block and geometry invariants ---
    if trajectory.poses.len() != frames.len() {
        return Err(IngestError::Invariant(format!(
            "trajectory has {} poses but observations cover {} frames",
            trajectory.poses.len(),
            frames.len()
        )));
    }
    for (pose, frame) in trajectory.poses.iter().zip(&frames) {
        if pose.frame != frame.frame {
            return Err(IngestError::Invariant(format!(
                "pose frame {} does not line up with observation frame {}",
                pose.frame, frame.frame
            )));
        }
    }
    let report = validate_scene(&scene);
    if !report.ok() {
        let listed: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(IngestError::Invariant(listed.join("; ")));
    }

    // Same first-appearance rule the annotator applies.
    let threshold = config.salience_area_fraction - 1e-12;
    let mut first_appearance: BTreeMap<String, u32> = BTreeMap::new();
    for frame in &frames {
        for obs in &frame.visible {
            if obs.area_fraction >= threshold {
                let category = &scene.object(obs.object_id).expect("ids checked").category;
                first_appearance
                    .entry(category.clone())
                    .or_insert(frame.frame);
            }
        }
    }
    let annotations = DenseAnnotations {
        scene_id: scene.id.clone(),
        fps,
        config,
        frames,
        first_appearance,
    };

    Ok(ParsedDoc {
        scene,
        trajectory,
        annotations,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ObjectCatalog;
    use crate::nav::{trajectory_for_scene, NavConfig, SpeedConfig};
    use crate::observe::annotate_trajectory;
    use crate::scene::{generate_scene, MinMax, SceneParams};

    fn valid_doc_value() -> Value {
        serde_json::json!({
            "schema_version": 1,
            "scene": {
                "id": "scene-doc-test",
                "ceiling_height": 2.8,
                "seed": 7,
                "rooms": [
                    {"id": 0, "kind": "bedroom",
                     "polygon": [[0.0, 0.0], [4.0, 0.0], [4.0, 3.0], [0.0, 3.0]],
                     "center": [2.0, 1.5]},
                    {"id": 1, "kind": "office",
                     "polygon": [[4.0, 0.0], [7.0, 0.0], [7.0, 3.0], [4.0, 3.0]],
                     "center": [5.5, 1.5]}
                ],
                "doors": [
                    {"id": 0, "room_a": 0, "room_b": 1,
                     "segment": [[4.0, 1.0], [4.0, 2.0]], "width": 1.0}
                ],
                "objects": [
                    {"id": 1, "category": "bed",
                     "center": [1.5, 1.5, 0.4], "half_extents": [0.8, 0.6, 0.4],
                     "yaw": 0.0, "room": 0, "placement": "floor"},
                    {"id": 2, "category": "desk",
                     "center": [5.5, 1.5, 0.35], "half_extents": [0.5, 0.4, 0.35],
                     "yaw": 0.0, "room": 1, "placement": "floor"}
                ]
            },
            "trajectory": {
                "fps": 10.0,
                "camera": {"width": 680, "height": 384, "hfov_deg": 90.0, "eye_height": 1.5},
                "visit_order": [0, 1],
                "poses": [
                    {"frame": 0, "time": 0.0, "x": 3.0, "y": 1.5, "yaw": 0.0},
                    {"frame": 1, "time": 0.1, "x": 3.5, "y": 1.5, "yaw": 0.0},
                    {"frame": 2, "time": 0.2, "x": 4.5, "y": 1.5, "yaw": 0.0}
                ]
            },
            "observations": {
                "config": {"surface_samples": 64, "salience_area_fraction": 0.003,
                           "max_view_distance": 12.0},
                "resolution": [680, 384],
                "frames": [
                    {"frame": 0, "visible": [
                        {"object": 1, "area_fraction": 0.05, "extent_fraction": 0.2}]},
                    {"frame": 1, "visible": []},
                    {"frame": 2, "visible": [
                        {"object": 2, "pixel_count": 7834, "extent_fraction": 0.1}]}
                ]
            }
        })
    }

    fn parse_value(v: &Value) -> Result<ParsedDoc, IngestError> {
        parse_scene_doc(serde_json::to_vec(v).unwrap().as_slice())
    }

    #[test]
    fn round_trip_is_exact_and_byte_stable() {
        let scene = generate_scene(
            &SceneParams {
                seed: 81,
                room_count: MinMax::new(4, 5),
                object_count: MinMax::new(38, 45),
                ..SceneParams::default()
            },
            ObjectCatalog::builtin(),
        )
        .expect("scene generates");
        let (_, trajectory) = trajectory_for_scene(
            &scene,
            &NavConfig::default(),
            &SpeedConfig::default(),
            &crate::nav::CameraConfig::default(),
            10.0,
        )
        .expect("tour plans");
        let annotations = annotate_trajectory(&scene, &trajectory, &VisibilityConfig::default());

        let doc = scene_doc(&scene, &trajectory, &annotations);
        let bytes = doc_to_bytes(&doc);
        let parsed = parse_scene_doc(&bytes).expect("own documents parse");
        assert!(parsed.warnings.is_empty(), "{:?}", parsed.warnings);
        assert_eq!(parsed.scene, scene, "scene must survive the round trip");
        assert_eq!(parsed.trajectory, trajectory);
        assert_eq!(parsed.annotations, annotations);

        let again = doc_to_bytes(&scene_doc(
            &parsed.scene,
            &parsed.trajectory,
            &parsed.annotations,
        ));
        assert_eq!(bytes, again, "re-serialization must be byte-identical");
    }

    #[test]
    fn pixel_counts_convert_by_declared_resolution() {
        let parsed = parse_value(&valid_doc_value()).expect("valid doc parses");
        let frame2 = &parsed.annotations.frames[2];
        let obs = &frame2.visible[0];
        assert_eq!(obs.object_id, 2);
        let expected = 7834.0 / (680.0 * 384.0);
        assert!(
            (obs.area_fraction - expected).abs() < 1e-12,
            "fraction {}",
            obs.area_fraction
        );
        assert!((obs.area_fraction - 0.03).abs() < 1e-4);
    }

    #[test]
    fn unknown_fields_warn_but_do_not_fail() {
        let mut doc = valid_doc_value();
        doc["exporter_build"] = serde_json::json!("sim-dump-2.3");
        doc["scene"]["objects"][0]["mesh_uri"] = serde_json::json!("assets/bed.glb");
        let parsed = parse_value(&doc).expect("unknown fields are not fatal");
        assert_eq!(parsed.warnings.len(), 2, "{:?}", parsed.warnings);
        assert!(parsed.warnings[0].contains("/exporter_build"));
        assert!(parsed
            .warnings
            .iter()
            .any(|w| w.contains("/scene/objects/0/mesh_uri")));
    }

    #[test]
    fn schema_errors_name_the_exact_path() {
        let cases: Vec<(Value, &str)> = vec![
            (
                {
                    let mut d = valid_doc_value();
                    d["scene"]["objects"][1].as_object_mut().unwrap().remove("room");
                    d
                },
                "/scene/objects/1/room",
            ),
            (
                {
                    let mut d = valid_doc_value();
                    d["scene"]["rooms"][0]["polygon"] =
                        serde_json::json!([[0.0,0.0],[4.0,0.0],[4.0,3.0],[0.0,3.0],[0.0,1.0]]);
                    d
                },
                "/scene/rooms/0/polygon",
            ),
            (
                {
                    let mut d = valid_doc_value();
                    d["observations"]["frames"][0]["visible"][0]["pixel_count"] =
                        serde_json::json!(100);
                    d
                },
                "/observations/frames/0/visible/0",
            ),
            (
                {
                    let mut d = valid_doc_value();
                    d["trajectory"]["poses"][2]["frame"] = serde_json::json!(1);
                    d
                },
                "/trajectory/poses/2/frame",
            ),
        ];
        for (doc, expected_path) in cases {
            let err = parse_value(&doc).expect_err("mutation must fail");
            match &err {
                IngestError::Schema { path, .. } => {
                    assert_eq!(path, expected_path, "{err}");
                }
                other => panic!("expected schema error at {expected_path}, got {other}"),
            }
        }
    }

    #[test]
    fn geometry_violations_surface_as_invariant_errors() {
        let mut doc = valid_doc_value();
        // Second room shifted to overlap the first.
        doc["scene"]["rooms"][1]["polygon"] =
            serde_json::json!([[2.0, 0.0], [7.0, 0.0], [7.0, 3.0], [2.0, 3.0]]);
        doc["scene"]["rooms"][1]["center"] = serde_json::json!([4.5, 1.5]);
        let err = parse_value(&doc).expect_err("overlapping rooms must fail");
        match &err {
            IngestError::Invariant(msg) => {
                assert!(msg.contains("overlap"), "{msg}");
            }
            other => panic!("expected invariant error, got {other}"),
        }
    }

    #[test]
    fn non_ring_quadrilaterals_are_rejected() {
        let mut doc = valid_doc_value();
        // Same corner set, zigzag order: a bow tie, not a rectangle.
        doc["scene"]["rooms"][0]["polygon"] =
            serde_json::json!([[0.0, 0.0], [4.0, 3.0], [4.0, 0.0], [0.0, 3.0]]);
        let err = parse_value(&doc).expect_err("bow tie must fail");
        assert!(
            err.to_string().contains("/scene/rooms/0/polygon"),
            "{err}"
        );

        let mut doc = valid_doc_value();
        // Skewed quadrilateral.
        doc["scene"]["rooms"][0]["polygon"] =
            serde_json::json!([[0.0, 0.0], [4.0, 0.5], [4.0, 3.0], [0.0, 2.5]]);
        assert!(parse_value(&doc).is_err(), "skewed quad must fail");
    }
}
