//! Data-generation engine for spatial-reasoning video instruction tuning.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! 1. [`scene`] — procedural indoor scenes (rooms, doors, furniture).
//! 2. [`nav`] — navigation grids and agent tour trajectories.
//! 3. [`observe`] — per-frame visibility annotations along a trajectory.
//! 4. [`qa`] — question/answer synthesis with quality gates.
//! 5. [`mix`] — dataset mix assembly from a QA pool.
//! 6. [`export`] — instruction-tuning JSONL export.
//! 7. [`oracle`] — independent answer recomputation and dataset validation.
//! 8. [`ingest`] — external scene-document parsing and round-tripping.
//!
//! Everything is deterministic: the same seed and parameters produce
//! byte-identical artifacts.

pub mod canon;
pub mod catalog;
pub mod export;
pub mod geom;
pub mod ingest;
pub mod mix;
pub mod nav;
pub mod observe;
pub mod oracle;
pub mod qa;
pub mod scene;
pub mod seeds;

pub use catalog::{CatalogEntry, ObjectCatalog, Placement};
pub use export::{DatasetRecord, DatasetStats, ExportConfig, Manifest};
pub use ingest::{parse_scene_doc, scene_doc, ExternalSceneDoc, IngestError, ParsedDoc};
pub use geom::{OrientedBox, Rect, Seg2, Vec2, Vec3};
pub use mix::{MixError, MixSpec};
pub use nav::{AgentPose, CameraConfig, NavConfig, NavGrid, SpeedConfig, Trajectory};
pub use observe::{DenseAnnotations, Observation, VisibilityConfig};
pub use oracle::{OracleContext, RoundtripReport, ValidationVerdict};
pub use qa::{Format, Provenance, QAItem, QType, QualityConfig, RejectReason};
pub use scene::{Door, ObjectInstance, Room, RoomKind, Scene, SceneParams};
