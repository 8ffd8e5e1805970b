//! Question synthesis over simulated tours.
//!
//! A tour (scene + trajectory + dense visibility annotations) is turned into
//! a pool of question/answer items in three stages:
//!
//! 1. per-question-type *generators* enumerate or sample candidate questions
//!    and measure their ground truth from scene geometry ([`generators`]);
//! 2. a *quality gate* rejects candidates that a careful human could dispute:
//!    references to objects the video barely shows, near-tie comparisons,
//!    directions near a class boundary, values that sit on a rounding edge
//!    ([`quality_gate`]); every rejection carries a machine-readable reason;
//! 3. accepted open-ended items are optionally twinned into multiple-choice
//!    form with controlled distractors and a balanced answer-letter
//!    distribution ([`mc`]).
//!
//! Everything is deterministic in the scene seed: generators draw from
//! per-(trajectory, question-type) substreams, so pools can be rebuilt
//! byte-identically and trajectories can be processed in parallel.

pub mod geometry;
mod generators;
mod mc;
pub mod templates;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::observe::DenseAnnotations;
use crate::scene::Scene;
use crate::seeds;
use crate::{NavGrid, Trajectory};

pub use geometry::{
    classify_direction, closest_point_distance, direction_boundary_margin, direction_labels,
    ego_frame_angle, point_to_box_distance, Difficulty,
};
pub use mc::{make_multiple_choice, LetterBalancer, LETTERS};

use rand::seq::SliceRandom;

/// Question type. The three direction difficulties are distinct types: they
/// use different templates, answer vocabularies, and gate margins, and mixes
/// weight them independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QType {
    ObjCount,
    ObjSize,
    RoomSize,
    AbsDist,
    RelDist,
    RelDirEasy,
    RelDirMed,
    RelDirHard,
    AppearanceOrder,
    SpatiotemporalDist,
    RoutePlan,
}

impl QType {
    pub const ALL: [QType; 11] = [
        QType::ObjCount,
        QType::ObjSize,
        QType::RoomSize,
        QType::AbsDist,
        QType::RelDist,
        QType::RelDirEasy,
        QType::RelDirMed,
        QType::RelDirHard,
        QType::AppearanceOrder,
        QType::SpatiotemporalDist,
        QType::RoutePlan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QType::ObjCount => "obj_count",
            QType::ObjSize => "obj_size",
            QType::RoomSize => "room_size",
            QType::AbsDist => "abs_dist",
            QType::RelDist => "rel_dist",
            QType::RelDirEasy => "rel_dir_easy",
            QType::RelDirMed => "rel_dir_med",
            QType::RelDirHard => "rel_dir_hard",
            QType::AppearanceOrder => "appearance_order",
            QType::SpatiotemporalDist => "spatiotemporal_dist",
            QType::RoutePlan => "route_plan",
        }
    }

    pub fn parse(s: &str) -> Option<QType> {
        QType::ALL.into_iter().find(|q| q.as_str() == s)
    }

    /// Direction difficulty, for the three egocentric-direction types.
    pub fn difficulty(self) -> Option<Difficulty> {
        match self {
            QType::RelDirEasy => Some(Difficulty::Easy),
            QType::RelDirMed => Some(Difficulty::Medium),
            QType::RelDirHard => Some(Difficulty::Hard),
            _ => None,
        }
    }

    /// Whether the answer is a number (count, length, area, or distance).
    pub fn is_numeric(self) -> bool {
        matches!(
            self,
            QType::ObjCount | QType::ObjSize | QType::RoomSize | QType::AbsDist
        )
    }

    /// Route planning stays open-ended: its answer is a sequence of turn
    /// fills, which has no natural four-option form.
    pub fn supports_multiple_choice(self) -> bool {
        self != QType::RoutePlan
    }

    /// Decimal places used when rendering this type's numeric answer.
    pub fn answer_decimals(self) -> Option<u32> {
        match self {
            QType::ObjCount | QType::ObjSize => Some(0),
            QType::RoomSize | QType::AbsDist => Some(1),
            _ => None,
        }
    }
}

impl fmt::Display for QType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Answer format of an item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    OpenEnded,
    MultipleChoice,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::OpenEnded => "open_ended",
            Format::MultipleChoice => "multiple_choice",
        }
    }

    /// Short tag used in item identifiers.
    pub fn id_tag(self) -> &'static str {
        match self {
            Format::OpenEnded => "oe",
            Format::MultipleChoice => "mc",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where an item came from, precise enough to recompute its answer from the
/// scene alone (no question-text parsing required).
///
/// `object_ids` layout depends on the type: the instance(s) the question is
/// about, in a pinned order — e.g. `[positioning, orienting, querying]` for
/// directions, `[anchor, candidate…]` in choice order for nearest-category
/// questions, representatives in true appearance order for ordering
/// questions, `[start, orienting, end]` for routes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub scene_id: String,
    pub trajectory_id: String,
    pub object_ids: Vec<u32>,
    /// Numeric ground truth before rounding (angle in degrees for direction
    /// questions, meters/centimeters/square meters/count for numeric ones).
    pub ground_truth_raw: Option<f64>,
}

/// One question/answer item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAItem {
    pub id: String,
    pub qtype: QType,
    pub format: Format,
    pub question: String,
    pub answer: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub choices: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correct_letter: Option<char>,
    pub provenance: Provenance,
}

impl QAItem {
    /// Structural invariants every item must satisfy, independent of any
    /// scene: multiple-choice items carry exactly four distinct choices and
    /// a letter that indexes the answer; open-ended items carry neither.
    pub fn check_invariants(&self) -> Result<(), String> {
        match self.format {
            Format::OpenEnded => {
                if self.choices.is_some() || self.correct_letter.is_some() {
                    return Err(format!("open-ended item {} carries choice fields", self.id));
                }
            }
            Format::MultipleChoice => {
                let choices = self
                    .choices
                    .as_ref()
                    .ok_or_else(|| format!("multiple-choice item {} lacks choices", self.id))?;
                if choices.len() != 4 {
                    return Err(format!("item {} has {} choices", self.id, choices.len()));
                }
                for i in 0..4 {
                    for j in (i + 1)..4 {
                        if choices[i] == choices[j] {
                            return Err(format!("item {} repeats choice {:?}", self.id, choices[i]));
                        }
                    }
                }
                let letter = self
                    .correct_letter
                    .ok_or_else(|| format!("multiple-choice item {} lacks a letter", self.id))?;
                let idx = match letter {
                    'A' => 0,
                    'B' => 1,
                    'C' => 2,
                    'D' => 3,
                    other => return Err(format!("item {} has letter {other:?}", self.id)),
                };
                if choices[idx] != self.answer {
                    return Err(format!(
                        "item {}: answer {:?} is not choice {letter}",
                        self.id, self.answer
                    ));
                }
                if self.qtype == QType::RoutePlan {
                    return Err(format!("route item {} must not be multiple-choice", self.id));
                }
            }
        }
        Ok(())
    }
}

/// Thresholds for the quality gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QualityConfig {
    /// A category is referenceable only if some instance of it reaches this
    /// per-frame visible-area fraction at least once in the trajectory.
    pub min_salient_area: f64,
    /// Objects referenced together must be at least this far apart (meters,
    /// closest point to closest point).
    pub min_pair_distance: f64,
    /// Direction angles must be at least this many degrees away from the
    /// nearest class boundary; the same margin guards the quantization of a
    /// route's initial turn.
    pub direction_boundary_margin: f64,
    /// For "which is closest" questions, the runner-up distance must exceed
    /// the winner by at least this factor.
    pub rel_dist_margin: f64,
    /// First appearances named together must be at least this many frames
    /// apart.
    pub appearance_gap: u32,
    /// Appearance-order candidates must stay answerable when the video is
    /// uniformly subsampled to this many frames — the frame budget of the
    /// video models the dataset trains. The stored order has to be
    /// recoverable from the sampled frames alone. Budgets below two disable
    /// the check.
    pub reference_subsample_frames: usize,
    /// Minimum absolute-distance answer (meters, before rounding).
    pub min_abs_dist: f64,
    /// Minimum object-size answer (centimeters, before rounding).
    pub min_obj_size: f64,
    /// Minimum room-area answer (square meters, before rounding).
    pub min_room_area: f64,
    /// Numeric answers are rejected when the unrounded value sits within
    /// this fraction of a rounding step of a rounding decision boundary, so
    /// that an independent recomputation can never round differently.
    pub rounding_guard: f64,
    /// Per-trajectory cap on accepted questions of each type.
    pub max_questions_per_type_per_trajectory: usize,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig {
            min_salient_area: 0.003,
            min_pair_distance: 0.5,
            direction_boundary_margin: 10.0,
            rel_dist_margin: 1.15,
            appearance_gap: 10,
            reference_subsample_frames: 64,
            min_abs_dist: 0.3,
            min_obj_size: 5.0,
            min_room_area: 1.0,
            rounding_guard: 0.01,
            max_questions_per_type_per_trajectory: 10,
        }
    }
}

/// Machine-readable reason a candidate failed the quality gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RejectReason {
    #[serde(rename = "NOT_SALIENT")]
    NotSalient,
    #[serde(rename = "AMBIGUOUS_CATEGORY")]
    AmbiguousCategory,
    #[serde(rename = "PAIR_TOO_CLOSE")]
    PairTooClose,
    #[serde(rename = "DIRECTION_BOUNDARY")]
    DirectionBoundary,
    #[serde(rename = "DEGENERATE_GEOMETRY")]
    DegenerateGeometry,
    #[serde(rename = "REL_DIST_MARGIN")]
    RelDistMargin,
    #[serde(rename = "APPEARANCE_GAP")]
    AppearanceGap,
    #[serde(rename = "SUBSAMPLE_FRAGILE")]
    SubsampleFragile,
    #[serde(rename = "NUMERIC_TOO_SMALL")]
    NumericTooSmall,
    #[serde(rename = "ROUNDING_BOUNDARY")]
    RoundingBoundary,
    #[serde(rename = "NO_PATH")]
    NoPath,
    #[serde(rename = "ROUTE_TURN_AMBIGUOUS")]
    RouteTurnAmbiguous,
    #[serde(rename = "DISTRACTOR_COLLISION")]
    DistractorCollision,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::NotSalient => "NOT_SALIENT",
            RejectReason::AmbiguousCategory => "AMBIGUOUS_CATEGORY",
            RejectReason::PairTooClose => "PAIR_TOO_CLOSE",
            RejectReason::DirectionBoundary => "DIRECTION_BOUNDARY",
            RejectReason::DegenerateGeometry => "DEGENERATE_GEOMETRY",
            RejectReason::RelDistMargin => "REL_DIST_MARGIN",
            RejectReason::AppearanceGap => "APPEARANCE_GAP",
            RejectReason::SubsampleFragile => "SUBSAMPLE_FRAGILE",
            RejectReason::NumericTooSmall => "NUMERIC_TOO_SMALL",
            RejectReason::RoundingBoundary => "ROUNDING_BOUNDARY",
            RejectReason::NoPath => "NO_PATH",
            RejectReason::RouteTurnAmbiguous => "ROUTE_TURN_AMBIGUOUS",
            RejectReason::DistractorCollision => "DISTRACTOR_COLLISION",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One rejected candidate, for the audit log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rejection {
    pub trajectory_id: String,
    pub qtype: QType,
    pub reason: RejectReason,
    /// Human-oriented context (object ids, the offending measurement).
    pub detail: String,
}

/// Everything the gate needs to re-decide a candidate, captured at
/// measurement time. Keeping the gate a pure function of this data plus the
/// config makes every accept/reject decision replayable.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateData {
    Count {
        category_max_area: f64,
    },
    Size {
        category_max_area: f64,
        salient_instances: usize,
        value_cm: f64,
    },
    RoomArea {
        value_m2: f64,
    },
    PairDistance {
        max_areas: [f64; 2],
        salient_instances: [usize; 2],
        value_m: f64,
    },
    NearestCategory {
        max_areas: Vec<f64>,
        winner_m: f64,
        runner_up_m: f64,
    },
    Direction {
        max_areas: [f64; 3],
        salient_instances: [usize; 3],
        pair_distances: [f64; 3],
        angle_deg: Option<f64>,
        difficulty: Difficulty,
    },
    Appearance {
        min_gap_frames: u32,
        subsample_order_holds: bool,
    },
    Route {
        max_areas: [f64; 3],
        salient_instances: [usize; 3],
        path_found: bool,
        initial_turn_margin_deg: f64,
    },
}

/// Decide a candidate. `Ok(())` means every threshold in `cfg` is met;
/// otherwise the first violated constraint is returned, checked in a fixed
/// order (salience, uniqueness, then the type-specific geometry).
pub fn quality_gate(gate: &GateData, cfg: &QualityConfig) -> Result<(), RejectReason> {
    let salient = |area: f64| -> Result<(), RejectReason> {
        if area + 1e-12 >= cfg.min_salient_area {
            Ok(())
        } else {
            Err(RejectReason::NotSalient)
        }
    };
    let unique = |n: usize| -> Result<(), RejectReason> {
        if n == 1 {
            Ok(())
        } else {
            Err(RejectReason::AmbiguousCategory)
        }
    };
    let margin_ok = |winner: f64, runner_up: f64| -> bool {
        if winner < 1e-12 {
            runner_up > 1e-12
        } else {
            runner_up / winner >= cfg.rel_dist_margin
        }
    };
    let rounding = |value: f64, step: f64| -> Result<(), RejectReason> {
        if crate::canon::boundary_distance_frac(value, step) < cfg.rounding_guard {
            Err(RejectReason::RoundingBoundary)
        } else {
            Ok(())
        }
    };

    match gate {
        GateData::Count { category_max_area } => salient(*category_max_area),
        GateData::Size {
            category_max_area,
            salient_instances,
            value_cm,
        } => {
            salient(*category_max_area)?;
            unique(*salient_instances)?;
            if *value_cm < cfg.min_obj_size {
                return Err(RejectReason::NumericTooSmall);
            }
            rounding(*value_cm, 1.0)
        }
        GateData::RoomArea { value_m2 } => {
            if *value_m2 < cfg.min_room_area {
                return Err(RejectReason::NumericTooSmall);
            }
            rounding(*value_m2, 0.1)
        }
        GateData::PairDistance {
            max_areas,
            salient_instances,
            value_m,
        } => {
            for a in max_areas {
                salient(*a)?;
            }
            for n in salient_instances {
                unique(*n)?;
            }
            if *value_m < cfg.min_pair_distance {
                return Err(RejectReason::PairTooClose);
            }
            if *value_m < cfg.min_abs_dist {
                return Err(RejectReason::NumericTooSmall);
            }
            rounding(*value_m, 0.1)
        }
        GateData::NearestCategory {
            max_areas,
            winner_m,
            runner_up_m,
        } => {
            for a in max_areas {
                salient(*a)?;
            }
            if margin_ok(*winner_m, *runner_up_m) {
                Ok(())
            } else {
                Err(RejectReason::RelDistMargin)
            }
        }
        GateData::Direction {
            max_areas,
            salient_instances,
            pair_distances,
            angle_deg,
            difficulty,
        } => {
            for a in max_areas {
                salient(*a)?;
            }
            for n in salient_instances {
                unique(*n)?;
            }
            if pair_distances.iter().any(|d| *d < cfg.min_pair_distance) {
                return Err(RejectReason::PairTooClose);
            }
            let Some(angle) = angle_deg else {
                return Err(RejectReason::DegenerateGeometry);
            };
            if direction_boundary_margin(*angle, *difficulty) < cfg.direction_boundary_margin {
                return Err(RejectReason::DirectionBoundary);
            }
            Ok(())
        }
        GateData::Appearance {
            min_gap_frames,
            subsample_order_holds,
        } => {
            if *min_gap_frames < cfg.appearance_gap {
                return Err(RejectReason::AppearanceGap);
            }
            if !subsample_order_holds {
                return Err(RejectReason::SubsampleFragile);
            }
            Ok(())
        }
        GateData::Route {
            max_areas,
            salient_instances,
            path_found,
            initial_turn_margin_deg,
        } => {
            for a in max_areas {
                salient(*a)?;
            }
            for n in salient_instances {
                unique(*n)?;
            }
            if !path_found {
                return Err(RejectReason::NoPath);
            }
            if *initial_turn_margin_deg < cfg.direction_boundary_margin {
                return Err(RejectReason::RouteTurnAmbiguous);
            }
            Ok(())
        }
    }
}

/// Per-category view of what the trajectory actually showed.
#[derive(Debug, Clone)]
pub struct CategoryView {
    /// Instances whose best frame clears the salience threshold, ascending id.
    pub salient_instances: Vec<u32>,
    /// Instance count in the whole scene, salient or not.
    pub total_instances: usize,
    /// Earliest frame where any instance is salient.
    pub first_frame: Option<u32>,
    /// Best per-frame visible-area fraction over all instances and frames.
    pub max_area: f64,
}

/// Salience summary of one trajectory, the generators' working set.
#[derive(Debug, Clone)]
pub struct SalienceIndex {
    /// Objects that clear the salience threshold at least once, ascending id.
    pub salient_ids: Vec<u32>,
    /// Best per-frame visible-area fraction of every observed object.
    pub max_area: BTreeMap<u32, f64>,
    pub categories: BTreeMap<String, CategoryView>,
}

impl SalienceIndex {
    /// Categories with exactly one salient instance — the only ones that may
    /// be referenced as "the {category}" — paired with that instance's id.
    pub fn unique_categories(&self) -> Vec<(&str, u32)> {
        self.categories
            .iter()
            .filter(|(_, v)| v.salient_instances.len() == 1)
            .map(|(k, v)| (k.as_str(), v.salient_instances[0]))
            .collect()
    }

    /// Categories with at least one salient instance, ascending by name.
    pub fn salient_categories(&self) -> Vec<&str> {
        self.categories
            .iter()
            .filter(|(_, v)| !v.salient_instances.is_empty())
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

/// Objects whose visible-area fraction reaches `cfg.min_salient_area` in at
/// least one frame, ascending by id.
pub fn salient_objects(annotations: &DenseAnnotations, cfg: &QualityConfig) -> Vec<u32> {
    let mut best: BTreeMap<u32, f64> = BTreeMap::new();
    for frame in &annotations.frames {
        for obs in &frame.visible {
            let e = best.entry(obs.object_id).or_insert(0.0);
            *e = e.max(obs.area_fraction);
        }
    }
    best.into_iter()
        .filter(|(_, area)| *area + 1e-12 >= cfg.min_salient_area)
        .map(|(id, _)| id)
        .collect()
}

/// Build the salience index for one trajectory.
pub fn build_salience_index(
    scene: &Scene,
    annotations: &DenseAnnotations,
    cfg: &QualityConfig,
) -> SalienceIndex {
    let mut max_area: BTreeMap<u32, f64> = BTreeMap::new();
    for frame in &annotations.frames {
        for obs in &frame.visible {
            let e = max_area.entry(obs.object_id).or_insert(0.0);
            *e = e.max(obs.area_fraction);
        }
    }
    let salient_ids: Vec<u32> = max_area
        .iter()
        .filter(|(_, area)| **area + 1e-12 >= cfg.min_salient_area)
        .map(|(id, _)| *id)
        .collect();

    let mut categories: BTreeMap<String, CategoryView> = BTreeMap::new();
    for obj in &scene.objects {
        let view = categories
            .entry(obj.category.clone())
            .or_insert_with(|| CategoryView {
                salient_instances: Vec::new(),
                total_instances: 0,
                first_frame: None,
                max_area: 0.0,
            });
        view.total_instances += 1;
        let area = max_area.get(&obj.id).copied().unwrap_or(0.0);
        view.max_area = view.max_area.max(area);
        if salient_ids.binary_search(&obj.id).is_ok() {
            view.salient_instances.push(obj.id);
        }
    }
    for view in categories.values_mut() {
        view.salient_instances.sort_unstable();
    }
    for (category, frame) in &annotations.first_appearance {
        if let Some(view) = categories.get_mut(category) {
            view.first_frame = Some(*frame);
        }
    }
    SalienceIndex {
        salient_ids,
        max_area,
        categories,
    }
}

/// A measured question candidate, before the gate has ruled on it.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub qtype: QType,
    pub question: String,
    pub answer: String,
    pub object_ids: Vec<u32>,
    pub ground_truth_raw: Option<f64>,
    pub gate: GateData,
    /// Short context for the rejection log.
    pub detail: String,
}

/// Result of running generation for one trajectory: accepted open-ended
/// items plus the full rejection log.
#[derive(Debug, Clone, Default)]
pub struct QaOutput {
    pub items: Vec<QAItem>,
    pub rejections: Vec<Rejection>,
}

/// Generate the open-ended question pool for one trajectory.
///
/// Candidates flow generator → gate → per-type shuffle → cap. The shuffle
/// (seeded from the scene and trajectory) removes enumeration-order bias
/// before capping, so the surviving ten are a uniform sample of what passed.
pub fn generate_for_trajectory(
    scene: &Scene,
    grid: &NavGrid,
    trajectory: &Trajectory,
    annotations: &DenseAnnotations,
    trajectory_id: &str,
    cfg: &QualityConfig,
) -> QaOutput {
    let index = build_salience_index(scene, annotations, cfg);
    let ctx = generators::GenContext {
        scene,
        grid,
        trajectory,
        annotations,
        index: &index,
        cfg,
    };
    let mut out = QaOutput::default();
    for qtype in QType::ALL {
        let tag = format!("qa/{}/{}", trajectory_id, qtype.as_str());
        let mut rng = seeds::rng(scene.seed, &tag, 0);
        let candidates = generators::generate(qtype, &ctx, &mut rng);
        let mut accepted = Vec::new();
        for cand in candidates {
            debug_assert_eq!(cand.qtype, qtype, "generator must label its own type");
            match quality_gate(&cand.gate, cfg) {
                Ok(()) => accepted.push(cand),
                Err(reason) => out.rejections.push(Rejection {
                    trajectory_id: trajectory_id.to_string(),
                    qtype,
                    reason,
                    detail: cand.detail,
                }),
            }
        }
        accepted.shuffle(&mut rng);
        accepted.truncate(cfg.max_questions_per_type_per_trajectory);
        for (serial, cand) in accepted.into_iter().enumerate() {
            let item = QAItem {
                id: format!(
                    "{}/{}/{:02}/{}",
                    trajectory_id,
                    qtype.as_str(),
                    serial,
                    Format::OpenEnded.id_tag()
                ),
                qtype,
                format: Format::OpenEnded,
                question: cand.question,
                answer: cand.answer,
                choices: None,
                correct_letter: None,
                provenance: Provenance {
                    scene_id: scene.id.clone(),
                    trajectory_id: trajectory_id.to_string(),
                    object_ids: cand.object_ids,
                    ground_truth_raw: cand.ground_truth_raw,
                },
            };
            debug_assert!(item.check_invariants().is_ok());
            out.items.push(item);
        }
    }
    out
}

/// Render a numeric value the way this question type's answers are written:
/// counts and centimeter sizes as integers, meters and square meters with one
/// decimal, rounding half away from zero.
pub fn format_numeric_answer(qtype: QType, value: f64) -> String {
    let decimals = qtype
        .answer_decimals()
        .expect("numeric formatting requested for a non-numeric question type");
    let rounded = crate::canon::round_decimals(value, decimals);
    format!("{:.*}", decimals as usize, rounded)
}

/// Serially twin open-ended items into multiple-choice form, balancing the
/// answer letters across the whole pool. Returns the twins (the inputs stay
/// as they are) and rejections for items whose distractors could not be
/// built. `scenes` must contain every referenced scene, keyed by id.
pub fn expand_with_multiple_choice(
    items: &[QAItem],
    scenes: &BTreeMap<String, &Scene>,
    seed: u64,
) -> (Vec<QAItem>, Vec<Rejection>) {
    let mut rng = seeds::rng(seed, "qa-mc", 0);
    let mut balancer = LetterBalancer::new(seed);
    let mut twins = Vec::new();
    let mut rejections = Vec::new();
    for item in items {
        if !item.qtype.supports_multiple_choice() {
            continue;
        }
        let scene = scenes
            .get(&item.provenance.scene_id)
            .unwrap_or_else(|| panic!("scene {} missing from pool", item.provenance.scene_id));
        match make_multiple_choice(item, scene, &mut rng, &mut balancer) {
            Ok(twin) => twins.push(twin),
            Err(reason) => rejections.push(Rejection {
                trajectory_id: item.provenance.trajectory_id.clone(),
                qtype: item.qtype,
                reason,
                detail: format!("mc twin of {}", item.id),
            }),
        }
    }
    (twins, rejections)
}
