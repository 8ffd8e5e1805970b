//! Candidate generators, one per question type.
//!
//! Generators measure ground truth straight from scene geometry and the
//! trajectory's visibility record, then hand every candidate — including ones
//! they can already see are doomed — to the quality gate, so that the
//! rejection log reflects real decisions. Enumerable spaces (categories,
//! category pairs) are walked exhaustively in name order; combinatorial ones
//! (triples, four-sets) are sampled from the per-type random stream with a
//! fixed attempt budget and de-duplicated.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::geom::{Vec2, Vec3};
use crate::observe::DenseAnnotations;
use crate::scene::{self, ObjectInstance, Scene};
use crate::{NavGrid, Trajectory};

use super::geometry::{
    closest_point_distance, ego_frame_angle, classify_direction, ground_centroid,
    point_to_box_distance, Difficulty,
};
use super::{
    format_numeric_answer, templates, Candidate, GateData, QType, QualityConfig, SalienceIndex,
};

/// Attempt budgets for sampled candidate spaces. Budgets are deliberately a
/// few times the per-type cap so that boundary rejections still leave enough
/// accepted candidates to fill it.
const REL_DIST_ATTEMPTS: usize = 24;
const REL_DIR_ATTEMPTS: usize = 40;
const APPEARANCE_ATTEMPTS: usize = 24;
const SPATIOTEMPORAL_ATTEMPTS: usize = 24;
const ROUTE_ATTEMPTS: usize = 16;

pub(crate) struct GenContext<'a> {
    pub scene: &'a Scene,
    pub grid: &'a NavGrid,
    pub trajectory: &'a Trajectory,
    pub annotations: &'a DenseAnnotations,
    pub index: &'a SalienceIndex,
    pub cfg: &'a QualityConfig,
}

impl<'a> GenContext<'a> {
    fn instances_of(&self, category: &str) -> Vec<&'a ObjectInstance> {
        self.scene
            .objects
            .iter()
            .filter(|o| o.category == category)
            .collect()
    }

    /// Lowest salient instance id of a category — the representative recorded
    /// in provenance for category-level questions.
    fn representative(&self, category: &str) -> u32 {
        self.index.categories[category].salient_instances[0]
    }

    fn max_area(&self, category: &str) -> f64 {
        self.index.categories[category].max_area
    }

    /// Minimum closest-point distance between any instance of `a` and any
    /// instance of `b`, over the whole scene.
    fn category_distance(&self, a: &str, b: &str) -> f64 {
        let mut best = f64::INFINITY;
        for ia in self.instances_of(a) {
            for ib in self.instances_of(b) {
                best = best.min(closest_point_distance(&ia.bbox, &ib.bbox));
            }
        }
        best
    }
}

pub(crate) fn generate(qtype: QType, ctx: &GenContext, rng: &mut ChaCha8Rng) -> Vec<Candidate> {
    match qtype {
        QType::ObjCount => gen_obj_count(ctx),
        QType::ObjSize => gen_obj_size(ctx),
        QType::RoomSize => gen_room_size(ctx),
        QType::AbsDist => gen_abs_dist(ctx),
        QType::RelDist => gen_rel_dist(ctx, rng),
        QType::RelDirEasy => gen_rel_dir(ctx, rng, Difficulty::Easy, QType::RelDirEasy),
        QType::RelDirMed => gen_rel_dir(ctx, rng, Difficulty::Medium, QType::RelDirMed),
        QType::RelDirHard => gen_rel_dir(ctx, rng, Difficulty::Hard, QType::RelDirHard),
        QType::AppearanceOrder => gen_appearance_order(ctx, rng),
        QType::SpatiotemporalDist => gen_spatiotemporal(ctx, rng),
        QType::RoutePlan => gen_route_plan(ctx, rng),
    }
}

/// Counting covers the whole scene: the tour visits every room, so "this
/// room" in the wording reads as the toured space. Non-salient categories
/// are still offered to the gate so their rejection is on the record.
fn gen_obj_count(ctx: &GenContext) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (category, view) in &ctx.index.categories {
        let count = view.total_instances;
        let ids: Vec<u32> = ctx.instances_of(category).iter().map(|o| o.id).collect();
        out.push(Candidate {
            qtype: QType::ObjCount,
            question: templates::obj_count(category),
            answer: format_numeric_answer(QType::ObjCount, count as f64),
            object_ids: ids,
            ground_truth_raw: Some(count as f64),
            gate: GateData::Count {
                category_max_area: view.max_area,
            },
            detail: format!("{category}: {count} instance(s), max area {:.4}", view.max_area),
        });
    }
    out
}

/// Longest bounding-box dimension of the one salient instance, in
/// centimeters. Categories with several salient instances are offered to the
/// gate anyway (measuring the first) so the ambiguity rejection is logged.
fn gen_obj_size(ctx: &GenContext) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (category, view) in &ctx.index.categories {
        let Some(&instance_id) = view.salient_instances.first() else {
            continue;
        };
        let obj = ctx.scene.object(instance_id).expect("salient id exists");
        let h = obj.bbox.half;
        let value_cm = 200.0 * h.x.max(h.y).max(h.z);
        out.push(Candidate {
            qtype: QType::ObjSize,
            question: templates::obj_size(category),
            answer: format_numeric_answer(QType::ObjSize, value_cm),
            object_ids: vec![instance_id],
            ground_truth_raw: Some(value_cm),
            gate: GateData::Size {
                category_max_area: view.max_area,
                salient_instances: view.salient_instances.len(),
                value_cm,
            },
            detail: format!("{category} #{instance_id}: {value_cm:.2} cm"),
        });
    }
    out
}

/// Combined floor area of the rooms the tour visits, in square meters.
/// There is exactly one candidate per trajectory.
fn gen_room_size(ctx: &GenContext) -> Vec<Candidate> {
    let rooms: BTreeSet<u32> = ctx.trajectory.visit_order.iter().copied().collect();
    let area = scene::floor_area(ctx.scene, &rooms).expect("visit order references scene rooms");
    vec![Candidate {
        qtype: QType::RoomSize,
        question: templates::room_size(),
        answer: format_numeric_answer(QType::RoomSize, area),
        object_ids: Vec::new(),
        ground_truth_raw: Some(area),
        gate: GateData::RoomArea { value_m2: area },
        detail: format!("rooms {rooms:?}: {area:.3} m^2"),
    }]
}

/// Closest-point distance between the single salient instances of two
/// categories, enumerated over all unordered pairs in name order.
fn gen_abs_dist(ctx: &GenContext) -> Vec<Candidate> {
    let unique = ctx.index.unique_categories();
    let mut out = Vec::new();
    for i in 0..unique.len() {
        for j in (i + 1)..unique.len() {
            let (cat_a, id_a) = unique[i];
            let (cat_b, id_b) = unique[j];
            let box_a = &ctx.scene.object(id_a).expect("salient id exists").bbox;
            let box_b = &ctx.scene.object(id_b).expect("salient id exists").bbox;
            let d = closest_point_distance(box_a, box_b);
            out.push(Candidate {
                qtype: QType::AbsDist,
                question: templates::abs_dist(cat_a, cat_b),
                answer: format_numeric_answer(QType::AbsDist, d),
                object_ids: vec![id_a, id_b],
                ground_truth_raw: Some(d),
                gate: GateData::PairDistance {
                    max_areas: [ctx.max_area(cat_a), ctx.max_area(cat_b)],
                    salient_instances: [1, 1],
                    value_m: d,
                },
                detail: format!("{cat_a} #{id_a} <-> {cat_b} #{id_b}: {d:.3} m"),
            });
        }
    }
    out
}

/// Which of four candidate categories is nearest to an anchor category,
/// measured instance-set to instance-set ("measure to the closest").
fn gen_rel_dist(ctx: &GenContext, rng: &mut ChaCha8Rng) -> Vec<Candidate> {
    let salient = ctx.index.salient_categories();
    if salient.len() < 5 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for _ in 0..REL_DIST_ATTEMPTS {
        let anchor = *salient.choose(rng).expect("non-empty");
        let mut others: Vec<&str> = salient.iter().copied().filter(|c| *c != anchor).collect();
        others.shuffle(rng);
        others.truncate(4);
        let mut key: Vec<&str> = others.clone();
        key.sort_unstable();
        if !seen.insert((anchor.to_string(), key.join("|"))) {
            continue;
        }
        let dists: Vec<f64> = others.iter().map(|c| ctx.category_distance(anchor, c)).collect();
        let winner_idx = argmin(&dists);
        let mut sorted = dists.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        let choices: [String; 4] = [
            others[0].to_string(),
            others[1].to_string(),
            others[2].to_string(),
            others[3].to_string(),
        ];
        let mut object_ids = vec![ctx.representative(anchor)];
        object_ids.extend(others.iter().map(|c| ctx.representative(c)));
        let mut max_areas = vec![ctx.max_area(anchor)];
        max_areas.extend(others.iter().map(|c| ctx.max_area(c)));
        out.push(Candidate {
            qtype: QType::RelDist,
            question: templates::rel_dist(&choices, anchor),
            answer: others[winner_idx].to_string(),
            object_ids,
            ground_truth_raw: Some(dists[winner_idx]),
            gate: GateData::NearestCategory {
                max_areas,
                winner_m: sorted[0],
                runner_up_m: sorted[1],
            },
            detail: format!(
                "anchor {anchor}, candidates {others:?}, distances {:?}",
                dists.iter().map(|d| (d * 1000.0).round() / 1000.0).collect::<Vec<_>>()
            ),
        });
    }
    out
}

/// Egocentric direction of a querying object for an observer standing by a
/// positioning object and facing an orienting object.
fn gen_rel_dir(
    ctx: &GenContext,
    rng: &mut ChaCha8Rng,
    difficulty: Difficulty,
    qtype: QType,
) -> Vec<Candidate> {
    let unique = ctx.index.unique_categories();
    if unique.len() < 3 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for _ in 0..REL_DIR_ATTEMPTS {
        let triple: Vec<(&str, u32)> = unique.choose_multiple(rng, 3).copied().collect();
        let ids = [triple[0].1, triple[1].1, triple[2].1];
        if !seen.insert(ids) {
            continue;
        }
        let boxes: Vec<_> = ids
            .iter()
            .map(|id| &ctx.scene.object(*id).expect("salient id exists").bbox)
            .collect();
        let pair_distances = [
            closest_point_distance(boxes[0], boxes[1]),
            closest_point_distance(boxes[0], boxes[2]),
            closest_point_distance(boxes[1], boxes[2]),
        ];
        let centroids: Vec<_> = ids
            .iter()
            .map(|id| ground_centroid(ctx.scene.object(*id).expect("salient id exists")))
            .collect();
        let angle = ego_frame_angle(centroids[0], centroids[1], centroids[2]);
        let answer = angle
            .map(|a| classify_direction(a, difficulty).to_string())
            .unwrap_or_default();
        out.push(Candidate {
            qtype,
            question: templates::rel_dir(difficulty, triple[0].0, triple[1].0, triple[2].0),
            answer,
            object_ids: ids.to_vec(),
            ground_truth_raw: angle,
            gate: GateData::Direction {
                max_areas: [
                    ctx.max_area(triple[0].0),
                    ctx.max_area(triple[1].0),
                    ctx.max_area(triple[2].0),
                ],
                salient_instances: [1, 1, 1],
                pair_distances,
                angle_deg: angle,
                difficulty,
            },
            detail: format!(
                "standing {} facing {} querying {}: angle {:?}",
                triple[0].0, triple[1].0, triple[2].0, angle
            ),
        });
    }
    out
}

/// First-appearance order of four categories. The wording lists them in a
/// shuffled order so the listing leaks nothing about the answer.
fn gen_appearance_order(ctx: &GenContext, rng: &mut ChaCha8Rng) -> Vec<Candidate> {
    let appearing: Vec<(&str, u32)> = ctx
        .index
        .categories
        .iter()
        .filter_map(|(c, v)| v.first_frame.map(|f| (c.as_str(), f)))
        .collect();
    if appearing.len() < 4 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for _ in 0..APPEARANCE_ATTEMPTS {
        let mut four: Vec<(&str, u32)> = appearing.choose_multiple(rng, 4).copied().collect();
        four.sort_by_key(|(c, f)| (*f, c.to_string()));
        let key: Vec<&str> = {
            let mut names: Vec<&str> = four.iter().map(|(c, _)| *c).collect();
            names.sort_unstable();
            names
        };
        if !seen.insert(key.join("|")) {
            continue;
        }
        let min_gap = four
            .windows(2)
            .map(|w| w[1].1 - w[0].1)
            .min()
            .expect("four entries");
        let mut listing: [String; 4] = [
            four[0].0.to_string(),
            four[1].0.to_string(),
            four[2].0.to_string(),
            four[3].0.to_string(),
        ];
        listing.shuffle(rng);
        let answer = four
            .iter()
            .map(|(c, _)| *c)
            .collect::<Vec<_>>()
            .join(", ");
        out.push(Candidate {
            qtype: QType::AppearanceOrder,
            question: templates::appearance_order(&listing),
            answer,
            object_ids: four.iter().map(|(c, _)| ctx.representative(c)).collect(),
            ground_truth_raw: None,
            gate: GateData::Appearance {
                min_gap_frames: min_gap,
                subsample_order_holds: order_survives_subsample(
                    ctx.scene,
                    ctx.annotations,
                    &four,
                    ctx.cfg.reference_subsample_frames,
                ),
            },
            detail: format!("first frames {four:?}"),
        });
    }
    out
}

/// Is the stored first-appearance order recoverable from a uniform
/// `n_frames` subsample alone? A category's first appearance can be a brief
/// flash during a turn that a sparse sample skips entirely, or the sample can
/// land on a later, longer sighting of an earlier category and invert the
/// order. Each category must be salient (any instance) in some sampled frame
/// and those earliest sampled frames must be strictly increasing in the
/// stored order. Budgets below two disable the check.
fn order_survives_subsample(
    scene: &Scene,
    annotations: &DenseAnnotations,
    ordered: &[(&str, u32)],
    n_frames: usize,
) -> bool {
    if n_frames < 2 {
        return true;
    }
    let n = annotations.frames.len();
    if n == 0 {
        return false;
    }
    let sampled: BTreeSet<usize> = (0..n_frames).map(|i| i * (n - 1) / (n_frames - 1)).collect();
    let threshold = annotations.config.salience_area_fraction - 1e-12;
    let mut previous: Option<u32> = None;
    for (category, _) in ordered {
        let ids: BTreeSet<u32> = scene
            .objects
            .iter()
            .filter(|o| o.category == *category)
            .map(|o| o.id)
            .collect();
        let first = sampled.iter().find_map(|&f| {
            let frame = &annotations.frames[f];
            frame
                .visible
                .iter()
                .any(|obs| ids.contains(&obs.object_id) && obs.area_fraction >= threshold)
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

/// Which of four categories is nearest to the agent's final position.
fn gen_spatiotemporal(ctx: &GenContext, rng: &mut ChaCha8Rng) -> Vec<Candidate> {
    let salient = ctx.index.salient_categories();
    if salient.len() < 4 {
        return Vec::new();
    }
    let last = ctx.trajectory.poses.last().expect("trajectory has poses");
    let ego = Vec3::new(last.x, last.y, ctx.trajectory.camera.eye_height);
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for _ in 0..SPATIOTEMPORAL_ATTEMPTS {
        let four: Vec<&str> = salient.choose_multiple(rng, 4).copied().collect();
        let key = {
            let mut names = four.clone();
            names.sort_unstable();
            names.join("|")
        };
        if !seen.insert(key) {
            continue;
        }
        let dists: Vec<f64> = four
            .iter()
            .map(|c| {
                ctx.instances_of(c)
                    .iter()
                    .map(|o| point_to_box_distance(ego, &o.bbox))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let winner_idx = argmin(&dists);
        let mut sorted = dists.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        let choices: [String; 4] = [
            four[0].to_string(),
            four[1].to_string(),
            four[2].to_string(),
            four[3].to_string(),
        ];
        out.push(Candidate {
            qtype: QType::SpatiotemporalDist,
            question: templates::spatiotemporal_dist(&choices),
            answer: four[winner_idx].to_string(),
            object_ids: four.iter().map(|c| ctx.representative(c)).collect(),
            ground_truth_raw: Some(dists[winner_idx]),
            gate: GateData::NearestCategory {
                max_areas: four.iter().map(|c| ctx.max_area(c)).collect(),
                winner_m: sorted[0],
                runner_up_m: sorted[1],
            },
            detail: format!("ego ({:.2}, {:.2}), candidates {four:?}", last.x, last.y),
        });
    }
    out
}

/// A turn-by-turn walking plan between two objects, with the turns blanked
/// out for the reader to fill in.
fn gen_route_plan(ctx: &GenContext, rng: &mut ChaCha8Rng) -> Vec<Candidate> {
    let unique = ctx.index.unique_categories();
    if unique.len() < 3 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for _ in 0..ROUTE_ATTEMPTS {
        let triple: Vec<(&str, u32)> = unique.choose_multiple(rng, 3).copied().collect();
        let (start, orienting, end) = (triple[0], triple[1], triple[2]);
        if !seen.insert([start.1, orienting.1, end.1]) {
            continue;
        }
        let max_areas = [
            ctx.max_area(start.0),
            ctx.max_area(orienting.0),
            ctx.max_area(end.0),
        ];
        let start_c = ground_centroid(ctx.scene.object(start.1).expect("salient id"));
        let end_c = ground_centroid(ctx.scene.object(end.1).expect("salient id"));
        let orient_c = ground_centroid(ctx.scene.object(orienting.1).expect("salient id"));
        let route = plan_route(ctx.grid, start_c, orient_c, end_c);
        let (question, answer, path_found, margin) = match &route {
            Some(r) => (
                templates::route_plan(start.0, orienting.0, end.0, &r.actions),
                r.fills.join(", "),
                true,
                r.initial_turn_margin_deg,
            ),
            None => (
                templates::route_plan(start.0, orienting.0, end.0, "1. Go forward."),
                String::new(),
                false,
                0.0,
            ),
        };
        out.push(Candidate {
            qtype: QType::RoutePlan,
            question,
            answer,
            object_ids: vec![start.1, orienting.1, end.1],
            ground_truth_raw: None,
            gate: GateData::Route {
                max_areas,
                salient_instances: [1, 1, 1],
                path_found,
                initial_turn_margin_deg: margin,
            },
            detail: format!(
                "{} -> {} facing {}: {}",
                start.0,
                end.0,
                orienting.0,
                if path_found { "routed" } else { "no path" }
            ),
        });
    }
    out
}

struct Route {
    actions: String,
    fills: Vec<&'static str>,
    initial_turn_margin_deg: f64,
}

/// Discretize the shortest grid path between the free cells nearest the two
/// endpoints into straight runs, and label each heading change as a turn.
/// Grid turns are exact quarter-turns; only the initial turn (from the
/// continuous facing direction toward the orienting object) needs
/// quantization, whose distance to the nearest 45-degree boundary is
/// reported for the gate.
fn plan_route(grid: &NavGrid, start: Vec2, orienting: Vec2, end: Vec2) -> Option<Route> {
    let start_cell = nearest_free_cell(grid, start)?;
    let end_cell = nearest_free_cell(grid, end)?;
    if start_cell == end_cell {
        return None;
    }
    let (dist, parent) = grid.bfs(start_cell);
    if dist[grid.index(end_cell.0, end_cell.1)] == u32::MAX {
        return None;
    }
    let mut cells = vec![end_cell];
    let mut cur = grid.index(end_cell.0, end_cell.1);
    while cur != grid.index(start_cell.0, start_cell.1) {
        cur = parent[cur] as usize;
        cells.push((cur % grid.nx, cur / grid.nx));
    }
    cells.reverse();

    // Headings of the straight runs, in degrees (multiples of 90).
    let mut headings: Vec<f64> = Vec::new();
    for w in cells.windows(2) {
        let dx = w[1].0 as f64 - w[0].0 as f64;
        let dy = w[1].1 as f64 - w[0].1 as f64;
        let h = dy.atan2(dx).to_degrees();
        if headings.last().map_or(true, |last| (*last - h).abs() > 1e-9) {
            headings.push(h);
        }
    }
    debug_assert!(!headings.is_empty(), "distinct cells imply at least one step");

    let facing = orienting.sub(grid.cell_center(start_cell.0, start_cell.1));
    let facing_deg = facing.y.atan2(facing.x).to_degrees();
    let initial_delta = wrap_deg(headings[0] - facing_deg);
    let quantized = (initial_delta / 90.0).round() * 90.0;
    let initial_turn_margin_deg = [45.0, 135.0, -45.0, -135.0]
        .iter()
        .map(|b| circular_diff_deg(initial_delta, *b))
        .fold(f64::INFINITY, f64::min);

    let mut fills: Vec<&'static str> = Vec::new();
    let mut steps: Vec<&'static str> = Vec::new();
    if let Some(turn) = turn_label(quantized) {
        fills.push(turn);
        steps.push("[please fill in]");
    }
    steps.push("Go forward.");
    for w in headings.windows(2) {
        let delta = wrap_deg(w[1] - w[0]);
        let turn = turn_label(delta).expect("distinct runs differ by a quarter- or half-turn");
        fills.push(turn);
        steps.push("[please fill in]");
        steps.push("Go forward.");
    }
    let actions = steps
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{}. {s}", i + 1))
        .collect::<Vec<_>>()
        .join(" ");
    Some(Route {
        actions,
        fills,
        initial_turn_margin_deg,
    })
}

fn turn_label(delta_deg: f64) -> Option<&'static str> {
    if (delta_deg - 90.0).abs() < 1e-6 {
        Some("turn left")
    } else if (delta_deg + 90.0).abs() < 1e-6 {
        Some("turn right")
    } else if delta_deg.abs() > 135.0 {
        Some("turn back")
    } else {
        None
    }
}

fn wrap_deg(mut d: f64) -> f64 {
    d = d.rem_euclid(360.0);
    if d > 180.0 {
        d -= 360.0;
    }
    d
}

fn circular_diff_deg(a: f64, b: f64) -> f64 {
    let mut d = (a - b).rem_euclid(360.0);
    if d > 180.0 {
        d = 360.0 - d;
    }
    d
}

/// Free cell nearest to a point, ties broken lexicographically by (ix, iy).
fn nearest_free_cell(grid: &NavGrid, p: Vec2) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), f64)> = None;
    for ix in 0..grid.nx {
        for iy in 0..grid.ny {
            if !grid.is_free(ix, iy) {
                continue;
            }
            let d = grid.cell_center(ix, iy).dist(p);
            let better = match best {
                None => true,
                Some((_, bd)) => d < bd - 1e-12,
            };
            if better {
                best = Some(((ix, iy), d));
            }
        }
    }
    best.map(|(c, _)| c)
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}
