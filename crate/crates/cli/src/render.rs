//! Deterministic top-down SVG rendering for debugging scenes and tours.
//!
//! Pure text assembly: fixed scale, fixed palette, coordinates printed with
//! fixed precision, so the same inputs always produce the same bytes. The
//! scene's y axis points up; SVG's points down, so y is flipped during
//! projection.

use std::fmt::Write;

use roomvqa_core::nav::Trajectory;
use roomvqa_core::scene::{RoomKind, Scene};

/// Pixels per meter.
const SCALE: f64 = 100.0;
/// Border around the scene bounds, meters.
const MARGIN: f64 = 0.5;
/// A rotation tick is drawn every this many poses.
const MARKER_STRIDE: usize = 25;
/// Tick length, meters.
const MARKER_LEN: f64 = 0.3;

fn fill_for(kind: RoomKind) -> &'static str {
    match kind {
        RoomKind::Bedroom => "#dbe9f6",
        RoomKind::Kitchen => "#fdebd0",
        RoomKind::Livingroom => "#e8f6e0",
        RoomKind::Bathroom => "#e4e0f6",
        RoomKind::Office => "#f6e0ea",
        RoomKind::Hallway => "#f0f0e8",
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Projector {
    min_x: f64,
    max_y: f64,
}

impl Projector {
    fn px(&self, x: f64) -> f64 {
        (x - self.min_x + MARGIN) * SCALE
    }
    fn py(&self, y: f64) -> f64 {
        (self.max_y - y + MARGIN) * SCALE
    }
}

/// Drop interior vertices that lie on the segment between their neighbors.
/// Applied to the pose list before drawing: long straight walks collapse to
/// their endpoints while turns (and the start/end) survive.
pub fn simplify_collinear(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= 2 {
        return points.to_vec();
    }
    let mut kept = vec![points[0]];
    for i in 1..points.len() - 1 {
        let (ax, ay) = *kept.last().unwrap();
        let (bx, by) = points[i];
        let (cx, cy) = points[i + 1];
        let cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
        if cross.abs() > 1e-9 {
            kept.push(points[i]);
        }
    }
    kept.push(*points.last().unwrap());
    kept
}

/// Render a scene, optionally with a tour overlay, as a standalone SVG.
pub fn scene_svg(scene: &Scene, trajectory: Option<&Trajectory>) -> String {
    let mut min_x = f64::INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for room in &scene.rooms {
        min_x = min_x.min(room.footprint.min.x);
        min_y = min_y.min(room.footprint.min.y);
        max_x = max_x.max(room.footprint.max.x);
        max_y = max_y.max(room.footprint.max.y);
    }
    let p = Projector { min_x, max_y };
    let width = (max_x - min_x + 2.0 * MARGIN) * SCALE;
    let height = (max_y - min_y + 2.0 * MARGIN) * SCALE;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width:.1} {height:.1}\" \
         width=\"{width:.1}\" height=\"{height:.1}\">"
    );
    let _ = writeln!(svg, "<g id=\"rooms\">");
    for room in &scene.rooms {
        let x = p.px(room.footprint.min.x);
        let y = p.py(room.footprint.max.y);
        let w = (room.footprint.max.x - room.footprint.min.x) * SCALE;
        let h = (room.footprint.max.y - room.footprint.min.y) * SCALE;
        let _ = writeln!(
            svg,
            "<rect class=\"room\" x=\"{x:.1}\" y=\"{y:.1}\" width=\"{w:.1}\" height=\"{h:.1}\" \
             fill=\"{}\" stroke=\"#444444\" stroke-width=\"3\"/>",
            fill_for(room.kind)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"14\" fill=\"#666666\" \
             text-anchor=\"middle\">{} {}</text>",
            p.px(room.center.x),
            p.py(room.center.y),
            escape(room.kind.as_str()),
            room.id
        );
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, "<g id=\"doors\">");
    for door in &scene.doors {
        let _ = writeln!(
            svg,
            "<line class=\"door\" x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" \
             stroke=\"#ffffff\" stroke-width=\"6\"/>",
            p.px(door.segment.a.x),
            p.py(door.segment.a.y),
            p.px(door.segment.b.x),
            p.py(door.segment.b.y)
        );
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, "<g id=\"objects\">");
    for object in &scene.objects {
        let corners = object.bbox.footprint();
        let points: Vec<String> = corners
            .iter()
            .map(|c| format!("{:.1},{:.1}", p.px(c.x), p.py(c.y)))
            .collect();
        let _ = writeln!(
            svg,
            "<polygon class=\"object\" points=\"{}\" fill=\"#b0c4d880\" stroke=\"#335577\" \
             stroke-width=\"1\"/>",
            points.join(" ")
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"8\" fill=\"#223344\" \
             text-anchor=\"middle\">{}</text>",
            p.px(object.bbox.center.x),
            p.py(object.bbox.center.y),
            escape(&object.category)
        );
    }
    let _ = writeln!(svg, "</g>");

    if let Some(traj) = trajectory {
        let raw: Vec<(f64, f64)> = traj.poses.iter().map(|pose| (pose.x, pose.y)).collect();
        let kept = simplify_collinear(&raw);
        let points: Vec<String> = kept
            .iter()
            .map(|(x, y)| format!("{:.1},{:.1}", p.px(*x), p.py(*y)))
            .collect();
        let _ = writeln!(svg, "<g id=\"trajectory\">");
        let _ = writeln!(
            svg,
            "<polyline class=\"path\" points=\"{}\" fill=\"none\" stroke=\"#cc3333\" \
             stroke-width=\"2\"/>",
            points.join(" ")
        );
        for pose in traj.poses.iter().step_by(MARKER_STRIDE) {
            let tip_x = pose.x + MARKER_LEN * pose.yaw.cos();
            let tip_y = pose.y + MARKER_LEN * pose.yaw.sin();
            let _ = writeln!(
                svg,
                "<line class=\"heading\" x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" \
                 stroke=\"#cc3333\" stroke-width=\"1\"/>",
                p.px(pose.x),
                p.py(pose.y),
                p.px(tip_x),
                p.py(tip_y)
            );
        }
        if let Some(first) = traj.poses.first() {
            let _ = writeln!(
                svg,
                "<circle class=\"start\" cx=\"{:.1}\" cy=\"{:.1}\" r=\"5\" fill=\"#cc3333\"/>",
                p.px(first.x),
                p.py(first.y)
            );
        }
        let _ = writeln!(svg, "</g>");
    }

    svg.push_str("</svg>\n");
    svg
}
