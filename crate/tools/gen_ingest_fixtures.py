#!/usr/bin/env python3
"""Regenerate the scene-document violation fixtures.

Each fixture is the minimal valid document with exactly one mutation applied,
and index.json records the JSON pointer the parser must name when rejecting
it. Run from the repository root:

    python3 tools/gen_ingest_fixtures.py
"""

import copy
import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures/ingest"

BASE = {
    "schema_version": 1,
    "scene": {
        "id": "fixture-minimal",
        "ceiling_height": 2.8,
        "seed": 7,
        "rooms": [
            {
                "id": 0,
                "kind": "bedroom",
                "polygon": [[0.0, 0.0], [4.0, 0.0], [4.0, 3.0], [0.0, 3.0]],
                "center": [2.0, 1.5],
            },
            {
                "id": 1,
                "kind": "office",
                "polygon": [[4.0, 0.0], [7.0, 0.0], [7.0, 3.0], [4.0, 3.0]],
                "center": [5.5, 1.5],
            },
        ],
        "doors": [
            {
                "id": 0,
                "room_a": 0,
                "room_b": 1,
                "segment": [[4.0, 1.0], [4.0, 2.0]],
                "width": 1.0,
            }
        ],
        "objects": [
            {
                "id": 1,
                "category": "bed",
                "center": [1.5, 1.5, 0.4],
                "half_extents": [0.8, 0.6, 0.4],
                "yaw": 0.0,
                "room": 0,
                "placement": "floor",
            },
            {
                "id": 2,
                "category": "desk",
                "center": [5.5, 1.5, 0.35],
                "half_extents": [0.5, 0.4, 0.35],
                "yaw": 0.0,
                "room": 1,
                "placement": "floor",
            },
        ],
    },
    "trajectory": {
        "fps": 10.0,
        "camera": {"width": 680, "height": 384, "hfov_deg": 90.0, "eye_height": 1.5},
        "visit_order": [0, 1],
        "poses": [
            {"frame": 0, "time": 0.0, "x": 3.0, "y": 1.5, "yaw": 0.0},
            {"frame": 1, "time": 0.1, "x": 3.5, "y": 1.5, "yaw": 0.0},
            {"frame": 2, "time": 0.2, "x": 4.5, "y": 1.5, "yaw": 0.0},
        ],
    },
    "observations": {
        "config": {
            "surface_samples": 64,
            "salience_area_fraction": 0.003,
            "max_view_distance": 12.0,
        },
        "resolution": [680, 384],
        "frames": [
            {
                "frame": 0,
                "visible": [
                    {"object": 1, "area_fraction": 0.05, "extent_fraction": 0.2}
                ],
            },
            {"frame": 1, "visible": []},
            {
                "frame": 2,
                "visible": [
                    {"object": 2, "pixel_count": 7834, "extent_fraction": 0.1}
                ],
            },
        ],
    },
}


def missing_schema_version(d):
    del d["schema_version"]


def unsupported_schema_version(d):
    d["schema_version"] = 99


def scene_not_object(d):
    d["scene"] = "compact"


def missing_scene_id(d):
    del d["scene"]["id"]


def rooms_not_array(d):
    d["scene"]["rooms"] = {"count": 2}


def polygon_five_points(d):
    d["scene"]["rooms"][0]["polygon"].append([0.0, 1.0])


def polygon_not_rectangle(d):
    d["scene"]["rooms"][0]["polygon"] = [
        [0.0, 0.0],
        [4.0, 0.5],
        [4.0, 3.0],
        [0.0, 2.5],
    ]


def unknown_room_kind(d):
    d["scene"]["rooms"][1]["kind"] = "garage"


def object_missing_room(d):
    del d["scene"]["objects"][1]["room"]


def object_unknown_room(d):
    d["scene"]["objects"][0]["room"] = 42


def object_center_arity(d):
    d["scene"]["objects"][0]["center"] = [1.5, 1.5]


def negative_half_extent(d):
    d["scene"]["objects"][0]["half_extents"] = [0.8, -0.6, 0.4]


def yaw_as_string(d):
    d["scene"]["objects"][0]["yaw"] = "north"


def missing_fps(d):
    del d["trajectory"]["fps"]


def pose_missing_time(d):
    del d["trajectory"]["poses"][2]["time"]


def pose_frames_not_increasing(d):
    d["trajectory"]["poses"][1]["frame"] = 0


def visit_order_unknown_room(d):
    d["trajectory"]["visit_order"][1] = 9


def missing_observation_frames(d):
    del d["observations"]["frames"]


def both_area_and_pixels(d):
    d["observations"]["frames"][0]["visible"][0]["pixel_count"] = 100


def pixels_without_resolution(d):
    del d["observations"]["resolution"]


FIXTURES = [
    ("01_missing_schema_version", missing_schema_version, "/schema_version"),
    ("02_unsupported_schema_version", unsupported_schema_version, "/schema_version"),
    ("03_scene_not_object", scene_not_object, "/scene"),
    ("04_missing_scene_id", missing_scene_id, "/scene/id"),
    ("05_rooms_not_array", rooms_not_array, "/scene/rooms"),
    ("06_polygon_five_points", polygon_five_points, "/scene/rooms/0/polygon"),
    ("07_polygon_not_rectangle", polygon_not_rectangle, "/scene/rooms/0/polygon"),
    ("08_unknown_room_kind", unknown_room_kind, "/scene/rooms/1/kind"),
    ("09_object_missing_room", object_missing_room, "/scene/objects/1/room"),
    ("10_object_unknown_room", object_unknown_room, "/scene/objects/0/room"),
    ("11_object_center_arity", object_center_arity, "/scene/objects/0/center"),
    ("12_negative_half_extent", negative_half_extent, "/scene/objects/0/half_extents"),
    ("13_yaw_as_string", yaw_as_string, "/scene/objects/0/yaw"),
    ("14_missing_fps", missing_fps, "/trajectory/fps"),
    ("15_pose_missing_time", pose_missing_time, "/trajectory/poses/2/time"),
    ("16_pose_frames_not_increasing", pose_frames_not_increasing, "/trajectory/poses/1/frame"),
    ("17_visit_order_unknown_room", visit_order_unknown_room, "/trajectory/visit_order/1"),
    ("18_missing_observation_frames", missing_observation_frames, "/observations/frames"),
    ("19_both_area_and_pixels", both_area_and_pixels, "/observations/frames/0/visible/0"),
    ("20_pixels_without_resolution", pixels_without_resolution, "/observations/frames/2/visible/0/pixel_count"),
]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "valid_minimal.json", "w") as f:
        json.dump(BASE, f, indent=2)
        f.write("\n")

    index = []
    for name, mutate, expected_path in FIXTURES:
        doc = copy.deepcopy(BASE)
        mutate(doc)
        filename = f"{name}.json"
        with open(OUT / filename, "w") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")
        index.append({"file": filename, "expected_path": expected_path})

    with open(OUT / "index.json", "w") as f:
        json.dump(index, f, indent=2)
        f.write("\n")
    print(f"wrote {len(FIXTURES)} violation fixtures to {OUT}")


if __name__ == "__main__":
    main()
