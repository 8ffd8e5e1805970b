//! Drives the scene-document parser over the committed fixture corpus:
//! one minimal valid document plus twenty single-violation variants, each
//! of which must be rejected with a schema error naming the exact JSON
//! pointer recorded in index.json.

use std::fs;
use std::path::PathBuf;

use serde::Deserialize;

use roomvqa_core::ingest::{parse_scene_doc, IngestError};

#[derive(Deserialize)]
struct IndexEntry {
    file: String,
    expected_path: String,
}

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/ingest")
}

#[test]
fn valid_minimal_document_parses_cleanly() {
    let bytes = fs::read(fixture_dir().join("valid_minimal.json")).expect("fixture present");
    let parsed = parse_scene_doc(&bytes).expect("valid fixture must parse");
    assert!(parsed.warnings.is_empty(), "{:?}", parsed.warnings);
    assert_eq!(parsed.scene.rooms.len(), 2);
    assert_eq!(parsed.scene.objects.len(), 2);
    assert_eq!(parsed.trajectory.poses.len(), 3);
    assert_eq!(parsed.annotations.frames.len(), 3);
    // The pixel-count entry converts against the declared 680x384 resolution.
    let converted = parsed.annotations.frames[2].visible[0].area_fraction;
    assert!(
        (converted - 7834.0 / (680.0 * 384.0)).abs() < 1e-12,
        "pixel conversion produced {converted}"
    );
}

#[test]
fn every_violation_fixture_names_its_offending_path() {
    let dir = fixture_dir();
    let index: Vec<IndexEntry> =
        serde_json::from_slice(&fs::read(dir.join("index.json")).expect("index present"))
            .expect("index parses");
    assert_eq!(index.len(), 20, "fixture corpus must stay at twenty cases");

    let mut listed: Vec<String> = index.iter().map(|e| e.file.clone()).collect();
    listed.sort();
    let mut on_disk: Vec<String> = fs::read_dir(&dir)
        .expect("fixture dir readable")
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "index.json" && n != "valid_minimal.json")
        .collect();
    on_disk.sort();
    assert_eq!(listed, on_disk, "index must cover exactly the files on disk");

    for entry in &index {
        let bytes = fs::read(dir.join(&entry.file)).expect("fixture present");
        let err = parse_scene_doc(&bytes)
            .err()
            .unwrap_or_else(|| panic!("{} must be rejected", entry.file));
        match &err {
            IngestError::Schema { path, .. } => {
                assert_eq!(
                    path, &entry.expected_path,
                    "{} reported the wrong pointer: {err}",
                    entry.file
                );
            }
            other => panic!(
                "{} must fail as a schema error at {}, got: {other}",
                entry.file, entry.expected_path
            ),
        }
        let rendered = err.to_string();
        assert!(
            rendered.starts_with("SCHEMA_ERROR at ") && rendered.contains(&entry.expected_path),
            "{}: unexpected rendering {rendered:?}",
            entry.file
        );
    }
}
