//! Command implementations: the full `gen` pipeline plus the artifact
//! utilities (`qa`, `mix`, `export`, `stats`, `validate`, `ingest-validate`).
//!
//! Artifact layout under the output directory:
//!
//! ```text
//! scenes/{scene_id}.json           one Scene per generated scene
//! trajectories/{trajectory_id}.json
//! annotations/{trajectory_id}.json
//! qa_pool/pool.jsonl               full question pool before mixing
//! rejections.jsonl                 quality-gate and distractor rejections
//! dataset_items.jsonl              the mixed dataset, one QAItem per line
//! dataset.jsonl                    instruction-tuning export of those items
//! manifest.json                    counts, seed, config hash, versions
//! config.json                      the resolved pipeline config, verbatim
//! ```
//!
//! `dataset.jsonl` is what trainers consume; `dataset_items.jsonl` carries
//! the same items with provenance intact so `validate` can replay every
//! answer against the stored scenes without parsing conversation text.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use roomvqa_core::catalog::ObjectCatalog;
use roomvqa_core::export::{build_manifest, compute_stats, export_jsonl, DatasetStats, ExportConfig};
use roomvqa_core::ingest::parse_scene_doc;
use roomvqa_core::mix::{assemble_mix, MixSpec};
use roomvqa_core::nav::{build_navgrid, trajectory_for_scene, NavConfig, Trajectory};
use roomvqa_core::observe::{annotate_trajectory, DenseAnnotations};
use roomvqa_core::oracle::{roundtrip_report, OracleContext, RoundtripReport, DEFAULT_SUBSAMPLE_FRAMES};
use roomvqa_core::qa::{expand_with_multiple_choice, generate_for_trajectory, QAItem, Rejection};
use roomvqa_core::scene::{generate_scene, Scene};
use roomvqa_core::seeds;

use crate::config::PipelineConfig;
use crate::CliError;

// ---------------------------------------------------------------------------
// Artifact I/O helpers.

fn io_err(context: &str, path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{context} {}: {e}", path.display()))
}

fn write_pretty_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| io_err("serializing", path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err("writing", path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err("reading", path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err("parsing", path, e))
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row).map_err(|e| io_err("serializing", path, e))?);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err("writing", path, e))
}

/// Read a JSONL file, reporting the first malformed line by number.
fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err("reading", path, e))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let row: T = serde_json::from_str(line)
            .map_err(|e| CliError::Io(format!("{} line {}: {e}", path.display(), lineno + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}

fn mkdir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| io_err("creating", path, e))
}

// ---------------------------------------------------------------------------
// gen

struct SceneBundle {
    scene: Scene,
    trajectory_id: String,
    trajectory: Trajectory,
    annotations: DenseAnnotations,
    items: Vec<QAItem>,
    rejections: Vec<Rejection>,
}

fn build_scene_bundle(cfg: &PipelineConfig, index: u32) -> Result<SceneBundle, CliError> {
    let mut params = cfg.scene.clone();
    params.seed = seeds::derive(cfg.seed, "scene", index as u64);
    let catalog_owned;
    let catalog: &ObjectCatalog = if params.catalog_ref == "builtin" {
        ObjectCatalog::builtin()
    } else {
        catalog_owned = ObjectCatalog::load(Path::new(&params.catalog_ref))
            .map_err(|e| CliError::Usage(format!("catalog {}: {e}", params.catalog_ref)))?;
        &catalog_owned
    };
    let scene = generate_scene(&params, catalog).map_err(|e| {
        CliError::Stage {
            stage: "scene_forge",
            artifact: format!("scene index {index} (seed {:#x})", params.seed),
            message: e.to_string(),
        }
    })?;
    let (grid, trajectory) =
        trajectory_for_scene(&scene, &cfg.nav, &cfg.speed, &cfg.camera, cfg.fps).map_err(|e| {
            CliError::Stage {
                stage: "nav_trace",
                artifact: scene.id.clone(),
                message: e.to_string(),
            }
        })?;
    let annotations = annotate_trajectory(&scene, &trajectory, &cfg.visibility);
    let trajectory_id = format!("{}-t0", scene.id);
    let output = generate_for_trajectory(
        &scene,
        &grid,
        &trajectory,
        &annotations,
        &trajectory_id,
        &cfg.quality,
    );
    Ok(SceneBundle {
        scene,
        trajectory_id,
        trajectory,
        annotations,
        items: output.items,
        rejections: output.rejections,
    })
}

pub fn cmd_gen(cfg: &PipelineConfig) -> Result<(), CliError> {
    let out = PathBuf::from(&cfg.out_dir);
    for sub in ["scenes", "trajectories", "annotations", "qa_pool"] {
        mkdir(&out.join(sub))?;
    }

    let indices: Vec<u32> = (0..cfg.scenes).collect();
    let bundles: Vec<SceneBundle> = run_parallel(cfg.jobs, &indices, |&i| {
        build_scene_bundle(cfg, i)
    })?;

    for bundle in &bundles {
        write_pretty_json(
            &out.join("scenes").join(format!("{}.json", bundle.scene.id)),
            &bundle.scene,
        )?;
        write_pretty_json(
            &out.join("trajectories")
                .join(format!("{}.json", bundle.trajectory_id)),
            &bundle.trajectory,
        )?;
        write_pretty_json(
            &out.join("annotations")
                .join(format!("{}.json", bundle.trajectory_id)),
            &bundle.annotations,
        )?;
    }

    let open_ended: Vec<QAItem> = bundles.iter().flat_map(|b| b.items.clone()).collect();
    let scene_map: BTreeMap<String, &Scene> = bundles
        .iter()
        .map(|b| (b.scene.id.clone(), &b.scene))
        .collect();
    let (multiple_choice, mc_rejections) = expand_with_multiple_choice(
        &open_ended,
        &scene_map,
        seeds::derive(cfg.seed, "mc", 0),
    );
    let mut pool = open_ended;
    pool.extend(multiple_choice);
    write_jsonl(&out.join("qa_pool").join("pool.jsonl"), &pool)?;

    let mut rejections: Vec<Rejection> =
        bundles.iter().flat_map(|b| b.rejections.clone()).collect();
    rejections.extend(mc_rejections);
    write_jsonl(&out.join("rejections.jsonl"), &rejections)?;

    let spec = cfg.mix_spec()?;
    let dataset = assemble_mix(&pool, &spec).map_err(|e| CliError::Usage(e.to_string()))?;
    write_jsonl(&out.join("dataset_items.jsonl"), &dataset)?;

    let jsonl = export_jsonl(&dataset, &cfg.export);
    fs::write(out.join("dataset.jsonl"), jsonl)
        .map_err(|e| io_err("writing", &out.join("dataset.jsonl"), e))?;
    let manifest = build_manifest(&dataset, &spec, &cfg.export);
    write_pretty_json(&out.join("manifest.json"), &manifest)?;
    write_pretty_json(&out.join("config.json"), cfg)?;

    println!(
        "generated {} scenes, pool of {} items, dataset of {} at {}",
        bundles.len(),
        pool.len(),
        dataset.len(),
        out.display()
    );
    Ok(())
}

/// Map a fallible function over inputs with bounded scene-level parallelism.
/// Results keep input order, so downstream artifacts are independent of
/// thread scheduling; 0 jobs means one worker per core.
fn run_parallel<I: Sync, O: Send>(
    jobs: usize,
    inputs: &[I],
    f: impl Fn(&I) -> Result<O, CliError> + Sync,
) -> Result<Vec<O>, CliError> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| inputs.par_iter().map(&f).collect())
}

// ---------------------------------------------------------------------------
// qa (pool from ingested scene documents)

pub fn cmd_qa(
    docs: &[PathBuf],
    out_dir: &Path,
    cfg: &PipelineConfig,
) -> Result<(), CliError> {
    if docs.is_empty() {
        return Err(CliError::Usage("no scene documents given".into()));
    }
    mkdir(out_dir)?;
    let mut parsed = Vec::new();
    for path in docs {
        let bytes = fs::read(path).map_err(|e| io_err("reading", path, e))?;
        let doc = parse_scene_doc(&bytes)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        for warning in &doc.warnings {
            eprintln!("{}: {warning}", path.display());
        }
        parsed.push(doc);
    }

    let mut open_ended = Vec::new();
    let mut rejections = Vec::new();
    for doc in &parsed {
        let grid = build_navgrid(&doc.scene, &cfg.nav).map_err(|e| CliError::Stage {
            stage: "nav_trace",
            artifact: doc.scene.id.clone(),
            message: e.to_string(),
        })?;
        let trajectory_id = format!("{}-t0", doc.scene.id);
        let output = generate_for_trajectory(
            &doc.scene,
            &grid,
            &doc.trajectory,
            &doc.annotations,
            &trajectory_id,
            &cfg.quality,
        );
        open_ended.extend(output.items);
        rejections.extend(output.rejections);
    }
    let scene_map: BTreeMap<String, &Scene> = parsed
        .iter()
        .map(|doc| (doc.scene.id.clone(), &doc.scene))
        .collect();
    let (multiple_choice, mc_rejections) =
        expand_with_multiple_choice(&open_ended, &scene_map, seeds::derive(cfg.seed, "mc", 0));
    let mut pool = open_ended;
    pool.extend(multiple_choice);
    rejections.extend(mc_rejections);

    write_jsonl(&out_dir.join("pool.jsonl"), &pool)?;
    write_jsonl(&out_dir.join("rejections.jsonl"), &rejections)?;
    println!(
        "pooled {} items from {} documents at {}",
        pool.len(),
        parsed.len(),
        out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// mix

pub fn cmd_mix(pool_path: &Path, out_dir: &Path, spec: &MixSpec) -> Result<(), CliError> {
    let pool: Vec<QAItem> = read_jsonl(pool_path)?;
    let dataset = assemble_mix(&pool, spec).map_err(|e| CliError::Usage(e.to_string()))?;
    mkdir(out_dir)?;
    write_jsonl(&out_dir.join("dataset_items.jsonl"), &dataset)?;
    write_pretty_json(&out_dir.join("mixspec.json"), spec)?;
    println!(
        "mixed {} of {} pooled items at {}",
        dataset.len(),
        pool.len(),
        out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// export

pub fn cmd_export(
    items_path: &Path,
    out_dir: &Path,
    export: &ExportConfig,
    spec: Option<MixSpec>,
) -> Result<(), CliError> {
    let items: Vec<QAItem> = read_jsonl(items_path)?;
    if items.is_empty() {
        return Err(CliError::Usage(format!(
            "{} holds no items",
            items_path.display()
        )));
    }
    // Without an explicit spec, describe what is actually there so the
    // manifest hash still pins real content proportions.
    let spec = match spec {
        Some(s) => s,
        None => {
            let stats = compute_stats(&items);
            MixSpec {
                name: "adhoc".into(),
                total: items.len(),
                weights: stats.bucket_fractions,
                seed: 0,
            }
        }
    };
    mkdir(out_dir)?;
    fs::write(out_dir.join("dataset.jsonl"), export_jsonl(&items, export))
        .map_err(|e| io_err("writing", &out_dir.join("dataset.jsonl"), e))?;
    write_pretty_json(
        &out_dir.join("manifest.json"),
        &build_manifest(&items, &spec, export),
    )?;
    println!("exported {} items at {}", items.len(), out_dir.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// stats

pub fn cmd_stats(items_path: &Path, json: bool) -> Result<(), CliError> {
    let items: Vec<QAItem> = read_jsonl(items_path)?;
    let stats = compute_stats(&items);
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&stats).expect("stats serialize")
        );
    } else {
        print_stats_table(&stats);
    }
    Ok(())
}

fn print_stats_table(stats: &DatasetStats) {
    println!(
        "total {}   scenes {}   trajectories {}",
        stats.total, stats.scenes, stats.trajectories
    );
    println!("{:<24} {:>8} {:>9}", "bucket", "count", "fraction");
    for (bucket, count) in &stats.bucket_counts {
        let fraction = stats.bucket_fractions.get(bucket).copied().unwrap_or(0.0);
        println!("{bucket:<24} {count:>8} {:>8.2}%", fraction * 100.0);
    }
    if !stats.letter_histogram.is_empty() {
        let per_letter: Vec<String> = stats
            .letter_histogram
            .iter()
            .map(|(letter, n)| format!("{letter} {n}"))
            .collect();
        println!("letters: {}", per_letter.join("   "));
    }
    for (qtype, summary) in &stats.numeric_answers {
        println!(
            "{qtype:<24} numeric n={} min={} max={} mean={:.4}",
            summary.count, summary.min, summary.max, summary.mean
        );
    }
}

// ---------------------------------------------------------------------------
// validate

pub struct LoadedArtifacts {
    scenes: BTreeMap<String, Scene>,
    trajectories: BTreeMap<String, Trajectory>,
    annotations: BTreeMap<String, DenseAnnotations>,
    nav: NavConfig,
}

fn read_dir_json<T: DeserializeOwned>(dir: &Path) -> Result<BTreeMap<String, T>, CliError> {
    let mut out = BTreeMap::new();
    let entries = fs::read_dir(dir).map_err(|e| io_err("listing", dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    for path in paths {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.insert(stem, read_json(&path)?);
    }
    Ok(out)
}

pub fn load_artifacts(dir: &Path) -> Result<LoadedArtifacts, CliError> {
    // Replaying routes needs the same nav grid the generator walked; the
    // resolved config is written next to the dataset for exactly this.
    let nav = match read_json::<PipelineConfig>(&dir.join("config.json")) {
        Ok(cfg) => cfg.nav,
        Err(_) => NavConfig::default(),
    };
    Ok(LoadedArtifacts {
        scenes: read_dir_json(&dir.join("scenes"))?,
        trajectories: read_dir_json(&dir.join("trajectories"))?,
        annotations: read_dir_json(&dir.join("annotations"))?,
        nav,
    })
}

pub fn validate_report(
    items: &[QAItem],
    artifacts: &LoadedArtifacts,
    subsample_frames: usize,
) -> RoundtripReport {
    roundtrip_report(
        items,
        |item| {
            let scene = artifacts.scenes.get(&item.provenance.scene_id)?;
            let trajectory = artifacts.trajectories.get(&item.provenance.trajectory_id)?;
            let annotations = artifacts.annotations.get(&item.provenance.trajectory_id)?;
            Some(OracleContext {
                scene,
                trajectory,
                annotations,
                nav: &artifacts.nav,
            })
        },
        subsample_frames,
    )
}

pub fn cmd_validate(
    dir: &Path,
    jobs: usize,
    subsample_frames: Option<usize>,
    report_path: Option<&Path>,
) -> Result<i32, CliError> {
    let items: Vec<QAItem> = read_jsonl(&dir.join("dataset_items.jsonl"))?;
    let artifacts = load_artifacts(dir)?;
    let frames = subsample_frames.unwrap_or(DEFAULT_SUBSAMPLE_FRAMES);
    let report = run_parallel(jobs, &[()], |_| {
        Ok(validate_report(&items, &artifacts, frames))
    })?
    .pop()
    .expect("one report");

    let rendered = serde_json::to_string_pretty(&report).expect("report serializes");
    match report_path {
        Some(path) => {
            fs::write(path, rendered + "\n").map_err(|e| io_err("writing", path, e))?
        }
        None => println!("{rendered}"),
    }
    eprintln!(
        "validated {}: {} matched, {} mismatched, {} load errors",
        report.total,
        report.matches,
        report.mismatched_ids.len(),
        report.load_errors.len()
    );
    Ok(report.exit_code())
}

// ---------------------------------------------------------------------------
// ingest-validate

pub fn cmd_ingest_validate(paths: &[PathBuf]) -> Result<i32, CliError> {
    if paths.is_empty() {
        return Err(CliError::Usage("no documents given".into()));
    }
    let mut violations = 0usize;
    for path in paths {
        let bytes = fs::read(path).map_err(|e| io_err("reading", path, e))?;
        match parse_scene_doc(&bytes) {
            Ok(doc) => {
                for warning in &doc.warnings {
                    eprintln!("{}: {warning}", path.display());
                }
                println!(
                    "OK   {} ({} rooms, {} objects, {} poses)",
                    path.display(),
                    doc.scene.rooms.len(),
                    doc.scene.objects.len(),
                    doc.trajectory.poses.len()
                );
            }
            Err(e) => {
                violations += 1;
                println!("FAIL {}: {e}", path.display());
            }
        }
    }
    Ok(if violations > 0 { 2 } else { 0 })
}
