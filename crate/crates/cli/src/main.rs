//! `roomvqa` command-line entry point.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 validation
//! mismatch, 3 I/O or artifact-load failure. Every subcommand that draws
//! randomness honors `--seed` and is reproducible bit for bit. Flags beat
//! `SIMSV_*` environment variables, which beat the config file, which beats
//! built-in defaults.

mod config;
mod pipeline;
mod render;

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use config::{load_mix_spec, Overrides, PipelineConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config values, over-constrained generation requests.
    Usage(String),
    /// Missing, unreadable, or unparseable files.
    Io(String),
    /// A pipeline stage failed on a specific artifact.
    Stage {
        stage: &'static str,
        artifact: String,
        message: String,
    },
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
            CliError::Stage {
                stage,
                artifact,
                message,
            } => write!(f, "stage {stage} failed on {artifact}: {message}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Stage { .. } => 1,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "roomvqa",
    version,
    about = "Generate spatial video-QA datasets from procedural indoor scenes"
)]
struct Cli {
    /// Pipeline config file (TOML, or JSON with a .json extension).
    #[arg(long, global = true, env = "SIMSV_CONFIG", value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct OverrideArgs {
    /// Root seed for all derived randomness.
    #[arg(long, env = "SIMSV_SEED")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "SIMSV_OUT_DIR", value_name = "DIR")]
    out_dir: Option<String>,
    /// Worker threads (0 = one per core).
    #[arg(long, env = "SIMSV_JOBS")]
    jobs: Option<usize>,
}

impl OverrideArgs {
    fn into_overrides(self) -> Overrides {
        Overrides {
            seed: self.seed,
            out_dir: self.out_dir,
            jobs: self.jobs,
            ..Overrides::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: scenes, tours, annotations, QA, mix, export.
    Gen {
        #[command(flatten)]
        over: OverrideArgs,
        /// Number of scenes to generate.
        #[arg(long, env = "SIMSV_SCENES")]
        scenes: Option<u32>,
        /// Builtin mix name (vsi_baseline, sims_full, three_q).
        #[arg(long, env = "SIMSV_MIX")]
        mix: Option<String>,
        /// Mix spec file; overrides --mix.
        #[arg(long, value_name = "FILE")]
        mix_file: Option<String>,
        /// Dataset size the mix realizes.
        #[arg(long, env = "SIMSV_TOTAL")]
        total: Option<usize>,
    },
    /// Build a question pool from external scene documents.
    Qa {
        /// Scene document JSON files.
        #[arg(required = true, value_name = "DOC")]
        docs: Vec<PathBuf>,
        #[command(flatten)]
        over: OverrideArgs,
    },
    /// Assemble a dataset from a question pool.
    Mix {
        /// Pool JSONL (one question item per line).
        #[arg(long, value_name = "FILE")]
        pool: PathBuf,
        #[command(flatten)]
        over: OverrideArgs,
        /// Builtin mix name (vsi_baseline, sims_full, three_q).
        #[arg(long, env = "SIMSV_MIX")]
        mix: Option<String>,
        /// Mix spec file; overrides --mix.
        #[arg(long, value_name = "FILE")]
        mix_file: Option<String>,
        /// Dataset size the mix realizes.
        #[arg(long, env = "SIMSV_TOTAL")]
        total: Option<usize>,
    },
    /// Export mixed items as instruction-tuning JSONL plus a manifest.
    Export {
        /// Mixed items JSONL (dataset_items.jsonl from gen or mix).
        #[arg(long, value_name = "FILE")]
        items: PathBuf,
        #[command(flatten)]
        over: OverrideArgs,
        /// Mix spec file to record in the manifest; defaults to the realized
        /// bucket fractions of the items themselves.
        #[arg(long, value_name = "FILE")]
        mix_file: Option<String>,
        /// Video path template; {scene_id} and {trajectory_id} substitute.
        #[arg(long)]
        video_template: Option<String>,
    },
    /// Summarize a dataset items file.
    Stats {
        /// Items JSONL (dataset_items.jsonl or qa_pool/pool.jsonl).
        #[arg(value_name = "FILE")]
        items: PathBuf,
        /// Emit the summary as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Replay every answer in a generated dataset against its scenes.
    Validate {
        /// Artifact directory produced by gen.
        #[arg(value_name = "DIR")]
        dir: PathBuf,
        #[command(flatten)]
        over: OverrideArgs,
        /// Frames per subsampled answerability check.
        #[arg(long)]
        subsample: Option<usize>,
        /// Write the JSON report here instead of stdout.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Render a scene (and optionally its tour) as a top-down SVG.
    RenderTopdown {
        /// Scene: a path to a scene JSON, or a scene id under --dir.
        #[arg(value_name = "SCENE")]
        scene: String,
        /// Trajectory: a path or an id under --dir; overlays the tour.
        #[arg(long, value_name = "TRAJECTORY")]
        trajectory: Option<String>,
        /// Artifact directory for id lookups.
        #[arg(long, value_name = "DIR", default_value = "out")]
        dir: PathBuf,
        /// Output SVG path.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Check external scene documents without ingesting them.
    IngestValidate {
        /// Scene document JSON files.
        #[arg(required = true, value_name = "DOC")]
        docs: Vec<PathBuf>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("roomvqa: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let config_path = cli.config.as_deref();
    match cli.command {
        Command::Gen {
            over,
            scenes,
            mix,
            mix_file,
            total,
        } => {
            let overrides = Overrides {
                scenes,
                mix,
                mix_file,
                total,
                ..over.into_overrides()
            };
            let cfg = PipelineConfig::resolve(config_path, &overrides)?;
            pipeline::cmd_gen(&cfg)?;
            Ok(0)
        }
        Command::Qa { docs, over } => {
            let overrides = over.into_overrides();
            let cfg = PipelineConfig::resolve(config_path, &overrides)?;
            pipeline::cmd_qa(&docs, Path::new(&cfg.out_dir), &cfg)?;
            Ok(0)
        }
        Command::Mix {
            pool,
            over,
            mix,
            mix_file,
            total,
        } => {
            let overrides = Overrides {
                mix,
                mix_file,
                total,
                ..over.into_overrides()
            };
            let cfg = PipelineConfig::resolve(config_path, &overrides)?;
            let spec = cfg.mix_spec()?;
            pipeline::cmd_mix(&pool, Path::new(&cfg.out_dir), &spec)?;
            Ok(0)
        }
        Command::Export {
            items,
            over,
            mix_file,
            video_template,
        } => {
            let overrides = over.into_overrides();
            let cfg = PipelineConfig::resolve(config_path, &overrides)?;
            let mut export = cfg.export.clone();
            if let Some(template) = video_template {
                export.video_path_template = template;
            }
            let spec = match mix_file {
                Some(path) => Some(load_mix_spec(Path::new(&path))?),
                None => None,
            };
            pipeline::cmd_export(&items, Path::new(&cfg.out_dir), &export, spec)?;
            Ok(0)
        }
        Command::Stats { items, json } => {
            pipeline::cmd_stats(&items, json)?;
            Ok(0)
        }
        Command::Validate {
            dir,
            over,
            subsample,
            report,
        } => {
            let overrides = over.into_overrides();
            let jobs = overrides.jobs.unwrap_or(0);
            pipeline::cmd_validate(&dir, jobs, subsample, report.as_deref())
        }
        Command::RenderTopdown {
            scene,
            trajectory,
            dir,
            out,
        } => {
            let scene_path = locate(&dir, "scenes", &scene)?;
            let scene: roomvqa_core::scene::Scene = read_json_arg(&scene_path)?;
            let trajectory = match trajectory {
                Some(t) => {
                    let path = locate(&dir, "trajectories", &t)?;
                    Some(read_json_arg::<roomvqa_core::nav::Trajectory>(&path)?)
                }
                None => None,
            };
            let svg = render::scene_svg(&scene, trajectory.as_ref());
            std::fs::write(&out, svg)
                .map_err(|e| CliError::Io(format!("writing {}: {e}", out.display())))?;
            println!("rendered {}", out.display());
            Ok(0)
        }
        Command::IngestValidate { docs } => pipeline::cmd_ingest_validate(&docs),
    }
}

/// Resolve an artifact argument: an existing path wins, otherwise it is
/// treated as an id under `dir/kind/{id}.json`.
fn locate(dir: &Path, kind: &str, arg: &str) -> Result<PathBuf, CliError> {
    let direct = PathBuf::from(arg);
    if direct.is_file() {
        return Ok(direct);
    }
    let by_id = dir.join(kind).join(format!("{arg}.json"));
    if by_id.is_file() {
        return Ok(by_id);
    }
    Err(CliError::Io(format!(
        "no artifact at {} or {}",
        direct.display(),
        by_id.display()
    )))
}

fn read_json_arg<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("parsing {}: {e}", path.display())))
}
