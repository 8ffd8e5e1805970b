//! Pipeline configuration: file, environment, and flag merging.
//!
//! Resolution order is flags over `SIMSV_*` environment variables over the
//! config file over built-in defaults. Flag/env handling happens in the
//! clap layer (each override flag reads its `SIMSV_` variable), so this
//! module only merges "explicit value beats file" and loads the file
//! itself. Config files are TOML by default; a `.json` extension switches
//! to JSON with identical structure.

use std::path::Path;

use serde::{Deserialize, Serialize};

use roomvqa_core::export::ExportConfig;
use roomvqa_core::mix::MixSpec;
use roomvqa_core::nav::{CameraConfig, NavConfig, SpeedConfig};
use roomvqa_core::observe::VisibilityConfig;
use roomvqa_core::qa::QualityConfig;
use roomvqa_core::scene::SceneParams;

use crate::CliError;

/// Everything `gen` needs to run the pipeline end to end. Nested sections
/// all have working defaults, so an empty file (or none at all) is valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Root seed; every scene, shuffle, and distractor draw derives from it.
    pub seed: u64,
    /// Number of scenes to generate. Each scene yields one tour.
    pub scenes: u32,
    pub out_dir: String,
    /// Worker threads for scene-level parallelism; 0 means one per core.
    pub jobs: usize,
    /// Trajectory frame rate.
    pub fps: f64,
    /// Scene generation parameters. The `seed` field inside is ignored:
    /// per-scene seeds are derived from the root seed and the scene index.
    pub scene: SceneParams,
    pub nav: NavConfig,
    pub speed: SpeedConfig,
    pub camera: CameraConfig,
    pub visibility: VisibilityConfig,
    pub quality: QualityConfig,
    pub mix: MixRef,
    pub export: ExportConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            scenes: 20,
            out_dir: "out".into(),
            jobs: 0,
            fps: 10.0,
            scene: SceneParams::default(),
            nav: NavConfig::default(),
            speed: SpeedConfig::default(),
            camera: CameraConfig::default(),
            visibility: VisibilityConfig::default(),
            quality: QualityConfig::default(),
            mix: MixRef::default(),
            export: ExportConfig::default(),
        }
    }
}

/// Which mix to assemble: a builtin by name, or a spec file. When `file` is
/// set it wins and `name`/`total` are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixRef {
    pub name: String,
    pub total: usize,
    pub file: Option<String>,
}

impl Default for MixRef {
    fn default() -> Self {
        MixRef {
            name: "vsi_baseline".into(),
            total: 1000,
            file: None,
        }
    }
}

/// Flag/env overrides for the top-level knobs, as captured by clap.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub scenes: Option<u32>,
    pub out_dir: Option<String>,
    pub jobs: Option<usize>,
    pub mix: Option<String>,
    pub mix_file: Option<String>,
    pub total: Option<usize>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading config {}: {e}", path.display())))?;
        let is_json = path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
        let cfg: PipelineConfig = if is_json {
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?
        } else {
            toml::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?
        };
        Ok(cfg)
    }

    /// Load the file if given, then lay explicit flag/env values on top.
    pub fn resolve(path: Option<&Path>, over: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(seed) = over.seed {
            cfg.seed = seed;
        }
        if let Some(scenes) = over.scenes {
            cfg.scenes = scenes;
        }
        if let Some(out_dir) = &over.out_dir {
            cfg.out_dir = out_dir.clone();
        }
        if let Some(jobs) = over.jobs {
            cfg.jobs = jobs;
        }
        if let Some(mix) = &over.mix {
            cfg.mix.name = mix.clone();
            cfg.mix.file = None;
        }
        if let Some(file) = &over.mix_file {
            cfg.mix.file = Some(file.clone());
        }
        if let Some(total) = over.total {
            cfg.mix.total = total;
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        if self.scenes < 1 {
            return Err(CliError::Usage("scenes must be at least 1".into()));
        }
        if self.mix.total < 1 {
            return Err(CliError::Usage("mix total must be at least 1".into()));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(CliError::Usage(format!("fps must be positive, got {}", self.fps)));
        }
        Ok(())
    }

    /// Materialize the mix spec this config points at.
    pub fn mix_spec(&self) -> Result<MixSpec, CliError> {
        if let Some(file) = &self.mix.file {
            return load_mix_spec(Path::new(file));
        }
        builtin_mix(&self.mix.name, self.mix.total, self.seed)
    }
}

pub fn builtin_mix(name: &str, total: usize, seed: u64) -> Result<MixSpec, CliError> {
    match name {
        "vsi_baseline" => Ok(MixSpec::vsi_baseline(total, seed)),
        "sims_full" => Ok(MixSpec::sims_full(total, seed)),
        "three_q" | "three_question" => Ok(MixSpec::three_question(total, seed)),
        other => Err(CliError::Usage(format!(
            "unknown mix {other:?}; builtins are vsi_baseline, sims_full, three_q"
        ))),
    }
}

/// Mix spec files follow the same TOML-or-JSON convention as configs.
pub fn load_mix_spec(path: &Path) -> Result<MixSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading mix spec {}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
    let spec: MixSpec = if is_json {
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("mix spec {}: {e}", path.display())))?
    } else {
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("mix spec {}: {e}", path.display())))?
    };
    spec.validate()
        .map_err(|e| CliError::Usage(format!("mix spec {}: {e}", path.display())))?;
    Ok(spec)
}
