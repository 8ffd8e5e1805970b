//! Instruction-tuning export.
//!
//! Turns assembled QA items into conversation records — one JSON object per
//! line — plus a manifest and a statistics report. Prompt assembly is
//! byte-exact and pinned by golden tests: the human turn is the pre-prompt,
//! the question, lettered choice lines for multiple-choice items, and the
//! format-specific post-prompt, joined by single newlines. Records carry no
//! floats, so plain struct serialization is already deterministic; manifest
//! and stats go through canonical JSON.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::canon::to_canonical_json;
use crate::mix::{bucket_key, MixSpec};
use crate::qa::{templates, Format, QAItem, LETTERS};

/// How records are rendered. The defaults mirror the prompts the question
/// templates were written against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExportConfig {
    /// Video path for each record; `{scene_id}` and `{trajectory_id}`
    /// placeholders are substituted per item.
    pub video_path_template: String,
    pub pre_prompt: String,
    pub post_prompt_open: String,
    pub post_prompt_choice: String,
}

impl Default for ExportConfig {
    fn default() -> Self {
        ExportConfig {
            video_path_template: "videos/{trajectory_id}.mp4".into(),
            pre_prompt: templates::PRE_PROMPT.into(),
            post_prompt_open: templates::POST_PROMPT_OPEN.into(),
            post_prompt_choice: templates::POST_PROMPT_CHOICE.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationTurn {
    pub from: String,
    pub value: String,
}

/// One dataset line: field order is fixed by this struct and must not be
/// reordered, or existing datasets stop being byte-reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub video: String,
    pub conversations: Vec<ConversationTurn>,
}

/// Render one item to its conversation record.
///
/// Open-ended answers are emitted verbatim; multiple-choice answers are the
/// correct option's letter, matching what the choice post-prompt asks for.
pub fn render_record(item: &QAItem, cfg: &ExportConfig) -> DatasetRecord {
    let video = cfg
        .video_path_template
        .replace("{scene_id}", &item.provenance.scene_id)
        .replace("{trajectory_id}", &item.provenance.trajectory_id);
    let mut human = String::new();
    human.push_str(&cfg.pre_prompt);
    human.push('\n');
    human.push_str(&item.question);
    let assistant = match item.format {
        Format::OpenEnded => {
            human.push('\n');
            human.push_str(&cfg.post_prompt_open);
            item.answer.clone()
        }
        Format::MultipleChoice => {
            let choices = item
                .choices
                .as_ref()
                .expect("multiple-choice item carries choices");
            for (letter, choice) in LETTERS.iter().zip(choices) {
                human.push('\n');
                human.push_str(&format!("{letter}. {choice}"));
            }
            human.push('\n');
            human.push_str(&cfg.post_prompt_choice);
            item.correct_letter
                .expect("multiple-choice item carries its letter")
                .to_string()
        }
    };
    DatasetRecord {
        id: item.id.clone(),
        video,
        conversations: vec![
            ConversationTurn {
                from: "human".into(),
                value: human,
            },
            ConversationTurn {
                from: "gpt".into(),
                value: assistant,
            },
        ],
    }
}

/// Render the whole dataset as JSONL (one record per line, trailing newline).
pub fn export_jsonl(items: &[QAItem], cfg: &ExportConfig) -> String {
    let mut out = String::new();
    for item in items {
        let record = render_record(item, cfg);
        out.push_str(&serde_json::to_string(&record).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Dataset manifest: what was built, from which seed, under which config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset: String,
    pub total: usize,
    pub seed: u64,
    pub bucket_counts: BTreeMap<String, usize>,
    /// SHA-256 of the canonical JSON of the mix spec and export config, so
    /// two manifests agree exactly when the inputs that shaped the dataset
    /// agree.
    pub config_sha256: String,
    pub generator: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash the parts of the configuration that determine dataset content.
pub fn config_digest(mix: &MixSpec, export: &ExportConfig) -> String {
    #[derive(Serialize)]
    struct Envelope<'a> {
        export: &'a ExportConfig,
        mix: &'a MixSpec,
    }
    let canonical = to_canonical_json(&Envelope { export, mix });
    let mut h = Sha256::new();
    h.update(canonical.as_bytes());
    hex(&h.finalize())
}

pub fn build_manifest(items: &[QAItem], mix: &MixSpec, export: &ExportConfig) -> Manifest {
    let mut bucket_counts: BTreeMap<String, usize> = BTreeMap::new();
    for item in items {
        *bucket_counts
            .entry(bucket_key(item.qtype, item.format))
            .or_default() += 1;
    }
    Manifest {
        dataset: mix.name.clone(),
        total: items.len(),
        seed: mix.seed,
        bucket_counts,
        config_sha256: config_digest(mix, export),
        generator: format!("roomvqa-core {}", env!("CARGO_PKG_VERSION")),
    }
}

/// Summary of the numeric answers of one question type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericSummary {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// Descriptive statistics over an assembled dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total: usize,
    pub bucket_counts: BTreeMap<String, usize>,
    pub bucket_fractions: BTreeMap<String, f64>,
    /// Correct-letter counts over the multiple-choice subset.
    pub letter_histogram: BTreeMap<String, usize>,
    pub numeric_answers: BTreeMap<String, NumericSummary>,
    pub scenes: usize,
    pub trajectories: usize,
}

pub fn compute_stats(items: &[QAItem]) -> DatasetStats {
    let mut bucket_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut letter_histogram: BTreeMap<String, usize> = BTreeMap::new();
    let mut numeric: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut scenes: BTreeSet<&str> = BTreeSet::new();
    let mut trajectories: BTreeSet<&str> = BTreeSet::new();
    for item in items {
        *bucket_counts
            .entry(bucket_key(item.qtype, item.format))
            .or_default() += 1;
        if let Some(letter) = item.correct_letter {
            *letter_histogram.entry(letter.to_string()).or_default() += 1;
        }
        if item.qtype.is_numeric() {
            let value: f64 = item
                .answer
                .parse()
                .expect("numeric question answers parse as numbers");
            numeric.entry(item.qtype.as_str().into()).or_default().push(value);
        }
        scenes.insert(&item.provenance.scene_id);
        trajectories.insert(&item.provenance.trajectory_id);
    }
    let total = items.len();
    let bucket_fractions = bucket_counts
        .iter()
        .map(|(k, v)| (k.clone(), *v as f64 / total as f64))
        .collect();
    let numeric_answers = numeric
        .into_iter()
        .map(|(k, values)| {
            let count = values.len();
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mean = values.iter().sum::<f64>() / count as f64;
            (k, NumericSummary { count, min, max, mean })
        })
        .collect();
    DatasetStats {
        total,
        bucket_counts,
        bucket_fractions,
        letter_histogram,
        numeric_answers,
        scenes: scenes.len(),
        trajectories: trajectories.len(),
    }
}
