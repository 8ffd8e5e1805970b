//! Dataset mix assembly.
//!
//! A mix specification names how many items the dataset should have and what
//! fraction falls in each (question type, format) bucket. Quotas come from
//! the largest-remainder method, so realized counts never deviate from the
//! ideal share by a whole item; bucket members are then sampled without
//! replacement from seeded substreams and the result is shuffled once more,
//! so the same pool and spec always assemble the byte-identical dataset,
//! regardless of pool ordering.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qa::{Format, QAItem, QType};
use crate::seeds;

/// Tolerance for the weight-sum-to-one check.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// A dataset mix: total size plus per-bucket fractions that sum to one.
///
/// Bucket keys are `"{qtype}/{oe|mc}"`, e.g. `"abs_dist/oe"` or
/// `"rel_dir_hard/mc"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixSpec {
    pub name: String,
    pub total: usize,
    pub weights: BTreeMap<String, f64>,
    pub seed: u64,
}

/// Canonical bucket key of a (type, format) pair.
pub fn bucket_key(qtype: QType, format: Format) -> String {
    format!("{}/{}", qtype.as_str(), format.id_tag())
}

/// Parse a bucket key back into its (type, format) pair.
pub fn parse_bucket(key: &str) -> Option<(QType, Format)> {
    let (q, f) = key.rsplit_once('/')?;
    let qtype = QType::parse(q)?;
    let format = match f {
        "oe" => Format::OpenEnded,
        "mc" => Format::MultipleChoice,
        _ => return None,
    };
    Some((qtype, format))
}

#[derive(Debug, Error)]
pub enum MixError {
    #[error("BAD_WEIGHTS: {0}")]
    BadWeights(String),
    #[error("INSUFFICIENT_POOL: bucket {bucket} has {have} items, needs {need}")]
    InsufficientPool {
        bucket: String,
        have: usize,
        need: usize,
    },
}

impl MixSpec {
    /// The reference evaluation mix: open-ended numeric questions plus
    /// multiple-choice comparative ones, in the proportions of the benchmark
    /// it mirrors (direction questions split evenly across difficulties,
    /// route planning absent). The published shares sum to 99.9%, so they
    /// are renormalized here to an exact one.
    pub fn vsi_baseline(total: usize, seed: u64) -> MixSpec {
        let raw: [(QType, Format, f64); 9] = [
            (QType::ObjCount, Format::OpenEnded, 11.4),
            (QType::ObjSize, Format::OpenEnded, 19.3),
            (QType::RoomSize, Format::OpenEnded, 5.8),
            (QType::AbsDist, Format::OpenEnded, 16.9),
            (QType::RelDist, Format::MultipleChoice, 14.4),
            (QType::RelDirEasy, Format::MultipleChoice, 19.6 / 3.0),
            (QType::RelDirMed, Format::MultipleChoice, 19.6 / 3.0),
            (QType::RelDirHard, Format::MultipleChoice, 19.6 / 3.0),
            (QType::AppearanceOrder, Format::MultipleChoice, 12.5),
        ];
        let sum: f64 = raw.iter().map(|(_, _, w)| w).sum();
        let weights = raw
            .iter()
            .map(|(q, f, w)| (bucket_key(*q, *f), w / sum))
            .collect();
        MixSpec {
            name: "vsi_baseline".into(),
            total,
            weights,
            seed,
        }
    }

    /// The full-scale dataset shape: nine question types in both formats,
    /// uniformly weighted except room size, which runs at one fifth of the
    /// others because it is scene-level rather than object-level (one
    /// question per tour, not one per object pair).
    pub fn sims_full(total: usize, seed: u64) -> MixSpec {
        let types = [
            QType::ObjCount,
            QType::ObjSize,
            QType::RoomSize,
            QType::AbsDist,
            QType::RelDist,
            QType::RelDirEasy,
            QType::RelDirMed,
            QType::RelDirHard,
            QType::AppearanceOrder,
        ];
        // Eight object-level types at five shares per format plus room size
        // at one: 2 x (8 x 5 + 1) = 82 shares.
        let unit = 1.0 / 82.0;
        let mut weights = BTreeMap::new();
        for qtype in types {
            let w = if qtype == QType::RoomSize { unit } else { 5.0 * unit };
            weights.insert(bucket_key(qtype, Format::OpenEnded), w);
            weights.insert(bucket_key(qtype, Format::MultipleChoice), w);
        }
        MixSpec {
            name: "sims_full".into(),
            total,
            weights,
            seed,
        }
    }

    /// A minimal three-way mix for quick experiments: one numeric open-ended
    /// type, one direction type, one ordering type, in equal shares.
    pub fn three_question(total: usize, seed: u64) -> MixSpec {
        let third = 1.0 / 3.0;
        let weights = BTreeMap::from([
            (bucket_key(QType::AbsDist, Format::OpenEnded), third),
            (bucket_key(QType::RelDirHard, Format::MultipleChoice), third),
            (
                bucket_key(QType::AppearanceOrder, Format::MultipleChoice),
                third,
            ),
        ]);
        MixSpec {
            name: "three_question".into(),
            total,
            weights,
            seed,
        }
    }

    /// Check the spec is internally consistent: known buckets, non-negative
    /// weights summing to one, no weight on the impossible route-plan
    /// multiple-choice bucket, positive total.
    pub fn validate(&self) -> Result<(), MixError> {
        if self.total == 0 {
            return Err(MixError::BadWeights("total must be positive".into()));
        }
        let mut sum = 0.0;
        for (key, w) in &self.weights {
            let (qtype, format) = parse_bucket(key)
                .ok_or_else(|| MixError::BadWeights(format!("unknown bucket {key:?}")))?;
            if *w < 0.0 || !w.is_finite() {
                return Err(MixError::BadWeights(format!("bucket {key:?} has weight {w}")));
            }
            if qtype == QType::RoutePlan && format == Format::MultipleChoice && *w > 0.0 {
                return Err(MixError::BadWeights(
                    "route_plan has no multiple-choice form".into(),
                ));
            }
            sum += *w;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(MixError::BadWeights(format!(
                "weights sum to {sum}, expected 1 within {WEIGHT_SUM_TOLERANCE}"
            )));
        }
        Ok(())
    }

    /// Per-bucket item counts via the largest-remainder method: every bucket
    /// gets the floor of its ideal share, and the leftover items go to the
    /// largest fractional remainders (ties broken by bucket key). Buckets
    /// with zero weight are omitted.
    pub fn quotas(&self) -> Result<BTreeMap<String, usize>, MixError> {
        self.validate()?;
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut remainders: Vec<(String, f64)> = Vec::new();
        let mut assigned = 0usize;
        for (key, w) in &self.weights {
            if *w == 0.0 {
                continue;
            }
            let ideal = self.total as f64 * w;
            let base = ideal.floor() as usize;
            counts.insert(key.clone(), base);
            assigned += base;
            remainders.push((key.clone(), ideal - base as f64));
        }
        let mut leftover = self.total - assigned;
        remainders.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("finite remainders")
                .then_with(|| a.0.cmp(&b.0))
        });
        for (key, _) in remainders {
            if leftover == 0 {
                break;
            }
            *counts.get_mut(&key).expect("bucket present") += 1;
            leftover -= 1;
        }
        debug_assert_eq!(counts.values().sum::<usize>(), self.total);
        Ok(counts)
    }
}

/// Assemble a dataset from a pool.
///
/// Each bucket's members are put in canonical (id) order, shuffled with a
/// bucket-specific substream of the spec seed, and the quota taken from the
/// front — sampling without replacement that does not depend on the caller's
/// pool ordering. A final seeded shuffle interleaves the buckets.
pub fn assemble_mix(pool: &[QAItem], spec: &MixSpec) -> Result<Vec<QAItem>, MixError> {
    let quotas = spec.quotas()?;
    let mut buckets: BTreeMap<String, Vec<&QAItem>> = BTreeMap::new();
    for item in pool {
        buckets
            .entry(bucket_key(item.qtype, item.format))
            .or_default()
            .push(item);
    }
    let mut out: Vec<QAItem> = Vec::with_capacity(spec.total);
    for (key, need) in &quotas {
        let mut members = buckets.remove(key).unwrap_or_default();
        members.sort_by(|a, b| a.id.cmp(&b.id));
        if members.len() < *need {
            return Err(MixError::InsufficientPool {
                bucket: key.clone(),
                have: members.len(),
                need: *need,
            });
        }
        let mut rng = seeds::rng(spec.seed, &format!("mix/{key}"), 0);
        members.shuffle(&mut rng);
        out.extend(members.into_iter().take(*need).cloned());
    }
    let mut rng = seeds::rng(spec.seed, "mix/shuffle", 0);
    out.shuffle(&mut rng);
    Ok(out)
}
