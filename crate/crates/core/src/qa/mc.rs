//! Multiple-choice twinning.
//!
//! Every accepted open-ended item (except route planning) can be re-issued
//! as a four-option multiple-choice item. Distractors are type-aware:
//! numeric answers get scaled decoys from three disjoint factor bands, order
//! answers get non-identity permutations, nearest-category and direction
//! answers draw from the candidate set already embedded in the question.
//! A serial [`LetterBalancer`] assigns the correct letter so that A–D stay
//! uniform across the whole pool.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::scene::Scene;
use crate::seeds;

use super::geometry::{direction_labels, Difficulty};
use super::{format_numeric_answer, templates, Format, QAItem, QType, RejectReason};

pub const LETTERS: [char; 4] = ['A', 'B', 'C', 'D'];

/// Scale bands for numeric distractors: one decoy noticeably smaller than
/// the truth, one moderately larger, one far larger.
const DISTRACTOR_FACTOR_RANGES: [(f64, f64); 3] = [(0.40, 0.70), (1.35, 1.75), (2.0, 3.0)];

/// Redraws allowed per distractor slot before giving up on the item.
const DISTRACTOR_RETRIES: usize = 100;

/// Keeps the correct-answer letter uniform over a pool by always assigning
/// the least-used letter, breaking ties randomly from its own substream.
pub struct LetterBalancer {
    counts: [u64; 4],
    rng: ChaCha8Rng,
}

impl LetterBalancer {
    pub fn new(seed: u64) -> Self {
        LetterBalancer {
            counts: [0; 4],
            rng: seeds::rng(seed, "qa-mc-letters", 0),
        }
    }

    /// Index (0–3) of the letter the next item should place its answer at.
    pub fn pick(&mut self) -> usize {
        let min = *self.counts.iter().min().expect("four letters");
        let tied: Vec<usize> = (0..4).filter(|i| self.counts[*i] == min).collect();
        let k = *tied.choose(&mut self.rng).expect("at least one tie");
        self.counts[k] += 1;
        k
    }

    pub fn histogram(&self) -> [u64; 4] {
        self.counts
    }
}

/// Build the multiple-choice twin of an open-ended item.
///
/// The twin keeps the open-ended item's ground truth; only the presentation
/// changes. For questions that embed their candidate list in the wording
/// (nearest-category, last-frame-distance), the wording is re-instantiated so
/// the listed order equals the choice order.
pub fn make_multiple_choice(
    item: &QAItem,
    scene: &Scene,
    rng: &mut ChaCha8Rng,
    balancer: &mut LetterBalancer,
) -> Result<QAItem, RejectReason> {
    assert!(
        item.qtype.supports_multiple_choice(),
        "route planning has no multiple-choice form"
    );
    assert_eq!(item.format, Format::OpenEnded, "twins derive from open-ended items");

    // Build distractors first: a collision failure must leave the balancer
    // untouched so letter counts track issued items only.
    let distractors = build_distractors(item, scene, rng)?;
    let letter = balancer.pick();

    let mut question = item.question.clone();
    let mut object_ids = item.provenance.object_ids.clone();
    let mut choices = vec![String::new(); 4];
    choices[letter] = item.answer.clone();
    let mut rest = distractors.into_iter();
    for slot in choices.iter_mut() {
        if slot.is_empty() {
            *slot = rest.next().expect("three distractors fill three slots");
        }
    }

    // Candidate-listing questions: rewrite the listing to match the choices.
    match item.qtype {
        QType::RelDist => {
            let anchor_id = item.provenance.object_ids[0];
            let anchor = category_of(scene, anchor_id);
            let id_of = |cat: &str| -> u32 {
                item.provenance.object_ids[1..]
                    .iter()
                    .copied()
                    .find(|id| category_of(scene, *id) == cat)
                    .expect("choice category present in provenance")
            };
            let ordered: [String; 4] = std::array::from_fn(|i| choices[i].clone());
            question = templates::rel_dist(&ordered, anchor);
            object_ids = std::iter::once(anchor_id)
                .chain(choices.iter().map(|c| id_of(c)))
                .collect();
        }
        QType::SpatiotemporalDist => {
            let id_of = |cat: &str| -> u32 {
                item.provenance.object_ids
                    .iter()
                    .copied()
                    .find(|id| category_of(scene, *id) == cat)
                    .expect("choice category present in provenance")
            };
            let ordered: [String; 4] = std::array::from_fn(|i| choices[i].clone());
            question = templates::spatiotemporal_dist(&ordered);
            object_ids = choices.iter().map(|c| id_of(c)).collect();
        }
        _ => {}
    }

    let id = match item.id.strip_suffix("/oe") {
        Some(base) => format!("{base}/mc"),
        None => format!("{}/mc", item.id),
    };
    let twin = QAItem {
        id,
        qtype: item.qtype,
        format: Format::MultipleChoice,
        question,
        answer: item.answer.clone(),
        choices: Some(choices),
        correct_letter: Some(LETTERS[letter]),
        provenance: super::Provenance {
            object_ids,
            ..item.provenance.clone()
        },
    };
    debug_assert_eq!(twin.check_invariants(), Ok(()));
    Ok(twin)
}

fn category_of<'s>(scene: &'s Scene, id: u32) -> &'s str {
    &scene
        .object(id)
        .unwrap_or_else(|| panic!("provenance references object {id} missing from scene"))
        .category
}

fn build_distractors(
    item: &QAItem,
    scene: &Scene,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<String>, RejectReason> {
    let mut distractors = match item.qtype {
        QType::ObjCount | QType::ObjSize | QType::RoomSize | QType::AbsDist => {
            numeric_distractors(item, rng)?
        }
        QType::RelDist => {
            let cats: Vec<String> = item.provenance.object_ids[1..]
                .iter()
                .map(|id| category_of(scene, *id).to_string())
                .collect();
            cats.into_iter().filter(|c| *c != item.answer).collect()
        }
        QType::SpatiotemporalDist => {
            let cats: Vec<String> = item
                .provenance
                .object_ids
                .iter()
                .map(|id| category_of(scene, *id).to_string())
                .collect();
            cats.into_iter().filter(|c| *c != item.answer).collect()
        }
        QType::AppearanceOrder => permutation_distractors(item, scene, rng)?,
        QType::RelDirEasy => direction_distractors(&item.answer, Difficulty::Easy, rng),
        QType::RelDirMed => direction_distractors(&item.answer, Difficulty::Medium, rng),
        QType::RelDirHard => direction_distractors(&item.answer, Difficulty::Hard, rng),
        QType::RoutePlan => unreachable!("checked by caller"),
    };
    assert_eq!(distractors.len(), 3, "item {} built a short distractor set", item.id);
    distractors.shuffle(rng);
    Ok(distractors)
}

fn numeric_distractors(item: &QAItem, rng: &mut ChaCha8Rng) -> Result<Vec<String>, RejectReason> {
    let gt = item
        .provenance
        .ground_truth_raw
        .expect("numeric items carry the unrounded ground truth");
    let mut out: Vec<String> = Vec::with_capacity(3);
    for (lo, hi) in DISTRACTOR_FACTOR_RANGES {
        let mut accepted = false;
        for _ in 0..DISTRACTOR_RETRIES {
            let factor = rng.gen_range(lo..hi);
            let s = format_numeric_answer(item.qtype, gt * factor);
            if s != item.answer && !out.contains(&s) {
                out.push(s);
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(RejectReason::DistractorCollision);
        }
    }
    Ok(out)
}

fn permutation_distractors(
    item: &QAItem,
    scene: &Scene,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<String>, RejectReason> {
    let cats: Vec<String> = item
        .provenance
        .object_ids
        .iter()
        .map(|id| category_of(scene, *id).to_string())
        .collect();
    let mut out: Vec<String> = Vec::with_capacity(3);
    for _ in 0..3 {
        let mut accepted = false;
        for _ in 0..DISTRACTOR_RETRIES {
            let mut p = cats.clone();
            p.shuffle(rng);
            let s = p.join(", ");
            if s != item.answer && !out.contains(&s) {
                out.push(s);
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(RejectReason::DistractorCollision);
        }
    }
    Ok(out)
}

/// The other labels of the answer's difficulty, padded to three with labels
/// borrowed from the hard (quadrant) vocabulary, which is disjoint from the
/// easy and medium vocabularies.
fn direction_distractors(answer: &str, difficulty: Difficulty, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut out: Vec<String> = direction_labels(difficulty)
        .iter()
        .filter(|l| **l != answer)
        .map(|l| l.to_string())
        .collect();
    let mut pads: Vec<&str> = direction_labels(Difficulty::Hard)
        .iter()
        .copied()
        .filter(|l| *l != answer && !out.iter().any(|o| o == l))
        .collect();
    pads.shuffle(rng);
    while out.len() < 3 {
        out.push(pads.pop().expect("hard vocabulary suffices for padding").to_string());
    }
    out
}
