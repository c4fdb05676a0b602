use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    compute_ground_truth, eligible_categories, instantiate, relation_margin, GroundTruth, Margins, QACategory,
    TemplateBank, TemplateError, TruthError,
};
use crate::geometry::{Frame, ObjectStats3D};
use crate::human_align::RoundingPolicy;
use crate::interchange::{QARecord, SceneRecord};
use crate::rng::{derive_seed, keyed_rng};

pub const QA_STREAM: &str = "qa";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub samples_per_scene: usize,
    /// Probability of drawing from the qualitative side.
    pub qualitative_fraction: f64,
    pub margins: Margins,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            samples_per_scene: 20,
            qualitative_fraction: 0.5,
            margins: Margins::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("scene {0} has no entity with 3D statistics")]
    NoEligibleEntities(String),
    #[error("scene {0}: entities mix camera and canonical frames")]
    MixedFrames(String),
    #[error(transparent)]
    Truth(#[from] TruthError),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

struct Lifted<'a> {
    index: u32,
    caption: &'a str,
    stats: &'a ObjectStats3D<f64>,
}

/// A record together with the structured answer it was rendered from.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesizedQa {
    pub record: QARecord,
    pub truth: GroundTruth,
}

pub fn synthesize_scene_qa(
    scene: &SceneRecord,
    bank: &TemplateBank,
    params: &SynthParams,
    policy: &RoundingPolicy,
    global_seed: u64,
) -> Result<Vec<QARecord>, SynthError> {
    Ok(synthesize_scene_qa_with_truth(scene, bank, params, policy, global_seed)?
        .into_iter()
        .map(|s| s.record)
        .collect())
}

/// Draws `samples_per_scene` records. Record `i` uses its own RNG stream keyed
/// by `(global_seed, image_id, i)`.
pub fn synthesize_scene_qa_with_truth(
    scene: &SceneRecord,
    bank: &TemplateBank,
    params: &SynthParams,
    policy: &RoundingPolicy,
    global_seed: u64,
) -> Result<Vec<SynthesizedQa>, SynthError> {
    let objects: Vec<Lifted> = scene
        .entities
        .iter()
        .filter_map(|e| {
            Some(Lifted {
                index: e.index,
                caption: e.captions.first()?.as_str(),
                stats: e.stats.as_ref()?,
            })
        })
        .collect();
    let first = objects
        .first()
        .ok_or_else(|| SynthError::NoEligibleEntities(scene.image_id.clone()))?;
    let frame = first.stats.frame;
    if objects.iter().any(|o| o.stats.frame != frame) {
        return Err(SynthError::MixedFrames(scene.image_id.clone()));
    }
    let canonicalized = frame == Frame::Canonical;
    let eligible = eligible_categories(canonicalized, objects.len());
    let (qualitative, quantitative): (Vec<QACategory>, Vec<QACategory>) =
        eligible.iter().partition(|c| !c.is_quantitative());

    let mut gaps: HashMap<(u32, u32), GroundTruth> = HashMap::new();
    (0..params.samples_per_scene as u64)
        .map(|i| {
            let mut rng = keyed_rng(QA_STREAM, global_seed, &scene.image_id, i);
            let want_qualitative = rng.random_bool(params.qualitative_fraction.clamp(0.0, 1.0));
            let side = match (want_qualitative, qualitative.is_empty(), quantitative.is_empty()) {
                (true, false, _) | (false, false, true) => &qualitative,
                _ => &quantitative,
            };
            let category = side[rng.random_range(0..side.len())];
            let picked = rand::seq::index::sample(&mut rng, objects.len(), category.arity());
            let mut a = &objects[picked.index(0)];
            let mut b = (category.arity() == 2).then(|| &objects[picked.index(1)]);
            // "how much is A left of B" is asked in the direction that holds
            if let (Some(rel), Some(bb)) = (category.relation(), b) {
                if category.is_directional_difference() && relation_margin(rel, a.stats, bb.stats) < 0.0 {
                    b = Some(a);
                    a = bb;
                }
            }
            let truth = match b {
                // the point-set gap is the one costly truth; it is symmetric, so cache per pair
                Some(bb) if category == QACategory::Gap => {
                    let key = (a.index.min(bb.index), a.index.max(bb.index));
                    match gaps.get(&key) {
                        Some(t) => t.clone(),
                        None => {
                            let t = compute_ground_truth(category, a.stats, Some(bb.stats), &params.margins)?;
                            gaps.insert(key, t.clone());
                            t
                        }
                    }
                }
                _ => compute_ground_truth(category, a.stats, b.map(|o| o.stats), &params.margins)?,
            };
            let filled = instantiate(bank, category, (a.caption, b.map(|o| o.caption)), &truth, policy, &mut rng)?;
            let record = QARecord {
                image_id: scene.image_id.clone(),
                category,
                question: filled.question,
                answer: filled.answer,
                object_indices: std::iter::once(a.index).chain(b.map(|o| o.index)).collect(),
                raw_value_m: truth.quantity(),
                canonicalized,
                seed: derive_seed(QA_STREAM, global_seed, &scene.image_id, i),
            };
            Ok(SynthesizedQa { record, truth })
        })
        .collect()
}
