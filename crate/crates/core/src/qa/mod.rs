//! Ground-truth spatial answers and template-based question synthesis.

mod category;
mod noise;
mod synth;
mod templates;
mod truth;

pub use category::{eligible_categories, Kind, QACategory, Relation};
pub use noise::{add_answer_noise, NOISE_STREAM};
pub use synth::{synthesize_scene_qa, synthesize_scene_qa_with_truth, SynthError, SynthParams, SynthesizedQa, QA_STREAM};
pub use templates::{
    instantiate, render, CategoryTemplates, Instantiated, Origin, Template, TemplateBank, TemplateError,
    DEFAULT_BANK_JSON, SHORT_ANSWER_WEIGHT, SHORT_ANSWER_WORDS,
};
pub use truth::{compute_ground_truth, relation_key, relation_margin, GroundTruth, Margins, Pick, TruthError};
