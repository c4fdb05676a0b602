use std::collections::BTreeMap;
use std::path::Path;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{GroundTruth, Kind, Pick, QACategory};
use crate::human_align::{round_human, AlignError, Quantity, RoundingPolicy};

/// Bundled bank; see `data/build_templates.py`.
pub const DEFAULT_BANK_JSON: &str = include_str!("../../data/templates.json");

/// Answer templates of at most this many words are drawn twice as often.
pub const SHORT_ANSWER_WORDS: usize = 4;
pub const SHORT_ANSWER_WEIGHT: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Canonical,
    Paraphrase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub text: String,
    pub origin: Origin,
}

impl Template {
    pub fn word_count(&self) -> usize {
        self.text.split_whitespace().count()
    }

    pub fn answer_weight(&self) -> f64 {
        if self.word_count() <= SHORT_ANSWER_WORDS {
            SHORT_ANSWER_WEIGHT
        } else {
            1.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryTemplates {
    pub questions: Vec<Template>,
    /// Keyed by outcome: `value` (estimations), `true`/`false` (predicates),
    /// `winner` (choices, `[A]` is the winner), or the classify label.
    pub answers: BTreeMap<String, Vec<Template>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateBank {
    pub version: u32,
    pub uncertain: Vec<Template>,
    pub categories: BTreeMap<QACategory, CategoryTemplates>,
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("cannot read template bank {0}: {1}")]
    Io(String, std::io::Error),
    #[error("template bank is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("template bank: {0}")]
    Invalid(String),
    #[error("{category}: truth {truth:?} does not fit a {kind:?} category")]
    TruthKind {
        category: QACategory,
        kind: Kind,
        truth: GroundTruth,
    },
    #[error(transparent)]
    Align(#[from] AlignError),
}

fn answer_keys(category: QACategory) -> Vec<String> {
    match category.kind() {
        Kind::Estimation => vec!["value".into()],
        Kind::Predicate => vec!["false".into(), "true".into()],
        Kind::Choice => vec!["winner".into()],
        Kind::Classify => {
            let (a, b) = category.classify_labels().expect("classify labels");
            vec![a.into(), b.into()]
        }
    }
}

fn placeholders(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(i) = rest.find('[') {
        let tail = &rest[i..];
        match tail.find(']') {
            Some(j) => {
                out.push(&tail[..=j]);
                rest = &tail[j + 1..];
            }
            None => break,
        }
    }
    out
}

fn check(text: &str, allowed: &[&str], required: &[&str], what: &str) -> Result<(), TemplateError> {
    if text.trim().is_empty() {
        return Err(TemplateError::Invalid(format!("{what}: empty template")));
    }
    for p in placeholders(text) {
        if !allowed.contains(&p) {
            return Err(TemplateError::Invalid(format!("{what}: placeholder {p} not allowed in {text:?}")));
        }
    }
    for r in required {
        if !text.contains(r) {
            return Err(TemplateError::Invalid(format!("{what}: {text:?} lacks {r}")));
        }
    }
    Ok(())
}

impl TemplateBank {
    pub fn from_json(text: &str) -> Result<Self, TemplateError> {
        let bank: TemplateBank = serde_json::from_str(text)?;
        bank.validate()?;
        Ok(bank)
    }

    pub fn load(path: &Path) -> Result<Self, TemplateError> {
        let text = std::fs::read_to_string(path).map_err(|e| TemplateError::Io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), TemplateError> {
        if self.uncertain.is_empty() {
            return Err(TemplateError::Invalid("no uncertainty phrasings".into()));
        }
        for t in &self.uncertain {
            check(&t.text, &["[A]", "[B]"], &[], "uncertain")?;
        }
        for &c in QACategory::ALL {
            let ct = self
                .categories
                .get(&c)
                .ok_or_else(|| TemplateError::Invalid(format!("category {c} missing")))?;
            let objects: &[&str] = if c.arity() == 1 { &["[A]"] } else { &["[A]", "[B]"] };
            if ct.questions.is_empty() {
                return Err(TemplateError::Invalid(format!("{c}: no questions")));
            }
            for q in &ct.questions {
                check(&q.text, objects, objects, &format!("{c} question"))?;
            }
            let keys = answer_keys(c);
            let have: Vec<&String> = ct.answers.keys().collect();
            if have.len() != keys.len() || keys.iter().any(|k| !ct.answers.contains_key(k)) {
                return Err(TemplateError::Invalid(format!("{c}: answer keys {have:?}, expected {keys:?}")));
            }
            for (k, list) in &ct.answers {
                if list.is_empty() {
                    return Err(TemplateError::Invalid(format!("{c}: no {k} answers")));
                }
                for a in list {
                    if c.kind() == Kind::Estimation {
                        let mut allowed = objects.to_vec();
                        allowed.push("[X]");
                        check(&a.text, &allowed, &["[X]"], &format!("{c} answer"))?;
                    } else {
                        check(&a.text, objects, &[], &format!("{c} answer"))?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn default_bank() -> Self {
        Self::from_json(DEFAULT_BANK_JSON).expect("bundled template bank is valid")
    }

    pub fn category(&self, c: QACategory) -> &CategoryTemplates {
        &self.categories[&c]
    }
}

/// Replaces `[A]`, `[B]`, `[X]` in one pass (substituted text is never rescanned)
/// and capitalizes the first character.
pub fn render(template: &str, a: &str, b: &str, x: &str) -> String {
    let mut out = String::with_capacity(template.len() + a.len() + b.len() + x.len());
    let mut rest = template;
    while let Some(i) = rest.find('[') {
        out.push_str(&rest[..i]);
        let tail = &rest[i..];
        let (sub, skip) = match tail.get(..3) {
            Some("[A]") => (a, 3),
            Some("[B]") => (b, 3),
            Some("[X]") => (x, 3),
            _ => ("[", 1),
        };
        out.push_str(sub);
        rest = &tail[skip..];
    }
    out.push_str(rest);
    let mut chars = out.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => out,
    }
}

fn pick_answer<'a, R: Rng + ?Sized>(list: &'a [Template], rng: &mut R) -> &'a Template {
    let dist = WeightedIndex::new(list.iter().map(Template::answer_weight)).expect("non-empty answer list");
    &list[dist.sample(rng)]
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instantiated {
    pub question: String,
    pub answer: String,
    pub quantity: Option<Quantity>,
}

/// Fills one question and one answer template for `category`.
///
/// For choices the answer's `[A]` is the winning object and `[B]` the other.
pub fn instantiate<R: Rng + ?Sized>(
    bank: &TemplateBank,
    category: QACategory,
    captions: (&str, Option<&str>),
    truth: &GroundTruth,
    policy: &RoundingPolicy,
    rng: &mut R,
) -> Result<Instantiated, TemplateError> {
    let ct = bank.category(category);
    let (a, b) = (captions.0, captions.1.unwrap_or(""));
    let q = &ct.questions[rng.random_range(0..ct.questions.len())];
    let question = render(&q.text, a, b, "");
    let mismatch = || TemplateError::TruthKind {
        category,
        kind: category.kind(),
        truth: truth.clone(),
    };
    let (answer, quantity) = match (category.kind(), truth) {
        (Kind::Estimation, GroundTruth::Quantity(v)) => {
            let qty = round_human(*v, policy, rng)?;
            let t = pick_answer(&ct.answers["value"], rng);
            (render(&t.text, a, b, &qty.phrasing), Some(qty))
        }
        (Kind::Estimation, _) => return Err(mismatch()),
        (_, GroundTruth::Uncertain) => (render(&pick_answer(&bank.uncertain, rng).text, a, b, ""), None),
        (Kind::Predicate, GroundTruth::Boolean(v)) => {
            let t = pick_answer(&ct.answers[if *v { "true" } else { "false" }], rng);
            (render(&t.text, a, b, ""), None)
        }
        (Kind::Choice, GroundTruth::Choice(p)) => {
            let (w, l) = match p {
                Pick::First => (a, b),
                Pick::Second => (b, a),
            };
            (render(&pick_answer(&ct.answers["winner"], rng).text, w, l, ""), None)
        }
        (Kind::Classify, GroundTruth::Classify(label)) => {
            let list = ct.answers.get(label.as_str()).ok_or_else(mismatch)?;
            (render(&pick_answer(list, rng).text, a, b, ""), None)
        }
        _ => return Err(mismatch()),
    };
    Ok(Instantiated {
        question,
        answer,
        quantity,
    })
}
