//! Benchmark scoring: numeric output rate, ratio bands, MSE, and automatic
//! qualitative matching.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::human_align::parse_quantity;
use crate::qa::{GroundTruth, Pick};

/// Ratio bands in percent of the ground truth, inclusive.
pub const BANDS: [(f64, f64); 3] = [(50.0, 200.0), (66.7, 150.0), (90.0, 110.0)];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("ground truth must be positive, got {0}")]
    NonPositiveGroundTruth(f64),
    #[error("matcher {0} needs structured truth, which item {1:?} lacks")]
    UnsupportedMatcher(&'static str, String),
    #[error("{path} line {line}: {message}")]
    ParseFailure { path: String, line: usize, message: String },
    #[error("cannot read {0}: {1}")]
    Io(String, std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Qualitative,
    Quantitative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkItem {
    pub image_id: String,
    pub question: String,
    pub gt_answer: String,
    pub kind: ItemKind,
    /// Parsed from `gt_answer` at load time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_value_si: Option<f64>,
    /// Structured answer, present on synthetic benchmarks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<GroundTruth>,
    /// The two object captions a choice question is about, in question order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub captions: Option<Vec<String>>,
}

impl BenchmarkItem {
    pub fn key(&self) -> (String, String) {
        (self.image_id.clone(), self.question.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub image_id: String,
    pub question: String,
    pub answer: String,
}

/// Predictions keyed by `(image_id, question)`.
pub type Predictions = HashMap<(String, String), String>;

pub fn in_range(pred_si: f64, gt_si: f64, lo_pct: f64, hi_pct: f64) -> Result<bool, EvalError> {
    if !(gt_si > 0.0) {
        return Err(EvalError::NonPositiveGroundTruth(gt_si));
    }
    Ok(lo_pct / 100.0 * gt_si <= pred_si && pred_si <= hi_pct / 100.0 * gt_si)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantMetrics {
    pub items: usize,
    pub parsed: usize,
    pub output_number_rate: f64,
    pub in_range_50_200: f64,
    pub in_range_66_150: f64,
    pub in_range_90_110: f64,
    /// Over parsed predictions only; `None` when nothing parsed.
    pub mse_m2: Option<f64>,
}

/// Band rates use every quantitative item as denominator (an unparsed or
/// missing answer counts as out of range); MSE uses parsed answers only.
pub fn eval_quantitative(predictions: &Predictions, benchmark: &[BenchmarkItem]) -> QuantMetrics {
    let mut items = 0usize;
    let mut parsed = 0usize;
    let mut hits = [0usize; 3];
    let mut sq = 0.0;
    for item in benchmark.iter().filter(|i| i.kind == ItemKind::Quantitative) {
        items += 1;
        let Some(gt) = item.gt_value_si else { continue };
        let Some(pred) = predictions.get(&item.key()).and_then(|p| parse_quantity(p)) else {
            continue;
        };
        let v = pred.value_si;
        parsed += 1;
        sq += (v - gt) * (v - gt);
        for (h, (lo, hi)) in hits.iter_mut().zip(BANDS) {
            // a zero ground truth admits only an exact zero
            let inside = if gt > 0.0 {
                in_range(v, gt, lo, hi).unwrap_or(false)
            } else {
                v == gt
            };
            *h += inside as usize;
        }
    }
    let frac = |k: usize| if items == 0 { 0.0 } else { k as f64 / items as f64 };
    QuantMetrics {
        items,
        parsed,
        output_number_rate: frac(parsed),
        in_range_50_200: frac(hits[0]),
        in_range_66_150: frac(hits[1]),
        in_range_90_110: frac(hits[2]),
        mse_m2: (parsed > 0).then(|| sq / parsed as f64),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matcher {
    ExactLabel,
    OracleTruth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Judgement {
    Correct,
    Incorrect,
    NeedsHuman,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QualReport {
    pub items: usize,
    pub correct: usize,
    pub incorrect: usize,
    pub needs_human: usize,
    /// `correct / (correct + incorrect)`; `None` when nothing was auto-judged.
    pub accuracy: Option<f64>,
}

/// Opposing keyword sets; a text "sides" with one when it only uses words of that set.
const KEYWORD_PAIRS: [(&[&str], &[&str]); 7] = [
    (&["yes", "correct", "true", "indeed", "right"], &["no", "not", "false", "incorrect"]),
    (&["left"], &["right"]),
    (&["above", "higher"], &["below", "lower"]),
    (&["behind", "further", "farther"], &["front", "closer"]),
    (&["taller"], &["shorter"]),
    (&["wider"], &["thinner", "narrower"]),
    (&["bigger", "larger"], &["smaller"]),
];

const UNCERTAIN_MARKERS: [&str; 8] = [
    "not sure",
    "hard to",
    "can t tell",
    "cannot tell",
    "about the same",
    "roughly equal",
    "too close to call",
    "difficult to",
];

fn normalize(s: &str) -> String {
    let cleaned: String = s
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    cleaned
        .split_whitespace()
        .filter(|w| !matches!(*w, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn has_word(norm: &str, words: &[&str]) -> bool {
    norm.split(' ').any(|w| words.contains(&w))
}

fn contains_phrase(haystack: &str, needle: &str) -> bool {
    !needle.is_empty() && format!(" {haystack} ").contains(&format!(" {needle} "))
}

/// 0/1 for the side of `pair` the text takes; `None` for neither or both.
fn side(norm: &str, pair: usize) -> Option<usize> {
    let (a, b) = KEYWORD_PAIRS[pair];
    match (has_word(norm, a), has_word(norm, b)) {
        (true, false) => Some(0),
        (false, true) => Some(1),
        _ => None,
    }
}

fn expresses_uncertainty(norm: &str) -> bool {
    UNCERTAIN_MARKERS.iter().any(|m| norm.contains(m))
}

fn judge_choice(pred: &str, winner: &str, other: Option<&str>) -> Judgement {
    let (w, o) = (normalize(winner), other.map(normalize));
    let hit_w = contains_phrase(pred, &w);
    let hit_o = o.as_deref().is_some_and(|o| contains_phrase(pred, o));
    match (hit_w, hit_o) {
        (true, false) => Judgement::Correct,
        (false, true) => Judgement::Incorrect,
        _ => Judgement::NeedsHuman,
    }
}

/// Keyword matching against the reference answer text.
pub fn judge_exact_label(pred: &str, item: &BenchmarkItem) -> Judgement {
    let (p, g) = (normalize(pred), normalize(&item.gt_answer));
    if expresses_uncertainty(&g) {
        return if expresses_uncertainty(&p) {
            Judgement::Correct
        } else {
            Judgement::NeedsHuman
        };
    }
    if p == g {
        return Judgement::Correct;
    }
    if let Some((pair, gs)) = (0..KEYWORD_PAIRS.len()).find_map(|k| side(&g, k).map(|s| (k, s))) {
        return match side(&p, pair) {
            Some(ps) if ps == gs => Judgement::Correct,
            Some(_) => Judgement::Incorrect,
            None => Judgement::NeedsHuman,
        };
    }
    // the reference names an object
    let other = item.captions.as_ref().and_then(|cs| {
        cs.iter()
            .map(|c| normalize(c))
            .find(|c| !contains_phrase(&g, c) && !contains_phrase(c, &g))
    });
    judge_choice(&p, &g, other.as_deref())
}

/// Judges against the structured truth of a synthetic item.
pub fn judge_oracle_truth(pred: &str, item: &BenchmarkItem) -> Result<Judgement, EvalError> {
    let unsupported = || EvalError::UnsupportedMatcher("oracle_truth", item.question.clone());
    let truth = item.truth.as_ref().ok_or_else(unsupported)?;
    let p = normalize(pred);
    Ok(match truth {
        GroundTruth::Boolean(v) => match side(&p, 0) {
            Some(s) => {
                if (s == 0) == *v {
                    Judgement::Correct
                } else {
                    Judgement::Incorrect
                }
            }
            None => Judgement::NeedsHuman,
        },
        GroundTruth::Choice(pick) => {
            let caps = item.captions.as_ref().filter(|c| c.len() == 2).ok_or_else(unsupported)?;
            let (w, o) = match pick {
                Pick::First => (&caps[0], &caps[1]),
                Pick::Second => (&caps[1], &caps[0]),
            };
            judge_choice(&p, w, Some(o))
        }
        GroundTruth::Classify(label) => {
            let norm_label = normalize(label);
            let found = KEYWORD_PAIRS.iter().enumerate().find_map(|(k, (a, b))| {
                let lab = norm_label.as_str();
                let hit = |set: &[&str]| set.contains(&lab) || set.iter().any(|w| w.starts_with(lab));
                if hit(a) {
                    Some((k, 0))
                } else if hit(b) {
                    Some((k, 1))
                } else {
                    None
                }
            });
            let Some((pair, want)) = found else {
                return Err(unsupported());
            };
            // classify labels are bare words ("tall"); answers use comparatives ("taller")
            let stem_side = |words: &[&str]| {
                p.split(' ')
                    .any(|w| words.iter().any(|k| *k == w || (w.len() >= 3 && k.starts_with(w))))
            };
            let (a, b) = KEYWORD_PAIRS[pair];
            match (stem_side(a), stem_side(b)) {
                (true, false) => {
                    if want == 0 {
                        Judgement::Correct
                    } else {
                        Judgement::Incorrect
                    }
                }
                (false, true) => {
                    if want == 1 {
                        Judgement::Correct
                    } else {
                        Judgement::Incorrect
                    }
                }
                _ => Judgement::NeedsHuman,
            }
        }
        GroundTruth::Uncertain => {
            if expresses_uncertainty(&p) {
                Judgement::Correct
            } else {
                Judgement::Incorrect
            }
        }
        GroundTruth::Quantity(_) => return Err(unsupported()),
    })
}

pub fn eval_qualitative(
    predictions: &Predictions,
    benchmark: &[BenchmarkItem],
    matcher: Matcher,
) -> Result<QualReport, EvalError> {
    let mut r = QualReport::default();
    for item in benchmark.iter().filter(|i| i.kind == ItemKind::Qualitative) {
        r.items += 1;
        let j = match predictions.get(&item.key()) {
            None => Judgement::Incorrect,
            Some(pred) => match matcher {
                Matcher::ExactLabel => judge_exact_label(pred, item),
                Matcher::OracleTruth => judge_oracle_truth(pred, item)?,
            },
        };
        match j {
            Judgement::Correct => r.correct += 1,
            Judgement::Incorrect => r.incorrect += 1,
            Judgement::NeedsHuman => r.needs_human += 1,
        }
    }
    let judged = r.correct + r.incorrect;
    r.accuracy = (judged > 0).then(|| r.correct as f64 / judged as f64);
    Ok(r)
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(usize, T)>, EvalError> {
    let name = path.display().to_string();
    let file = File::open(path).map_err(|e| EvalError::Io(name.clone(), e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| EvalError::Io(name.clone(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line).map_err(|e| EvalError::ParseFailure {
            path: name.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, v));
    }
    Ok(out)
}

/// Reads a JSON-lines benchmark, parsing quantitative reference answers.
pub fn load_benchmark(path: &Path) -> Result<Vec<BenchmarkItem>, EvalError> {
    read_jsonl::<BenchmarkItem>(path)?
        .into_iter()
        .map(|(line, mut item)| {
            if item.kind == ItemKind::Quantitative {
                let v = parse_quantity(&item.gt_answer).ok_or_else(|| EvalError::ParseFailure {
                    path: path.display().to_string(),
                    line,
                    message: format!("quantitative reference {:?} has no number", item.gt_answer),
                })?;
                item.gt_value_si = Some(item.gt_value_si.unwrap_or(v.value_si));
            }
            Ok(item)
        })
        .collect()
}

pub fn load_predictions(path: &Path) -> Result<Predictions, EvalError> {
    Ok(read_jsonl::<Prediction>(path)?
        .into_iter()
        .map(|(_, p)| ((p.image_id, p.question), p.answer))
        .collect())
}

fn pct(x: f64) -> String {
    format!("{:.1}", 100.0 * x)
}

/// Plain-text table: one row per metric.
pub fn render_table(q: &QuantMetrics, qual: Option<&QualReport>) -> String {
    let mut rows: Vec<(String, String)> = vec![
        ("Output numbers %".into(), pct(q.output_number_rate)),
        ("In range [50, 200]%".into(), pct(q.in_range_50_200)),
        ("In range [66.7, 150]%".into(), pct(q.in_range_66_150)),
        ("In range [90, 110]%".into(), pct(q.in_range_90_110)),
        (
            "MSE (m^2, parsed only)".into(),
            q.mse_m2.map_or("n/a".into(), |m| format!("{m:.4}")),
        ),
        ("Quantitative items".into(), q.items.to_string()),
    ];
    if let Some(r) = qual {
        rows.push((
            "Qualitative accuracy %".into(),
            r.accuracy.map_or("n/a".into(), pct),
        ));
        rows.push(("Needs human rating".into(), r.needs_human.to_string()));
    }
    let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let vw = rows.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<w$}  {v:>vw$}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quant(id: &str, gt: &str) -> BenchmarkItem {
        BenchmarkItem {
            image_id: id.into(),
            question: "How far?".into(),
            gt_answer: gt.into(),
            kind: ItemKind::Quantitative,
            gt_value_si: parse_quantity(gt).map(|q| q.value_si),
            truth: None,
            captions: None,
        }
    }

    fn qual(gt: &str, captions: Option<Vec<&str>>) -> BenchmarkItem {
        BenchmarkItem {
            image_id: "i".into(),
            question: "Which?".into(),
            gt_answer: gt.into(),
            kind: ItemKind::Qualitative,
            gt_value_si: None,
            truth: None,
            captions: captions.map(|c| c.into_iter().map(String::from).collect()),
        }
    }

    #[test]
    fn range_boundaries() {
        assert!(in_range(1.0, 1.0, 90.0, 110.0).unwrap());
        assert!(in_range(0.5, 1.0, 50.0, 200.0).unwrap());
        assert!(!in_range(0.49, 1.0, 50.0, 200.0).unwrap());
        assert!(in_range(1.0, 0.0, 50.0, 200.0).is_err());
    }

    #[test]
    fn perfect_predictions() {
        let items: Vec<_> = ["1 m", "30 cm", "4 feet"].iter().enumerate().map(|(i, g)| quant(&i.to_string(), g)).collect();
        let preds: Predictions = items.iter().map(|i| (i.key(), i.gt_answer.clone())).collect();
        let m = eval_quantitative(&preds, &items);
        assert_eq!((m.output_number_rate, m.in_range_50_200, m.in_range_90_110), (1.0, 1.0, 1.0));
        assert_eq!(m.mse_m2, Some(0.0));
    }

    #[test]
    fn all_no_answers() {
        let items: Vec<_> = (0..4).map(|i| quant(&i.to_string(), "2 m")).collect();
        let preds: Predictions = items.iter().map(|i| (i.key(), "No.".to_string())).collect();
        let m = eval_quantitative(&preds, &items);
        assert_eq!((m.output_number_rate, m.in_range_50_200, m.mse_m2), (0.0, 0.0, None));
    }

    #[test]
    fn yes_matches_boolean() {
        let mut item = qual("Yes, it is.", None);
        assert_eq!(judge_exact_label("Yes.", &item), Judgement::Correct);
        assert_eq!(judge_exact_label("No, it's behind.", &item), Judgement::Incorrect);
        item.truth = Some(GroundTruth::Boolean(true));
        assert_eq!(judge_oracle_truth("Yes.", &item).unwrap(), Judgement::Correct);
    }

    #[test]
    fn caption_choice_after_normalization() {
        let item = qual("red cup", Some(vec!["red cup", "blue plate"]));
        assert_eq!(judge_exact_label("the red cup", &item), Judgement::Correct);
        assert_eq!(judge_exact_label("The blue plate.", &item), Judgement::Incorrect);
    }

    #[test]
    fn prose_needs_human() {
        let item = qual("red cup", None);
        assert_eq!(
            judge_exact_label("Well, it depends on how you look at the scene overall.", &item),
            Judgement::NeedsHuman
        );
        let preds: Predictions = [(item.key(), "Well, it depends.".to_string())].into();
        let r = eval_qualitative(&preds, &[item], Matcher::ExactLabel).unwrap();
        assert_eq!((r.needs_human, r.accuracy), (1, None));
    }

    #[test]
    fn oracle_truth_requires_structure() {
        let item = qual("Yes.", None);
        let preds: Predictions = [(item.key(), "Yes".to_string())].into();
        assert!(matches!(
            eval_qualitative(&preds, &[item], Matcher::OracleTruth),
            Err(EvalError::UnsupportedMatcher(..))
        ));
    }

    #[test]
    fn classify_truth_accepts_comparatives() {
        let mut item = qual("[A] is taller than [B].", None);
        item.truth = Some(GroundTruth::Classify("tall".into()));
        assert_eq!(judge_oracle_truth("It is taller.", &item).unwrap(), Judgement::Correct);
        assert_eq!(judge_oracle_truth("Shorter.", &item).unwrap(), Judgement::Incorrect);
        item.truth = Some(GroundTruth::Classify("front".into()));
        assert_eq!(judge_oracle_truth("It's in front of the box.", &item).unwrap(), Judgement::Correct);
    }
}
