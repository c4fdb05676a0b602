//! Image-level semantic filtering and per-scene caption disambiguation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interchange::ObjectEntity;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterLabels {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

impl Default for FilterLabels {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect();
        Self {
            positive: s(&["an iphone photo of an indoor scene", "an iphone photo of an outdoor scene"]),
            negative: s(&[
                "a close up shot of a single object",
                "a product displayed in front of a white background",
                "an artwork",
                "a painting",
                "a screenshot of graphics user interface",
                "a piece of text",
                "a sketch",
            ]),
        }
    }
}

pub const DEFAULT_BACKGROUND_LABELS: [&str; 6] = ["sun", "sky", "ground", "floor", "wall", "ceiling"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurationError {
    #[error("no score for filter label {0:?}")]
    MissingLabelScore(String),
    #[error("filter label set is empty")]
    NoLabels,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub keep: bool,
    pub top_label: String,
    pub score: f64,
}

/// Keeps an image iff its best-scoring label is a positive one. A tie
/// between a positive and a negative label drops the image.
pub fn semantic_filter(scores: &BTreeMap<String, f64>, labels: &FilterLabels) -> Result<FilterVerdict, CurationError> {
    let best = |set: &[String]| -> Result<Option<(String, f64)>, CurationError> {
        let mut best: Option<(String, f64)> = None;
        for l in set {
            let s = *scores.get(l).ok_or_else(|| CurationError::MissingLabelScore(l.clone()))?;
            if best.as_ref().is_none_or(|(_, b)| s > *b) {
                best = Some((l.clone(), s));
            }
        }
        Ok(best)
    };
    let pos = best(&labels.positive)?;
    let neg = best(&labels.negative)?;
    let (keep, (top_label, score)) = match (pos, neg) {
        (Some(p), Some(n)) => {
            if p.1 > n.1 {
                (true, p)
            } else {
                (false, n)
            }
        }
        (Some(p), None) => (true, p),
        (None, Some(n)) => (false, n),
        (None, None) => return Err(CurationError::NoLabels),
    };
    Ok(FilterVerdict { keep, top_label, score })
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum()
}

fn norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

/// Pairwise cosine similarity of unit rows, clamped to `[-1, 1]`.
pub fn similarity_matrix(embeddings: &[&[f32]]) -> Vec<Vec<f64>> {
    let n = embeddings.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let s = dot(embeddings[i], embeddings[j]).clamp(-1.0, 1.0);
            m[i][j] = s;
            m[j][i] = s;
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbiguityAction {
    Keep,
    /// Append this clause to the entity's captions.
    Augment(String),
    Drop(String),
}

/// Inclusive pixel box `(u_min, v_min, u_max, v_max)`.
pub type PixelBox = (usize, usize, usize, usize);

fn box_center(b: PixelBox) -> (f64, f64) {
    ((b.0 + b.2) as f64 / 2.0, (b.1 + b.3) as f64 / 2.0)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected components of the `sim ≥ threshold` graph decide each entity's
/// fate: singletons are kept, pairs get opposite position clauses, larger
/// groups are dropped.
pub fn resolve_ambiguity(sim: &[Vec<f64>], threshold: f64, boxes: &[PixelBox]) -> Vec<AmbiguityAction> {
    let n = sim.len();
    assert_eq!(boxes.len(), n, "one box per entity");
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if sim[i][j] >= threshold {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &r) in roots.iter().enumerate() {
        members.entry(r).or_default().push(i);
    }
    let mut actions = vec![AmbiguityAction::Keep; n];
    for group in members.values() {
        match group.as_slice() {
            [_] => {}
            &[i, j] => {
                let (ci, cj) = (box_center(boxes[i]), box_center(boxes[j]));
                let (du, dv) = (cj.0 - ci.0, cj.1 - ci.1);
                if du == 0.0 && dv == 0.0 {
                    let reason = "similar captions at the same image position".to_string();
                    actions[i] = AmbiguityAction::Drop(reason.clone());
                    actions[j] = AmbiguityAction::Drop(reason);
                    continue;
                }
                // i is "first" along the chosen axis when its center coordinate is smaller
                let (axis_first, axis_second, d) = if dv.abs() >= du.abs() {
                    ("top", "bottom", dv)
                } else {
                    ("left", "right", du)
                };
                let clause = |side: &str| format!("that's more to the {side} of the image");
                let (wi, wj) = if d > 0.0 {
                    (axis_first, axis_second)
                } else {
                    (axis_second, axis_first)
                };
                actions[i] = AmbiguityAction::Augment(clause(wi));
                actions[j] = AmbiguityAction::Augment(clause(wj));
            }
            many => {
                for &i in many {
                    actions[i] = AmbiguityAction::Drop(format!("{} entities share similar captions", many.len()));
                }
            }
        }
    }
    actions
}

/// Applies ambiguity actions: augmented entities get the clause appended to
/// every caption, dropped ones are removed.
pub fn apply_ambiguity(entities: Vec<ObjectEntity>, actions: &[AmbiguityAction]) -> Vec<ObjectEntity> {
    entities
        .into_iter()
        .zip(actions)
        .filter_map(|(mut e, a)| match a {
            AmbiguityAction::Keep => Some(e),
            AmbiguityAction::Augment(clause) => {
                for c in &mut e.captions {
                    c.push(' ');
                    c.push_str(clause);
                }
                Some(e)
            }
            AmbiguityAction::Drop(_) => None,
        })
        .collect()
}

/// `true` for entities whose best cosine to any background label is below `threshold`.
pub fn background_mask(embeddings: &[&[f32]], background: &BTreeMap<String, Vec<f32>>, threshold: f64) -> Vec<bool> {
    embeddings
        .iter()
        .map(|e| {
            let ne = norm(e);
            background
                .values()
                .map(|b| dot(e, b) / (ne * norm(b)).max(f64::MIN_POSITIVE))
                .all(|c| c < threshold)
        })
        .collect()
}

pub fn background_filter(
    entities: Vec<ObjectEntity>,
    background: &BTreeMap<String, Vec<f32>>,
    threshold: f64,
) -> Vec<ObjectEntity> {
    let embs: Vec<&[f32]> = entities.iter().map(|e| e.embedding.as_slice()).collect();
    let keep = background_mask(&embs, background, threshold);
    entities.into_iter().zip(keep).filter_map(|(e, k)| k.then_some(e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        let mut m: BTreeMap<String, f64> = FilterLabels::default()
            .positive
            .iter()
            .chain(&FilterLabels::default().negative)
            .map(|l| (l.clone(), 0.1))
            .collect();
        for (l, s) in pairs {
            m.insert(l.to_string(), *s);
        }
        m
    }

    #[test]
    fn indoor_top_is_kept() {
        let v = semantic_filter(&scores(&[("an iphone photo of an indoor scene", 0.9)]), &FilterLabels::default()).unwrap();
        assert!(v.keep);
        assert_eq!(v.score, 0.9);
    }

    #[test]
    fn product_shot_is_dropped() {
        let v = semantic_filter(
            &scores(&[("a product displayed in front of a white background", 0.8)]),
            &FilterLabels::default(),
        )
        .unwrap();
        assert!(!v.keep);
        assert_eq!(v.top_label, "a product displayed in front of a white background");
    }

    #[test]
    fn tie_drops() {
        let v = semantic_filter(
            &scores(&[("an iphone photo of an outdoor scene", 0.5), ("a sketch", 0.5)]),
            &FilterLabels::default(),
        )
        .unwrap();
        assert!(!v.keep);
    }

    #[test]
    fn missing_score_errors() {
        let mut s = scores(&[]);
        s.remove("a sketch");
        assert_eq!(
            semantic_filter(&s, &FilterLabels::default()).unwrap_err(),
            CurationError::MissingLabelScore("a sketch".into())
        );
    }

    #[test]
    fn similarity_basics() {
        let a = [1.0f32, 0.0];
        let b = [0.0f32, 1.0];
        let m = similarity_matrix(&[&a, &a, &b]);
        assert_eq!(m[0][1], 1.0);
        assert_eq!(m[0][2], 0.0);
        assert_eq!(m[2][2], 1.0);
    }

    #[test]
    fn stacked_pair_gets_top_and_bottom() {
        let sim = vec![vec![1.0, 0.97], vec![0.97, 1.0]];
        let boxes = [(10, 50, 30, 70), (12, 5, 28, 20)];
        let a = resolve_ambiguity(&sim, 0.9, &boxes);
        assert_eq!(a[0], AmbiguityAction::Augment("that's more to the bottom of the image".into()));
        assert_eq!(a[1], AmbiguityAction::Augment("that's more to the top of the image".into()));
    }

    #[test]
    fn triple_is_dropped_and_distinct_kept() {
        let mut sim = vec![vec![0.1; 4]; 4];
        for i in 0..3 {
            for j in 0..3 {
                sim[i][j] = 0.95;
            }
        }
        sim[3][3] = 1.0;
        let boxes = [(0, 0, 1, 1), (5, 5, 6, 6), (9, 0, 10, 1), (3, 3, 4, 4)];
        let a = resolve_ambiguity(&sim, 0.9, &boxes);
        assert!(a[..3].iter().all(|x| matches!(x, AmbiguityAction::Drop(_))));
        assert_eq!(a[3], AmbiguityAction::Keep);
    }

    #[test]
    fn background_drops_sky() {
        let sky = vec![0.0f32, 1.0, 0.0];
        let bg: BTreeMap<String, Vec<f32>> = [("sky".to_string(), sky.clone())].into();
        let ortho = [1.0f32, 0.0, 0.0];
        assert_eq!(background_mask(&[&sky, &ortho], &bg, 0.92), vec![false, true]);
    }
}
