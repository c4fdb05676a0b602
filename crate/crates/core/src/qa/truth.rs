use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Kind, QACategory, Relation};
use crate::geometry::{min_pairwise_distance, Frame, ObjectStats3D};

/// Which of the two asked-about objects a choice question resolves to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pick {
    First,
    Second,
}

impl Pick {
    pub fn index_in(self, object_indices: &[u32]) -> Option<u32> {
        match self {
            Pick::First => object_indices.first().copied(),
            Pick::Second => object_indices.get(1).copied(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundTruth {
    Boolean(bool),
    Choice(Pick),
    Classify(String),
    Quantity(f64),
    Uncertain,
}

impl GroundTruth {
    pub fn quantity(&self) -> Option<f64> {
        match self {
            GroundTruth::Quantity(v) => Some(*v),
            _ => None,
        }
    }
}

/// A comparison is uncertain when its deciding difference is below
/// `max(absolute_m, relative_diagonal * mean AABB diagonal)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Margins {
    pub absolute_m: f64,
    pub relative_diagonal: f64,
}

impl Default for Margins {
    fn default() -> Self {
        Self {
            absolute_m: 0.02,
            relative_diagonal: 0.05,
        }
    }
}

impl Margins {
    pub fn threshold(&self, diag_a: f64, diag_b: f64) -> f64 {
        self.absolute_m.max(self.relative_diagonal * (diag_a + diag_b) / 2.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TruthError {
    #[error("{category} needs canonical-frame statistics, got {frame:?}")]
    FrameMismatch { category: QACategory, frame: Frame },
    #[error("{0} needs a second object")]
    MissingSecondObject(QACategory),
    #[error("{0} needs point sets, but the statistics carry none")]
    MissingPoints(QACategory),
}

/// Scalars a relation is decided on, per object.
pub fn relation_key(rel: Relation, s: &ObjectStats3D<f64>) -> f64 {
    use Relation::*;
    match rel {
        Left | Right => s.camera_center.x,
        Above | Below => s.box_center.z,
        Behind | Front => s.camera_center.z,
        Tall | Short => s.height,
        Wide | Thin => s.width,
        Big | Small => s.volume().max(0.0).cbrt(),
    }
}

/// Signed amount by which `a` satisfies `rel` relative to `b` (positive = holds).
pub fn relation_margin(rel: Relation, a: &ObjectStats3D<f64>, b: &ObjectStats3D<f64>) -> f64 {
    use Relation::*;
    let d = relation_key(rel, a) - relation_key(rel, b);
    match rel {
        // smaller x is further left
        Left => -d,
        Right => d,
        Above | Behind | Tall | Wide | Big => d,
        Below | Front | Short | Thin | Small => -d,
    }
}

pub fn compute_ground_truth(
    category: QACategory,
    a: &ObjectStats3D<f64>,
    b: Option<&ObjectStats3D<f64>>,
    margins: &Margins,
) -> Result<GroundTruth, TruthError> {
    for s in std::iter::once(a).chain(b) {
        if category.needs_canonicalization() && s.frame != Frame::Canonical {
            return Err(TruthError::FrameMismatch {
                category,
                frame: s.frame,
            });
        }
    }
    if let Some(b) = b {
        if a.frame != b.frame {
            return Err(TruthError::FrameMismatch {
                category,
                frame: b.frame,
            });
        }
    }
    let need_b = || b.ok_or(TruthError::MissingSecondObject(category));

    if category.kind() != Kind::Estimation {
        let b = need_b()?;
        let rel = category.relation().expect("comparative categories carry a relation");
        let m = relation_margin(rel, a, b);
        if m.abs() < margins.threshold(a.diagonal(), b.diagonal()) {
            return Ok(GroundTruth::Uncertain);
        }
        return Ok(match category.kind() {
            Kind::Predicate => GroundTruth::Boolean(m > 0.0),
            Kind::Choice => GroundTruth::Choice(if m > 0.0 { Pick::First } else { Pick::Second }),
            _ => GroundTruth::Classify(if m > 0.0 { rel.word() } else { rel.opposite().word() }.to_string()),
        });
    }

    use QACategory::*;
    let v = match category {
        Height => a.height,
        Width => a.width,
        Elevation => a.elevation.ok_or(TruthError::FrameMismatch {
            category,
            frame: a.frame,
        })?,
        Distance => a.box_center.distance(need_b()?.box_center),
        Gap => {
            let b = need_b()?;
            min_pairwise_distance(&a.cleaned_points.points, &b.cleaned_points.points)
                .ok_or(TruthError::MissingPoints(category))?
        }
        VerticalDistance => (a.box_center.z - need_b()?.box_center.z).abs(),
        HorizontalDistance => {
            let d = a.box_center - need_b()?.box_center;
            d.x.hypot(d.y)
        }
        AboveDifference | BelowDifference => {
            let b = need_b()?;
            let (ea, eb) = (a.elevation.unwrap_or(a.aabb_min.z), b.elevation.unwrap_or(b.aabb_min.z));
            (ea - eb).abs()
        }
        BehindDifference | FrontDifference => (a.camera_center.z - need_b()?.camera_center.z).abs(),
        LeftDifference | RightDifference => (a.camera_center.x - need_b()?.camera_center.x).abs(),
        _ => unreachable!("comparatives handled above"),
    };
    Ok(GroundTruth::Quantity(v))
}
