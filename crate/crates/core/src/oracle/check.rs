use serde::{Deserialize, Serialize};

use super::{object_truth, relation_margin, truth_answer, OracleError, SceneSpec};
use crate::qa::{GroundTruth, Margins, Pick, SynthesizedQa};

/// A synthesized answer that disagrees with the oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub image_id: String,
    pub category: String,
    pub objects: Vec<u32>,
    pub got: String,
    pub want: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub quantitative: usize,
    pub qualitative: usize,
    /// Qualitative records the pipeline marked uncertain; not compared.
    pub uncertain: usize,
    pub mismatches: Vec<Mismatch>,
    /// Largest `|got − want| / (abs_tol + rel_tol·want)` seen.
    pub worst_ratio: f64,
}

impl CheckReport {
    pub fn merge(&mut self, other: CheckReport) {
        self.quantitative += other.quantitative;
        self.qualitative += other.qualitative;
        self.uncertain += other.uncertain;
        self.mismatches.extend(other.mismatches);
        self.worst_ratio = self.worst_ratio.max(other.worst_ratio);
    }
}

/// Compares synthesized records against the oracle. Quantities must agree
/// within `abs_tol + rel_tol·truth`; decided comparisons must point the same
/// way as the exact poses.
pub fn check_records(
    spec: &SceneSpec,
    qa: &[SynthesizedQa],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<CheckReport, OracleError> {
    let mut report = CheckReport::default();
    for s in qa {
        let r = &s.record;
        let a = r.object_indices[0] as usize;
        let b = r.object_indices.get(1).map(|&i| i as usize);
        let miss = |got: String, want: String| Mismatch {
            image_id: r.image_id.clone(),
            category: r.category.id().to_string(),
            objects: r.object_indices.clone(),
            got,
            want,
        };
        if r.category.is_quantitative() {
            report.quantitative += 1;
            let want = truth_answer(spec, r.category, a, b, &Margins::default())?
                .quantity()
                .expect("estimations are quantities");
            let got = r.raw_value_m.unwrap_or(f64::NAN);
            let ratio = (got - want).abs() / (abs_tol + rel_tol * want);
            report.worst_ratio = report.worst_ratio.max(if ratio.is_nan() { f64::INFINITY } else { ratio });
            if !(ratio <= 1.0) {
                report.mismatches.push(miss(format!("{got:.4}"), format!("{want:.4}")));
            }
            continue;
        }
        if s.truth == GroundTruth::Uncertain {
            report.uncertain += 1;
            continue;
        }
        report.qualitative += 1;
        let rel = r.category.relation().expect("comparative");
        let tb = object_truth(spec, b.ok_or(OracleError::MissingSecondObject(r.category))?)?;
        let holds = relation_margin(rel, &object_truth(spec, a)?, &tb) > 0.0;
        let agrees = match &s.truth {
            GroundTruth::Boolean(v) => *v == holds,
            GroundTruth::Choice(p) => (*p == Pick::First) == holds,
            GroundTruth::Classify(label) => (label == rel.word()) == holds,
            _ => false,
        };
        if !agrees {
            report.mismatches.push(miss(format!("{:?}", s.truth), format!("holds={holds}")));
        }
    }
    Ok(report)
}
