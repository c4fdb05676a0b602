use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::interchange::QARecord;

/// Upper edges (m) of the quantitative value histogram; the last bin is open.
pub const VALUE_BINS: [f64; 7] = [0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0];

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub canonical: usize,
    pub camera: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub records: usize,
    pub qualitative: usize,
    pub quantitative: usize,
    /// Most frequent words across questions and answers, count-descending.
    pub top_words: Vec<(String, usize)>,
    pub categories: BTreeMap<String, CategoryCounts>,
    /// `VALUE_BINS.len() + 1` counts.
    pub value_histogram: Vec<usize>,
}

pub fn dataset_stats<'a>(records: impl IntoIterator<Item = &'a QARecord>, top_k: usize) -> StatsReport {
    let mut r = StatsReport {
        value_histogram: vec![0; VALUE_BINS.len() + 1],
        ..Default::default()
    };
    let mut words: BTreeMap<String, usize> = BTreeMap::new();
    for rec in records {
        r.records += 1;
        if rec.category.is_quantitative() {
            r.quantitative += 1;
        } else {
            r.qualitative += 1;
        }
        let c = r.categories.entry(rec.category.id().to_string()).or_default();
        if rec.canonicalized {
            c.canonical += 1;
        } else {
            c.camera += 1;
        }
        if let Some(v) = rec.raw_value_m {
            let bin = VALUE_BINS.iter().position(|&edge| v < edge).unwrap_or(VALUE_BINS.len());
            r.value_histogram[bin] += 1;
        }
        for text in [&rec.question, &rec.answer] {
            for w in text.split(|c: char| !c.is_alphabetic() && c != '\'') {
                let w = w.trim_matches('\'').to_lowercase();
                if !w.is_empty() {
                    *words.entry(w).or_default() += 1;
                }
            }
        }
    }
    let mut top: Vec<_> = words.into_iter().collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    top.truncate(top_k);
    r.top_words = top;
    r
}

impl StatsReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "records {}  qualitative {}  quantitative {}",
            self.records, self.qualitative, self.quantitative
        );
        if self.records == 0 {
            return s;
        }
        let w = self.categories.keys().map(String::len).max().unwrap_or(8).max(8);
        let _ = writeln!(s, "\n{:<w$}  {:>9}  {:>6}", "category", "canonical", "camera");
        for (k, c) in &self.categories {
            let _ = writeln!(s, "{k:<w$}  {:>9}  {:>6}", c.canonical, c.camera);
        }
        let _ = writeln!(s, "\nvalue (m)      count");
        let mut lo = 0.0;
        for (i, n) in self.value_histogram.iter().enumerate() {
            let label = match VALUE_BINS.get(i) {
                Some(hi) => format!("[{lo}, {hi})"),
                None => format!("[{lo}, inf)"),
            };
            let _ = writeln!(s, "{label:<13} {n:>6}");
            lo = VALUE_BINS.get(i).copied().unwrap_or(lo);
        }
        let _ = writeln!(s, "\nword          count");
        for (word, n) in &self.top_words {
            let _ = writeln!(s, "{word:<13} {n:>6}");
        }
        s
    }
}
