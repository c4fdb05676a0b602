use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::InterchangeError;
use crate::qa::QACategory;

const PLACEHOLDERS: [&str; 3] = ["[A]", "[B]", "[X]"];

/// One synthesized question/answer pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QARecord {
    pub image_id: String,
    pub category: QACategory,
    pub question: String,
    pub answer: String,
    pub object_indices: Vec<u32>,
    /// Ground-truth metres before rounding; quantitative categories only.
    pub raw_value_m: Option<f64>,
    pub canonicalized: bool,
    pub seed: u64,
}

impl QARecord {
    pub fn validate(&self) -> Result<(), String> {
        if self.question.trim().is_empty() || self.answer.trim().is_empty() {
            return Err("empty question or answer".into());
        }
        for p in PLACEHOLDERS {
            if self.question.contains(p) || self.answer.contains(p) {
                return Err(format!("unresolved placeholder {p}"));
            }
        }
        if self.object_indices.len() != self.category.arity() {
            return Err(format!(
                "{} expects {} objects, got {}",
                self.category,
                self.category.arity(),
                self.object_indices.len()
            ));
        }
        match (self.category.is_quantitative(), self.raw_value_m) {
            (true, Some(v)) if v.is_finite() && v >= 0.0 => Ok(()),
            (true, v) => Err(format!("quantitative record with raw value {v:?}")),
            (false, None) => Ok(()),
            (false, Some(_)) => Err("qualitative record carries a raw value".into()),
        }
    }
}

/// Streams records as JSON lines; returns how many were written.
pub fn write_qa_records<W: Write>(
    records: impl IntoIterator<Item = QARecord>,
    out: &mut W,
) -> Result<usize, InterchangeError> {
    let mut n = 0;
    for r in records {
        r.validate()
            .map_err(|m| InterchangeError::SchemaViolation(format!("record {n}: {m}")))?;
        serde_json::to_writer(&mut *out, &r).map_err(|e| InterchangeError::SchemaViolation(e.to_string()))?;
        out.write_all(b"\n")
            .map_err(|e| InterchangeError::io(Path::new("<stream>"), e))?;
        n += 1;
    }
    Ok(n)
}

pub fn write_qa_dataset(
    records: impl IntoIterator<Item = QARecord>,
    out_path: &Path,
) -> Result<usize, InterchangeError> {
    let file = File::create(out_path).map_err(|e| InterchangeError::io(out_path, e))?;
    let mut w = BufWriter::new(file);
    let n = write_qa_records(records, &mut w).map_err(|e| match e {
        InterchangeError::IoFailure { source, .. } => InterchangeError::io(out_path, source),
        other => other,
    })?;
    w.flush().map_err(|e| InterchangeError::io(out_path, e))?;
    Ok(n)
}

/// Line-by-line reader; errors carry 1-based line numbers. Blank lines are skipped.
pub struct QaLines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> QaLines<R> {
    pub fn new(reader: R) -> Self {
        Self {
            inner: reader.lines(),
            line: 0,
        }
    }
}

impl<R: BufRead> Iterator for QaLines<R> {
    type Item = Result<QARecord, InterchangeError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = self.inner.next()?;
            self.line += 1;
            let line = self.line;
            let text = match text {
                Ok(t) => t,
                Err(e) => {
                    return Some(Err(InterchangeError::ParseFailure {
                        line,
                        message: e.to_string(),
                    }))
                }
            };
            if text.trim().is_empty() {
                continue;
            }
            return Some(
                serde_json::from_str::<QARecord>(&text)
                    .map_err(|e| e.to_string())
                    .and_then(|r| r.validate().map(|_| r))
                    .map_err(|message| InterchangeError::ParseFailure { line, message }),
            );
        }
    }
}

pub fn read_qa_dataset(path: &Path) -> Result<Vec<QARecord>, InterchangeError> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => InterchangeError::MissingFile(path.to_path_buf()),
        _ => InterchangeError::io(path, e),
    })?;
    QaLines::new(BufReader::new(file)).collect()
}
