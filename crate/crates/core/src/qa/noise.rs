use rand_distr::{Distribution, Normal};

use crate::human_align::{find_quantities, round_human, AlignError, RoundingPolicy};
use crate::interchange::QARecord;
use crate::rng::keyed_rng;

pub const NOISE_STREAM: &str = "noise";

/// Perturbs quantitative answers: `raw' = max(0, raw + N(0, std_m²))`, and
/// re-renders the quantity in the answer text. Qualitative records pass
/// through untouched. Each record's draw is keyed by its own seed.
pub fn add_answer_noise(
    records: impl IntoIterator<Item = QARecord>,
    std_m: f64,
    policy: &RoundingPolicy,
    seed: u64,
) -> Result<Vec<QARecord>, AlignError> {
    if !(std_m >= 0.0 && std_m.is_finite()) {
        return Err(AlignError::NegativeValue(std_m));
    }
    let normal = Normal::new(0.0, std_m).expect("finite non-negative std");
    records
        .into_iter()
        .map(|mut r| {
            let Some(raw) = r.raw_value_m.filter(|_| r.category.is_quantitative()) else {
                return Ok(r);
            };
            let mut rng = keyed_rng(NOISE_STREAM, seed, &r.image_id, r.seed);
            let noisy = (raw + normal.sample(&mut rng)).max(0.0);
            let q = round_human(noisy, policy, &mut rng)?;
            r.answer = replace_quantity(&r.answer, raw, &q.phrasing);
            r.raw_value_m = Some(noisy);
            Ok(r)
        })
        .collect()
}

/// Swaps the quantity span closest to `near_m` for `replacement`; appends
/// the replacement when the text holds no quantity.
fn replace_quantity(text: &str, near_m: f64, replacement: &str) -> String {
    let best = find_quantities(text)
        .into_iter()
        .min_by(|a, b| (a.1 - near_m).abs().total_cmp(&(b.1 - near_m).abs()));
    match best {
        Some((span, _)) => {
            let mut out = String::with_capacity(text.len() + replacement.len());
            out.push_str(&text[..span.start]);
            out.push_str(replacement);
            out.push_str(&text[span.end..]);
            if span.start == 0 {
                let mut c = out.chars();
                if let Some(f) = c.next() {
                    return f.to_uppercase().chain(c).collect();
                }
            }
            out
        }
        None => format!("{text} ({replacement})"),
    }
}
