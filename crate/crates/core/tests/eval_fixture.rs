use std::fs;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spatialqa::eval::{
    eval_qualitative, eval_quantitative, in_range, load_benchmark, load_predictions, BenchmarkItem, ItemKind, Matcher,
    Predictions, BANDS,
};

// (reference, prediction); ratios and squared errors worked out by hand:
//   ratio %   50-200 66.7-150 90-110  err²
//   105        y      y        y      0.01
//   200        y      n        n      0.25
//   unparsed
//   200        y      n        n      2.25
//   150        y      y        n      4
//   95         y      y        y      0.25
//   40         n      n        n      0.36
//   75         y      y        n      0.0025
//   missing
//   100        y      y        y      0
const FIXTURE: [(&str, Option<&str>); 10] = [
    ("2 meters", Some("about 2.1 m")),
    ("50 cm", Some("1 meter")),
    ("3 feet", Some("I can't tell.")),
    ("1.5 m", Some("3 meters")),
    ("4 m", Some("6 m")),
    ("10 m", Some("9.5 meters")),
    ("1 m", Some("0.4 m")),
    ("20 cm", Some("15 cm")),
    ("2 m", None),
    ("5 feet", Some("5 feet")),
];

fn write_fixture(dir: &std::path::Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let mut bench = String::new();
    let mut preds = String::new();
    for (i, (gt, pred)) in FIXTURE.iter().enumerate() {
        let q = format!("How far is thing {i}?");
        bench += &format!(
            "{}\n",
            serde_json::json!({"image_id": "fx", "question": q, "gt_answer": gt, "kind": "quantitative"})
        );
        if let Some(p) = pred {
            preds += &format!("{}\n", serde_json::json!({"image_id": "fx", "question": q, "answer": p}));
        }
    }
    let (b, p) = (dir.join("bench.jsonl"), dir.join("preds.jsonl"));
    fs::write(&b, bench).unwrap();
    fs::write(&p, preds).unwrap();
    (b, p)
}

#[test]
fn hand_computed_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let (b, p) = write_fixture(dir.path());
    let bench = load_benchmark(&b).unwrap();
    let m = eval_quantitative(&load_predictions(&p).unwrap(), &bench);
    assert_eq!((m.items, m.parsed), (10, 8));
    assert_eq!(m.output_number_rate, 0.8);
    assert_eq!(m.in_range_50_200, 0.7);
    assert_eq!(m.in_range_66_150, 0.5);
    assert_eq!(m.in_range_90_110, 0.3);
    let mse = (0.01 + 0.25 + 2.25 + 4.0 + 0.25 + 0.36 + 0.0025 + 0.0) / 8.0;
    assert!((m.mse_m2.unwrap() - mse).abs() < 1e-12, "{:?}", m.mse_m2);
}

fn qual(q: &str, gt: &str, captions: Option<[&str; 2]>) -> BenchmarkItem {
    BenchmarkItem {
        image_id: "fx".into(),
        question: q.into(),
        gt_answer: gt.into(),
        kind: ItemKind::Qualitative,
        gt_value_si: None,
        truth: None,
        captions: captions.map(|c| c.iter().map(|s| s.to_string()).collect()),
    }
}

#[test]
fn qualitative_fixture() {
    let bench = vec![
        qual("Is the cup left of the plate?", "Yes, it is.", None),
        qual("Which is taller, the lamp or the sofa?", "The lamp.", Some(["lamp", "sofa"])),
        qual("Is the box above the rug?", "No.", None),
        qual("Is the mug behind the kettle?", "Yes.", None),
        qual("Which is bigger, the bed or the chair?", "The bed.", Some(["bed", "chair"])),
    ];
    let preds: Predictions = [
        ("Is the cup left of the plate?", "Indeed it is"),
        ("Which is taller, the lamp or the sofa?", "the sofa is taller"),
        ("Is the box above the rug?", "Hmm, maybe."),
        ("Is the mug behind the kettle?", "yes"),
    ]
    .into_iter()
    .map(|(q, a)| (("fx".to_string(), q.to_string()), a.to_string()))
    .collect();
    let r = eval_qualitative(&preds, &bench, Matcher::ExactLabel).unwrap();
    // correct: cup, mug; incorrect: sofa, missing bed; needs human: "maybe"
    assert_eq!((r.items, r.correct, r.incorrect, r.needs_human), (5, 2, 2, 1));
    assert_eq!(r.accuracy, Some(0.5));
    assert!(matches!(eval_qualitative(&preds, &bench, Matcher::OracleTruth), Err(_)));
}

fn random_fixture(rng: &mut ChaCha8Rng) -> (Predictions, Vec<BenchmarkItem>) {
    let n = rng.random_range(1..40);
    let mut preds = Predictions::new();
    let mut bench = Vec::new();
    for i in 0..n {
        let gt = 10f64.powf(rng.random_range(-2.0..2.0));
        let q = format!("q{i}");
        bench.push(BenchmarkItem {
            image_id: "r".into(),
            question: q.clone(),
            gt_answer: format!("{gt} m"),
            kind: ItemKind::Quantitative,
            gt_value_si: Some(gt),
            truth: None,
            captions: None,
        });
        let answer = match rng.random_range(0..10) {
            0 => continue,
            1 => "no idea".to_string(),
            // land exactly on band edges now and then
            2 => format!("{} m", gt * [0.5, 2.0, 1.5, 0.9, 1.1][rng.random_range(0..5)]),
            _ => format!("{} cm", 100.0 * gt * 2f64.powf(rng.random_range(-2.0..2.0))),
        };
        preds.insert(("r".into(), q), answer);
    }
    (preds, bench)
}

#[test]
fn bands_nest_on_random_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..1000 {
        let (preds, bench) = random_fixture(&mut rng);
        let m = eval_quantitative(&preds, &bench);
        assert!(m.in_range_90_110 <= m.in_range_66_150, "{m:?}");
        assert!(m.in_range_66_150 <= m.in_range_50_200, "{m:?}");
        assert!(m.in_range_50_200 <= m.output_number_rate, "{m:?}");
        assert!(m.mse_m2.is_some() == (m.parsed > 0));
    }
}

#[test]
fn item_level_bands_nest() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for _ in 0..100_000 {
        let gt = 10f64.powf(rng.random_range(-3.0..3.0));
        let pred = gt * rng.random_range(0.0..3.0);
        let hits: Vec<bool> = BANDS.iter().map(|&(lo, hi)| in_range(pred, gt, lo, hi).unwrap()).collect();
        assert!(hits.windows(2).all(|w| w[0] || !w[1]), "{pred} vs {gt}: {hits:?}");
    }
    assert!(in_range(1.0, 0.0, 50.0, 200.0).is_err());
}
