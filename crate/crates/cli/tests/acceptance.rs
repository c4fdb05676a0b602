//! One PASS/FAIL line per acceptance criterion. Exits non-zero when any
//! criterion fails; the lines carry the measured numbers either way.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spatialqa::cot::{annotate_reward, run_cot, ScriptedClient, COT_PROMPT, DEFAULT_MAX_TURNS};
use spatialqa::eval::{eval_quantitative, BenchmarkItem, ItemKind, Predictions};
use spatialqa::geometry::{dbscan, remove_outliers, Frame, OutlierParams, PointCloud, Vec3, NOISE};
use spatialqa::human_align::{round_human, RoundingPolicy, Unit};
use spatialqa::interchange::{QARecord, Rle};
use spatialqa::oracle::{check_records, emit_scene, random_observable_spec, CheckReport, GeneratorParams, SceneSpec};
use spatialqa::pipeline::{lift_scene, process_scene, PipelineConfig};
use spatialqa::qa::{add_answer_noise, QACategory, TemplateBank};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

// ---------------------------------------------------------------- oracle e2e

fn oracle_end_to_end() -> Verdict {
    const SCENES: usize = 100;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    pool.install(|| {
        let t0 = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let specs: Vec<SceneSpec> = (0..SCENES)
            .map(|k| random_observable_spec(&mut rng, &format!("e2e{k:03}"), &GeneratorParams::default()).unwrap().0)
            .collect();
        let gen_s = t0.elapsed().as_secs_f64();

        let bank = TemplateBank::default_bank();
        let run = |cfg: &PipelineConfig| {
            let mut total = CheckReport::default();
            let mut not_canonical = 0;
            for spec in &specs {
                let (scene, _) = emit_scene(spec).unwrap();
                let out = process_scene(&scene, cfg, &bank).unwrap();
                not_canonical += !out.canonicalized as usize;
                total.merge(check_records(spec, &out.qa, 0.01, 0.01).unwrap());
            }
            (total, not_canonical)
        };
        let t1 = Instant::now();
        let (report, not_canonical) = run(&PipelineConfig::default());
        let pipe_s = t1.elapsed().as_secs_f64();

        let mut no_filter = PipelineConfig::default();
        no_filter.outliers.neighbors = 0;
        let (clean, _) = run(&no_filter);

        let pass = report.mismatches.is_empty() && not_canonical == 0 && pipe_s < 60.0;
        verdict(
            pass,
            format!(
                "{SCENES} scenes, {} quantitative + {} qualitative ({} uncertain) records; {} mismatches, worst {:.2}x tolerance; \
                 pipeline {pipe_s:.1} s single-threaded (+{gen_s:.1} s scene generation). \
                 Density filter off: {} mismatches, worst {:.2}x",
                report.quantitative,
                report.qualitative,
                report.uncertain,
                report.mismatches.len(),
                report.worst_ratio,
                clean.mismatches.len(),
                clean.worst_ratio
            ),
        )
    })
}

// ---------------------------------------------------------- canonicalization

fn canonicalization() -> Verdict {
    let params = GeneratorParams {
        pitch_range_deg: (0.0, 45.0),
        camera_height_range: (1.0, 2.0),
        max_distance: 12.0,
        min_objects: 1,
        max_objects: 3,
        placement_window: ((0.15, 0.85), (0.6, 0.95)),
        min_pixels: 200,
        require_observable: false,
        ..Default::default()
    };
    let cfg = PipelineConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let (mut n, mut bad, mut worst_up, mut worst_h, mut min_pitch) = (0, 0, 0f64, 0f64, 90f64);
    while n < 50 {
        let (spec, _) = random_observable_spec(&mut rng, &format!("canon{n}"), &params).unwrap();
        let (scene, truth) = emit_scene(&spec).unwrap();
        if truth.ground_fraction <= 0.05 {
            continue;
        }
        n += 1;
        min_pitch = min_pitch.min(spec.camera.pitch_deg);
        let (frame, _) = lift_scene(&scene, &cfg).unwrap();
        if !frame.canonicalized {
            bad += 1;
            continue;
        }
        let up = Vec3::from_array(truth.up_in_camera);
        let got = frame.up_in_camera();
        let angle = (up.dot(got) / (up.norm() * got.norm())).clamp(-1.0, 1.0).acos().to_degrees();
        let dh = (frame.apply(Vec3::zero()).z - truth.camera_height).abs();
        worst_up = worst_up.max(angle);
        worst_h = worst_h.max(dh);
        bad += (angle > 1.0 || dh > 0.01) as usize;
    }

    let sparse = GeneratorParams {
        width: 320,
        height: 240,
        min_pixels: 100,
        require_observable: false,
        ..Default::default()
    };
    let mut fallback = 0;
    for i in 0..50 {
        let (spec, _) = random_observable_spec(&mut rng, &format!("sparse{i}"), &sparse).unwrap();
        let (mut scene, _) = emit_scene(&spec).unwrap();
        let budget = (scene.depth.valid_count() as f64 * rng.random_range(0.0..0.049)) as usize;
        let mut surface = scene.surface_mask.decode();
        for (k, s) in surface.iter_mut().filter(|s| **s).enumerate() {
            *s = k < budget;
        }
        scene.surface_mask = Rle::encode(&surface);
        fallback += !lift_scene(&scene, &cfg).unwrap().0.canonicalized as usize;
    }
    verdict(
        bad == 0 && fallback == 50,
        format!(
            "50 scenes (pitch {min_pitch:.1}-45 deg): worst up-axis {worst_up:.3} deg, worst height {:.1} mm, {bad} out of tolerance; \
             below-threshold ground: {fallback}/50 left uncanonicalized",
            worst_h * 1000.0
        ),
    )
}

// ---------------------------------------------------------------- clustering

fn reference_dbscan(pts: &[Vec3<f64>], eps: f64, min_points: usize) -> Vec<i32> {
    let n = pts.len();
    let nb: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| pts[i].distance_squared(pts[j]) <= eps * eps).collect())
        .collect();
    let core: Vec<bool> = nb.iter().map(|v| v.len() >= min_points).collect();
    let mut labels = vec![NOISE; n];
    let mut next = 0;
    for s in 0..n {
        if !core[s] || labels[s] != NOISE {
            continue;
        }
        let mut stack = vec![s];
        labels[s] = next;
        while let Some(p) = stack.pop() {
            for &q in &nb[p] {
                if core[q] && labels[q] == NOISE {
                    labels[q] = next;
                    stack.push(q);
                }
            }
        }
        next += 1;
    }
    for i in (0..n).filter(|&i| !core[i]) {
        labels[i] = nb[i].iter().filter(|&&q| core[q]).map(|&q| labels[q]).min().unwrap_or(NOISE);
    }
    labels
}

fn planted(params: &OutlierParams) -> (usize, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut removed, mut worst, mut sum) = (0, 1f64, 0.0);
    for _ in 0..100 {
        let size = Vec3::new(rng.random_range(0.2..0.8), rng.random_range(0.2..0.8), rng.random_range(0.2..0.8));
        let center = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5), rng.random_range(1.5..4.0));
        let n = rng.random_range(800..2000);
        let inliers: Vec<Vec3<f64>> = (0..n)
            .map(|_| {
                let mut u = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
                u[rng.random_range(0..3)] = if rng.random_bool(0.5) { 0.5 } else { -0.5 };
                center + Vec3::new(u[0] * size.x, u[1] * size.y, u[2] * size.z)
            })
            .collect();
        let scale = params.scale_multiplier * PointCloud::new(inliers.clone(), Frame::Camera).std_per_axis().norm();
        let mut pts = inliers.clone();
        for _ in 0..rng.random_range(1..20) {
            let dir = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            pts.push(center + dir.normalized().unwrap() * (scale * rng.random_range(5.0..8.0)));
        }
        let cleaned = remove_outliers(&PointCloud::new(pts, Frame::Camera), params).unwrap();
        let kept = cleaned.points.iter().filter(|p| inliers.contains(p)).count();
        removed += (kept == cleaned.len()) as usize;
        let frac = kept as f64 / n as f64;
        worst = worst.min(frac);
        sum += frac;
    }
    (removed, worst, sum / 100.0)
}

fn clustering() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut equal = 0;
    for trial in 0..200 {
        let n = rng.random_range(1..=500);
        let blobs: Vec<Vec3<f64>> = (0..rng.random_range(1..5))
            .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..3.0)))
            .collect();
        let grid = rng.random_bool(0.3);
        let pts: Vec<Vec3<f64>> = (0..n)
            .map(|_| {
                let c = blobs[rng.random_range(0..blobs.len())];
                let p = c + Vec3::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
                if grid {
                    Vec3::new((p.x * 20.0).round() / 20.0, (p.y * 20.0).round() / 20.0, (p.z * 20.0).round() / 20.0)
                } else {
                    p
                }
            })
            .collect();
        let eps = [0.05, 0.1, 0.05 * 2f64.sqrt(), rng.random_range(0.01..0.3)][trial % 4];
        let min_points = rng.random_range(1..12);
        equal += (dbscan(&PointCloud::new(pts.clone(), Frame::Camera), eps, min_points) == reference_dbscan(&pts, eps, min_points))
            as usize;
    }
    let (removed, worst, mean) = planted(&OutlierParams::default());
    let (removed_c, worst_c, _) = planted(&OutlierParams {
        neighbors: 0,
        ..Default::default()
    });
    verdict(
        equal == 200 && removed == 100 && worst >= 0.99,
        format!(
            "dbscan = quadratic reference on {equal}/200 clouds; full denoising: outliers removed in {removed}/100 trials, \
             inliers kept min {:.1}% mean {:.1}%; clustering stage alone: \
             removed {removed_c}/100, inliers kept min {:.1}%",
            100.0 * worst,
            100.0 * mean,
            100.0 * worst_c
        ),
    )
}

// ------------------------------------------------------------------- mixing

fn mix_constant() -> Verdict {
    let mut cfg = PipelineConfig::default();
    cfg.synth.samples_per_scene = 10_000;
    let bank = TemplateBank::default_bank();
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let params = GeneratorParams {
        width: 320,
        height: 240,
        min_pixels: 150,
        require_observable: false,
        ..Default::default()
    };
    let (mut total, mut qual) = (0usize, 0usize);
    for k in 0..10 {
        let (spec, _) = random_observable_spec(&mut rng, &format!("mix{k}"), &params).unwrap();
        let (scene, _) = emit_scene(&spec).unwrap();
        let out = process_scene(&scene, &cfg, &bank).unwrap();
        for r in out.records() {
            total += 1;
            qual += !r.category.is_quantitative() as usize;
        }
    }
    let f = qual as f64 / total as f64;
    verdict(
        total == 100_000 && (f - 0.5).abs() <= 0.01,
        format!("{total} records over 10 scenes, qualitative fraction {f:.4}"),
    )
}

// ------------------------------------------------------------ human anchors

fn human_anchors() -> Verdict {
    const N: usize = 100_000;
    let policy = RoundingPolicy::default();
    let rate = |v: f64, seed: u64, want: f64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..N)
            .filter(|_| {
                let q = round_human(v, &policy, &mut rng).unwrap();
                q.unit == Unit::M && q.display_value == want
            })
            .count() as f64
            / N as f64
    };
    let r1 = rate(0.86, 1, 1.0);
    let r2 = rate(23.0, 2, 20.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let imperial = (0..N)
        .filter(|_| {
            let v = 10f64.powf(rng.random_range(-3.0..3.0));
            round_human(v, &policy, &mut rng).unwrap().unit.is_imperial()
        })
        .count() as f64
        / N as f64;
    verdict(
        (r1 - 0.75).abs() <= 0.02 && (r2 - 0.80).abs() <= 0.02 && (imperial - 0.20).abs() <= 0.01,
        format!("0.86 m -> \"1 meter\" {r1:.4}; 23 m -> \"20 meters\" {r2:.4}; imperial {imperial:.4} (n = {N} each)"),
    )
}

// ----------------------------------------------------------- metric harness

fn quant_item(q: String, gt: f64) -> BenchmarkItem {
    BenchmarkItem {
        image_id: "fx".into(),
        question: q,
        gt_answer: format!("{gt} m"),
        kind: ItemKind::Quantitative,
        gt_value_si: Some(gt),
        truth: None,
        captions: None,
    }
}

fn metric_harness() -> Verdict {
    let fixture: [(f64, Option<&str>); 10] = [
        (2.0, Some("about 2.1 m")),
        (0.5, Some("1 meter")),
        (0.9144, Some("I can't tell.")),
        (1.5, Some("3 meters")),
        (4.0, Some("6 m")),
        (10.0, Some("9.5 meters")),
        (1.0, Some("0.4 m")),
        (0.2, Some("15 cm")),
        (2.0, None),
        (1.524, Some("5 feet")),
    ];
    let mut preds = Predictions::new();
    let mut bench = Vec::new();
    for (i, (gt, p)) in fixture.iter().enumerate() {
        let q = format!("q{i}");
        bench.push(quant_item(q.clone(), *gt));
        if let Some(p) = p {
            preds.insert(("fx".into(), q), p.to_string());
        }
    }
    let m = eval_quantitative(&preds, &bench);
    let mse = (0.01 + 0.25 + 2.25 + 4.0 + 0.25 + 0.36 + 0.0025 + 0.0) / 8.0;
    let fixture_ok = m.output_number_rate == 0.8
        && m.in_range_50_200 == 0.7
        && m.in_range_66_150 == 0.5
        && m.in_range_90_110 == 0.3
        && m.mse_m2.is_some_and(|x| (x - mse).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut nested = 0;
    for _ in 0..1000 {
        let mut preds = Predictions::new();
        let mut bench = Vec::new();
        for i in 0..rng.random_range(1..40) {
            let gt = 10f64.powf(rng.random_range(-2.0..2.0));
            let q = format!("q{i}");
            bench.push(quant_item(q.clone(), gt));
            let answer = match rng.random_range(0..10) {
                0 => continue,
                1 => "no idea".to_string(),
                2 => format!("{} m", gt * [0.5, 2.0, 1.5, 0.9, 1.1][rng.random_range(0..5)]),
                _ => format!("{} cm", 100.0 * gt * 2f64.powf(rng.random_range(-2.0..2.0))),
            };
            preds.insert(("fx".into(), q), answer);
        }
        let m = eval_quantitative(&preds, &bench);
        nested += (m.in_range_90_110 <= m.in_range_66_150
            && m.in_range_66_150 <= m.in_range_50_200
            && m.in_range_50_200 <= m.output_number_rate) as usize;
    }
    verdict(
        fixture_ok && nested == 1000,
        format!(
            "fixture: output {:.2}, bands {:.2}/{:.2}/{:.2}, MSE {:.6} (expected 0.80, 0.70/0.50/0.30, {mse:.6}); \
             band nesting on {nested}/1000 random fixtures",
            m.output_number_rate,
            m.in_range_50_200,
            m.in_range_66_150,
            m.in_range_90_110,
            m.mse_m2.unwrap_or(f64::NAN)
        ),
    )
}

// -------------------------------------------------------------------- noise

fn tobit_std(pairs: &[(f64, f64)]) -> f64 {
    let z = Normal::standard();
    let nll = |s: f64| -> f64 {
        pairs
            .iter()
            .map(|&(mu, y)| if y <= 0.0 { -z.cdf(-mu / s).ln() } else { -(z.pdf((y - mu) / s) / s).ln() })
            .sum()
    };
    let (mut lo, mut hi) = (1e-3, 2.0);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let (a, b) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if nll(a) < nll(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    (lo + hi) / 2.0
}

fn noise() -> Verdict {
    let records: Vec<QARecord> = (0..20_000u64)
        .map(|i| {
            let raw = 0.05 + (i % 40) as f64 * 0.05;
            QARecord {
                image_id: format!("n{}", i / 100),
                category: QACategory::Distance,
                question: "How far apart are the mug and the kettle?".into(),
                answer: format!("They are {:.0} centimeters apart.", raw * 100.0),
                object_indices: vec![0, 1],
                raw_value_m: Some(raw),
                canonicalized: true,
                seed: i,
            }
        })
        .collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for std in [0.1, 0.2, 0.3] {
        let noisy = add_answer_noise(records.clone(), std, &RoundingPolicy::default(), 77).unwrap();
        let pairs: Vec<(f64, f64)> = records
            .iter()
            .zip(&noisy)
            .map(|(a, b)| (a.raw_value_m.unwrap(), b.raw_value_m.unwrap()))
            .collect();
        let naive = (pairs.iter().map(|(m, y)| (y - m).powi(2)).sum::<f64>() / pairs.len() as f64).sqrt();
        let est = tobit_std(&pairs);
        ok &= (est - std).abs() <= 0.01;
        parts.push(format!("{std} -> {est:.4} (uncorrected {naive:.4})"));
    }
    verdict(ok, format!("censoring-corrected std over 20000 records: {}", parts.join(", ")))
}

// -------------------------------------------------------------- determinism

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_spatialqa");
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("scenes");
    let gen = dir.path().join("gen.toml");
    fs::write(&gen, "width = 320\nheight = 240\nmin_pixels = 150\nrequire_observable = false\n").unwrap();
    let ok = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.success();
    let p = |x: &Path| x.to_str().unwrap().to_string();
    if !ok(&["oracle-gen", "--count", "12", "--seed", "6", "--generator", &p(&gen), "--out", &p(&root)]) {
        return verdict(false, "oracle-gen failed".into());
    }
    let synth = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        assert!(ok(&["synth", &p(&root), "--seed", "17", "--jobs", jobs, "--out", &p(&out)]));
        fs::read(out).unwrap()
    };
    let a = synth("a.jsonl", "1");
    let b = synth("b.jsonl", "1");
    let c = synth("c.jsonl", "4");
    let lines = a.iter().filter(|&&c| c == b'\n').count();
    verdict(
        a == b && a == c && lines > 0,
        format!(
            "12 scenes, {lines} records ({} bytes): rerun identical {}, --jobs 4 vs 1 identical {}",
            a.len(),
            a == b,
            a == c
        ),
    )
}

// ---------------------------------------------------------------------- CoT

fn cot_protocol() -> Verdict {
    let mut blocks: Vec<Vec<&str>> = Vec::new();
    let mut cur: Vec<&str> = Vec::new();
    for line in COT_PROMPT.lines() {
        if line.starts_with("[Question] ") {
            cur = vec![line];
        } else if line.starts_with('[') && !cur.is_empty() {
            cur.push(line);
            if line.starts_with("[Answer]") {
                blocks.push(std::mem::take(&mut cur));
            }
        }
    }
    let mut reproduced = 0;
    for block in &blocks {
        let question = block[0].strip_prefix("[Question] ").unwrap();
        let (mut llm_script, mut vlm_script, mut pending) = (Vec::new(), Vec::new(), String::new());
        for line in &block[1..] {
            if line.starts_with("[You]") {
                llm_script.push(line.to_string());
            } else if let Some(r) = line.strip_prefix("[Friend] ").or_else(|| line.strip_prefix("[Tool] ")) {
                vlm_script.push(r.to_string());
            } else if line.starts_with("[Robot]") {
                pending = format!("{line}\n");
            } else {
                llm_script.push(format!("{pending}{line}"));
            }
        }
        let llm = ScriptedClient::new(llm_script);
        let vlm = ScriptedClient::new(vlm_script);
        let Ok(t) = run_cot(question, "sample.jpg", &llm, &vlm, DEFAULT_MAX_TURNS) else {
            continue;
        };
        let expected: String = block
            .iter()
            .filter(|l| !l.starts_with("[Robot]"))
            .map(|l| format!("{}\n", l.replacen("[Tool]", "[Friend]", 1)))
            .collect();
        reproduced += (t.render() == expected) as usize;
    }

    let frames: Vec<String> = (0..6).map(|i| format!("frame{i:02}")).collect();
    let replies = [
        "about 1.5 meters", "1.4 m", "130 cm", "120 centimeters", "1 m", "1.1 m", "3 feet", "80 cm", "2 feet",
        "half a meter", "30 cm", "20 cm",
    ];
    let vlm = ScriptedClient::new(replies);
    let rewards: Vec<f64> = annotate_reward(&frames, "What is the distance between the gripper and the cup?", &vlm, 2)
        .unwrap()
        .into_iter()
        .map(|r| r.unwrap_or(f64::NAN))
        .collect();
    let decreasing = rewards.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = rewards.iter().map(|r| format!("{r:.3}")).collect();
    verdict(
        blocks.len() == 3 && reproduced == 3 && decreasing,
        format!(
            "{reproduced}/{} sample dialogues reproduced verbatim; rewards [{}] strictly decreasing: {decreasing}",
            blocks.len(),
            shown.join(", ")
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("Oracle end-to-end", oracle_end_to_end),
        ("Canonicalization", canonicalization),
        ("Clustering equivalence", clustering),
        ("Mix constant", mix_constant),
        ("Human alignment anchors", human_anchors),
        ("Metric harness", metric_harness),
        ("Noise ablation plumbing", noise),
        ("Determinism", determinism),
        ("CoT protocol", cot_protocol),
    ];
    let mut failed = Vec::new();
    let mut times = HashMap::new();
    for (name, check) in criteria {
        let t = Instant::now();
        let v = check();
        times.insert(name, t.elapsed().as_secs_f64());
        println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed.push(name);
        }
    }
    let total: f64 = times.values().sum();
    println!(
        "acceptance: {}/{} criteria pass ({total:.0} s){}",
        criteria.len() - failed.len(),
        criteria.len(),
        if failed.is_empty() { String::new() } else { format!("; failing: {}", failed.join(", ")) }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
