//! Scene-to-dataset orchestration: curation, lifting, canonicalization and
//! question synthesis over a directory of scenes.

mod config;
mod stats;

pub use config::{ConfigError, CurationConfig, PipelineConfig};
pub use stats::{dataset_stats, StatsReport};

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curation::{apply_ambiguity, background_filter, resolve_ambiguity, semantic_filter, similarity_matrix, CurationError};
use crate::geometry::{canonicalize, object_stats, remove_outliers, unproject, CanonicalFrame, GeometryError, PointCloud};
use crate::interchange::{list_scenes, load_scene, write_qa_records, InterchangeError, ObjectEntity, QARecord, SceneRecord};
use crate::qa::{synthesize_scene_qa_with_truth, SynthError, SynthesizedQa, TemplateBank};
use crate::rng::keyed_rng;

/// RNG domain for ground-plane RANSAC.
pub const RANSAC_STREAM: &str = "ransac";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Interchange(#[from] InterchangeError),
    #[error(transparent)]
    Curation(#[from] CurationError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {0}: {1}")]
    Output(String, std::io::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// What happened to one scene.
#[derive(Clone, Debug)]
pub struct SceneOutcome {
    pub image_id: String,
    /// Why the scene produced nothing; `None` when it was kept.
    pub dropped: Option<String>,
    pub canonicalized: bool,
    pub frame: CanonicalFrame<f64>,
    /// Entities after lifting and curation, with statistics filled in.
    pub entities: Vec<ObjectEntity>,
    pub qa: Vec<SynthesizedQa>,
}

impl SceneOutcome {
    fn dropped(image_id: &str, reason: String) -> Self {
        Self {
            image_id: image_id.to_string(),
            dropped: Some(reason),
            canonicalized: false,
            frame: CanonicalFrame::identity(),
            entities: Vec::new(),
            qa: Vec::new(),
        }
    }

    pub fn records(&self) -> impl Iterator<Item = &QARecord> {
        self.qa.iter().map(|s| &s.record)
    }
}

/// Lifts every entity to 3D and curates the set. Entities that are too small
/// or whose cleaned cloud comes back empty are left out.
pub fn lift_scene(scene: &SceneRecord, cfg: &PipelineConfig) -> Result<(CanonicalFrame<f64>, Vec<ObjectEntity>), PipelineError> {
    let lifted = unproject::<f64>(&scene.depth, scene.fov_h_deg)?;
    let mut point_of_pixel = vec![u32::MAX; scene.pixel_count()];
    for (k, &pix) in lifted.pixel_of_point.iter().enumerate() {
        point_of_pixel[pix as usize] = k as u32;
    }
    let surface = scene.surface_mask.decode();
    let ground: Vec<bool> = lifted.pixel_of_point.iter().map(|&p| surface[p as usize]).collect();
    let mut rng = keyed_rng(RANSAC_STREAM, cfg.seed, &scene.image_id, 0);
    let (_, frame) = canonicalize(&lifted.cloud, &ground, &cfg.canonicalize, &mut rng);

    let mut entities = Vec::with_capacity(scene.entities.len());
    for e in &scene.entities {
        let points: Vec<_> = e
            .mask
            .set_indices()
            .filter_map(|pix| match point_of_pixel[pix] {
                u32::MAX => None,
                k => Some(lifted.cloud.points[k as usize]),
            })
            .collect();
        if points.len() < cfg.curation.min_entity_points {
            info!("{}: entity {} has {} depth points, skipped", scene.image_id, e.index, points.len());
            continue;
        }
        let cleaned = match remove_outliers(&PointCloud::new(points, lifted.cloud.frame), &cfg.outliers) {
            Ok(c) if !c.is_empty() => c,
            Ok(_) => continue,
            Err(err) => {
                info!("{}: entity {}: {err}", scene.image_id, e.index);
                continue;
            }
        };
        let mut entity = e.clone();
        entity.stats = Some(object_stats(&frame.transform(&cleaned), &frame));
        entities.push(entity);
    }

    let entities = background_filter(entities, &cfg.background(), cfg.curation.background_threshold);
    let embs: Vec<&[f32]> = entities.iter().map(|e| e.embedding.as_slice()).collect();
    let sim = similarity_matrix(&embs);
    let boxes: Vec<_> = entities
        .iter()
        .map(|e| e.mask.bbox(scene.width).expect("validated masks are non-empty"))
        .collect();
    let actions = resolve_ambiguity(&sim, cfg.curation.ambiguity_threshold, &boxes);
    Ok((frame, apply_ambiguity(entities, &actions)))
}

/// Runs one scene end to end. Filtered-out scenes yield an outcome with a
/// drop reason rather than an error.
pub fn process_scene(scene: &SceneRecord, cfg: &PipelineConfig, bank: &TemplateBank) -> Result<SceneOutcome, PipelineError> {
    let verdict = semantic_filter(&scene.filter_scores, &cfg.curation.labels)?;
    if !verdict.keep {
        return Ok(SceneOutcome::dropped(
            &scene.image_id,
            format!("semantic filter: top label {:?}", verdict.top_label),
        ));
    }
    let (frame, entities) = lift_scene(scene, cfg)?;
    if entities.is_empty() {
        return Ok(SceneOutcome::dropped(&scene.image_id, "no usable entities".into()));
    }
    let curated = SceneRecord {
        entities: entities.clone(),
        ..scene.clone()
    };
    let qa = synthesize_scene_qa_with_truth(&curated, bank, &cfg.synth, &cfg.rounding, cfg.seed)?;
    Ok(SceneOutcome {
        image_id: scene.image_id.clone(),
        dropped: None,
        canonicalized: frame.canonicalized,
        frame,
        entities,
        qa,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SynthSummary {
    pub scenes_total: usize,
    pub scenes_kept: usize,
    pub scenes_dropped: usize,
    /// Scenes that failed to load or process, with the error.
    pub errors: BTreeMap<String, String>,
    pub drop_reasons: BTreeMap<String, String>,
    pub records: usize,
    pub per_category: BTreeMap<String, usize>,
    /// Fraction of kept scenes that were canonicalized.
    pub canonicalization_rate: f64,
    pub qualitative_fraction: f64,
}

/// Processes every scene under `scene_root` and writes the records as JSON
/// lines, ordered by image id then record index whatever the thread count.
pub fn run_synth<W: Write>(cfg: &PipelineConfig, scene_root: &Path, out: &mut W) -> Result<SynthSummary, PipelineError> {
    cfg.validate()?;
    let bank = cfg.template_bank()?;
    let ids = list_scenes(scene_root)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;
    let outcomes: Vec<(String, Result<SceneOutcome, PipelineError>)> = pool.install(|| {
        ids.par_iter()
            .map(|id| {
                let r = load_scene(scene_root, id)
                    .map_err(PipelineError::from)
                    .and_then(|s| process_scene(&s, cfg, &bank));
                (id.clone(), r)
            })
            .collect()
    });

    let mut summary = SynthSummary {
        scenes_total: ids.len(),
        ..Default::default()
    };
    let mut canonical = 0usize;
    let mut qualitative = 0usize;
    for (id, outcome) in &outcomes {
        match outcome {
            Err(e) => {
                warn!("{id}: {e}");
                summary.errors.insert(id.clone(), e.to_string());
                summary.scenes_dropped += 1;
            }
            Ok(o) => {
                if let Some(reason) = &o.dropped {
                    summary.drop_reasons.insert(id.clone(), reason.clone());
                    summary.scenes_dropped += 1;
                    continue;
                }
                summary.scenes_kept += 1;
                canonical += o.canonicalized as usize;
                for r in o.records() {
                    *summary.per_category.entry(r.category.id().to_string()).or_default() += 1;
                    qualitative += !r.category.is_quantitative() as usize;
                }
                let n = write_qa_records(o.records().cloned(), out)?;
                summary.records += n;
            }
        }
    }
    out.flush().map_err(|e| PipelineError::Output("dataset".into(), e))?;
    if summary.scenes_kept > 0 {
        summary.canonicalization_rate = canonical as f64 / summary.scenes_kept as f64;
    }
    if summary.records > 0 {
        summary.qualitative_fraction = qualitative as f64 / summary.records as f64;
    }
    Ok(summary)
}

pub fn run_synth_to_file(cfg: &PipelineConfig, scene_root: &Path, out_path: &Path) -> Result<SynthSummary, PipelineError> {
    let file = File::create(out_path).map_err(|e| PipelineError::Output(out_path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    run_synth(cfg, scene_root, &mut w)
}
