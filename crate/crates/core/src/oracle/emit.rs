use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{dot, object_truth, render_depth, ObjectTruth, OracleError, SceneSpec, V3};
use crate::curation::FilterLabels;
use crate::interchange::{write_scene, InterchangeError, ObjectEntity, Rle, SceneRecord};

/// Sidecar written next to an emitted scene.
pub const TRUTH_FILE: &str = "oracle_truth.json";
pub const SPEC_FILE: &str = "oracle_spec.json";

const MIN_EMBEDDING_DIM: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneTruth {
    pub image_id: String,
    /// Only objects with at least one visible pixel.
    pub objects: Vec<ObjectTruth>,
    pub ground_fraction: f64,
    pub camera_height: f64,
    /// World up expressed in camera coordinates.
    pub up_in_camera: V3,
}

/// Renders `spec` and packages it as a scene record. Captions come from the
/// spec; embeddings are basis vectors, shared within an `embedding_group`.
pub fn emit_scene(spec: &SceneSpec) -> Result<(SceneRecord, SceneTruth), OracleError> {
    spec.validate()?;
    let render = render_depth(spec);
    let n = spec.objects.len();
    let dim = MIN_EMBEDDING_DIM.max(n);
    let mut slots: BTreeMap<u32, usize> = BTreeMap::new();
    let mut next_slot = 0usize;
    let mut entities = Vec::new();
    let mut truths = Vec::new();
    for (i, obj) in spec.objects.iter().enumerate() {
        let bits: Vec<bool> = render.object_id.iter().map(|&o| o == i as i32).collect();
        if !bits.iter().any(|&b| b) {
            continue;
        }
        let slot = match obj.embedding_group {
            Some(g) => *slots.entry(g).or_insert_with(|| {
                next_slot += 1;
                next_slot - 1
            }),
            None => {
                next_slot += 1;
                next_slot - 1
            }
        };
        let mut embedding = vec![0.0f32; dim];
        embedding[slot] = 1.0;
        entities.push(ObjectEntity {
            index: i as u32,
            mask: Rle::encode(&bits),
            captions: vec![obj.caption.clone()],
            embedding,
            stats: None,
        });
        truths.push(object_truth(spec, i)?);
    }
    let labels = FilterLabels::default();
    let filter_scores = labels
        .positive
        .iter()
        .chain(&labels.negative)
        .enumerate()
        .map(|(k, l)| (l.clone(), if k == 0 { 0.3 } else { 0.1 }))
        .collect();
    let ax = spec.camera.axes();
    let up = [0.0, 0.0, 1.0];
    let truth = SceneTruth {
        image_id: spec.image_id.clone(),
        objects: truths,
        ground_fraction: render.ground_fraction(),
        camera_height: spec.camera.position[2],
        up_in_camera: [dot(up, ax.right), dot(up, ax.down), dot(up, ax.forward)],
    };
    let record = SceneRecord {
        image_id: spec.image_id.clone(),
        width: spec.width,
        height: spec.height,
        fov_h_deg: spec.camera.fov_h_deg,
        depth: render.depth,
        surface_mask: Rle::encode(&render.ground),
        entities,
        filter_scores,
        embedding_dim: dim,
    };
    Ok((record, truth))
}

/// Writes the scene directory plus the spec and truth sidecars.
pub fn write_oracle_scene(spec: &SceneSpec, root: &Path) -> Result<PathBuf, InterchangeError> {
    let (record, truth) = emit_scene(spec).map_err(|e| InterchangeError::SchemaViolation(e.to_string()))?;
    let dir = write_scene(&record, root)?;
    for (name, text) in [
        (TRUTH_FILE, serde_json::to_string_pretty(&truth)),
        (SPEC_FILE, serde_json::to_string_pretty(spec)),
    ] {
        let path = dir.join(name);
        let text = text.map_err(|e| InterchangeError::SchemaViolation(e.to_string()))?;
        fs::write(&path, text).map_err(|e| InterchangeError::io(&path, e))?;
    }
    Ok(dir)
}
