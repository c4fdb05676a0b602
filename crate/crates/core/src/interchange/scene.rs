use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{InterchangeError, Rle};
use crate::geometry::{DepthMap, ObjectStats3D};

pub const SCENE_FILE: &str = "scene.json";
pub const DEPTH_FILE: &str = "depth.f32";
pub const EMBEDDINGS_FILE: &str = "embeddings.f32";
pub const SURFACE_FILE: &str = "surface.rle";

pub const MIN_SIDE: usize = 16;
pub const FOV_RANGE: (f64, f64) = (10.0, 170.0);
pub const MAX_CAPTION_WORDS: usize = 6;
pub const EMBEDDING_NORM_TOLERANCE: f32 = 1e-3;

/// One detected object.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectEntity {
    pub index: u32,
    pub mask: Rle,
    pub captions: Vec<String>,
    /// Unit-norm caption embedding.
    pub embedding: Vec<f32>,
    pub stats: Option<ObjectStats3D<f64>>,
}

/// Everything the synthesis core knows about one image.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneRecord {
    pub image_id: String,
    pub width: usize,
    pub height: usize,
    pub fov_h_deg: f64,
    pub depth: DepthMap,
    pub surface_mask: Rle,
    pub entities: Vec<ObjectEntity>,
    pub filter_scores: BTreeMap<String, f64>,
    pub embedding_dim: usize,
}

impl SceneRecord {
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn entity(&self, index: u32) -> Option<&ObjectEntity> {
        self.entities.iter().find(|e| e.index == index)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntityFile {
    index: u32,
    mask: Rle,
    captions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stats: Option<ObjectStats3D<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    image_id: String,
    width: usize,
    height: usize,
    fov_h_deg: f64,
    depth_ref: String,
    surface_mask_ref: String,
    embeddings_ref: String,
    embedding_dim: usize,
    filter_scores: BTreeMap<String, f64>,
    entities: Vec<EntityFile>,
}

fn schema(msg: impl Into<String>) -> InterchangeError {
    InterchangeError::SchemaViolation(msg.into())
}

fn mismatch(what: impl Into<String>, expected: usize, found: usize) -> InterchangeError {
    InterchangeError::DimensionMismatch {
        what: what.into(),
        expected,
        found,
    }
}

fn check_image_id(id: &str) -> Result<(), InterchangeError> {
    if id.is_empty() || id == "." || id == ".." || id.contains(['/', '\\', '\0']) {
        return Err(schema(format!("image_id {id:?} is not a valid directory name")));
    }
    Ok(())
}

/// Checks every invariant of a scene.
pub fn validate_scene(scene: &SceneRecord) -> Result<(), InterchangeError> {
    check_image_id(&scene.image_id)?;
    if scene.width < MIN_SIDE || scene.height < MIN_SIDE {
        return Err(schema(format!(
            "image is {}x{}, both sides must be at least {MIN_SIDE}",
            scene.width, scene.height
        )));
    }
    if !(FOV_RANGE.0..=FOV_RANGE.1).contains(&scene.fov_h_deg) {
        return Err(schema(format!(
            "fov_h_deg {} outside [{}, {}]",
            scene.fov_h_deg, FOV_RANGE.0, FOV_RANGE.1
        )));
    }
    let n = scene.pixel_count();
    if scene.depth.width != scene.width || scene.depth.height != scene.height {
        return Err(schema(format!(
            "depth is {}x{} but scene is {}x{}",
            scene.depth.width, scene.depth.height, scene.width, scene.height
        )));
    }
    if scene.depth.values.len() != n {
        return Err(mismatch("depth values", n, scene.depth.values.len()));
    }
    if let Some(i) = scene.depth.values.iter().position(|d| !d.is_finite() || *d < 0.0) {
        return Err(schema(format!(
            "depth pixel {i} is {}, must be finite and >= 0",
            scene.depth.values[i]
        )));
    }
    if scene.surface_mask.len() != n as u64 {
        return Err(mismatch("surface mask pixels", n, scene.surface_mask.len() as usize));
    }
    for (label, score) in &scene.filter_scores {
        if !score.is_finite() || !(-1.0..=1.0).contains(score) {
            return Err(schema(format!("filter score for {label:?} is {score}, must lie in [-1, 1]")));
        }
    }
    let mut seen = HashSet::new();
    for e in &scene.entities {
        let at = |msg: String| schema(format!("entity {}: {msg}", e.index));
        if !seen.insert(e.index) {
            return Err(at("duplicate index".into()));
        }
        if e.mask.len() != n as u64 {
            return Err(mismatch(format!("entity {} mask pixels", e.index), n, e.mask.len() as usize));
        }
        if e.mask.area() == 0 {
            return Err(at("mask is empty".into()));
        }
        if e.captions.is_empty() {
            return Err(at("no captions".into()));
        }
        for c in &e.captions {
            let words = c.split_whitespace().count();
            if words == 0 || words > MAX_CAPTION_WORDS {
                return Err(at(format!("caption {c:?} has {words} words, expected 1-{MAX_CAPTION_WORDS}")));
            }
        }
        if e.embedding.len() != scene.embedding_dim {
            return Err(mismatch(
                format!("entity {} embedding length", e.index),
                scene.embedding_dim,
                e.embedding.len(),
            ));
        }
        let norm = e.embedding.iter().map(|x| x * x).sum::<f32>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > EMBEDDING_NORM_TOLERANCE {
            return Err(at(format!("embedding norm {norm} is not 1")));
        }
    }
    Ok(())
}

fn read(path: &Path) -> Result<Vec<u8>, InterchangeError> {
    fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => InterchangeError::MissingFile(path.to_path_buf()),
        _ => InterchangeError::io(path, e),
    })
}

fn f32s_from_le(bytes: &[u8]) -> Vec<f32> {
    bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect()
}

fn f32s_to_le<'a>(values: impl IntoIterator<Item = &'a f32>) -> Vec<u8> {
    values.into_iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn sidecar(dir: &Path, name: &str, field: &str) -> Result<PathBuf, InterchangeError> {
    let p = Path::new(name);
    if name.is_empty() || p.is_absolute() || p.components().count() != 1 {
        return Err(schema(format!("{field} {name:?} must be a plain file name")));
    }
    Ok(dir.join(p))
}

/// Reads and validates `<root>/<image_id>/`.
pub fn load_scene(root: &Path, image_id: &str) -> Result<SceneRecord, InterchangeError> {
    check_image_id(image_id)?;
    load_scene_dir(&root.join(image_id))
}

/// Reads and validates a single scene directory.
pub fn load_scene_dir(dir: &Path) -> Result<SceneRecord, InterchangeError> {
    let json_path = dir.join(SCENE_FILE);
    let text = read(&json_path)?;
    let file: SceneFile = serde_json::from_slice(&text).map_err(|e| schema(format!("{}: {e}", json_path.display())))?;
    let n = file
        .width
        .checked_mul(file.height)
        .ok_or_else(|| schema("width*height overflows"))?;

    let depth_bytes = read(&sidecar(dir, &file.depth_ref, "depth_ref")?)?;
    if depth_bytes.len() != n * 4 {
        return Err(mismatch("depth bytes", n * 4, depth_bytes.len()));
    }
    let depth = DepthMap::new(file.width, file.height, f32s_from_le(&depth_bytes));

    let surface_bytes = read(&sidecar(dir, &file.surface_mask_ref, "surface_mask_ref")?)?;
    let surface_mask =
        Rle::from_le_bytes(&surface_bytes).ok_or_else(|| schema("surface mask byte length is not a multiple of 4"))?;

    let emb_bytes = read(&sidecar(dir, &file.embeddings_ref, "embeddings_ref")?)?;
    let expected = file.entities.len() * file.embedding_dim * 4;
    if emb_bytes.len() != expected {
        return Err(mismatch("embedding bytes", expected, emb_bytes.len()));
    }
    let emb = f32s_from_le(&emb_bytes);

    let entities = file
        .entities
        .into_iter()
        .enumerate()
        .map(|(i, e)| ObjectEntity {
            index: e.index,
            mask: e.mask,
            captions: e.captions,
            embedding: emb[i * file.embedding_dim..(i + 1) * file.embedding_dim].to_vec(),
            stats: e.stats,
        })
        .collect();

    let scene = SceneRecord {
        image_id: file.image_id,
        width: file.width,
        height: file.height,
        fov_h_deg: file.fov_h_deg,
        depth,
        surface_mask,
        entities,
        filter_scores: file.filter_scores,
        embedding_dim: file.embedding_dim,
    };
    if let Some(name) = dir.file_name().and_then(|s| s.to_str()) {
        if name != scene.image_id {
            return Err(schema(format!(
                "image_id {:?} does not match directory {name:?}",
                scene.image_id
            )));
        }
    }
    validate_scene(&scene)?;
    Ok(scene)
}

/// Writes `<root>/<image_id>/`. Nothing is written when the scene is invalid.
pub fn write_scene(scene: &SceneRecord, root: &Path) -> Result<PathBuf, InterchangeError> {
    validate_scene(scene)?;
    let file = SceneFile {
        image_id: scene.image_id.clone(),
        width: scene.width,
        height: scene.height,
        fov_h_deg: scene.fov_h_deg,
        depth_ref: DEPTH_FILE.into(),
        surface_mask_ref: SURFACE_FILE.into(),
        embeddings_ref: EMBEDDINGS_FILE.into(),
        embedding_dim: scene.embedding_dim,
        filter_scores: scene.filter_scores.clone(),
        entities: scene
            .entities
            .iter()
            .map(|e| EntityFile {
                index: e.index,
                mask: e.mask.clone(),
                captions: e.captions.clone(),
                stats: e.stats.clone(),
            })
            .collect(),
    };
    let mut json = serde_json::to_vec_pretty(&file).map_err(|e| schema(e.to_string()))?;
    json.push(b'\n');
    let depth = f32s_to_le(&scene.depth.values);
    let emb = f32s_to_le(scene.entities.iter().flat_map(|e| &e.embedding));
    let surface = scene.surface_mask.to_le_bytes();

    let dir = root.join(&scene.image_id);
    fs::create_dir_all(&dir).map_err(|e| InterchangeError::io(&dir, e))?;
    for (name, bytes) in [
        (DEPTH_FILE, &depth),
        (EMBEDDINGS_FILE, &emb),
        (SURFACE_FILE, &surface),
        (SCENE_FILE, &json),
    ] {
        let p = dir.join(name);
        fs::write(&p, bytes).map_err(|e| InterchangeError::io(&p, e))?;
    }
    Ok(dir)
}

/// Scene directories under `root` (those containing `scene.json`), sorted by name.
pub fn list_scenes(root: &Path) -> Result<Vec<String>, InterchangeError> {
    let entries = fs::read_dir(root).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => InterchangeError::MissingFile(root.to_path_buf()),
        _ => InterchangeError::io(root, e),
    })?;
    let mut ids = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| InterchangeError::io(root, e))?;
        if entry.path().join(SCENE_FILE).is_file() {
            if let Some(name) = entry.file_name().to_str() {
                ids.push(name.to_string());
            }
        }
    }
    ids.sort();
    Ok(ids)
}
