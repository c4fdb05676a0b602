//! On-disk contract between vision-model adapters and the synthesis core.
//!
//! A scene lives in `<root>/<image_id>/`:
//!
//! - `scene.json`: dimensions, FoV, filter scores and entities (masks inline
//!   as run lengths, see [`Rle`]);
//! - `depth.f32`: `width*height` little-endian `f32` metres, row-major, `0` = invalid;
//! - `embeddings.f32`: `entities × embedding_dim` little-endian `f32`, entity order;
//! - `surface.rle`: ground mask as little-endian `u32` run lengths.
//!
//! Datasets are JSON lines of [`QARecord`].

mod dataset;
mod rle;
mod scene;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use dataset::{read_qa_dataset, write_qa_dataset, write_qa_records, QARecord, QaLines};
pub use rle::Rle;
pub use scene::{
    list_scenes, load_scene, load_scene_dir, validate_scene, write_scene, ObjectEntity, SceneRecord, DEPTH_FILE,
    EMBEDDINGS_FILE, SCENE_FILE, SURFACE_FILE,
};

#[derive(Debug, Error)]
pub enum InterchangeError {
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch { what: String, expected: usize, found: usize },
    #[error("line {line}: {message}")]
    ParseFailure { line: usize, message: String },
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl InterchangeError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::IoFailure {
            path: path.to_path_buf(),
            source,
        }
    }
}
