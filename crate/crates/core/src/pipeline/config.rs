use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curation::{FilterLabels, DEFAULT_BACKGROUND_LABELS};
use crate::geometry::{CanonicalizeParams, OutlierParams};
use crate::human_align::RoundingPolicy;
use crate::qa::{SynthParams, TemplateBank, TemplateError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("config value out of range: {0}")]
    Range(String),
    #[error(transparent)]
    Templates(#[from] TemplateError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurationConfig {
    pub labels: FilterLabels,
    /// Caption-embedding cosine at or above which two entities are confusable.
    pub ambiguity_threshold: f64,
    /// Cosine at or above which an entity counts as background.
    pub background_threshold: f64,
    pub background_labels: Vec<String>,
    /// Label embeddings in the scenes' embedding space; labels without a
    /// vector are skipped.
    pub background_embeddings: BTreeMap<String, Vec<f32>>,
    /// Entities with fewer valid depth points are not lifted.
    pub min_entity_points: usize,
}

impl Default for CurationConfig {
    fn default() -> Self {
        Self {
            labels: FilterLabels::default(),
            ambiguity_threshold: 0.9,
            background_threshold: 0.92,
            background_labels: DEFAULT_BACKGROUND_LABELS.iter().map(|s| s.to_string()).collect(),
            background_embeddings: BTreeMap::new(),
            min_entity_points: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    /// Template bank JSON; the built-in bank when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub template_bank: Option<PathBuf>,
    pub synth: SynthParams,
    pub canonicalize: CanonicalizeParams,
    pub outliers: OutlierParams,
    pub curation: CurationConfig,
    pub rounding: RoundingPolicy,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            jobs: 0,
            template_bank: None,
            synth: SynthParams::default(),
            canonicalize: CanonicalizeParams::default(),
            outliers: OutlierParams::default(),
            curation: CurationConfig::default(),
            rounding: RoundingPolicy::default(),
        }
    }
}

fn check(ok: bool, what: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Range(what.to_string()))
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let cos = |x: f64| (-1.0..=1.0).contains(&x);
        check(self.synth.samples_per_scene >= 1, "synth.samples_per_scene must be ≥ 1")?;
        check(unit(self.synth.qualitative_fraction), "synth.qualitative_fraction must be in [0, 1]")?;
        check(self.synth.margins.absolute_m >= 0.0, "synth.margins.absolute_m must be ≥ 0")?;
        check(self.synth.margins.relative_diagonal >= 0.0, "synth.margins.relative_diagonal must be ≥ 0")?;
        check(unit(self.canonicalize.threshold), "canonicalize.threshold must be in [0, 1]")?;
        let r = &self.canonicalize.ransac;
        check(r.distance_threshold > 0.0, "canonicalize.ransac.distance_threshold must be > 0")?;
        check(r.ransac_n >= 3, "canonicalize.ransac.ransac_n must be ≥ 3")?;
        check(r.num_iterations >= 1, "canonicalize.ransac.num_iterations must be ≥ 1")?;
        check(r.confidence > 0.0 && r.confidence <= 1.0, "canonicalize.ransac.confidence must be in (0, 1]")?;
        let o = &self.outliers;
        check(o.neighbors >= 1, "outliers.neighbors must be ≥ 1")?;
        check(o.std_ratio > 0.0, "outliers.std_ratio must be > 0")?;
        check(o.scale_multiplier > 0.0 && o.voxel_divisor > 0.0 && o.eps_divisor > 0.0, "outlier scale factors must be > 0")?;
        check(o.min_points_divisor >= 1, "outliers.min_points_divisor must be ≥ 1")?;
        check(cos(self.curation.ambiguity_threshold), "curation.ambiguity_threshold must be in [-1, 1]")?;
        check(cos(self.curation.background_threshold), "curation.background_threshold must be in [-1, 1]")?;
        self.rounding
            .validate()
            .map_err(|e| ConfigError::Range(format!("rounding: {e}")))?;
        Ok(())
    }

    pub fn template_bank(&self) -> Result<TemplateBank, ConfigError> {
        Ok(match &self.template_bank {
            Some(p) => TemplateBank::load(p)?,
            None => TemplateBank::default_bank(),
        })
    }

    /// Background embeddings restricted to the configured label list.
    pub fn background(&self) -> BTreeMap<String, Vec<f32>> {
        self.curation
            .background_embeddings
            .iter()
            .filter(|(k, _)| self.curation.background_labels.contains(k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}
