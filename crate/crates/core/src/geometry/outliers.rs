use serde::{Deserialize, Serialize};

use super::{dbscan, statistical_outlier_mask, voxel_downsample, GeometryError, PointCloud, NOISE};
use crate::scalar::Real;

/// Constants of the object denoising pass. Sizes scale with the object's
/// spread: `scale = scale_multiplier * |std per axis| + scale_epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutlierParams {
    pub scale_multiplier: f64,
    pub scale_epsilon: f64,
    pub neighbors: usize,
    pub std_ratio: f64,
    pub min_voxel: f64,
    pub voxel_divisor: f64,
    pub eps_divisor: f64,
    pub min_points_divisor: usize,
    /// Lower bound on the DBSCAN density threshold, so a lone point is noise.
    pub min_points_floor: usize,
}

impl Default for OutlierParams {
    fn default() -> Self {
        Self {
            scale_multiplier: 3.0,
            scale_epsilon: 1e-6,
            neighbors: 50,
            std_ratio: 1.2,
            min_voxel: 0.01,
            voxel_divisor: 20.0,
            eps_divisor: 3.6,
            min_points_divisor: 10,
            min_points_floor: 2,
        }
    }
}

/// Statistical filter, voxel downsample, DBSCAN; keeps the largest cluster.
///
/// The returned cloud holds the full-resolution filtered points whose voxel
/// belongs to the winning cluster, so extents are not shrunk by the voxel
/// centroids.
pub fn remove_outliers<T: Real>(object: &PointCloud<T>, params: &OutlierParams) -> Result<PointCloud<T>, GeometryError> {
    if object.is_empty() {
        return Err(GeometryError::DegenerateObject);
    }
    let scale = T::lit(params.scale_multiplier) * object.std_per_axis().norm() + T::lit(params.scale_epsilon);

    let keep = statistical_outlier_mask(object, params.neighbors, T::lit(params.std_ratio));
    let filtered = object.select(|i| keep[i]);

    let voxel = T::lit(params.min_voxel).max(scale / T::lit(params.voxel_divisor));
    let down = voxel_downsample(&filtered, voxel);

    let min_points = (down.cloud.len() / params.min_points_divisor.max(1)).max(params.min_points_floor.max(1));
    let labels = dbscan(&down.cloud, scale / T::lit(params.eps_divisor), min_points);

    let mut sizes: Vec<usize> = Vec::new();
    for &l in labels.iter().filter(|&&l| l != NOISE) {
        let l = l as usize;
        if sizes.len() <= l {
            sizes.resize(l + 1, 0);
        }
        sizes[l] += 1;
    }
    // ties go to the lower label
    let winner = sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(l, _)| l as i32)
        .ok_or(GeometryError::DegenerateObject)?;

    let cleaned = filtered.select(|i| labels[down.voxel_of_point[i]] == winner);
    if cleaned.is_empty() {
        return Err(GeometryError::DegenerateObject);
    }
    Ok(cleaned)
}
