use std::collections::HashMap;

use super::kdtree::KdTree;
use super::{PointCloud, Vec3};
use crate::scalar::Real;

/// Keep-mask of the statistical outlier filter.
///
/// A point is dropped when the mean distance to its `neighbors` nearest
/// neighbors exceeds `mean + std_ratio * std` of that statistic over the
/// cloud (sample std). Clouds with `≤ neighbors` points are kept whole.
pub fn statistical_outlier_mask<T: Real>(cloud: &PointCloud<T>, neighbors: usize, std_ratio: T) -> Vec<bool> {
    let n = cloud.len();
    if neighbors == 0 || n <= neighbors {
        return vec![true; n];
    }
    let tree = KdTree::build(&cloud.points);
    let mean_dist = tree.mean_knn_distances(neighbors);
    let nf = T::from_count(n);
    let mean = mean_dist.iter().copied().sum::<T>() / nf;
    let var = mean_dist.iter().map(|&d| (d - mean) * (d - mean)).sum::<T>() / (nf - T::one());
    let threshold = mean + std_ratio * var.sqrt();
    mean_dist.iter().map(|&d| d <= threshold).collect()
}

pub fn statistical_outlier_filter<T: Real>(cloud: &PointCloud<T>, neighbors: usize, std_ratio: T) -> PointCloud<T> {
    let keep = statistical_outlier_mask(cloud, neighbors, std_ratio);
    cloud.select(|i| keep[i])
}

/// Voxel-grid result: one centroid per occupied voxel, in order of first
/// occupancy, plus the output index each input point fell into.
#[derive(Clone, Debug)]
pub struct Downsampled<T> {
    pub cloud: PointCloud<T>,
    pub voxel_of_point: Vec<usize>,
}

/// Grid anchored at the origin: voxel key is `floor(p / voxel)`.
pub fn voxel_downsample<T: Real>(cloud: &PointCloud<T>, voxel: T) -> Downsampled<T> {
    assert!(voxel > T::zero(), "voxel size must be positive");
    let mut slot: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let mut sums: Vec<(Vec3<T>, usize)> = Vec::new();
    let mut voxel_of_point = Vec::with_capacity(cloud.len());
    for &p in &cloud.points {
        let key = (
            (p.x / voxel).floor().to_i64().unwrap_or(i64::MIN),
            (p.y / voxel).floor().to_i64().unwrap_or(i64::MIN),
            (p.z / voxel).floor().to_i64().unwrap_or(i64::MIN),
        );
        let next = sums.len();
        let idx = *slot.entry(key).or_insert(next);
        if idx == next {
            sums.push((Vec3::zero(), 0));
        }
        sums[idx].0 += p;
        sums[idx].1 += 1;
        voxel_of_point.push(idx);
    }
    let points = sums
        .into_iter()
        .map(|(s, c)| s / T::from_count(c))
        .collect();
    Downsampled {
        cloud: PointCloud::new(points, cloud.frame),
        voxel_of_point,
    }
}
