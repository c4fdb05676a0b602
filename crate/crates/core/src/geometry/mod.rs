//! Lifting 2D contexts to metric 3D: unprojection, outlier removal,
//! ground-plane canonicalization and per-object statistics.
//!
//! Everything here is generic over the scalar type ([`Real`]); the crate root
//! exposes `f64` aliases.

mod camera;
mod canonical;
mod dbscan;
mod filter;
pub mod kdtree;
mod outliers;
mod plane;
mod stats;
mod vec3;

pub use camera::{project, unproject, DepthMap, Intrinsics, Unprojected};
pub use canonical::{canonicalize, CanonicalFrame, CanonicalizeParams};
pub use dbscan::{dbscan, NOISE};
pub use filter::{statistical_outlier_filter, statistical_outlier_mask, voxel_downsample, Downsampled};
pub use outliers::{remove_outliers, OutlierParams};
pub use plane::{fit_ground_plane, fit_plane_least_squares, Plane, PlaneFit, RansacParams};
pub use stats::{min_pairwise_distance, object_stats, ObjectStats3D};
pub use vec3::{Mat3, Vec3};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Coordinate frame a point set is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// x right, y down, z forward.
    Camera,
    /// z up (ground normal), ground at z = 0.
    Canonical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud<T> {
    pub points: Vec<Vec3<T>>,
    pub frame: Frame,
}

impl<T: Real> PointCloud<T> {
    pub fn new(points: Vec<Vec3<T>>, frame: Frame) -> Self {
        Self { points, frame }
    }

    pub fn empty(frame: Frame) -> Self {
        Self::new(Vec::new(), frame)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Option<Vec3<T>> {
        if self.points.is_empty() {
            return None;
        }
        let sum = self.points.iter().fold(Vec3::zero(), |acc, &p| acc + p);
        Some(sum / T::from_count(self.points.len()))
    }

    /// Per-axis population standard deviation.
    pub fn std_per_axis(&self) -> Vec3<T> {
        let Some(mean) = self.centroid() else {
            return Vec3::zero();
        };
        let n = T::from_count(self.points.len());
        let var = self.points.iter().fold(Vec3::zero(), |acc, &p| {
            let d = p - mean;
            acc + Vec3::new(d.x * d.x, d.y * d.y, d.z * d.z)
        }) / n;
        Vec3::new(var.x.sqrt(), var.y.sqrt(), var.z.sqrt())
    }

    pub fn bounds(&self) -> Option<(Vec3<T>, Vec3<T>)> {
        let first = *self.points.first()?;
        Some(
            self.points
                .iter()
                .fold((first, first), |(lo, hi), &p| (lo.component_min(p), hi.component_max(p))),
        )
    }

    pub fn select(&self, keep: impl Fn(usize) -> bool) -> Self {
        let points = self
            .points
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, &p)| p)
            .collect();
        Self::new(points, self.frame)
    }

    pub fn cast<U: Real>(&self) -> PointCloud<U> {
        PointCloud::new(self.points.iter().map(|p| p.cast()).collect(), self.frame)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("depth map has no valid pixels")]
    EmptyDepth,
    #[error("no cluster survives outlier removal")]
    DegenerateObject,
    #[error("plane fitting needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
