use serde::{Deserialize, Serialize};

use super::kdtree::KdTree;
use super::{CanonicalFrame, Frame, PointCloud, Vec3};
use crate::scalar::Real;

/// Geometry of one cleaned object.
///
/// `center` is the point centroid; `box_center` the midpoint of the
/// axis-aligned box. Spatial relations use the box midpoint since a single
/// view only ever samples the camera-facing surfaces, which drags the
/// centroid toward the camera.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de> + Real"))]
pub struct ObjectStats3D<T: Real> {
    pub frame: Frame,
    pub center: Vec3<T>,
    pub box_center: Vec3<T>,
    /// `box_center` expressed in the camera frame.
    pub camera_center: Vec3<T>,
    pub aabb_min: Vec3<T>,
    pub aabb_max: Vec3<T>,
    pub width: T,
    pub height: T,
    pub depth_extent: T,
    /// Lowest point above the ground; canonical frame only.
    pub elevation: Option<T>,
    #[serde(skip, default = "empty_cloud")]
    pub cleaned_points: PointCloud<T>,
}

fn empty_cloud<T: Real>() -> PointCloud<T> {
    PointCloud::empty(Frame::Camera)
}

impl<T: Real> ObjectStats3D<T> {
    pub fn extents(&self) -> Vec3<T> {
        self.aabb_max - self.aabb_min
    }

    pub fn volume(&self) -> T {
        let e = self.extents();
        e.x * e.y * e.z
    }

    pub fn diagonal(&self) -> T {
        self.extents().norm()
    }
}

/// Statistics of a non-empty cleaned cloud in the frame it is expressed in.
pub fn object_stats<T: Real>(cloud: &PointCloud<T>, frame: &CanonicalFrame<T>) -> ObjectStats3D<T> {
    let (lo, hi) = cloud.bounds().expect("object cloud must be non-empty");
    let center = cloud.centroid().expect("non-empty");
    let box_center = (lo + hi) / T::lit(2.0);
    let ext = hi - lo;
    match cloud.frame {
        Frame::Canonical => ObjectStats3D {
            frame: Frame::Canonical,
            center,
            box_center,
            camera_center: frame.to_camera(box_center),
            aabb_min: lo,
            aabb_max: hi,
            width: ext.x.max(ext.y),
            height: ext.z,
            depth_extent: ext.x.min(ext.y),
            elevation: Some(lo.z),
            cleaned_points: cloud.clone(),
        },
        Frame::Camera => ObjectStats3D {
            frame: Frame::Camera,
            center,
            box_center,
            camera_center: box_center,
            aabb_min: lo,
            aabb_max: hi,
            width: ext.x,
            height: ext.y,
            depth_extent: ext.z,
            elevation: None,
            cleaned_points: cloud.clone(),
        },
    }
}

/// Exact minimum distance between two point sets.
pub fn min_pairwise_distance<T: Real>(a: &[Vec3<T>], b: &[Vec3<T>]) -> Option<T> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let tree = KdTree::build(large);
    small
        .iter()
        .filter_map(|&p| tree.nearest_distance_squared(p))
        .fold(None, |best: Option<T>, d| Some(best.map_or(d, |b| b.min(d))))
        .map(|d| d.sqrt())
}
