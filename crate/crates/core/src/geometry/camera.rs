//! Pinhole camera: x right, y down, z forward; square pixels; principal
//! point at the image center.

use super::{Frame, GeometryError, PointCloud, Vec3};
use crate::scalar::Real;

/// Row-major metric depth buffer. Zero marks an invalid pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f32>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, values: Vec<f32>) -> Self {
        Self {
            width,
            height,
            values,
        }
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f32 {
        self.values[v * self.width + u]
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|&&d| d > 0.0).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Intrinsics<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
}

impl<T: Real> Intrinsics<T> {
    /// `fx = fy = (W/2) / tan(fov_h/2)`, principal point at `((W−1)/2, (H−1)/2)`.
    pub fn from_fov(width: usize, height: usize, fov_h_deg: f64) -> Self {
        let half = (fov_h_deg.to_radians() / 2.0).tan();
        let f = (width as f64 / 2.0) / half;
        Self {
            fx: T::lit(f),
            fy: T::lit(f),
            cx: T::lit((width as f64 - 1.0) / 2.0),
            cy: T::lit((height as f64 - 1.0) / 2.0),
        }
    }

    #[inline]
    pub fn unproject_pixel(&self, u: T, v: T, depth: T) -> Vec3<T> {
        Vec3::new(
            (u - self.cx) * depth / self.fx,
            (v - self.cy) * depth / self.fy,
            depth,
        )
    }
}

/// A camera-frame cloud plus the source pixel (row-major index) of each point.
#[derive(Clone, Debug)]
pub struct Unprojected<T> {
    pub cloud: PointCloud<T>,
    pub pixel_of_point: Vec<u32>,
}

pub fn unproject<T: Real>(depth: &DepthMap, fov_h_deg: f64) -> Result<Unprojected<T>, GeometryError> {
    let intr = Intrinsics::<T>::from_fov(depth.width, depth.height, fov_h_deg);
    let mut points = Vec::with_capacity(depth.values.len());
    let mut pixel_of_point = Vec::with_capacity(depth.values.len());
    for v in 0..depth.height {
        for u in 0..depth.width {
            let idx = v * depth.width + u;
            let d = depth.values[idx];
            if d > 0.0 && d.is_finite() {
                points.push(intr.unproject_pixel(T::from_count(u), T::from_count(v), T::lit(d as f64)));
                pixel_of_point.push(idx as u32);
            }
        }
    }
    if points.is_empty() {
        return Err(GeometryError::EmptyDepth);
    }
    Ok(Unprojected {
        cloud: PointCloud::new(points, Frame::Camera),
        pixel_of_point,
    })
}

/// Pixel coordinates and depth of a camera-frame point.
pub fn project<T: Real>(intr: &Intrinsics<T>, p: Vec3<T>) -> (T, T, T) {
    (
        p.x * intr.fx / p.z + intr.cx,
        p.y * intr.fy / p.z + intr.cy,
        p.z,
    )
}
