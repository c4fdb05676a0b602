//! Synthetic scenes with analytic depth and pose-derived ground truth.
//!
//! World frame is z-up with the floor at `z = 0`. The camera looks along
//! `(cos p cos y, cos p sin y, −sin p)` for yaw `y` and downward pitch `p`.
//! Nothing here touches the geometry module: truths are computed from the
//! primitives' poses so they can check the point-cloud pipeline.

mod check;
mod emit;
mod generate;
mod render;
mod truth;

pub use check::{check_records, CheckReport, Mismatch};
pub use emit::{emit_scene, write_oracle_scene, SceneTruth, TRUTH_FILE};
pub use generate::{random_observable_spec, GeneratorParams, ObservabilityReport};
pub use render::{render_checked, render_depth, Render};
pub use truth::{
    analytic_gap, object_truth, relation_margin, sampled_gap, truth_answer, ObjectTruth, OracleError,
};

use serde::{Deserialize, Serialize};

pub(crate) type V3 = [f64; 3];

#[inline]
pub(crate) fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
#[inline]
pub(crate) fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
#[inline]
pub(crate) fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}
#[inline]
pub(crate) fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
#[inline]
pub(crate) fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub position: V3,
    pub yaw_deg: f64,
    /// Positive looks down.
    pub pitch_deg: f64,
    pub fov_h_deg: f64,
}

/// Orthonormal camera axes in world coordinates.
#[derive(Clone, Copy, Debug)]
pub struct CameraAxes {
    pub right: V3,
    pub down: V3,
    pub forward: V3,
}

impl CameraSpec {
    pub fn axes(&self) -> CameraAxes {
        let (sy, cy) = self.yaw_deg.to_radians().sin_cos();
        let (sp, cp) = self.pitch_deg.to_radians().sin_cos();
        let forward = [cp * cy, cp * sy, -sp];
        let right = [sy, -cy, 0.0];
        // forward × right
        let down = [
            forward[1] * right[2] - forward[2] * right[1],
            forward[2] * right[0] - forward[0] * right[2],
            forward[0] * right[1] - forward[1] * right[0],
        ];
        CameraAxes { right, down, forward }
    }

    /// World point in camera coordinates (x right, y down, z forward).
    pub fn to_camera(&self, w: V3) -> V3 {
        let ax = self.axes();
        let d = sub(w, self.position);
        [dot(d, ax.right), dot(d, ax.down), dot(d, ax.forward)]
    }

    /// World point in the gravity-aligned frame rooted at the camera's foot:
    /// x points back toward the camera, y to the right, z up.
    pub fn to_canonical(&self, w: V3) -> V3 {
        let (sy, cy) = self.yaw_deg.to_radians().sin_cos();
        let d = [w[0] - self.position[0], w[1] - self.position[1], w[2]];
        [-(d[0] * cy + d[1] * sy), d[0] * sy - d[1] * cy, d[2]]
    }

    pub fn from_canonical(&self, c: V3) -> V3 {
        let (sy, cy) = self.yaw_deg.to_radians().sin_cos();
        [
            self.position[0] - c[0] * cy + c[1] * sy,
            self.position[1] - c[0] * sy - c[1] * cy,
            c[2],
        ]
    }

    pub fn focal(&self, width: usize) -> f64 {
        (width as f64 / 2.0) / (self.fov_h_deg.to_radians() / 2.0).tan()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// Full side lengths along the object's local x, y, z.
    Cuboid { size: V3, yaw_deg: f64 },
    Sphere { radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    #[serde(flatten)]
    pub shape: Shape,
    /// Geometric center in world coordinates.
    pub center: V3,
    pub caption: String,
    /// Primitives sharing a group get identical caption embeddings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding_group: Option<u32>,
}

impl Primitive {
    pub fn bottom_z(&self) -> f64 {
        match self.shape {
            Shape::Cuboid { size, .. } => self.center[2] - size[2] / 2.0,
            Shape::Sphere { radius } => self.center[2] - radius,
        }
    }

    pub fn top_z(&self) -> f64 {
        match self.shape {
            Shape::Cuboid { size, .. } => self.center[2] + size[2] / 2.0,
            Shape::Sphere { radius } => self.center[2] + radius,
        }
    }

    /// World-space corners of a cuboid.
    pub fn corners(&self) -> Option<[V3; 8]> {
        let Shape::Cuboid { size, yaw_deg } = self.shape else {
            return None;
        };
        let (s, c) = yaw_deg.to_radians().sin_cos();
        let mut out = [[0.0; 3]; 8];
        for (k, o) in out.iter_mut().enumerate() {
            let lx = if k & 1 == 0 { -0.5 } else { 0.5 } * size[0];
            let ly = if k & 2 == 0 { -0.5 } else { 0.5 } * size[1];
            let lz = if k & 4 == 0 { -0.5 } else { 0.5 } * size[2];
            *o = [self.center[0] + c * lx - s * ly, self.center[1] + s * lx + c * ly, self.center[2] + lz];
        }
        Some(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub image_id: String,
    pub width: usize,
    pub height: usize,
    pub camera: CameraSpec,
    pub objects: Vec<Primitive>,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<(), OracleError> {
        let bad = |m: String| Err(OracleError::InvalidSpec(m));
        if self.camera.position[2] <= 0.0 {
            return bad("camera must be above the floor".into());
        }
        if !(1.0..179.0).contains(&self.camera.fov_h_deg) {
            return bad(format!("fov {} out of range", self.camera.fov_h_deg));
        }
        if self.width == 0 || self.height == 0 {
            return bad("empty image".into());
        }
        for (i, o) in self.objects.iter().enumerate() {
            if o.bottom_z() < -1e-12 {
                return bad(format!("object {i} extends below the floor"));
            }
            let ok = match o.shape {
                Shape::Cuboid { size, .. } => size.iter().all(|s| *s > 0.0 && s.is_finite()),
                Shape::Sphere { radius } => radius > 0.0 && radius.is_finite(),
            };
            if !ok {
                return bad(format!("object {i} has non-positive dimensions"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_are_right_handed() {
        let cam = CameraSpec {
            position: [0.0, 0.0, 1.0],
            yaw_deg: 37.0,
            pitch_deg: 21.0,
            fov_h_deg: 60.0,
        };
        let a = cam.axes();
        assert!((norm(a.down) - 1.0).abs() < 1e-12);
        assert!(dot(a.right, a.forward).abs() < 1e-12);
        // down has a negative world z component when looking level-ish
        assert!(a.down[2] < 0.0);
    }

    #[test]
    fn canonical_origin_is_camera_foot() {
        let cam = CameraSpec {
            position: [1.0, 2.0, 1.5],
            yaw_deg: 120.0,
            pitch_deg: 30.0,
            fov_h_deg: 60.0,
        };
        let c = cam.to_canonical(cam.position);
        assert!(c[0].abs() < 1e-12 && c[1].abs() < 1e-12 && (c[2] - 1.5).abs() < 1e-12);
        // a point straight ahead lands at negative canonical x
        let (s, co) = 120f64.to_radians().sin_cos();
        let ahead = cam.to_canonical([1.0 + 2.0 * co, 2.0 + 2.0 * s, 0.0]);
        assert!((ahead[0] + 2.0).abs() < 1e-12 && ahead[1].abs() < 1e-12);
        let w = [0.3, -1.7, 0.9];
        let back = cam.from_canonical(cam.to_canonical(w));
        assert!(norm(sub(back, w)) < 1e-12);
    }
}
