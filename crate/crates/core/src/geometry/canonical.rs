use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{fit_ground_plane, Frame, Mat3, Plane, PointCloud, RansacParams, Vec3};
use crate::scalar::Real;

/// Rigid map `p ↦ rotation·p + translation` from camera to canonical frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CanonicalFrame<T> {
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
    pub canonicalized: bool,
    pub plane: Option<Plane<T>>,
}

impl<T: Real> CanonicalFrame<T> {
    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zero(),
            canonicalized: false,
            plane: None,
        }
    }

    #[inline]
    pub fn apply(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(p) + self.translation
    }

    #[inline]
    pub fn to_camera(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation.transpose().mul_vec(p - self.translation)
    }

    pub fn frame(&self) -> Frame {
        if self.canonicalized {
            Frame::Canonical
        } else {
            Frame::Camera
        }
    }

    pub fn transform(&self, cloud: &PointCloud<T>) -> PointCloud<T> {
        if !self.canonicalized || cloud.frame == Frame::Canonical {
            return cloud.clone();
        }
        PointCloud::new(cloud.points.iter().map(|&p| self.apply(p)).collect(), Frame::Canonical)
    }

    /// Camera-frame up direction (`+z` of the canonical frame).
    pub fn up_in_camera(&self) -> Vec3<T> {
        self.rotation.row(2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CanonicalizeParams {
    /// Minimum fraction of valid points flagged as ground.
    pub threshold: f64,
    pub ransac: RansacParams,
}

impl Default for CanonicalizeParams {
    fn default() -> Self {
        Self {
            threshold: 0.05,
            ransac: RansacParams::default(),
        }
    }
}

/// Re-expresses a camera-frame cloud in a gravity-aligned frame built from
/// the dominant ground plane. Falls back to the camera frame (with
/// `canonicalized = false`) when too little ground is visible or the plane
/// normal is parallel to the optical axis.
pub fn canonicalize<T: Real, R: Rng + ?Sized>(
    cloud: &PointCloud<T>,
    ground_mask: &[bool],
    params: &CanonicalizeParams,
    rng: &mut R,
) -> (PointCloud<T>, CanonicalFrame<T>) {
    assert_eq!(cloud.len(), ground_mask.len(), "one ground flag per point");
    let unchanged = || (cloud.clone(), CanonicalFrame::identity());
    if cloud.is_empty() {
        return unchanged();
    }
    let ground_count = ground_mask.iter().filter(|&&g| g).count();
    if (ground_count as f64 / cloud.len() as f64) <= params.threshold {
        return unchanged();
    }
    let ground = cloud.select(|i| ground_mask[i]);
    let Ok(fit) = fit_ground_plane(&ground, &params.ransac, rng) else {
        return unchanged();
    };
    let normal = fit.plane.normal;
    let ez = Vec3::new(T::zero(), T::zero(), T::one());
    let Some(new_y) = (ez - normal * normal.dot(ez)).normalized().filter(|v| {
        // parallel-to-axis check: projected forward axis must not vanish
        normal.cross(ez).norm() > T::lit(1e-6) && v.is_finite()
    }) else {
        return unchanged();
    };
    let basis = Mat3::from_rows(new_y.cross(normal), new_y, normal);
    let swap = Mat3::from_rows(
        Vec3::new(T::zero(), -T::one(), T::zero()),
        Vec3::new(T::one(), T::zero(), T::zero()),
        Vec3::new(T::zero(), T::zero(), T::one()),
    );
    let rotation = swap.mul_mat(&basis);
    debug_assert!(rotation.orthonormality_error() <= T::lit(1e-5));
    debug_assert!((rotation.determinant() - T::one()).abs() <= T::lit(1e-5));
    let frame = CanonicalFrame {
        rotation,
        translation: Vec3::new(T::zero(), T::zero(), fit.plane.d),
        canonicalized: true,
        plane: Some(fit.plane),
    };
    (frame.transform(cloud), frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn floor_and_box(pitch_deg: f64, height: f64) -> (PointCloud<f64>, Vec<bool>) {
        // world: z up; camera at (0,0,height) looking along +x, pitched down
        let (s, c) = pitch_deg.to_radians().sin_cos();
        let fwd = Vec3::new(c, 0.0, -s);
        let right = Vec3::new(0.0, -1.0, 0.0);
        let down = fwd.cross(right);
        let cam = Vec3::new(0.0, 0.0, height);
        let to_cam = |w: Vec3<f64>| {
            let d = w - cam;
            Vec3::new(right.dot(d), down.dot(d), fwd.dot(d))
        };
        let mut pts = Vec::new();
        let mut mask = Vec::new();
        for i in 0..40 {
            for j in 0..40 {
                pts.push(to_cam(Vec3::new(1.0 + i as f64 * 0.1, -2.0 + j as f64 * 0.1, 0.0)));
                mask.push(true);
            }
        }
        for i in 0..10 {
            for j in 0..10 {
                pts.push(to_cam(Vec3::new(2.0, -0.25 + i as f64 * 0.05, 0.05 + j as f64 * 0.05)));
                mask.push(false);
            }
        }
        (PointCloud::new(pts, Frame::Camera), mask)
    }

    #[test]
    fn no_ground_keeps_camera_frame() {
        let (cloud, _) = floor_and_box(20.0, 1.5);
        let mask = vec![false; cloud.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (out, frame) = canonicalize(&cloud, &mask, &CanonicalizeParams::default(), &mut rng);
        assert!(!frame.canonicalized);
        assert_eq!(out, cloud);
    }

    #[test]
    fn level_camera_height_and_floor() {
        let (cloud, mask) = floor_and_box(0.0, 1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (out, frame) = canonicalize(&cloud, &mask, &CanonicalizeParams::default(), &mut rng);
        assert!(frame.canonicalized);
        assert!((frame.apply(Vec3::zero()).z - 1.5).abs() < 1e-6);
        for (p, g) in out.points.iter().zip(&mask) {
            if *g {
                assert!(p.z.abs() <= 0.05);
            }
        }
    }

    #[test]
    fn pitched_camera_rotation_is_proper() {
        for pitch in [5.0, 30.0, 45.0] {
            let (cloud, mask) = floor_and_box(pitch, 1.2);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let (out, frame) = canonicalize(&cloud, &mask, &CanonicalizeParams::default(), &mut rng);
            assert!(frame.rotation.orthonormality_error() < 1e-9);
            assert!((frame.rotation.determinant() - 1.0).abs() < 1e-9);
            assert!((frame.translation.z - 1.2).abs() < 1e-9);
            // box bottom row sits 5 cm above the floor
            let box_min = out.points[1600..].iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
            assert!((box_min - 0.05).abs() < 1e-9);
            // canonical x points back toward the camera
            let far = out.points[1599];
            let near = out.points[0];
            assert!(far.x < near.x);
        }
    }

    #[test]
    fn camera_looking_straight_down_is_degenerate() {
        let mut pts = Vec::new();
        for i in 0..20 {
            for j in 0..20 {
                pts.push(Vec3::new(i as f64 * 0.1, j as f64 * 0.1, 2.0));
            }
        }
        let mask = vec![true; pts.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (_, frame) = canonicalize(&PointCloud::new(pts, Frame::Camera), &mask, &CanonicalizeParams::default(), &mut rng);
        assert!(!frame.canonicalized);
    }
}
