use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GeometryError, PointCloud, Vec3};
use crate::scalar::Real;

/// `{p : normal·p + d = 0}` with a unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane<T> {
    pub normal: Vec3<T>,
    pub d: T,
}

impl<T: Real> Plane<T> {
    /// Plane through three points; `None` when they are collinear.
    pub fn through(a: Vec3<T>, b: Vec3<T>, c: Vec3<T>) -> Option<Self> {
        let normal = (b - a).cross(c - a).normalized()?;
        Some(Self {
            normal,
            d: -normal.dot(a),
        })
    }

    #[inline]
    pub fn signed_distance(&self, p: Vec3<T>) -> T {
        self.normal.dot(p) + self.d
    }

    pub fn flipped(&self) -> Self {
        Self {
            normal: -self.normal,
            d: -self.d,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacParams {
    pub distance_threshold: f64,
    pub ransac_n: usize,
    pub num_iterations: usize,
    /// Early exit once this confidence of having drawn an all-inlier sample
    /// is reached; `1.0` always runs `num_iterations`.
    pub confidence: f64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            distance_threshold: 0.05,
            ransac_n: 3,
            num_iterations: 1000,
            confidence: 0.9999,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PlaneFit<T> {
    pub plane: Plane<T>,
    pub inliers: Vec<bool>,
}

impl<T> PlaneFit<T> {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }
}

/// RANSAC plane detection, least-squares refit on the consensus set, normal
/// oriented so that camera-up `(0,−1,0)` has a non-negative component.
pub fn fit_ground_plane<T: Real, R: Rng + ?Sized>(
    ground: &PointCloud<T>,
    params: &RansacParams,
    rng: &mut R,
) -> Result<PlaneFit<T>, GeometryError> {
    let pts = &ground.points;
    let n = pts.len();
    let sample_size = params.ransac_n.max(3);
    if n < sample_size {
        return Err(GeometryError::TooFewPoints(n));
    }
    let threshold = T::lit(params.distance_threshold);
    let count_inliers = |plane: &Plane<T>| pts.iter().filter(|&&p| plane.signed_distance(p).abs() <= threshold).count();

    let mut best: Option<(Plane<T>, usize)> = None;
    let mut budget = params.num_iterations;
    let mut iter = 0;
    while iter < budget {
        iter += 1;
        let idx = rand::seq::index::sample(rng, n, sample_size);
        let sample: Vec<Vec3<T>> = idx.iter().map(|i| pts[i]).collect();
        let candidate = if sample_size == 3 {
            Plane::through(sample[0], sample[1], sample[2])
        } else {
            fit_plane_least_squares(&sample)
        };
        let Some(candidate) = candidate else { continue };
        let count = count_inliers(&candidate);
        if best.as_ref().is_none_or(|(_, c)| count > *c) {
            best = Some((candidate, count));
            if params.confidence < 1.0 {
                let w = count as f64 / n as f64;
                let p_good = w.powi(sample_size as i32);
                if p_good >= 1.0 - f64::EPSILON {
                    budget = iter;
                } else if p_good > 0.0 {
                    let need = ((1.0 - params.confidence).ln() / (1.0 - p_good).ln()).ceil();
                    if need.is_finite() && (need as usize) < budget {
                        budget = (need as usize).max(iter);
                    }
                }
            }
        }
    }
    let (mut plane, _) = best.ok_or(GeometryError::TooFewPoints(n))?;

    let consensus: Vec<Vec3<T>> = pts
        .iter()
        .copied()
        .filter(|&p| plane.signed_distance(p).abs() <= threshold)
        .collect();
    if consensus.len() >= 3 {
        if let Some(refit) = fit_plane_least_squares(&consensus) {
            plane = refit;
        }
    }
    let up = Vec3::new(T::zero(), -T::one(), T::zero());
    if up.dot(plane.normal) < T::zero() {
        plane = plane.flipped();
    }
    let inliers = pts.iter().map(|&p| plane.signed_distance(p).abs() <= threshold).collect();
    Ok(PlaneFit { plane, inliers })
}

/// Total-least-squares plane: through the centroid, normal along the
/// smallest-eigenvalue eigenvector of the scatter matrix.
pub fn fit_plane_least_squares<T: Real>(points: &[Vec3<T>]) -> Option<Plane<T>> {
    if points.len() < 3 {
        return None;
    }
    let nf = T::from_count(points.len());
    let centroid = points.iter().fold(Vec3::zero(), |acc, &p| acc + p) / nf;
    let mut cov = [[T::zero(); 3]; 3];
    for &p in points {
        let d = (p - centroid).to_array();
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] = cov[i][j] + d[i] * d[j];
            }
        }
    }
    let (values, vectors) = symmetric_eigen3(cov);
    let smallest = (0..3)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal))?;
    let normal = Vec3::new(vectors[0][smallest], vectors[1][smallest], vectors[2][smallest]).normalized()?;
    Some(Plane {
        normal,
        d: -normal.dot(centroid),
    })
}

/// Cyclic Jacobi eigen-decomposition of a symmetric 3×3 matrix.
/// Returns eigenvalues and the eigenvector matrix (eigenvectors as columns).
fn symmetric_eigen3<T: Real>(mut a: [[T; 3]; 3]) -> ([T; 3], [[T; 3]; 3]) {
    let mut v = [[T::zero(); 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    for _sweep in 0..50 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off <= T::epsilon() * (a[0][0].abs() + a[1][1].abs() + a[2][2].abs()) || off == T::zero() {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q] == T::zero() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let c = T::one() / (t * t + T::one()).sqrt();
            let s = t * c;
            for k in 0..3 {
                let (akp, akq) = (a[k][p], a[k][q]);
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let (apk, aqk) = (a[p][k], a[q][k]);
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let (vp, vq) = (row[p], row[q]);
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}
