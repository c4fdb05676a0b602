use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{norm, sub, Primitive, SceneSpec, Shape, V3};
use crate::qa::{GroundTruth, Kind, Margins, Pick, QACategory, Relation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid scene spec: {0}")]
    InvalidSpec(String),
    #[error("no object {0} in spec")]
    NoSuchObject(usize),
    #[error("{0} needs a second object")]
    MissingSecondObject(QACategory),
    #[error("unsupported primitive pair for {0}")]
    UnsupportedPair(QACategory),
}

/// Exact statistics of one primitive, in the canonical frame unless noted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectTruth {
    pub index: u32,
    pub box_min: V3,
    pub box_max: V3,
    pub box_center: V3,
    /// `box_center` in camera coordinates.
    pub camera_center: V3,
    pub width: f64,
    pub height: f64,
    pub depth_extent: f64,
    pub elevation: f64,
}

impl ObjectTruth {
    pub fn diagonal(&self) -> f64 {
        norm(sub(self.box_max, self.box_min))
    }

    pub fn volume(&self) -> f64 {
        let e = sub(self.box_max, self.box_min);
        e[0] * e[1] * e[2]
    }
}

pub fn object_truth(spec: &SceneSpec, index: usize) -> Result<ObjectTruth, OracleError> {
    let p = spec.objects.get(index).ok_or(OracleError::NoSuchObject(index))?;
    let cam = &spec.camera;
    let (lo, hi) = match p.shape {
        Shape::Cuboid { .. } => {
            let corners = p.corners().expect("cuboid");
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for c in corners {
                let q = cam.to_canonical(c);
                for k in 0..3 {
                    lo[k] = lo[k].min(q[k]);
                    hi[k] = hi[k].max(q[k]);
                }
            }
            (lo, hi)
        }
        Shape::Sphere { radius } => {
            let c = cam.to_canonical(p.center);
            (
                [c[0] - radius, c[1] - radius, c[2] - radius],
                [c[0] + radius, c[1] + radius, c[2] + radius],
            )
        }
    };
    let center = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0, (lo[2] + hi[2]) / 2.0];
    let ext = sub(hi, lo);
    Ok(ObjectTruth {
        index: index as u32,
        box_min: lo,
        box_max: hi,
        box_center: center,
        camera_center: cam.to_camera(cam.from_canonical(center)),
        width: ext[0].max(ext[1]),
        height: ext[2],
        depth_extent: ext[0].min(ext[1]),
        elevation: lo[2],
    })
}

fn key(rel: Relation, t: &ObjectTruth) -> f64 {
    use Relation::*;
    match rel {
        Left | Right => t.camera_center[0],
        Above | Below => t.box_center[2],
        Behind | Front => t.camera_center[2],
        Tall | Short => t.height,
        Wide | Thin => t.width,
        Big | Small => t.volume().cbrt(),
    }
}

/// Signed amount by which `a` satisfies `rel` against `b`, ignoring margins.
pub fn relation_margin(rel: Relation, a: &ObjectTruth, b: &ObjectTruth) -> f64 {
    use Relation::*;
    let d = key(rel, a) - key(rel, b);
    match rel {
        Left | Below | Front | Short | Thin | Small => -d,
        Right | Above | Behind | Tall | Wide | Big => d,
    }
}

fn footprint(p: &Primitive) -> [[f64; 2]; 4] {
    let c = p.corners().expect("cuboid");
    [0, 1, 3, 2].map(|k| [c[k][0], c[k][1]])
}

fn seg_point_dist(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (ap[0] - t * ab[0]).hypot(ap[1] - t * ab[1])
}

fn polygons_overlap(a: &[[f64; 2]; 4], b: &[[f64; 2]; 4]) -> bool {
    // separating axis test over both polygons' edge normals
    for poly in [a, b] {
        for i in 0..4 {
            let (p, q) = (poly[i], poly[(i + 1) % 4]);
            let n = [q[1] - p[1], p[0] - q[0]];
            let proj = |s: &[[f64; 2]; 4]| {
                s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    let d = v[0] * n[0] + v[1] * n[1];
                    (lo.min(d), hi.max(d))
                })
            };
            let (a0, a1) = proj(a);
            let (b0, b1) = proj(b);
            if a1 < b0 || b1 < a0 {
                return false;
            }
        }
    }
    true
}

fn polygon_distance(a: &[[f64; 2]; 4], b: &[[f64; 2]; 4]) -> f64 {
    if polygons_overlap(a, b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (p, q) in [(a, b), (b, a)] {
        for i in 0..4 {
            for v in q {
                best = best.min(seg_point_dist(p[i], p[(i + 1) % 4], *v));
            }
        }
    }
    best
}

/// Distance from a point to a solid primitive (0 inside).
pub(crate) fn point_solid_distance(p: &Primitive, x: V3) -> f64 {
    match p.shape {
        Shape::Sphere { radius } => (norm(sub(x, p.center)) - radius).max(0.0),
        Shape::Cuboid { size, yaw_deg } => {
            let (s, c) = yaw_deg.to_radians().sin_cos();
            let d = sub(x, p.center);
            let local = [c * d[0] + s * d[1], -s * d[0] + c * d[1], d[2]];
            let mut acc = 0.0;
            for k in 0..3 {
                let e = (local[k].abs() - size[k] / 2.0).max(0.0);
                acc += e * e;
            }
            acc.sqrt()
        }
    }
}

/// Exact surface-to-surface distance between two solid primitives.
pub fn analytic_gap(a: &Primitive, b: &Primitive) -> f64 {
    match (&a.shape, &b.shape) {
        (Shape::Cuboid { .. }, Shape::Cuboid { .. }) => {
            // vertical prisms: footprint distance and height-interval distance combine orthogonally
            let dxy = polygon_distance(&footprint(a), &footprint(b));
            let dz = (b.bottom_z() - a.top_z()).max(a.bottom_z() - b.top_z()).max(0.0);
            dxy.hypot(dz)
        }
        (Shape::Sphere { radius: ra }, Shape::Sphere { radius: rb }) => {
            (norm(sub(a.center, b.center)) - ra - rb).max(0.0)
        }
        (Shape::Sphere { radius }, Shape::Cuboid { .. }) => (point_solid_distance(b, a.center) - radius).max(0.0),
        (Shape::Cuboid { .. }, Shape::Sphere { radius }) => (point_solid_distance(a, b.center) - radius).max(0.0),
    }
}

fn surface_samples(p: &Primitive, step: f64, mut f: impl FnMut(V3)) {
    let steps = |len: f64| ((len / step).ceil() as usize).max(1);
    match p.shape {
        Shape::Cuboid { size, yaw_deg } => {
            let (s, c) = yaw_deg.to_radians().sin_cos();
            let world = |l: V3| [p.center[0] + c * l[0] - s * l[1], p.center[1] + s * l[0] + c * l[1], p.center[2] + l[2]];
            for axis in 0..3 {
                let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                let (nu, nv) = (steps(size[u]), steps(size[v]));
                for sign in [-0.5, 0.5] {
                    for i in 0..=nu {
                        for j in 0..=nv {
                            let mut l = [0.0; 3];
                            l[axis] = sign * size[axis];
                            l[u] = (i as f64 / nu as f64 - 0.5) * size[u];
                            l[v] = (j as f64 / nv as f64 - 0.5) * size[v];
                            f(world(l));
                        }
                    }
                }
            }
        }
        Shape::Sphere { radius } => {
            let n_lat = steps(std::f64::consts::PI * radius);
            for i in 0..=n_lat {
                let theta = std::f64::consts::PI * i as f64 / n_lat as f64;
                let ring = radius * theta.sin();
                let n_lon = steps(2.0 * std::f64::consts::PI * ring);
                for j in 0..n_lon {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / n_lon as f64;
                    f([
                        p.center[0] + ring * phi.cos(),
                        p.center[1] + ring * phi.sin(),
                        p.center[2] + radius * theta.cos(),
                    ]);
                }
            }
        }
    }
}

/// Numeric gap: densely samples `a`'s surface at `step` and measures each
/// sample's distance to solid `b`.
pub fn sampled_gap(a: &Primitive, b: &Primitive, step: f64) -> f64 {
    let mut best = f64::INFINITY;
    surface_samples(a, step, |x| best = best.min(point_solid_distance(b, x)));
    best
}

/// Ground truth for one question, computed from poses.
pub fn truth_answer(
    spec: &SceneSpec,
    category: QACategory,
    a: usize,
    b: Option<usize>,
    margins: &Margins,
) -> Result<GroundTruth, OracleError> {
    let ta = object_truth(spec, a)?;
    let tb = b.map(|i| object_truth(spec, i)).transpose()?;
    let need_b = || tb.as_ref().ok_or(OracleError::MissingSecondObject(category));
    if category.kind() != Kind::Estimation {
        let tb = need_b()?;
        let rel = category.relation().expect("comparative");
        let m = relation_margin(rel, &ta, tb);
        let thr = margins.absolute_m.max(margins.relative_diagonal * (ta.diagonal() + tb.diagonal()) / 2.0);
        if m.abs() < thr {
            return Ok(GroundTruth::Uncertain);
        }
        return Ok(match category.kind() {
            Kind::Predicate => GroundTruth::Boolean(m > 0.0),
            Kind::Choice => GroundTruth::Choice(if m > 0.0 { Pick::First } else { Pick::Second }),
            _ => GroundTruth::Classify(if m > 0.0 { rel.word() } else { rel.opposite().word() }.to_string()),
        });
    }
    use QACategory::*;
    let v = match category {
        Height => ta.height,
        Width => ta.width,
        Elevation => ta.elevation,
        Distance => norm(sub(ta.box_center, need_b()?.box_center)),
        Gap => {
            need_b()?;
            analytic_gap(&spec.objects[a], &spec.objects[b.expect("checked")])
        }
        VerticalDistance => (ta.box_center[2] - need_b()?.box_center[2]).abs(),
        HorizontalDistance => {
            let tb = need_b()?;
            (ta.box_center[0] - tb.box_center[0]).hypot(ta.box_center[1] - tb.box_center[1])
        }
        AboveDifference | BelowDifference => (ta.elevation - need_b()?.elevation).abs(),
        BehindDifference | FrontDifference => (ta.camera_center[2] - need_b()?.camera_center[2]).abs(),
        LeftDifference | RightDifference => (ta.camera_center[0] - need_b()?.camera_center[0]).abs(),
        _ => return Err(OracleError::UnsupportedPair(category)),
    };
    Ok(GroundTruth::Quantity(v))
}
