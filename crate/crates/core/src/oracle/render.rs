use rayon::prelude::*;

use super::{add, dot, scale, sub, Primitive, SceneSpec, Shape, V3};
use crate::geometry::DepthMap;

/// Depth buffer plus per-pixel labels. `object_id` is `-1` for floor and empty pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct Render {
    pub depth: DepthMap,
    pub object_id: Vec<i32>,
    pub ground: Vec<bool>,
}

impl Render {
    pub fn object_pixels(&self, id: usize) -> usize {
        self.object_id.iter().filter(|&&o| o == id as i32).count()
    }

    pub fn ground_fraction(&self) -> f64 {
        let valid = self.depth.valid_count();
        if valid == 0 {
            return 0.0;
        }
        self.ground.iter().filter(|&&g| g).count() as f64 / valid as f64
    }
}

/// Per-spec constants of the pixel → ray map.
pub(crate) struct RayBasis {
    right: V3,
    down: V3,
    forward: V3,
    f: f64,
    cx: f64,
    cy: f64,
}

impl RayBasis {
    pub(crate) fn new(spec: &SceneSpec) -> Self {
        let ax = spec.camera.axes();
        Self {
            right: ax.right,
            down: ax.down,
            forward: ax.forward,
            f: spec.camera.focal(spec.width),
            cx: (spec.width as f64 - 1.0) / 2.0,
            cy: (spec.height as f64 - 1.0) / 2.0,
        }
    }

    pub(crate) fn ray(&self, u: f64, v: f64) -> V3 {
        add(add(scale(self.right, (u - self.cx) / self.f), scale(self.down, (v - self.cy) / self.f)), self.forward)
    }

    /// Pixel rectangle `(u0, u1, v0, v1)` that contains the primitive's
    /// projection, padded by a pixel; unbounded when part of it lies behind
    /// the camera.
    pub(crate) fn screen_box(&self, origin: V3, p: &Primitive) -> (f64, f64, f64, f64) {
        let corners = p.corners().unwrap_or_else(|| {
            let Shape::Sphere { radius } = p.shape else { unreachable!() };
            std::array::from_fn(|k| {
                let o = |bit: usize| if k & bit == 0 { -radius } else { radius };
                [p.center[0] + o(1), p.center[1] + o(2), p.center[2] + o(4)]
            })
        });
        let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for w in corners {
            let d = sub(w, origin);
            let z = dot(d, self.forward);
            if z <= 1e-6 {
                return (f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
            }
            let u = dot(d, self.right) * self.f / z + self.cx;
            let v = dot(d, self.down) * self.f / z + self.cy;
            b = (b.0.min(u), b.1.max(u), b.2.min(v), b.3.max(v));
        }
        (b.0 - 1.0, b.1 + 1.0, b.2 - 1.0, b.3 + 1.0)
    }
}

/// Un-normalized world ray through pixel `(u, v)` whose forward component is 1,
/// so the ray parameter equals planar depth.
pub(crate) fn pixel_ray(spec: &SceneSpec, u: f64, v: f64) -> V3 {
    RayBasis::new(spec).ray(u, v)
}


fn hit_cuboid_sc(origin: V3, dir: V3, center: V3, size: V3, (s, c): (f64, f64)) -> Option<f64> {
    let rot = |w: V3| [c * w[0] + s * w[1], -s * w[0] + c * w[1], w[2]];
    let o = rot(sub(origin, center));
    let d = rot(dir);
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..3 {
        let h = size[k] / 2.0;
        if d[k] == 0.0 {
            if o[k].abs() > h {
                return None;
            }
            continue;
        }
        let (a, b) = ((-h - o[k]) / d[k], (h - o[k]) / d[k]);
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    (t0 <= t1 && t0 > 0.0).then_some(t0)
}

fn hit_sphere(origin: V3, dir: V3, center: V3, r: f64) -> Option<f64> {
    let oc = sub(origin, center);
    let a = dot(dir, dir);
    let b = dot(oc, dir);
    let c = dot(oc, oc) - r * r;
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    let t = (-b - disc.sqrt()) / a;
    (t > 0.0).then_some(t)
}

/// Casts one ray per pixel center against the primitives and the floor.
/// Depth is the nearest hit's distance along the optical axis; no hit is 0.
pub fn render_depth(spec: &SceneSpec) -> Render {
    render_checked(spec).0
}

/// Like [`render_depth`], also reporting whether any ray passes through
/// more than one primitive (one object hides part of another).
pub fn render_checked(spec: &SceneSpec) -> (Render, bool) {
    let (w, h) = (spec.width, spec.height);
    let origin = spec.camera.position;
    let basis = RayBasis::new(spec);
    let trig: Vec<(f64, f64)> = spec
        .objects
        .iter()
        .map(|p| match p.shape {
            Shape::Cuboid { yaw_deg, .. } => yaw_deg.to_radians().sin_cos(),
            Shape::Sphere { .. } => (0.0, 1.0),
        })
        .collect();
    let boxes: Vec<_> = spec.objects.iter().map(|p| basis.screen_box(origin, p)).collect();
    let rows: Vec<Vec<(f32, i32, bool, bool)>> = (0..h)
        .into_par_iter()
        .map(|v| {
            (0..w)
                .map(|u| {
                    let dir = basis.ray(u as f64, v as f64);
                    let mut best = (f64::INFINITY, -1, false);
                    if dir[2] < 0.0 {
                        best = (-origin[2] / dir[2], -1, true);
                    }
                    let mut hits = 0;
                    let (uf, vf) = (u as f64, v as f64);
                    for (i, p) in spec.objects.iter().enumerate() {
                        let b = boxes[i];
                        if uf < b.0 || uf > b.1 || vf < b.2 || vf > b.3 {
                            continue;
                        }
                        let hit = match p.shape {
                            Shape::Cuboid { size, .. } => hit_cuboid_sc(origin, dir, p.center, size, trig[i]),
                            Shape::Sphere { radius } => hit_sphere(origin, dir, p.center, radius),
                        };
                        if let Some(t) = hit {
                            hits += 1;
                            if t < best.0 {
                                best = (t, i as i32, false);
                            }
                        }
                    }
                    if best.0.is_finite() {
                        (best.0 as f32, best.1, best.2, hits > 1)
                    } else {
                        (0.0, -1, false, hits > 1)
                    }
                })
                .collect()
        })
        .collect();
    let mut values = Vec::with_capacity(w * h);
    let mut object_id = Vec::with_capacity(w * h);
    let mut ground = Vec::with_capacity(w * h);
    let mut overlap = false;
    for (d, id, g, o) in rows.into_iter().flatten() {
        values.push(d);
        object_id.push(id);
        ground.push(g);
        overlap |= o;
    }
    let render = Render {
        depth: DepthMap::new(w, h, values),
        object_id,
        ground,
    };
    (render, overlap)
}
