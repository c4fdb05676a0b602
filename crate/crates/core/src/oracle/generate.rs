use rand::Rng;
use serde::{Deserialize, Serialize};

use super::render::{pixel_ray, render_checked, RayBasis};
use super::truth::point_solid_distance;
use super::{add, analytic_gap, object_truth, render_depth, scale, CameraSpec, Primitive, SceneSpec, Shape, V3};

const CAPTIONS: [&str; 12] = [
    "red box",
    "wooden crate",
    "blue storage bin",
    "cardboard box",
    "green cabinet",
    "white dresser",
    "black speaker",
    "gray toolbox",
    "yellow chest",
    "small shelf",
    "metal locker",
    "orange cooler",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub width: usize,
    pub height: usize,
    pub min_objects: usize,
    pub max_objects: usize,
    pub size_range: (f64, f64),
    /// Objects are dropped where the ray through a random pixel in this
    /// fractional image window meets the floor.
    pub placement_window: ((f64, f64), (f64, f64)),
    pub max_distance: f64,
    pub camera_height_range: (f64, f64),
    pub pitch_range_deg: (f64, f64),
    pub fov_range_deg: (f64, f64),
    /// Chance an object floats above the floor instead of resting on it.
    pub elevated_probability: f64,
    pub max_elevation: f64,
    pub min_gap: f64,
    pub min_pixels: usize,
    /// Reject scenes whose rendered surfaces do not expose every box extent
    /// and every closest pair of points.
    pub require_observable: bool,
    /// Pixels peeled off each object mask before checking observability.
    pub erosion_px: usize,
    pub observe_tolerance: f64,
    pub max_attempts: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            min_objects: 2,
            max_objects: 4,
            size_range: (0.25, 0.9),
            placement_window: ((0.15, 0.85), (0.35, 0.9)),
            max_distance: 4.0,
            camera_height_range: (1.6, 2.4),
            pitch_range_deg: (30.0, 45.0),
            fov_range_deg: (55.0, 70.0),
            elevated_probability: 0.25,
            max_elevation: 0.5,
            min_gap: 0.15,
            min_pixels: 600,
            require_observable: true,
            erosion_px: 0,
            observe_tolerance: 0.005,
            max_attempts: 500,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityReport {
    pub attempts: usize,
    /// Rejections by reason while searching.
    pub rejected: std::collections::BTreeMap<String, usize>,
    pub ground_fraction: f64,
    /// Largest gap between a rendered-surface box bound and the analytic one.
    pub max_extent_error: f64,
    /// Largest excess of the rendered-surface gap over the analytic gap.
    pub max_gap_error: f64,
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn draw<R: Rng + ?Sized>(rng: &mut R, id: &str, p: &GeneratorParams) -> SceneSpec {
    let camera = CameraSpec {
        position: [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), uniform(rng, p.camera_height_range)],
        yaw_deg: rng.random_range(0.0..360.0),
        pitch_deg: uniform(rng, p.pitch_range_deg),
        fov_h_deg: uniform(rng, p.fov_range_deg),
    };
    let n = rng.random_range(p.min_objects..=p.max_objects);
    let mut captions = CAPTIONS.to_vec();
    let objects = (0..n)
        .map(|_| {
            let size = [uniform(rng, p.size_range), uniform(rng, p.size_range), uniform(rng, p.size_range)];
            let elevation = if rng.random_bool(p.elevated_probability) {
                rng.random_range(0.1..p.max_elevation.max(0.11))
            } else {
                0.0
            };
            let ((u0, u1), (v0, v1)) = p.placement_window;
            let (u, v) = (uniform(rng, (u0, u1)) * p.width as f64, uniform(rng, (v0, v1)) * p.height as f64);
            let probe = SceneSpec {
                image_id: String::new(),
                width: p.width,
                height: p.height,
                camera: camera.clone(),
                objects: Vec::new(),
            };
            let dir = pixel_ray(&probe, u, v);
            // rays above the horizon never reach the floor; put those far away so the draw is rejected
            let t = if dir[2] < 0.0 { -camera.position[2] / dir[2] } else { 1e3 };
            let foot = add(camera.position, scale(dir, t));
            let c = [foot[0], foot[1], elevation + size[2] / 2.0];
            let caption = captions.swap_remove(rng.random_range(0..captions.len()));
            Primitive {
                shape: Shape::Cuboid {
                    size,
                    yaw_deg: rng.random_range(0.0..180.0),
                },
                center: c,
                caption: caption.to_string(),
                embedding_group: None,
            }
        })
        .collect();
    SceneSpec {
        image_id: id.to_string(),
        width: p.width,
        height: p.height,
        camera,
        objects,
    }
}

fn in_frame(spec: &SceneSpec, margin: f64) -> bool {
    let f = spec.camera.focal(spec.width);
    let (cx, cy) = ((spec.width as f64 - 1.0) / 2.0, (spec.height as f64 - 1.0) / 2.0);
    spec.objects.iter().all(|o| {
        o.corners().expect("generator draws cuboids").iter().all(|&w| {
            let c = spec.camera.to_camera(w);
            if c[2] < 0.3 {
                return false;
            }
            let (u, v) = (c[0] * f / c[2] + cx, c[1] * f / c[2] + cy);
            u >= margin && v >= margin && u <= spec.width as f64 - 1.0 - margin && v <= spec.height as f64 - 1.0 - margin
        })
    })
}

/// Chessboard erosion of a binary mask.
fn erode(mask: &[bool], w: usize, h: usize, steps: usize) -> Vec<bool> {
    let mut cur = mask.to_vec();
    for _ in 0..steps {
        let prev = cur.clone();
        for v in 0..h {
            for u in 0..w {
                if !prev[v * w + u] {
                    continue;
                }
                let inside = (v > 0 && v + 1 < h && u > 0 && u + 1 < w)
                    && (v - 1..=v + 1).all(|y| (u - 1..=u + 1).all(|x| prev[y * w + x]));
                cur[v * w + u] = inside;
            }
        }
    }
    cur
}

/// Rendered surface points per object (world coordinates) after mask erosion,
/// plus raw pixel counts; `None` when objects overlap in the image.
fn surface_points(spec: &SceneSpec, erosion: usize) -> Option<(Vec<Vec<V3>>, f64, Vec<usize>)> {
    let (r, overlap) = render_checked(spec);
    if overlap {
        return None;
    }
    let (w, h) = (spec.width, spec.height);
    let mut pts = vec![Vec::new(); spec.objects.len()];
    let mut counts = vec![0; spec.objects.len()];
    let basis = RayBasis::new(spec);
    for (i, cloud) in pts.iter_mut().enumerate() {
        let mask: Vec<bool> = r.object_id.iter().map(|&o| o == i as i32).collect();
        counts[i] = mask.iter().filter(|&&m| m).count();
        for (k, _) in erode(&mask, w, h, erosion).iter().enumerate().filter(|(_, &m)| m) {
            let dir = basis.ray((k % w) as f64, (k / w) as f64);
            cloud.push(add(spec.camera.position, scale(dir, r.depth.values[k] as f64)));
        }
    }
    Some((pts, r.ground_fraction(), counts))
}

fn visible_gap(a: &[V3], b: &[V3], pa: &Primitive, pb: &Primitive, bound: f64) -> f64 {
    let near_a: Vec<&V3> = a.iter().filter(|x| point_solid_distance(pb, **x) <= bound).collect();
    let near_b: Vec<&V3> = b.iter().filter(|x| point_solid_distance(pa, **x) <= bound).collect();
    let mut best = f64::INFINITY;
    for x in &near_a {
        for y in &near_b {
            let d = super::norm(super::sub(**x, **y));
            best = best.min(d);
        }
    }
    best
}

/// Checks extents and pair gaps as seen through the renderer.
fn observe(spec: &SceneSpec, p: &GeneratorParams) -> Result<ObservabilityReport, &'static str> {
    let (pts, ground_fraction, counts) = surface_points(spec, p.erosion_px).ok_or("occlusion")?;
    if counts.iter().any(|&c| c < p.min_pixels) || pts.iter().any(Vec::is_empty) {
        return Err("pixels");
    }
    let mut report = ObservabilityReport {
        ground_fraction,
        ..Default::default()
    };
    for (i, cloud) in pts.iter().enumerate() {
        let t = object_truth(spec, i).map_err(|_| "truth")?;
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for w in cloud {
            let q = spec.camera.to_canonical(*w);
            for k in 0..3 {
                lo[k] = lo[k].min(q[k]);
                hi[k] = hi[k].max(q[k]);
            }
        }
        for k in 0..3 {
            report.max_extent_error = report
                .max_extent_error
                .max((lo[k] - t.box_min[k]).abs())
                .max((hi[k] - t.box_max[k]).abs());
        }
    }
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let g = analytic_gap(&spec.objects[i], &spec.objects[j]);
            let vis = visible_gap(&pts[i], &pts[j], &spec.objects[i], &spec.objects[j], g + 0.05);
            report.max_gap_error = report.max_gap_error.max(vis - g);
        }
    }
    let tol = p.observe_tolerance;
    if report.max_extent_error > tol {
        return Err("extent");
    }
    if report.max_gap_error > tol {
        return Err("gap");
    }
    Ok(report)
}

/// Draws scenes until one satisfies the placement and visibility constraints.
/// After `max_attempts` rejections returns the rejection tally as the error.
pub fn random_observable_spec<R: Rng + ?Sized>(
    rng: &mut R,
    image_id: &str,
    params: &GeneratorParams,
) -> Result<(SceneSpec, ObservabilityReport), ObservabilityReport> {
    let mut rejected = std::collections::BTreeMap::new();
    let mut reject = |why: &str| *rejected.entry(why.to_string()).or_insert(0) += 1;
    for attempt in 1..=params.max_attempts {
        let spec = draw(rng, image_id, params);
        let top = spec.objects.iter().map(Primitive::top_z).fold(0.0, f64::max);
        let separated = (0..spec.objects.len()).all(|i| {
            (i + 1..spec.objects.len()).all(|j| analytic_gap(&spec.objects[i], &spec.objects[j]) >= params.min_gap)
        });
        let near = spec.objects.iter().all(|o| {
            let c = spec.camera.to_canonical(o.center);
            c[0].hypot(c[1]) <= params.max_distance
        });
        if !separated {
            reject("overlap");
            continue;
        }
        if !near || spec.camera.position[2] < top + 0.3 {
            reject("placement");
            continue;
        }
        if !in_frame(&spec, 3.0) {
            reject("frame");
            continue;
        }
        if !params.require_observable {
            let r = render_depth(&spec);
            if (0..spec.objects.len()).any(|i| r.object_pixels(i) < params.min_pixels) {
                reject("pixels");
                continue;
            }
            let report = ObservabilityReport {
                attempts: attempt,
                rejected,
                ground_fraction: r.ground_fraction(),
                ..Default::default()
            };
            return Ok((spec, report));
        }
        match observe(&spec, params) {
            Ok(mut report) => {
                report.attempts = attempt;
                report.rejected = rejected;
                return Ok((spec, report));
            }
            Err(why) => reject(why),
        }
    }
    Err(ObservabilityReport {
        attempts: params.max_attempts,
        rejected,
        ..Default::default()
    })
}
