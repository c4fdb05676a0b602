//! Metric spatial question-answer synthesis: lift per-image depth, masks and
//! captions to canonical 3D, then write templated spatial QA with
//! human-style rounded answers.
//!
//! The point-cloud core is generic over [`scalar::Real`]; the aliases below
//! pin it to `f64`, which is what the pipeline uses.

pub mod cot;
pub mod curation;
pub mod eval;
pub mod geometry;
pub mod human_align;
pub mod interchange;
pub mod oracle;
pub mod pipeline;
pub mod qa;
pub mod rng;
pub mod scalar;

pub type Vec3 = geometry::Vec3<f64>;
pub type Mat3 = geometry::Mat3<f64>;
pub type PointCloud = geometry::PointCloud<f64>;
pub type Plane = geometry::Plane<f64>;
pub type PlaneFit = geometry::PlaneFit<f64>;
pub type CanonicalFrame = geometry::CanonicalFrame<f64>;
pub type ObjectStats3D = geometry::ObjectStats3D<f64>;
pub type Intrinsics = geometry::Intrinsics<f64>;
pub type Unprojected = geometry::Unprojected<f64>;
pub type Downsampled = geometry::Downsampled<f64>;
