//! Computational cores of the 3D processing built-ins: element detection
//! producing bounding boxes, and sequential RANSAC line fitting.

mod detect;
mod ransac;

pub use detect::{
    detect_horizontal_elements, detect_vertical_elements, estimate_ground_z, BoundingBox,
    DetectParams, GROUND_CLEARANCE,
};
pub use ransac::{count_vertical_lines, ransac_lines, Line3, RansacParams, VERTICAL_LINE_MAX_DEG};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("need at least 2 candidate points, got {0}")]
    TooFewPoints(usize),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

pub(crate) fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
