//! Topologic predicates between detected boxes and fitted lines.
//!
//! Distances are measured on the ground plane (x, y) because track-layout
//! spacings are horizontal.

use serde::Deserialize;
use thiserror::Error;

use crate::geometry::Line3;
use crate::pointcloud::Aabb;

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("distance must be positive, got {0}")]
    InvalidDistance(f64),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyParams {
    pub touch_eps: f64,
    pub distance_tol_fraction: f64,
    pub perpendicular_tol: f64,
    pub footprint_overlap_min: f64,
}

impl Default for TopologyParams {
    fn default() -> Self {
        Self {
            touch_eps: 0.10,
            distance_tol_fraction: 0.10,
            perpendicular_tol: 10.0,
            footprint_overlap_min: 0.25,
        }
    }
}

pub fn centroid_distance(a: &Aabb, b: &Aabb) -> f64 {
    let (ca, cb) = (a.center(), b.center());
    (ca.x - cb.x).hypot(ca.y - cb.y)
}

pub fn is_distant_from(
    a: &Aabb,
    b: &Aabb,
    d: f64,
    params: &TopologyParams,
) -> Result<bool, TopologyError> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(TopologyError::InvalidDistance(d));
    }
    Ok((centroid_distance(a, b) - d).abs() <= params.distance_tol_fraction * d)
}

/// Closed boxes overlap on all three axes.
pub fn intersects(a: &Aabb, b: &Aabb) -> bool {
    (0..3).all(|k| a.min.coord(k) <= b.max.coord(k) && b.min.coord(k) <= a.max.coord(k))
}

/// Open boxes overlap; a box that is flat along some axis has an empty interior.
fn interiors_intersect(a: &Aabb, b: &Aabb) -> bool {
    (0..3).all(|k| a.min.coord(k).max(b.min.coord(k)) < a.max.coord(k).min(b.max.coord(k)))
}

/// Euclidean distance between the closest points of two boxes.
pub fn gap_distance(a: &Aabb, b: &Aabb) -> f64 {
    (0..3)
        .map(|k| {
            let g = (b.min.coord(k) - a.max.coord(k))
                .max(a.min.coord(k) - b.max.coord(k))
                .max(0.0);
            g * g
        })
        .sum::<f64>()
        .sqrt()
}

pub fn touches(a: &Aabb, b: &Aabb, params: &TopologyParams) -> bool {
    !interiors_intersect(a, b) && gap_distance(a, b) <= params.touch_eps
}

pub fn is_connected(a: &Aabb, b: &Aabb, params: &TopologyParams) -> bool {
    intersects(a, b) || touches(a, b, params)
}

fn footprint_overlap(a: &Aabb, b: &Aabb) -> Option<f64> {
    let ox = a.max.x.min(b.max.x) - a.min.x.max(b.min.x);
    let oy = a.max.y.min(b.max.y) - a.min.y.max(b.min.y);
    (ox >= 0.0 && oy >= 0.0).then_some(ox * oy)
}

/// `a` lies above `b`: its bottom is no lower than `b`'s top (within
/// `touch_eps`) and their footprints share a large enough area.
pub fn upper(a: &Aabb, b: &Aabb, params: &TopologyParams) -> bool {
    if a.min.z < b.max.z - params.touch_eps {
        return false;
    }
    let Some(overlap) = footprint_overlap(a, b) else {
        return false;
    };
    let area = |x: &Aabb| (x.max.x - x.min.x) * (x.max.y - x.min.y);
    overlap >= params.footprint_overlap_min * area(a).min(area(b))
}

pub fn perpendicular(l1: &Line3, l2: &Line3, params: &TopologyParams) -> bool {
    (90.0 - l1.angle_deg(l2)).abs() <= params.perpendicular_tol
}
