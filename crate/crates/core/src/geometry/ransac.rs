use nalgebra::{Matrix3, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{dot, norm, BoundingBox, GeometryError};
use crate::pointcloud::Point3;

/// Maximum tilt from +z, in degrees, for a line to count as vertical.
pub const VERTICAL_LINE_MAX_DEG: f64 = 10.0;

const MAX_LINES_PER_BOX: usize = 8;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RansacParams {
    pub iterations: usize,
    pub inlier_threshold: f64,
    pub min_inliers: usize,
    pub rng_seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            iterations: 500,
            inlier_threshold: 0.05,
            min_inliers: 20,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line3 {
    pub anchor: Point3,
    /// Unit vector; its largest-magnitude component is positive.
    pub direction: [f64; 3],
    pub inlier_indices: Vec<usize>,
    pub rms_residual: f64,
}

impl Line3 {
    /// Builds a line from an anchor and any non-zero direction.
    pub fn new(anchor: Point3, direction: [f64; 3]) -> Option<Self> {
        let n = norm(direction);
        if !(n > 0.0 && n.is_finite()) {
            return None;
        }
        let mut d = direction.map(|c| c / n);
        let lead = (0..3)
            .max_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()))
            .unwrap();
        if d[lead] < 0.0 {
            d = d.map(|c| -c);
        }
        Some(Self {
            anchor,
            direction: d,
            inlier_indices: Vec::new(),
            rms_residual: 0.0,
        })
    }

    pub fn distance_to(&self, p: &Point3) -> f64 {
        let v = p.sub(&self.anchor);
        let t = dot(v, self.direction);
        let perp = [
            v[0] - t * self.direction[0],
            v[1] - t * self.direction[1],
            v[2] - t * self.direction[2],
        ];
        norm(perp)
    }

    /// Angle to another line's direction, in [0°, 90°].
    pub fn angle_deg(&self, other: &Line3) -> f64 {
        dot(self.direction, other.direction)
            .abs()
            .min(1.0)
            .acos()
            .to_degrees()
    }
}

fn inliers_of(line: &Line3, points: &[Point3], pool: &[usize], threshold: f64) -> Vec<usize> {
    pool.iter()
        .copied()
        .filter(|&i| line.distance_to(&points[i]) <= threshold)
        .collect()
}

/// Least-squares line: centroid plus principal axis of the scatter matrix.
fn fit_line(points: &[Point3], ids: &[usize]) -> Option<Line3> {
    let n = ids.len() as f64;
    let mut c = [0.0; 3];
    for &i in ids {
        c[0] += points[i].x;
        c[1] += points[i].y;
        c[2] += points[i].z;
    }
    let c = c.map(|v| v / n);
    let centroid = Point3::new(c[0], c[1], c[2]);
    let mut scatter = Matrix3::<f64>::zeros();
    for &i in ids {
        let d = points[i].sub(&centroid);
        for r in 0..3 {
            for k in 0..3 {
                scatter[(r, k)] += d[r] * d[k];
            }
        }
    }
    let eig = SymmetricEigen::new(scatter);
    let best = eig.eigenvalues.imax();
    let v = eig.eigenvectors.column(best);
    Line3::new(centroid, [v[0], v[1], v[2]])
}

fn with_inliers(mut line: Line3, points: &[Point3], inliers: Vec<usize>) -> Line3 {
    let ss: f64 = inliers
        .iter()
        .map(|&i| line.distance_to(&points[i]).powi(2))
        .sum();
    line.rms_residual = if inliers.is_empty() {
        0.0
    } else {
        (ss / inliers.len() as f64).sqrt()
    };
    line.inlier_indices = inliers;
    line
}

/// Greedy sequential RANSAC: extract the best-supported line, drop its
/// inliers, repeat. Deterministic for a fixed seed.
pub fn ransac_lines(
    points: &[Point3],
    candidates: &[usize],
    params: &RansacParams,
    max_lines: usize,
) -> Result<Vec<Line3>, GeometryError> {
    if candidates.len() < 2 {
        return Err(GeometryError::TooFewPoints(candidates.len()));
    }
    if params.iterations == 0 || !(params.inlier_threshold > 0.0) {
        return Err(GeometryError::InvalidParams(
            "ransac needs iterations >= 1 and inlier_threshold > 0".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut pool: Vec<usize> = candidates.to_vec();
    pool.sort_unstable();
    pool.dedup();
    let mut lines = Vec::new();

    while lines.len() < max_lines && pool.len() >= 2 {
        let mut best: Option<(Line3, Vec<usize>)> = None;
        for _ in 0..params.iterations {
            let a = rng.gen_range(0..pool.len());
            let mut b = rng.gen_range(0..pool.len() - 1);
            if b >= a {
                b += 1;
            }
            let (pa, pb) = (points[pool[a]], points[pool[b]]);
            let Some(model) = Line3::new(pa, pb.sub(&pa)) else {
                continue;
            };
            let inliers = inliers_of(&model, points, &pool, params.inlier_threshold);
            if best.as_ref().map_or(true, |(_, s)| inliers.len() > s.len()) {
                best = Some((model, inliers));
            }
        }
        let Some((model, support)) = best else { break };
        if support.len() < params.min_inliers.max(2) {
            break;
        }
        let refined = fit_line(points, &support).map(|l| {
            let ids = inliers_of(&l, points, &pool, params.inlier_threshold);
            (l, ids)
        });
        let (line, inliers) = match refined {
            Some((l, ids)) if ids.len() >= params.min_inliers.max(2) => (l, ids),
            _ => (model, support),
        };
        pool.retain(|i| inliers.binary_search(i).is_err());
        lines.push(with_inliers(line, points, inliers));
    }
    Ok(lines)
}

/// Number of near-vertical lines RANSAC extracts from a box's points.
pub fn count_vertical_lines(
    bb: &BoundingBox,
    points: &[Point3],
    params: &RansacParams,
) -> Result<usize, GeometryError> {
    let lines = ransac_lines(points, &bb.point_indices, params, MAX_LINES_PER_BOX)?;
    let min_cos = VERTICAL_LINE_MAX_DEG.to_radians().cos();
    Ok(lines
        .iter()
        .filter(|l| l.direction[2].abs() >= min_cos)
        .count())
}
