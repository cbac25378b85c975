use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Deserialize;

use super::GeometryError;
use crate::pointcloud::{build_index, query_box, Aabb, Point3, PointCloud};

/// Points closer than this to the estimated ground are treated as ground.
pub const GROUND_CLEARANCE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectParams {
    pub ground_percentile: f64,
    pub cell_size: f64,
    pub min_points_per_cluster: usize,
    pub min_height: f64,
    pub merge_gap: f64,
    pub vertical_aspect_min: f64,
    pub horizontal_aspect_max: f64,
    /// Radius of the neighbourhood used to discard isolated points.
    pub outlier_radius: f64,
    /// A point with fewer neighbours than this inside `outlier_radius` is dropped.
    pub outlier_min_neighbors: usize,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            ground_percentile: 0.05,
            cell_size: 0.5,
            min_points_per_cluster: 30,
            min_height: 0.3,
            merge_gap: 0.5,
            vertical_aspect_min: 2.0,
            horizontal_aspect_max: 2.0,
            outlier_radius: 0.15,
            outlier_min_neighbors: 3,
        }
    }
}

impl DetectParams {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |what: &str| Err(GeometryError::InvalidParams(what.to_string()));
        if !(self.ground_percentile > 0.0 && self.ground_percentile < 1.0) {
            return bad("ground_percentile must lie in (0, 1)");
        }
        for (name, v) in [
            ("cell_size", self.cell_size),
            ("min_height", self.min_height),
            ("merge_gap", self.merge_gap),
            ("vertical_aspect_min", self.vertical_aspect_min),
            ("horizontal_aspect_max", self.horizontal_aspect_max),
            ("outlier_radius", self.outlier_radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive"));
            }
        }
        if self.min_points_per_cluster == 0 {
            return bad("min_points_per_cluster must be at least 1");
        }
        Ok(())
    }
}

/// Axis-aligned detection result; the unit of annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    pub id: String,
    pub aabb: Aabb,
    pub point_indices: Vec<usize>,
    /// Height of the box top above the estimated ground.
    pub height: f64,
    /// Larger horizontal extent.
    pub length: f64,
    /// Smaller horizontal extent.
    pub width: f64,
    pub centroid: Point3,
}

impl BoundingBox {
    fn from_points(points: &[Point3], indices: Vec<usize>, ground_z: f64) -> Self {
        let aabb = Aabb::enclosing(indices.iter().map(|&i| &points[i]))
            .expect("segments are never empty");
        let [dx, dy, _] = aabb.extent();
        Self {
            id: String::new(),
            height: (aabb.max.z - ground_z).max(0.0),
            length: dx.max(dy),
            width: dx.min(dy),
            centroid: aabb.center(),
            aabb,
            point_indices: indices,
        }
    }

    /// Height over the larger horizontal extent.
    fn slenderness(&self) -> f64 {
        if self.length > 0.0 {
            self.height / self.length
        } else {
            f64::INFINITY
        }
    }
}

/// Quantile of all z values (lower nearest rank).
pub fn estimate_ground_z(cloud: &PointCloud, params: &DetectParams) -> Result<f64, GeometryError> {
    if cloud.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    let mut zs: Vec<f64> = cloud.points.iter().map(|p| p.z).collect();
    let rank = (params.ground_percentile * (zs.len() - 1) as f64).floor() as usize;
    let (_, z, _) = zs.select_nth_unstable_by(rank, f64::total_cmp);
    Ok(*z)
}

pub fn detect_vertical_elements(
    cloud: &PointCloud,
    params: &DetectParams,
) -> Result<Vec<BoundingBox>, GeometryError> {
    let vam = params.vertical_aspect_min;
    let min_h = params.min_height;
    detect(cloud, params, "vbb", |b| {
        b.height >= min_h && b.slenderness() >= vam
    })
}

/// Squat elements: height over larger horizontal extent strictly below
/// `horizontal_aspect_max`, so no segment passes both detectors while
/// `horizontal_aspect_max <= vertical_aspect_min`.
pub fn detect_horizontal_elements(
    cloud: &PointCloud,
    params: &DetectParams,
) -> Result<Vec<BoundingBox>, GeometryError> {
    let ham = params.horizontal_aspect_max;
    detect(cloud, params, "hbb", |b| b.slenderness() < ham)
}

fn detect(
    cloud: &PointCloud,
    params: &DetectParams,
    prefix: &str,
    keep: impl Fn(&BoundingBox) -> bool,
) -> Result<Vec<BoundingBox>, GeometryError> {
    params.validate()?;
    let ground_z = estimate_ground_z(cloud, params)?;
    let pts = &cloud.points;
    let mut boxes: Vec<BoundingBox> = segment(pts, ground_z, params)
        .into_iter()
        .filter(|s| s.len() >= params.min_points_per_cluster)
        .map(|s| BoundingBox::from_points(pts, s, ground_z))
        .filter(|b| keep(b))
        .collect();
    boxes.sort_by(|a, b| {
        a.centroid
            .x
            .total_cmp(&b.centroid.x)
            .then(a.centroid.y.total_cmp(&b.centroid.y))
            .then(a.point_indices.cmp(&b.point_indices))
    });
    for (i, b) in boxes.iter_mut().enumerate() {
        b.id = format!("{prefix}_{:04}", i + 1);
    }
    Ok(boxes)
}

/// Splits above-ground points into object segments (point index lists, ascending).
fn segment(pts: &[Point3], ground_z: f64, params: &DetectParams) -> Vec<Vec<usize>> {
    let above: Vec<usize> = (0..pts.len())
        .filter(|&i| pts[i].z - ground_z > GROUND_CLEARANCE)
        .collect();
    let kept = drop_isolated(pts, &above, params);
    let clusters = grid_clusters(pts, &kept, params);
    clusters
        .into_iter()
        .flat_map(|c| split_stacked(pts, c, params))
        .collect()
}

fn drop_isolated(pts: &[Point3], ids: &[usize], params: &DetectParams) -> Vec<usize> {
    let local: Vec<Point3> = ids.iter().map(|&i| pts[i]).collect();
    let r = params.outlier_radius;
    let Ok(index) = build_index(&local, r) else {
        return ids.to_vec();
    };
    (0..local.len())
        .filter(|&j| {
            let p = local[j];
            let probe = Aabb::new(
                Point3::new(p.x - r, p.y - r, p.z - r),
                Point3::new(p.x + r, p.y + r, p.z + r),
            );
            let neighbours = query_box(&index, &local, &probe)
                .into_iter()
                .filter(|&k| k != j && local[k].distance(&p) <= r)
                .take(params.outlier_min_neighbors)
                .count();
            neighbours >= params.outlier_min_neighbors
        })
        .map(|j| ids[j])
        .collect()
}

type Cell2 = (i64, i64);

/// 8-connected components of occupied ground-plane cells, then merges
/// components whose footprints are within `merge_gap` of each other.
fn grid_clusters(pts: &[Point3], ids: &[usize], params: &DetectParams) -> Vec<Vec<usize>> {
    let cs = params.cell_size;
    let mut cells: BTreeMap<Cell2, Vec<usize>> = BTreeMap::new();
    for &i in ids {
        let key = ((pts[i].x / cs).floor() as i64, (pts[i].y / cs).floor() as i64);
        cells.entry(key).or_default().push(i);
    }

    let mut seen: BTreeSet<Cell2> = BTreeSet::new();
    let mut components: Vec<Vec<usize>> = Vec::new();
    for &start in cells.keys() {
        if !seen.insert(start) {
            continue;
        }
        let mut members = Vec::new();
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            members.extend_from_slice(&cells[&c]);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let n = (c.0 + dx, c.1 + dy);
                    if cells.contains_key(&n) && seen.insert(n) {
                        queue.push_back(n);
                    }
                }
            }
        }
        components.push(members);
    }

    let footprints: Vec<[f64; 4]> = components
        .iter()
        .map(|m| {
            m.iter().fold(
                [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
                |f, &i| {
                    [
                        f[0].min(pts[i].x),
                        f[1].min(pts[i].y),
                        f[2].max(pts[i].x),
                        f[3].max(pts[i].y),
                    ]
                },
            )
        })
        .collect();

    let mut parent: Vec<usize> = (0..components.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    // Sweep along x so only footprints that can be within merge_gap are compared.
    let mut order: Vec<usize> = (0..components.len()).collect();
    order.sort_by(|&a, &b| footprints[a][0].total_cmp(&footprints[b][0]));
    for (pos, &a) in order.iter().enumerate() {
        for &b in &order[pos + 1..] {
            if footprints[b][0] - footprints[a][2] > params.merge_gap {
                break;
            }
            let gx = (footprints[b][0] - footprints[a][2])
                .max(footprints[a][0] - footprints[b][2])
                .max(0.0);
            let gy = (footprints[b][1] - footprints[a][3])
                .max(footprints[a][1] - footprints[b][3])
                .max(0.0);
            if gx.hypot(gy) <= params.merge_gap {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }

    let mut merged: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, members) in components.into_iter().enumerate() {
        let root = find(&mut parent, i);
        merged.entry(root).or_default().extend(members);
    }
    merged
        .into_values()
        .map(|mut m| {
            m.sort_unstable();
            m
        })
        .collect()
}

/// Separates a narrow element standing on a wider base (a signal mast on its
/// cabinet) into two segments. The upper half of the segment must be at most
/// half as wide as the whole; base points lying outside the upper footprint
/// fix the cut height.
fn split_stacked(pts: &[Point3], seg: Vec<usize>, params: &DetectParams) -> Vec<Vec<usize>> {
    const FOOTPRINT_MARGIN: f64 = 0.05;
    let min_pts = params.min_points_per_cluster;
    if seg.len() < 2 * min_pts {
        return vec![seg];
    }
    let bb = Aabb::enclosing(seg.iter().map(|&i| &pts[i])).expect("non-empty segment");
    let mid = bb.center().z;
    let Some(upper) = Aabb::enclosing(seg.iter().map(|&i| &pts[i]).filter(|p| p.z > mid)) else {
        return vec![seg];
    };
    let [fx, fy, _] = bb.extent();
    let [ux, uy, _] = upper.extent();
    if ux.max(uy) > 0.5 * fx.max(fy) {
        return vec![seg];
    }
    let outside = |p: &Point3| {
        p.x < upper.min.x - FOOTPRINT_MARGIN
            || p.x > upper.max.x + FOOTPRINT_MARGIN
            || p.y < upper.min.y - FOOTPRINT_MARGIN
            || p.y > upper.max.y + FOOTPRINT_MARGIN
    };
    let base: Vec<f64> = seg
        .iter()
        .map(|&i| &pts[i])
        .filter(|p| outside(p))
        .map(|p| p.z)
        .collect();
    if base.len() < min_pts {
        return vec![seg];
    }
    let cut = base.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lower, top): (Vec<usize>, Vec<usize>) = seg.iter().partition(|&&i| pts[i].z <= cut);
    if lower.len() < min_pts || top.len() < min_pts {
        return vec![seg];
    }
    vec![lower, top]
}
