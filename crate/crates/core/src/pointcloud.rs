//! Point-cloud ingestion, axis-aligned bounds and a uniform-grid spatial index.
//!
//! Coordinates are meters, z is up and x runs along the track.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PointCloudError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("cell size must be positive and finite, got {0}")]
    InvalidCellSize(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn coord(&self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis index out of range: {axis}"),
        }
    }

    pub fn sub(&self, other: &Point3) -> [f64; 3] {
        [self.x - other.x, self.y - other.y, self.z - other.z]
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let d = self.sub(other);
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Closed axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    /// Builds a box from two corners, ordering each coordinate.
    pub fn new(a: Point3, b: Point3) -> Self {
        Self {
            min: Point3::new(a.x.min(b.x), a.y.min(b.y), a.z.min(b.z)),
            max: Point3::new(a.x.max(b.x), a.y.max(b.y), a.z.max(b.z)),
        }
    }

    pub fn from_point(p: Point3) -> Self {
        Self { min: p, max: p }
    }

    /// Smallest box containing every point; `None` for an empty iterator.
    pub fn enclosing<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = *iter.next()?;
        let mut b = Aabb::from_point(first);
        for p in iter {
            b.grow(p);
        }
        Some(b)
    }

    pub fn grow(&mut self, p: &Point3) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.min.z = self.min.z.min(p.z);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
        self.max.z = self.max.z.max(p.z);
    }

    pub fn contains(&self, p: &Point3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn extent(&self) -> [f64; 3] {
        [
            self.max.x - self.min.x,
            self.max.y - self.min.y,
            self.max.z - self.min.z,
        ]
    }

    pub fn center(&self) -> Point3 {
        Point3::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
            0.5 * (self.min.z + self.max.z),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub source_path: String,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>, source_path: impl Into<String>) -> Self {
        Self {
            points,
            source_path: source_path.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Reads an ASCII XYZ file. Columns after the third are ignored.
pub fn load_xyz(path: impl AsRef<Path>) -> Result<PointCloud, PointCloudError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| PointCloudError::Io {
        path: display.clone(),
        source,
    })?;
    let points = parse_xyz(&text).map_err(|(line, message)| PointCloudError::Parse {
        path: display.clone(),
        line,
        message,
    })?;
    if points.is_empty() {
        return Err(PointCloudError::EmptyCloud);
    }
    Ok(PointCloud::new(points, display))
}

/// Parses XYZ text; errors carry the 1-based line number.
pub fn parse_xyz(text: &str) -> Result<Vec<Point3>, (usize, String)> {
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut xyz = [0.0; 3];
        for (axis, slot) in xyz.iter_mut().enumerate() {
            let field = fields
                .next()
                .ok_or_else(|| (i + 1, format!("expected 3 coordinates, found {axis}")))?;
            let v: f64 = field
                .parse()
                .map_err(|_| (i + 1, format!("invalid number {field:?}")))?;
            if !v.is_finite() {
                return Err((i + 1, format!("non-finite coordinate {field:?}")));
            }
            *slot = v;
        }
        points.push(Point3::new(xyz[0], xyz[1], xyz[2]));
    }
    Ok(points)
}

pub fn cloud_bounds(cloud: &PointCloud) -> Result<Aabb, PointCloudError> {
    Aabb::enclosing(&cloud.points).ok_or(PointCloudError::EmptyCloud)
}

pub type CellKey = (i64, i64, i64);

/// Uniform 3D grid over point indices.
#[derive(Debug, Clone)]
pub struct GridIndex {
    cell_size: f64,
    cells: HashMap<CellKey, Vec<usize>>,
}

impl GridIndex {
    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cell_of(&self, p: &Point3) -> CellKey {
        (
            (p.x / self.cell_size).floor() as i64,
            (p.y / self.cell_size).floor() as i64,
            (p.z / self.cell_size).floor() as i64,
        )
    }

    pub fn cells(&self) -> impl Iterator<Item = (&CellKey, &Vec<usize>)> {
        self.cells.iter()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, key: &CellKey) -> Option<&[usize]> {
        self.cells.get(key).map(Vec::as_slice)
    }
}

pub fn build_index(points: &[Point3], cell_size: f64) -> Result<GridIndex, PointCloudError> {
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(PointCloudError::InvalidCellSize(cell_size));
    }
    let mut index = GridIndex {
        cell_size,
        cells: HashMap::new(),
    };
    for (i, p) in points.iter().enumerate() {
        let key = index.cell_of(p);
        index.cells.entry(key).or_default().push(i);
    }
    Ok(index)
}

/// Indices of all points inside the closed box, ascending.
pub fn query_box(index: &GridIndex, points: &[Point3], bx: &Aabb) -> Vec<usize> {
    let lo = index.cell_of(&bx.min);
    let hi = index.cell_of(&bx.max);
    let span = |a: i64, b: i64| (b - a + 1).max(0) as u128;
    let range_cells = span(lo.0, hi.0) * span(lo.1, hi.1) * span(lo.2, hi.2);

    let mut out = Vec::new();
    let mut take = |ids: &[usize]| {
        out.extend(ids.iter().copied().filter(|&i| bx.contains(&points[i])));
    };
    if range_cells <= index.cells.len() as u128 {
        for cx in lo.0..=hi.0 {
            for cy in lo.1..=hi.1 {
                for cz in lo.2..=hi.2 {
                    if let Some(ids) = index.cells.get(&(cx, cy, cz)) {
                        take(ids);
                    }
                }
            }
        }
    } else {
        for (key, ids) in &index.cells {
            let inside = (lo.0..=hi.0).contains(&key.0)
                && (lo.1..=hi.1).contains(&key.1)
                && (lo.2..=hi.2).contains(&key.2);
            if inside {
                take(ids);
            }
        }
    }
    out.sort_unstable();
    out
}
