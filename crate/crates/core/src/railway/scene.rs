//! Synthetic railway scenes with ground truth.
//!
//! Spec file format, one entry per line, `#` starts a comment:
//!
//! ```text
//! length_m = 1400
//! seed = 7
//! noise_sigma_m = 0.02
//! outlier_fraction = 0.05
//! density_ppm2 = 100
//! ground_density_ppm2 = 25
//! ground_width_m = 8
//! normal_mast@450
//! main_signal@1350,-3
//! ```
//!
//! Object entries are `<kind>@<x>[,<y>]`; without `y` the kind's usual
//! lateral offset is used. Trains travel towards +x along y = 0.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::schema::install_schema;
use super::RailwayError;
use crate::kb::{KnowledgeBase, Name};
use crate::pointcloud::{Aabb, Point3, PointCloud};
use crate::rules::assert_box_facts;

pub const MAST_RADIUS: f64 = 0.1;
pub const NORMAL_MAST_HEIGHT: f64 = 5.5;
pub const BIG_MAST_HEIGHT: f64 = 7.0;
pub const SIGNAL_HEIGHT: f64 = 4.5;
/// Footprint side and height of the box at a signal's bottom.
pub const SIGNAL_CABINET: (f64, f64) = (0.6, 0.35);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ObjectKind {
    NormalMast,
    BigMast,
    MainSignal,
    DistantSignal,
    Vorsignalbake,
    BreakpointTable,
    ChessBoard,
    Schalthouse,
    SchaltSchrack,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 9] = [
        ObjectKind::NormalMast,
        ObjectKind::BigMast,
        ObjectKind::MainSignal,
        ObjectKind::DistantSignal,
        ObjectKind::Vorsignalbake,
        ObjectKind::BreakpointTable,
        ObjectKind::ChessBoard,
        ObjectKind::Schalthouse,
        ObjectKind::SchaltSchrack,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ObjectKind::NormalMast => "normal_mast",
            ObjectKind::BigMast => "big_mast",
            ObjectKind::MainSignal => "main_signal",
            ObjectKind::DistantSignal => "distant_signal",
            ObjectKind::Vorsignalbake => "vorsignalbake",
            ObjectKind::BreakpointTable => "breakpoint_table",
            ObjectKind::ChessBoard => "chess_board",
            ObjectKind::Schalthouse => "schalthouse",
            ObjectKind::SchaltSchrack => "schaltschrack",
        }
    }

    pub fn class(self) -> &'static str {
        match self {
            ObjectKind::NormalMast => "NormalMast",
            ObjectKind::BigMast => "BigMast",
            ObjectKind::MainSignal => "Main_Signal",
            ObjectKind::DistantSignal => "Distant_Signal",
            ObjectKind::Vorsignalbake => "Vorsignalbake",
            ObjectKind::BreakpointTable => "Breakpoint_table",
            ObjectKind::ChessBoard => "Chess_board",
            ObjectKind::Schalthouse => "Schalthouse",
            ObjectKind::SchaltSchrack => "SchaltSchrack",
        }
    }

    fn default_y(self) -> f64 {
        match self {
            ObjectKind::NormalMast | ObjectKind::BigMast => 3.0,
            ObjectKind::Schalthouse | ObjectKind::SchaltSchrack => 4.5,
            _ => -3.0,
        }
    }

    /// Solid parts `(box, is_cylinder)`; cylinders are inscribed in their box.
    fn parts(self, x: f64, y: f64) -> Vec<(Aabb, bool)> {
        let cuboid = |dx: f64, dy: f64, z0: f64, z1: f64| {
            Aabb::new(
                Point3::new(x - dx / 2.0, y - dy / 2.0, z0),
                Point3::new(x + dx / 2.0, y + dy / 2.0, z1),
            )
        };
        let d = 2.0 * MAST_RADIUS;
        match self {
            ObjectKind::NormalMast => vec![(cuboid(d, d, 0.0, NORMAL_MAST_HEIGHT), true)],
            ObjectKind::BigMast => vec![(cuboid(d, d, 0.0, BIG_MAST_HEIGHT), true)],
            ObjectKind::MainSignal | ObjectKind::DistantSignal => {
                let (side, h) = SIGNAL_CABINET;
                vec![
                    (cuboid(d, d, h, SIGNAL_HEIGHT), true),
                    (cuboid(side, side, 0.0, h), false),
                ]
            }
            ObjectKind::Vorsignalbake => vec![(cuboid(0.05, 0.5, 0.0, 2.0), false)],
            ObjectKind::BreakpointTable => vec![(cuboid(0.05, 1.2, 0.0, 1.6), false)],
            ObjectKind::ChessBoard => vec![(cuboid(0.05, 0.4, 0.0, 1.2), false)],
            ObjectKind::Schalthouse => vec![(cuboid(1.5, 1.0, 0.0, 0.8), false)],
            ObjectKind::SchaltSchrack => vec![(cuboid(1.0, 0.6, 0.0, 0.35), false)],
        }
    }
}

impl FromStr for ObjectKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "mast" {
            return Ok(ObjectKind::NormalMast);
        }
        Self::ALL
            .into_iter()
            .find(|k| k.keyword() == s)
            .ok_or_else(|| format!("unknown object kind {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub kind: ObjectKind,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub length_m: f64,
    pub seed: u64,
    pub noise_sigma_m: f64,
    pub outlier_fraction: f64,
    /// Sampling density on object surfaces.
    pub density_ppm2: f64,
    pub ground_density_ppm2: f64,
    pub ground_width_m: f64,
    pub objects: Vec<SceneObject>,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            length_m: 500.0,
            seed: 0,
            noise_sigma_m: 0.0,
            outlier_fraction: 0.0,
            density_ppm2: 100.0,
            ground_density_ppm2: 100.0,
            ground_width_m: 8.0,
            objects: Vec::new(),
        }
    }
}

fn spec_error(line: usize, message: impl Into<String>) -> RailwayError {
    let message = message.into();
    RailwayError::Spec {
        line,
        message: if line > 0 {
            format!("line {line}: {message}")
        } else {
            message
        },
    }
}

impl SceneSpec {
    pub fn parse(text: &str) -> Result<Self, RailwayError> {
        let mut spec = SceneSpec::default();
        let mut ground_density = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let num = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| spec_error(line_no, format!("expected a number, got {v:?}")))
            };
            if let Some((key, value)) = line.split_once('=') {
                let value = value.trim();
                match key.trim() {
                    "length_m" => spec.length_m = num(value)?,
                    "seed" => {
                        spec.seed = value
                            .parse()
                            .map_err(|_| spec_error(line_no, format!("bad seed {value:?}")))?
                    }
                    "noise_sigma_m" => spec.noise_sigma_m = num(value)?,
                    "outlier_fraction" => spec.outlier_fraction = num(value)?,
                    "density_ppm2" => spec.density_ppm2 = num(value)?,
                    "ground_density_ppm2" => ground_density = Some(num(value)?),
                    "ground_width_m" => spec.ground_width_m = num(value)?,
                    other => return Err(spec_error(line_no, format!("unknown key {other:?}"))),
                }
            } else if let Some((kind, pos)) = line.split_once('@') {
                let kind: ObjectKind = kind.trim().parse().map_err(|e| spec_error(line_no, e))?;
                let (x, y) = match pos.split_once(',') {
                    Some((x, y)) => (num(x)?, num(y)?),
                    None => (num(pos)?, kind.default_y()),
                };
                spec.objects.push(SceneObject { kind, x, y });
            } else {
                return Err(spec_error(line_no, format!("expected key = value or kind@x, got {line:?}")));
            }
        }
        spec.ground_density_ppm2 = ground_density.unwrap_or(spec.density_ppm2);
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), RailwayError> {
        let bad = |m: String| Err(spec_error(0, m));
        if !(self.length_m > 0.0 && self.length_m.is_finite()) {
            return bad(format!("length_m must be positive, got {}", self.length_m));
        }
        if !(self.noise_sigma_m >= 0.0 && self.noise_sigma_m.is_finite()) {
            return bad(format!("noise_sigma_m must be >= 0, got {}", self.noise_sigma_m));
        }
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return bad(format!("outlier_fraction must lie in [0, 1), got {}", self.outlier_fraction));
        }
        for (k, v) in [
            ("density_ppm2", self.density_ppm2),
            ("ground_density_ppm2", self.ground_density_ppm2),
            ("ground_width_m", self.ground_width_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{k} must be positive, got {v}"));
            }
        }
        for o in &self.objects {
            if !(0.0..=self.length_m).contains(&o.x) || !o.y.is_finite() {
                return bad(format!("{}@{} lies outside the track", o.kind.keyword(), o.x));
            }
        }
        Ok(())
    }
}

/// Points on the closed lateral surface of the vertical cylinder inscribed in `b`.
fn sample_cylinder(b: &Aabb, density: f64, rng: &mut ChaCha8Rng, out: &mut Vec<Point3>) {
    let c = b.center();
    let [dx, _, h] = b.extent();
    let r = dx / 2.0;
    let n = (TAU * r * h * density).round() as usize;
    for _ in 0..n {
        let t = rng.gen_range(0.0..TAU);
        let z = rng.gen_range(b.min.z..=b.max.z);
        out.push(Point3::new(c.x + r * t.cos(), c.y + r * t.sin(), z));
    }
    let top = (std::f64::consts::PI * r * r * density).round() as usize;
    for _ in 0..top {
        let t = rng.gen_range(0.0..TAU);
        let s = r * rng.gen::<f64>().sqrt();
        out.push(Point3::new(c.x + s * t.cos(), c.y + s * t.sin(), b.max.z));
    }
}

/// Points on the five faces of `b` other than the bottom.
fn sample_box(b: &Aabb, density: f64, rng: &mut ChaCha8Rng, out: &mut Vec<Point3>) {
    let (lo, hi) = (b.min, b.max);
    let [dx, dy, dz] = b.extent();
    let mut face = |area: f64, f: &mut dyn FnMut(&mut ChaCha8Rng) -> Point3| {
        let n = (area * density).round() as usize;
        for _ in 0..n {
            out.push(f(rng));
        }
    };
    let u = |rng: &mut ChaCha8Rng, a: f64, b: f64| rng.gen_range(a..=b);
    face(dx * dy, &mut |r| Point3::new(u(r, lo.x, hi.x), u(r, lo.y, hi.y), hi.z));
    for x in [lo.x, hi.x] {
        face(dy * dz, &mut |r| Point3::new(x, u(r, lo.y, hi.y), u(r, lo.z, hi.z)));
    }
    for y in [lo.y, hi.y] {
        face(dx * dz, &mut |r| Point3::new(u(r, lo.x, hi.x), y, u(r, lo.z, hi.z)));
    }
}

fn truth_id(kind: ObjectKind, index: usize) -> Name {
    Name::new(format!("{}_{:03}", kind.keyword(), index + 1)).expect("valid id")
}

/// Samples the scene and builds its truth KB. Deterministic per seed.
pub fn generate_scene(spec: &SceneSpec) -> Result<(PointCloud, KnowledgeBase), RailwayError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut points = Vec::new();

    let half = spec.ground_width_m / 2.0;
    let n_ground = (spec.length_m * spec.ground_width_m * spec.ground_density_ppm2).round() as usize;
    for _ in 0..n_ground {
        points.push(Point3::new(
            rng.gen_range(0.0..=spec.length_m),
            rng.gen_range(-half..=half),
            0.0,
        ));
    }

    let mut truth = KnowledgeBase::new();
    install_schema(&mut truth)?;
    let mut top: f64 = 0.0;
    for (i, o) in spec.objects.iter().enumerate() {
        let parts = o.kind.parts(o.x, o.y);
        for (b, cylinder) in &parts {
            if *cylinder {
                sample_cylinder(b, spec.density_ppm2, &mut rng, &mut points);
            } else {
                sample_box(b, spec.density_ppm2, &mut rng, &mut points);
            }
            top = top.max(b.max.z);
        }
        let id = truth_id(o.kind, i);
        truth.assert_class(&id, &Name::new(o.kind.class()).expect("valid class"));
        assert_box_facts(&mut truth, &id, &parts[0].0, parts[0].0.max.z);
        if let Some((cabinet, _)) = parts.get(1) {
            let cid = Name::new(format!("{id}_cabinet")).expect("valid id");
            truth.assert_class(&cid, &Name::new("SchaltSchrack").expect("valid class"));
            assert_box_facts(&mut truth, &cid, cabinet, cabinet.max.z);
        }
    }

    if spec.noise_sigma_m > 0.0 {
        let noise = Normal::new(0.0, spec.noise_sigma_m).expect("sigma validated");
        for p in &mut points {
            p.x += noise.sample(&mut rng);
            p.y += noise.sample(&mut rng);
            p.z += noise.sample(&mut rng);
        }
    }

    let clean = points.len() as f64;
    let f = spec.outlier_fraction;
    let n_out = (clean * f / (1.0 - f)).round() as usize;
    for _ in 0..n_out {
        points.push(Point3::new(
            rng.gen_range(0.0..=spec.length_m),
            rng.gen_range(-half..=half),
            rng.gen_range(0.0..=top + 1.0),
        ));
    }
    Ok((PointCloud::new(points, ""), truth))
}

pub fn xyz_text(cloud: &PointCloud) -> String {
    let mut out = String::with_capacity(cloud.len() * 24);
    for p in &cloud.points {
        writeln!(out, "{:.4} {:.4} {:.4}", p.x, p.y, p.z).expect("write to string");
    }
    out
}

/// Writes `<prefix>.xyz` and `<prefix>.truth.kb`; returns both paths.
pub fn write_scene(spec: &SceneSpec, prefix: &Path) -> Result<(PathBuf, PathBuf), RailwayError> {
    let (cloud, truth) = generate_scene(spec)?;
    let base = prefix.to_string_lossy();
    let xyz = PathBuf::from(format!("{base}.xyz"));
    let kb = PathBuf::from(format!("{base}.truth.kb"));
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| RailwayError::Io { path, source }
    };
    fs::write(&xyz, xyz_text(&cloud)).map_err(io(&xyz))?;
    fs::write(&kb, truth.dump()).map_err(io(&kb))?;
    Ok((xyz, kb))
}
