//! The 3D processing and topology built-in families.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Deserialize;

use super::builtins::{number, BuiltInError, BuiltInRegistry, BuiltInSpec, Relation};
use super::engine::Ground;
use crate::geometry::{
    detect_horizontal_elements, detect_vertical_elements, ransac_lines, BoundingBox, DetectParams,
    GeometryError, Line3, RansacParams,
};
use crate::kb::{KnowledgeBase, Name, Value};
use crate::pointcloud::{load_xyz, Aabb, Point3, PointCloud};
use crate::topology::{self, TopologyParams};
use crate::vocab;

pub const PROCESSING_VERTICAL: &str = "3D_swrlb_Processing:VerticalElementDetection";
pub const PROCESSING_HORIZONTAL: &str = "3D_swrlb_Processing:HorizontalElementDetection";

/// Tunables of every built-in that needs them.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuiltInParams {
    pub detect: DetectParams,
    pub topology: TopologyParams,
    pub ransac: RansacParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionKind {
    Vertical,
    Horizontal,
}

impl DetectionKind {
    pub fn class(self) -> &'static str {
        match self {
            DetectionKind::Vertical => vocab::VERTICAL_BB,
            DetectionKind::Horizontal => vocab::HORIZONTAL_BB,
        }
    }
}

fn name(s: &str) -> Name {
    Name::new(s).expect("vocabulary names are valid")
}

/// Runs one detector and asserts its boxes: class, extents, centroid and a
/// geometry record holding the corners and the dominant RANSAC line.
pub fn detect_into_kb(
    kb: &mut KnowledgeBase,
    cloud: &PointCloud,
    params: &BuiltInParams,
    kind: DetectionKind,
) -> Result<Vec<Name>, GeometryError> {
    let boxes = match kind {
        DetectionKind::Vertical => detect_vertical_elements(cloud, &params.detect)?,
        DetectionKind::Horizontal => detect_horizontal_elements(cloud, &params.detect)?,
    };
    let class = name(kind.class());
    let mut ids = Vec::with_capacity(boxes.len());
    for bb in &boxes {
        let id = name(&bb.id);
        kb.assert_class(&id, &class);
        assert_box(kb, &id, bb);
        if let Ok(lines) = ransac_lines(&cloud.points, &bb.point_indices, &params.ransac, 1) {
            if let Some(line) = lines.first() {
                let geom = geometry_record(&id);
                let l = line.anchor;
                let d = line.direction;
                for (p, v) in vocab::LINE_COORDS.iter().zip([l.x, l.y, l.z, d[0], d[1], d[2]]) {
                    kb.assert_data(&geom, &name(p), Value::num(v));
                }
            }
        }
        ids.push(id);
    }
    Ok(ids)
}

fn geometry_record(id: &Name) -> Name {
    name(&format!("{id}{}", vocab::GEOMETRY_SUFFIX))
}

fn assert_box(kb: &mut KnowledgeBase, id: &Name, bb: &BoundingBox) {
    assert_box_facts(kb, id, &bb.aabb, bb.height);
}

/// Extents, centroid and geometry record of a box whose top stands
/// `height` above the ground.
pub fn assert_box_facts(kb: &mut KnowledgeBase, id: &Name, aabb: &Aabb, height: f64) {
    let [dx, dy, _] = aabb.extent();
    let c = aabb.center();
    for (p, v) in [
        (vocab::HEIGHT, height),
        (vocab::LENGTH, dx.max(dy)),
        (vocab::WIDTH, dx.min(dy)),
        (vocab::CX, c.x),
        (vocab::CY, c.y),
        (vocab::CZ, c.z),
    ] {
        kb.assert_data(id, &name(p), Value::num(v));
    }
    let geom = geometry_record(id);
    kb.assert_object(id, &name(vocab::HAS_GEOMETRY), &geom);
    let (lo, hi) = (aabb.min, aabb.max);
    for (p, v) in vocab::BOX_COORDS
        .iter()
        .zip([lo.x, lo.y, lo.z, hi.x, hi.y, hi.z])
    {
        kb.assert_data(&geom, &name(p), Value::num(v));
    }
}

fn record_numbers(kb: &KnowledgeBase, individual: &Name, props: &[&str; 6]) -> Option<[f64; 6]> {
    let has_geometry = name(vocab::HAS_GEOMETRY);
    kb.objects_of(individual, &has_geometry).iter().find_map(|g| {
        let mut out = [0.0; 6];
        for (slot, p) in out.iter_mut().zip(props) {
            *slot = kb.number_of(g, &name(p))?;
        }
        Some(out)
    })
}

/// Box of an individual, read from its geometry record.
pub fn box_of(kb: &KnowledgeBase, individual: &Name) -> Option<Aabb> {
    let c = record_numbers(kb, individual, &vocab::BOX_COORDS)?;
    Some(Aabb::new(
        Point3::new(c[0], c[1], c[2]),
        Point3::new(c[3], c[4], c[5]),
    ))
}

fn line_of(kb: &KnowledgeBase, individual: &Name) -> Option<Line3> {
    let c = record_numbers(kb, individual, &vocab::LINE_COORDS)?;
    Line3::new(Point3::new(c[0], c[1], c[2]), [c[3], c[4], c[5]])
}

fn arg_box(builtin: &Name, g: &Ground, kb: &KnowledgeBase) -> Result<Aabb, BuiltInError> {
    let ind = g.as_individual().ok_or_else(|| BuiltInError::TypeMismatch {
        builtin: builtin.clone(),
        detail: format!("expected an individual, got {g}"),
    })?;
    box_of(kb, ind).ok_or_else(|| BuiltInError::NoGeometry(ind.clone()))
}

fn arg_line(builtin: &Name, g: &Ground, kb: &KnowledgeBase) -> Result<Line3, BuiltInError> {
    let ind = g.as_individual().ok_or_else(|| BuiltInError::TypeMismatch {
        builtin: builtin.clone(),
        detail: format!("expected an individual, got {g}"),
    })?;
    line_of(kb, ind).ok_or_else(|| BuiltInError::NoGeometry(ind.clone()))
}

fn box_predicate(
    canonical: &str,
    property: &str,
    aliases: &[&str],
    topo: &TopologyParams,
    f: fn(&Aabb, &Aabb, &TopologyParams) -> bool,
) -> BuiltInSpec {
    let topo = topo.clone();
    let mut spec = BuiltInSpec::predicate(canonical, 2, move |b, args, kb| {
        Ok(f(&arg_box(b, &args[0], kb)?, &arg_box(b, &args[1], kb)?, &topo))
    })
    .stored_as(Relation::Named(name(property)));
    for a in aliases {
        spec = spec.alias(a);
    }
    spec
}

pub fn register_topology(r: &mut BuiltInRegistry, topo: &TopologyParams) {
    let specs = [
        box_predicate(
            "3D_swrlb_Topology:Upper",
            "Upper",
            &["3Dswrlb:Upper"],
            topo,
            topology::upper,
        ),
        box_predicate(
            "3D_swrlb_Topology:Intersect",
            "Intersect",
            &["3Dswrlb:Intersect"],
            topo,
            |a, b, _| topology::intersects(a, b),
        ),
        box_predicate(
            "3D_swrlb_Topology:Touch",
            "Touch",
            &["3Dswrlb:Touch", "3D_swrlb_Topology:touch", "3Dswrlb:touch"],
            topo,
            topology::touches,
        ),
        box_predicate(
            "3D_swrlb_Topology:isConnected",
            "isConnected",
            &["3Dswrlb:isConnected"],
            topo,
            topology::is_connected,
        ),
        {
            let topo = topo.clone();
            BuiltInSpec::predicate("3D_swrlb_Topology:Perpendicular", 2, move |b, args, kb| {
                Ok(topology::perpendicular(
                    &arg_line(b, &args[0], kb)?,
                    &arg_line(b, &args[1], kb)?,
                    &topo,
                ))
            })
            .alias("3Dswrlb:Perpendicular")
            .stored_as(Relation::Named(name("Perpendicular")))
        },
        {
            let topo = topo.clone();
            BuiltInSpec::predicate("3D_swrlb_Topology:hasDistanceFrom", 3, move |b, args, kb| {
                let d = number(b, &args[2])?;
                topology::is_distant_from(
                    &arg_box(b, &args[0], kb)?,
                    &arg_box(b, &args[1], kb)?,
                    d,
                    &topo,
                )
                .map_err(|e| BuiltInError::Failed {
                    builtin: b.clone(),
                    detail: e.to_string(),
                })
            })
            .alias("3Dswrlb:hasDistanceFrom")
            .alias("3D_swrlb_Topology:isDistantfrom")
            .alias("3Dswrlb:isDistantfrom")
            .alias("hasDistanceFrom")
            .alias("isDistantfrom")
            .stored_as(Relation::Parametric("hasDistanceFrom".into()))
        },
    ];
    for s in specs {
        r.register(s).expect("topology names are unique");
    }
}

type CloudCache = Arc<Mutex<HashMap<String, Arc<PointCloud>>>>;

fn cloud_for(cache: &CloudCache, builtin: &Name, path: &str) -> Result<Arc<PointCloud>, BuiltInError> {
    let mut guard = cache.lock().expect("cloud cache poisoned");
    if let Some(c) = guard.get(path) {
        return Ok(c.clone());
    }
    let cloud = load_xyz(path).map_err(|e| BuiltInError::Failed {
        builtin: builtin.clone(),
        detail: e.to_string(),
    })?;
    let cloud = Arc::new(cloud);
    guard.insert(path.to_string(), cloud.clone());
    Ok(cloud)
}

fn detection(canonical: &str, kind: DetectionKind, params: &BuiltInParams, cache: &CloudCache) -> BuiltInSpec {
    let params = params.clone();
    let cache = cache.clone();
    let local = canonical.rsplit_once(':').map_or(canonical, |(_, l)| l).to_string();
    BuiltInSpec::generator(canonical, 2, move |b, inputs, kb| {
        let path = inputs[0].as_text().ok_or_else(|| BuiltInError::TypeMismatch {
            builtin: b.clone(),
            detail: format!("expected a cloud path, got {}", inputs[0]),
        })?;
        let cloud = cloud_for(&cache, b, path)?;
        let ids = detect_into_kb(kb, &cloud, &params, kind).map_err(|e| BuiltInError::Failed {
            builtin: b.clone(),
            detail: e.to_string(),
        })?;
        Ok(ids.into_iter().map(Ground::Individual).collect())
    })
    .alias(&format!("3Dswrlb:{local}"))
    .alias(&format!("3DProcessing_swrlb:{local}"))
}

pub fn register_processing(r: &mut BuiltInRegistry, params: &BuiltInParams) {
    let cache: CloudCache = Arc::default();
    let specs = [
        detection(PROCESSING_VERTICAL, DetectionKind::Vertical, params, &cache),
        detection(PROCESSING_HORIZONTAL, DetectionKind::Horizontal, params, &cache),
    ];
    for s in specs {
        r.register(s).expect("processing names are unique");
    }
}

/// Comparison, processing and topology families together.
pub fn standard_registry(params: &BuiltInParams) -> BuiltInRegistry {
    let mut r = BuiltInRegistry::with_comparisons();
    register_processing(&mut r, params);
    register_topology(&mut r, &params.topology);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::engine::run_fixpoint;
    use crate::rules::parser::{parse_rule, parse_ruleset};
    use crate::rules::{Atom, BuiltInEval};
    use std::io::Write;

    fn n(s: &str) -> Name {
        Name::new(s).unwrap()
    }

    fn put_box(kb: &mut KnowledgeBase, id: &str, lo: [f64; 3], hi: [f64; 3]) {
        let bb = BoundingBox {
            id: id.into(),
            aabb: Aabb::new(Point3::new(lo[0], lo[1], lo[2]), Point3::new(hi[0], hi[1], hi[2])),
            point_indices: vec![],
            height: hi[2],
            length: (hi[0] - lo[0]).max(hi[1] - lo[1]),
            width: (hi[0] - lo[0]).min(hi[1] - lo[1]),
            centroid: Point3::new(
                (lo[0] + hi[0]) / 2.0,
                (lo[1] + hi[1]) / 2.0,
                (lo[2] + hi[2]) / 2.0,
            ),
        };
        assert_box(kb, &n(id), &bb);
    }

    fn eval(reg: &BuiltInRegistry, builtin: &str, args: &[Ground], kb: &KnowledgeBase) -> Result<bool, BuiltInError> {
        let spec = reg.resolve(&n(builtin)).unwrap();
        match &spec.eval {
            BuiltInEval::Predicate(f) => f(&spec.name, args, kb),
            BuiltInEval::Generator(_) => panic!("not a predicate"),
        }
    }

    fn ind(s: &str) -> Ground {
        Ground::Individual(n(s))
    }

    #[test]
    fn distance_built_in() {
        let reg = standard_registry(&BuiltInParams::default());
        let mut kb = KnowledgeBase::new();
        put_box(&mut kb, "m1", [-0.1, -0.1, 0.0], [0.1, 0.1, 5.5]);
        put_box(&mut kb, "m2", [49.9, -0.1, 0.0], [50.1, 0.1, 5.5]);
        let fifty = Ground::Literal(Value::num(50.0));
        for alias in [
            "hasDistanceFrom",
            "isDistantfrom",
            "3Dswrlb:hasDistanceFrom",
            "3D_swrlb_Topology:hasDistanceFrom",
        ] {
            assert_eq!(eval(&reg, alias, &[ind("m1"), ind("m2"), fifty.clone()], &kb), Ok(true));
        }
        assert_eq!(
            eval(&reg, "hasDistanceFrom", &[ind("m1"), ind("m2"), Ground::Literal(Value::num(75.0))], &kb),
            Ok(false)
        );
        assert_eq!(
            eval(&reg, "hasDistanceFrom", &[ind("m1"), ind("nobody"), fifty], &kb),
            Err(BuiltInError::NoGeometry(n("nobody")))
        );
    }

    #[test]
    fn self_intersection_and_upper() {
        let reg = standard_registry(&BuiltInParams::default());
        let mut kb = KnowledgeBase::new();
        put_box(&mut kb, "pole", [-0.1, -0.1, 0.35], [0.1, 0.1, 4.5]);
        put_box(&mut kb, "cab", [-0.3, -0.3, 0.0], [0.3, 0.3, 0.35]);
        assert_eq!(eval(&reg, "3D_swrlb_Topology:Intersect", &[ind("pole"), ind("pole")], &kb), Ok(true));
        assert_eq!(eval(&reg, "3D_swrlb_Topology:Upper", &[ind("pole"), ind("cab")], &kb), Ok(true));
        assert_eq!(eval(&reg, "3D_swrlb_Topology:Upper", &[ind("cab"), ind("pole")], &kb), Ok(false));
        assert_eq!(eval(&reg, "3Dswrlb:isConnected", &[ind("pole"), ind("cab")], &kb), Ok(true));
        assert_eq!(eval(&reg, "3D_swrlb_Topology:Touch", &[ind("pole"), ind("cab")], &kb), Ok(true));
    }

    #[test]
    fn perpendicular_reads_line_records() {
        let reg = standard_registry(&BuiltInParams::default());
        let mut kb = KnowledgeBase::new();
        for (id, dir) in [("v", [0.0, 0.0, 1.0]), ("h", [1.0, 0.0, 0.0])] {
            let geom = n(&format!("{id}_geom"));
            kb.assert_object(&n(id), &n("hasGeometry"), &geom);
            for (p, v) in vocab::LINE_COORDS.iter().zip([0.0, 0.0, 0.0, dir[0], dir[1], dir[2]]) {
                kb.assert_data(&geom, &n(p), Value::num(v));
            }
        }
        assert_eq!(eval(&reg, "3D_swrlb_Topology:Perpendicular", &[ind("v"), ind("h")], &kb), Ok(true));
        assert_eq!(eval(&reg, "3D_swrlb_Topology:Perpendicular", &[ind("v"), ind("v")], &kb), Ok(false));
    }

    #[test]
    fn processing_aliases_resolve() {
        let reg = standard_registry(&BuiltInParams::default());
        for alias in [
            "3Dswrlb:VerticalElementDetection",
            "3DProcessing_swrlb:VerticalElementDetection",
        ] {
            assert_eq!(reg.resolve(&n(alias)).unwrap().name, n(PROCESSING_VERTICAL));
        }
        let r = parse_rule("3D_swrlb_Topology:Upper(?x, ?y) -> Above(?x, ?y)", &reg).unwrap();
        assert!(matches!(r.antecedent[0], Atom::BuiltIn { .. }));
    }

    fn pole_cloud() -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        let mut text = String::new();
        for i in 0..60 {
            for j in 0..60 {
                text.push_str(&format!("{} {} 0\n", i as f64 * 0.1 - 3.0, j as f64 * 0.1 - 3.0));
            }
        }
        for k in 0..120 {
            let z = k as f64 * 0.05;
            for a in 0..8 {
                let t = a as f64 * std::f64::consts::PI / 4.0;
                text.push_str(&format!("{} {} {z}\n", 0.1 * t.cos(), 0.1 * t.sin()));
            }
        }
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn vertical_detection_generator() {
        let cloud = pole_cloud();
        let path = cloud.path().to_str().unwrap().to_string();
        let reg = standard_registry(&BuiltInParams::default());
        let rules = parse_ruleset(
            "Scene(?s) ^ hasPointCloud(?s, ?dir) ^ 3Dswrlb:VerticalElementDetection(?v, ?dir) -> Vertical_BoundingBox(?v)",
            &reg,
        )
        .unwrap();
        let mut kb = KnowledgeBase::new();
        kb.assert_class(&n("scene"), &n("Scene"));
        kb.assert_data(&n("scene"), &n("hasPointCloud"), Value::text(path.clone()));
        let report = run_fixpoint(&mut kb, &rules, &reg).unwrap();
        assert_eq!(kb.individuals_of(&n("Vertical_BoundingBox")), vec![n("vbb_0001")]);
        let h = kb.number_of(&n("vbb_0001"), &n("height")).unwrap();
        assert!((h - 5.95).abs() < 1e-6, "{h}");
        assert!(box_of(&kb, &n("vbb_0001")).is_some());
        assert!(line_of(&kb, &n("vbb_0001")).unwrap().direction[2] > 0.99);
        assert_eq!(report.iterations, 2);

        let before = kb.dump();
        let again = run_fixpoint(&mut kb, &rules, &reg).unwrap();
        assert_eq!(again.facts_added, 0);
        assert_eq!(kb.dump(), before);
    }

    #[test]
    fn missing_cloud_is_an_error() {
        let reg = standard_registry(&BuiltInParams::default());
        let rules = parse_ruleset(
            "Scene(?s) ^ hasPointCloud(?s, ?dir) ^ 3D_swrlb_Processing:HorizontalElementDetection(?v, ?dir) -> Horizontal_BoundingBox(?v)",
            &reg,
        )
        .unwrap();
        let mut kb = KnowledgeBase::new();
        kb.assert_class(&n("scene"), &n("Scene"));
        kb.assert_data(&n("scene"), &n("hasPointCloud"), Value::text("/nonexistent/cloud.xyz"));
        assert!(matches!(
            run_fixpoint(&mut kb, &rules, &reg),
            Err(crate::rules::RuleError::BuiltIn {
                source: BuiltInError::Failed { .. },
                ..
            })
        ));
    }
}
