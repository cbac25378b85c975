use std::path::Path;

use serde::Deserialize;

use super::ranges::{GeometricRanges, RangeParams};
use super::schema::{install_schema, LEAF_CLASSES};
use super::RailwayError;
use crate::geometry::{DetectParams, RansacParams};
use crate::kb::{KnowledgeBase, Name, Value};
use crate::pointcloud::load_xyz;
use crate::rules::{
    parse_ruleset, run_fixpoint_with, standard_registry, AnnotationReport, BuiltInParams,
    Conflict, EvalContext, Rule,
};
use crate::topology::TopologyParams;
use crate::vocab;

/// Everything tunable in the annotation pipeline; read from TOML with one
/// table per section.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    pub detect: DetectParams,
    pub topology: TopologyParams,
    pub ransac: RansacParams,
    pub ranges: RangeParams,
}

impl PipelineParams {
    pub fn builtins(&self) -> BuiltInParams {
        BuiltInParams {
            detect: self.detect.clone(),
            topology: self.topology.clone(),
            ransac: self.ransac.clone(),
        }
    }

    pub fn ranges(&self) -> GeometricRanges {
        GeometricRanges::new(self.ranges.zeta)
    }
}

pub const SCENE_INDIVIDUAL: &str = "scene";

/// The shipped rule pack.
pub fn ruleset_text() -> &'static str {
    include_str!("../../data/railway.rules")
}

/// The shipped rule pack, parsed.
pub fn rule_pack() -> Vec<Rule> {
    parse_ruleset(ruleset_text(), &standard_registry(&BuiltInParams::default()))
        .expect("shipped rule pack parses")
}

/// Detection, topology and annotation over one cloud.
pub fn annotate_scene(
    cloud_path: &Path,
    params: &PipelineParams,
    rules: &[Rule],
) -> Result<(KnowledgeBase, AnnotationReport), RailwayError> {
    annotate_scene_observed(cloud_path, params, rules, |_, _| {})
}

/// As [`annotate_scene`], calling `after_pass` with the KB after every
/// fixpoint pass.
pub fn annotate_scene_observed(
    cloud_path: &Path,
    params: &PipelineParams,
    rules: &[Rule],
    after_pass: impl FnMut(usize, &KnowledgeBase),
) -> Result<(KnowledgeBase, AnnotationReport), RailwayError> {
    // Fail early with a typed error; the built-in reloads through its cache.
    load_xyz(cloud_path)?;
    let mut kb = KnowledgeBase::new();
    install_schema(&mut kb)?;
    let start = kb.fact_count();

    let scene = name(SCENE_INDIVIDUAL);
    kb.assert_class(&scene, &name(vocab::SCENE));
    kb.assert_data(
        &scene,
        &name(vocab::HAS_POINT_CLOUD),
        Value::text(cloud_path.to_string_lossy()),
    );

    let registry = standard_registry(&params.builtins());
    let mut report = run_fixpoint_with(
        &mut kb,
        rules,
        &registry,
        &mut EvalContext::new(),
        after_pass,
    )?;
    let (conflicts, retracted) = resolve(&mut kb, &params.ranges());
    report.conflicts = conflicts;
    report.retracted = retracted;
    report.facts_added = kb.fact_count() - start;
    Ok((kb, report))
}

fn name(s: &str) -> Name {
    Name::new(s).expect("vocabulary names are valid")
}

/// Explicit leaf labels of an individual.
pub fn leaf_labels(kb: &KnowledgeBase, individual: &Name) -> Vec<Name> {
    kb.classes_of(individual)
        .filter(|c| LEAF_CLASSES.contains(&c.as_str()))
        .cloned()
        .collect()
}

fn linked(kb: &KnowledgeBase, individual: &Name, prop: &str) -> bool {
    let p = name(prop);
    !kb.objects_of(individual, &p).is_empty()
        || kb.object_pairs(&p).any(|(_, o)| o == individual)
}

/// Relations that back a label beyond its extents.
fn topology_support(kb: &KnowledgeBase, individual: &Name, class: &str) -> bool {
    let any = |props: &[&str]| props.iter().any(|p| linked(kb, individual, p));
    match class {
        "Main_Signal" | "Distant_Signal" => {
            !kb.objects_of(individual, &name("hasSignalCabinet")).is_empty()
                || any(&["hasDistanceFrom_1000", "hasDistanceFrom_700"])
        }
        "BigMast" | "NormalMast" => any(&["hasDistanceFrom_50"]),
        "Vorsignalbake" => any(&["hasDistanceFrom_75", "hasDistanceFrom_100", "announces"]),
        "Schalthouse" | "SchaltSchrack" => kb
            .object_pairs(&name("hasSignalCabinet"))
            .any(|(_, c)| c == individual),
        _ => false,
    }
}

/// Specificity policy for individuals holding several leaf labels. Among
/// labels whose ranges hold, topological support wins first, then the number
/// of constrained extents. A label counts only if it rests on more than
/// height alone. Remaining ties keep every label and are reported.
pub fn resolve_conflicts(kb: &mut KnowledgeBase) -> Vec<Conflict> {
    resolve(kb, &GeometricRanges::default()).0
}

pub fn resolve_conflicts_with(kb: &mut KnowledgeBase, ranges: &GeometricRanges) -> Vec<Conflict> {
    resolve(kb, ranges).0
}

fn resolve(kb: &mut KnowledgeBase, ranges: &GeometricRanges) -> (Vec<Conflict>, usize) {
    let mut conflicts = Vec::new();
    let mut retracted = 0;
    for individual in kb.individuals() {
        let labels = leaf_labels(kb, &individual);
        if labels.len() < 2 {
            continue;
        }
        let num = |p: &str| kb.number_of(&individual, &name(p));
        let (h, l, w) = (
            num(vocab::HEIGHT).unwrap_or(f64::NAN),
            num(vocab::LENGTH).unwrap_or(f64::NAN),
            num(vocab::WIDTH).unwrap_or(f64::NAN),
        );
        let score = |c: &Name| -> Option<(bool, usize)> {
            let r = ranges.get(c.as_str())?;
            let support = topology_support(kb, &individual, c.as_str());
            (r.contains(h, l, w) && (r.constraint_count() > 1 || support))
                .then(|| (support, r.constraint_count()))
        };
        let scores: Vec<Option<(bool, usize)>> = labels.iter().map(score).collect();
        let mut kept = labels.clone();
        if let Some(best) = scores.iter().flatten().max().copied() {
            kept = Vec::new();
            for (c, s) in labels.iter().zip(&scores) {
                if *s == Some(best) {
                    kept.push(c.clone());
                } else {
                    kb.retract_class(&individual, c);
                    retracted += 1;
                }
            }
        }
        if kept.len() > 1 {
            conflicts.push(Conflict {
                individual,
                labels: kept,
            });
        }
    }
    (conflicts, retracted)
}
