//! Deutsche Bahn domain pack: taxonomy, rule pack, annotation pipeline,
//! synthetic scenes and scoring.

mod eval;
mod pipeline;
mod ranges;
mod scene;
mod schema;

use thiserror::Error;

use crate::kb::KbError;
use crate::pointcloud::PointCloudError;
use crate::rules::RuleError;

pub use eval::{evaluate, ClassScore, EvalResult, Match, MATCH_RADIUS};
pub use pipeline::{
    annotate_scene, annotate_scene_observed, leaf_labels, resolve_conflicts,
    resolve_conflicts_with, rule_pack, ruleset_text, PipelineParams, SCENE_INDIVIDUAL,
};
pub use ranges::{ClassRanges, GeometricRanges, Interval, RangeParams};
pub use scene::{
    generate_scene, write_scene, xyz_text, ObjectKind, SceneObject, SceneSpec, BIG_MAST_HEIGHT,
    MAST_RADIUS, NORMAL_MAST_HEIGHT, SIGNAL_CABINET, SIGNAL_HEIGHT,
};
pub use schema::{install_schema, leaf_classes, taxonomy_text, LEAF_CLASSES, OBJECT_PROPERTIES, TAXONOMY};

#[derive(Debug, Error)]
pub enum RailwayError {
    #[error(transparent)]
    PointCloud(#[from] PointCloudError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("schema conflict: {0}")]
    SchemaConflict(String),
    #[error("scene spec: {message}")]
    Spec { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
