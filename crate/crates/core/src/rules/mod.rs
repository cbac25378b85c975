//! SWRL-subset rules: parser, built-in registry and forward-chaining engine.

mod ast;
mod builtins;
mod engine;
mod families;
mod parser;

use thiserror::Error;

use crate::kb::Name;

pub use ast::{Atom, Rule, Term};
pub use builtins::{
    register_comparisons, BuiltInError, BuiltInEval, BuiltInKind, BuiltInRegistry, BuiltInSpec,
    GeneratorFn, PredicateFn, Relation,
};
pub use engine::{
    match_antecedent, run_fixpoint, run_fixpoint_with, AnnotationReport, Binding, Conflict,
    EvalContext, Ground,
};
pub use families::{
    assert_box_facts, box_of, detect_into_kb, register_processing, register_topology, standard_registry,
    BuiltInParams, DetectionKind, PROCESSING_HORIZONTAL, PROCESSING_VERTICAL,
};
pub use parser::{parse_rule, parse_ruleset};

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("line {line}, column {column}: expected {expected}, found {found}")]
    Syntax {
        line: usize,
        column: usize,
        expected: String,
        found: String,
    },
    #[error("rule {label:?}: consequent variable ?{variable} is not bound by the antecedent")]
    Safety { label: String, variable: String },
    #[error("{name} takes {expected} argument(s), found {found}")]
    Arity {
        name: Name,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<RuleError>,
    },
    #[error("built-in {0} is already registered")]
    DuplicateBuiltIn(Name),
    #[error("rule {rule}: {builtin} reached with unbound ?{variable}")]
    UnboundBuiltInArg {
        rule: String,
        builtin: Name,
        variable: String,
    },
    #[error("rule {rule}: {source}")]
    BuiltIn {
        rule: String,
        #[source]
        source: BuiltInError,
    },
    #[error("rule {rule}: cannot assert {atom}: {detail}")]
    InvalidConsequent {
        rule: String,
        atom: String,
        detail: String,
    },
}
