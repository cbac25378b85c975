use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::engine::Ground;
use super::RuleError;
use crate::kb::{format_number, KnowledgeBase, Name};

#[derive(Debug, Error, PartialEq)]
pub enum BuiltInError {
    #[error("{builtin}: type mismatch: {detail}")]
    TypeMismatch { builtin: Name, detail: String },
    #[error("{0} has no resolvable geometry")]
    NoGeometry(Name),
    #[error("{builtin}: {detail}")]
    Failed { builtin: Name, detail: String },
}

pub type PredicateFn =
    Arc<dyn Fn(&Name, &[Ground], &KnowledgeBase) -> Result<bool, BuiltInError> + Send + Sync>;
/// Receives the bound input arguments (all but the first) and returns the
/// values produced for the first argument. May assert facts.
pub type GeneratorFn = Arc<
    dyn Fn(&Name, &[Ground], &mut KnowledgeBase) -> Result<Vec<Ground>, BuiltInError>
        + Send
        + Sync,
>;

#[derive(Clone)]
pub enum BuiltInEval {
    Predicate(PredicateFn),
    Generator(GeneratorFn),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltInKind {
    Predicate,
    Generator,
}

/// How a built-in atom written in a consequent is stored.
#[derive(Debug, Clone, PartialEq)]
pub enum Relation {
    /// Binary built-in stored under a fixed object property.
    Named(Name),
    /// Ternary `(x, y, d)` built-in stored as `<stem>_<d>(x, y)`; `d` must be a literal.
    Parametric(String),
}

impl Relation {
    pub fn property_for(&self, param: Option<f64>) -> Option<Name> {
        match (self, param) {
            (Relation::Named(n), None) => Some(n.clone()),
            (Relation::Parametric(stem), Some(d)) => {
                Name::new(format!("{stem}_{}", format_number(d))).ok()
            }
            _ => None,
        }
    }
}

#[derive(Clone)]
pub struct BuiltInSpec {
    pub name: Name,
    pub arity: usize,
    pub aliases: Vec<Name>,
    pub eval: BuiltInEval,
    pub relation: Option<Relation>,
}

impl BuiltInSpec {
    pub fn predicate(
        name: &str,
        arity: usize,
        f: impl Fn(&Name, &[Ground], &KnowledgeBase) -> Result<bool, BuiltInError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: Name::new(name).expect("valid built-in name"),
            arity,
            aliases: Vec::new(),
            eval: BuiltInEval::Predicate(Arc::new(f)),
            relation: None,
        }
    }

    pub fn generator(
        name: &str,
        arity: usize,
        f: impl Fn(&Name, &[Ground], &mut KnowledgeBase) -> Result<Vec<Ground>, BuiltInError>
            + Send
            + Sync
            + 'static,
    ) -> Self {
        Self {
            name: Name::new(name).expect("valid built-in name"),
            arity,
            aliases: Vec::new(),
            eval: BuiltInEval::Generator(Arc::new(f)),
            relation: None,
        }
    }

    pub fn alias(mut self, alias: &str) -> Self {
        self.aliases.push(Name::new(alias).expect("valid alias"));
        self
    }

    pub fn stored_as(mut self, relation: Relation) -> Self {
        self.relation = Some(relation);
        self
    }

    pub fn kind(&self) -> BuiltInKind {
        match self.eval {
            BuiltInEval::Predicate(_) => BuiltInKind::Predicate,
            BuiltInEval::Generator(_) => BuiltInKind::Generator,
        }
    }
}

impl fmt::Debug for BuiltInSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BuiltInSpec")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("kind", &self.kind())
            .field("aliases", &self.aliases)
            .field("relation", &self.relation)
            .finish()
    }
}

#[derive(Debug, Clone, Default)]
pub struct BuiltInRegistry {
    entries: BTreeMap<Name, BuiltInSpec>,
    /// alias or canonical name -> canonical name
    names: BTreeMap<Name, Name>,
}

impl BuiltInRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding the `swrlb:` comparison built-ins.
    pub fn with_comparisons() -> Self {
        let mut r = Self::new();
        register_comparisons(&mut r);
        r
    }

    pub fn register(&mut self, spec: BuiltInSpec) -> Result<(), RuleError> {
        let all: Vec<&Name> = std::iter::once(&spec.name).chain(&spec.aliases).collect();
        if let Some(taken) = all.iter().find(|n| self.names.contains_key(**n)) {
            return Err(RuleError::DuplicateBuiltIn((*taken).clone()));
        }
        for n in all {
            self.names.insert(n.clone(), spec.name.clone());
        }
        self.entries.insert(spec.name.clone(), spec);
        Ok(())
    }

    /// Canonical spec for a canonical name or alias.
    pub fn resolve(&self, name: &Name) -> Option<&BuiltInSpec> {
        self.names.get(name).and_then(|c| self.entries.get(c))
    }

    pub fn get(&self, canonical: &Name) -> Option<&BuiltInSpec> {
        self.entries.get(canonical)
    }

    /// Whether `prefix` is the namespace of some registered name or alias.
    pub fn is_builtin_namespace(&self, prefix: &str) -> bool {
        self.names.keys().any(|n| n.prefix() == Some(prefix))
    }

    pub fn iter(&self) -> impl Iterator<Item = &BuiltInSpec> {
        self.entries.values()
    }
}

pub(crate) fn number(builtin: &Name, g: &Ground) -> Result<f64, BuiltInError> {
    g.as_f64().ok_or_else(|| BuiltInError::TypeMismatch {
        builtin: builtin.clone(),
        detail: format!("expected a number, got {g}"),
    })
}

fn comparison(name: &'static str, op: fn(f64, f64) -> bool) -> BuiltInSpec {
    BuiltInSpec::predicate(name, 2, move |b, args, _| {
        Ok(op(number(b, &args[0])?, number(b, &args[1])?))
    })
}

pub fn register_comparisons(r: &mut BuiltInRegistry) {
    let specs = [
        comparison("swrlb:greaterThan", |a, b| a > b).alias("swrlb:moreThan"),
        comparison("swrlb:lessThan", |a, b| a < b),
        comparison("swrlb:greaterThanOrEqual", |a, b| a >= b),
        comparison("swrlb:lessThanOrEqual", |a, b| a <= b),
        comparison("swrlb:equal", |a, b| a == b),
    ];
    for s in specs {
        r.register(s).expect("comparison names are unique");
    }
}
