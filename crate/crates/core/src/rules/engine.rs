use std::collections::BTreeMap;
use std::fmt;

use super::ast::{Atom, Rule, Term};
use super::builtins::{BuiltInEval, BuiltInRegistry};
use super::RuleError;
use crate::kb::{KnowledgeBase, Name, Value};

/// A value a variable can be bound to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Ground {
    Individual(Name),
    Literal(Value),
}

impl Ground {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Ground::Literal(v) => v.as_f64(),
            Ground::Individual(_) => None,
        }
    }

    pub fn as_individual(&self) -> Option<&Name> {
        match self {
            Ground::Individual(n) => Some(n),
            Ground::Literal(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Ground::Literal(v) => v.as_text(),
            Ground::Individual(_) => None,
        }
    }
}

impl fmt::Display for Ground {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ground::Individual(n) => write!(f, "{n}"),
            Ground::Literal(v) => write!(f, "{v}"),
        }
    }
}

pub type Binding = BTreeMap<String, Ground>;

/// Memo table for generator built-ins, keyed by name and input arguments.
#[derive(Debug, Default, Clone)]
pub struct EvalContext {
    memo: BTreeMap<(Name, Vec<Ground>), Vec<Ground>>,
}

impl EvalContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn memoized(&self) -> usize {
        self.memo.len()
    }
}

/// Individual holding more than one leaf label after annotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub individual: Name,
    pub labels: Vec<Name>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnotationReport {
    /// Number of passes, including the final one that added nothing.
    pub iterations: usize,
    /// Net growth of the fact set.
    pub facts_added: usize,
    pub facts_per_pass: Vec<usize>,
    /// Per rule label, the number of bindings that added at least one fact.
    pub rule_firings: Vec<(String, usize)>,
    pub conflicts: Vec<Conflict>,
    /// Labels withdrawn while resolving conflicts after the fixpoint.
    pub retracted: usize,
}

fn ground_term(t: &Term, b: &Binding) -> Option<Ground> {
    match t {
        Term::Variable(v) => b.get(v).cloned(),
        Term::Individual(n) => Some(Ground::Individual(n.clone())),
        Term::Number(x) => Some(Ground::Literal(Value::num(*x))),
        Term::Text(s) => Some(Ground::Literal(Value::text(s.clone()))),
    }
}

/// Binds `t` to `g` in `b`, or checks consistency if already bound.
fn unify(t: &Term, g: &Ground, b: &Binding) -> Option<Binding> {
    match t {
        Term::Variable(v) => match b.get(v) {
            Some(existing) => (existing == g).then(|| b.clone()),
            None => {
                let mut nb = b.clone();
                nb.insert(v.clone(), g.clone());
                Some(nb)
            }
        },
        other => (ground_term(other, b).as_ref() == Some(g)).then(|| b.clone()),
    }
}

fn match_class(kb: &KnowledgeBase, class: &Name, arg: &Term, b: &Binding) -> Vec<Binding> {
    match ground_term(arg, b) {
        Some(Ground::Individual(i)) => {
            if kb.is_instance(&i, class) {
                vec![b.clone()]
            } else {
                vec![]
            }
        }
        Some(Ground::Literal(_)) => vec![],
        None => kb
            .individuals_of(class)
            .into_iter()
            .filter_map(|i| unify(arg, &Ground::Individual(i), b))
            .collect(),
    }
}

fn match_property(
    kb: &KnowledgeBase,
    prop: &Name,
    subject: &Term,
    object: &Term,
    b: &Binding,
) -> Vec<Binding> {
    let mut out = Vec::new();
    match ground_term(subject, b) {
        Some(Ground::Individual(s)) => {
            let objects = kb.objects_of(&s, prop).into_iter().map(Ground::Individual);
            let values = kb.values_of(&s, prop).into_iter().map(Ground::Literal);
            out.extend(objects.chain(values).filter_map(|o| unify(object, &o, b)));
        }
        Some(Ground::Literal(_)) => {}
        None => {
            let pairs = kb
                .object_pairs(prop)
                .map(|(s, o)| (s.clone(), Ground::Individual(o.clone())))
                .chain(
                    kb.data_pairs(prop)
                        .map(|(s, v)| (s.clone(), Ground::Literal(v.clone()))),
                );
            for (s, o) in pairs {
                if let Some(nb) = unify(subject, &Ground::Individual(s), b) {
                    out.extend(unify(object, &o, &nb));
                }
            }
        }
    }
    out
}

/// Evaluates the antecedent left to right. Generator built-ins may assert
/// facts, which is why the KB is taken mutably.
pub fn match_antecedent(
    kb: &mut KnowledgeBase,
    rule: &Rule,
    registry: &BuiltInRegistry,
    ctx: &mut EvalContext,
) -> Result<Vec<Binding>, RuleError> {
    let mut bindings = vec![Binding::new()];
    for atom in &rule.antecedent {
        if bindings.is_empty() {
            break;
        }
        let mut next = Vec::new();
        match atom {
            Atom::Class { class, arg } => {
                for b in &bindings {
                    next.extend(match_class(kb, class, arg, b));
                }
            }
            Atom::Property {
                prop,
                subject,
                object,
            } => {
                for b in &bindings {
                    next.extend(match_property(kb, prop, subject, object, b));
                }
            }
            Atom::BuiltIn { name, args } => {
                let spec = registry.get(name).ok_or_else(|| RuleError::InvalidConsequent {
                    rule: rule.label.clone(),
                    atom: atom.to_string(),
                    detail: "built-in is not registered".into(),
                })?;
                let unbound = |t: &Term| RuleError::UnboundBuiltInArg {
                    rule: rule.label.clone(),
                    builtin: name.clone(),
                    variable: t.variable().unwrap_or_default().to_string(),
                };
                let wrap = |e| RuleError::BuiltIn {
                    rule: rule.label.clone(),
                    source: e,
                };
                for b in &bindings {
                    match &spec.eval {
                        BuiltInEval::Predicate(f) => {
                            let ground = args
                                .iter()
                                .map(|t| ground_term(t, b).ok_or_else(|| unbound(t)))
                                .collect::<Result<Vec<_>, _>>()?;
                            if f(name, &ground, kb).map_err(wrap)? {
                                next.push(b.clone());
                            }
                        }
                        BuiltInEval::Generator(f) => {
                            let inputs = args[1..]
                                .iter()
                                .map(|t| ground_term(t, b).ok_or_else(|| unbound(t)))
                                .collect::<Result<Vec<_>, _>>()?;
                            let key = (name.clone(), inputs);
                            let outputs = match ctx.memo.get(&key) {
                                Some(o) => o.clone(),
                                None => {
                                    let o = f(name, &key.1, kb).map_err(wrap)?;
                                    ctx.memo.insert(key, o.clone());
                                    o
                                }
                            };
                            next.extend(outputs.iter().filter_map(|g| unify(&args[0], g, b)));
                        }
                    }
                }
            }
        }
        bindings = next;
    }
    bindings.sort();
    bindings.dedup();
    Ok(bindings)
}

fn invalid(rule: &Rule, atom: &Atom, detail: &str) -> RuleError {
    RuleError::InvalidConsequent {
        rule: rule.label.clone(),
        atom: atom.to_string(),
        detail: detail.to_string(),
    }
}

fn individual(rule: &Rule, atom: &Atom, t: &Term, b: &Binding) -> Result<Name, RuleError> {
    match ground_term(t, b) {
        Some(Ground::Individual(n)) => Ok(n),
        Some(Ground::Literal(v)) => Err(invalid(rule, atom, &format!("{v} is not an individual"))),
        None => Err(invalid(rule, atom, &format!("{t} is unbound"))),
    }
}

/// Asserts the consequent under `b`; returns the number of new facts.
fn instantiate(kb: &mut KnowledgeBase, rule: &Rule, b: &Binding) -> Result<usize, RuleError> {
    let mut added = 0;
    for atom in &rule.consequent {
        let new = match atom {
            Atom::Class { class, arg } => {
                let i = individual(rule, atom, arg, b)?;
                kb.assert_class(&i, class)
            }
            Atom::Property {
                prop,
                subject,
                object,
            } => {
                let s = individual(rule, atom, subject, b)?;
                match ground_term(object, b) {
                    Some(Ground::Individual(o)) => kb.assert_object(&s, prop, &o),
                    Some(Ground::Literal(v)) => kb.assert_data(&s, prop, v),
                    None => return Err(invalid(rule, atom, &format!("{object} is unbound"))),
                }
            }
            Atom::BuiltIn { .. } => return Err(invalid(rule, atom, "built-in in consequent")),
        };
        added += usize::from(new);
    }
    Ok(added)
}

/// Runs passes over `rules` in order until one adds nothing.
pub fn run_fixpoint(
    kb: &mut KnowledgeBase,
    rules: &[Rule],
    registry: &BuiltInRegistry,
) -> Result<AnnotationReport, RuleError> {
    run_fixpoint_with(kb, rules, registry, &mut EvalContext::new(), |_, _| {})
}

/// As [`run_fixpoint`] with an explicit memo table; `after_pass` sees the KB
/// after each pass together with the 1-based pass number.
pub fn run_fixpoint_with(
    kb: &mut KnowledgeBase,
    rules: &[Rule],
    registry: &BuiltInRegistry,
    ctx: &mut EvalContext,
    mut after_pass: impl FnMut(usize, &KnowledgeBase),
) -> Result<AnnotationReport, RuleError> {
    let start = kb.fact_count();
    let mut report = AnnotationReport {
        rule_firings: rules.iter().map(|r| (r.label.clone(), 0)).collect(),
        ..Default::default()
    };
    loop {
        let before = kb.fact_count();
        for (i, rule) in rules.iter().enumerate() {
            for b in match_antecedent(kb, rule, registry, ctx)? {
                if instantiate(kb, rule, &b)? > 0 {
                    report.rule_firings[i].1 += 1;
                }
            }
        }
        let added = kb.fact_count() - before;
        report.iterations += 1;
        report.facts_per_pass.push(added);
        after_pass(report.iterations, kb);
        if added == 0 {
            break;
        }
    }
    report.facts_added = kb.fact_count() - start;
    Ok(report)
}
