//! In-memory knowledge base: class taxonomy, individuals and property
//! assertions, with subclass-closure queries and a line-based dump format.
//!
//! Dump format, one fact per line:
//!
//! ```text
//! declare <Class>                  class without a parent
//! objprop <property>               declared object property
//! subclass <Child> <Parent>
//! class <individual> <Class>
//! obj <subject> <property> <object>
//! data <subject> <property> <value>
//! ```
//!
//! Numbers are written with at most six decimals, text values double-quoted.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KbError {
    #[error("invalid name {0:?}")]
    InvalidName(String),
    #[error("declaring {child} under {parent} would create a subclass cycle")]
    Cycle { child: Name, parent: Name },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Optional `prefix:` plus a local identifier; never empty, never contains whitespace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(String);

impl Name {
    pub fn new(s: impl Into<String>) -> Result<Self, KbError> {
        let s = s.into();
        let ok = !s.is_empty()
            && !s.chars().any(|c| c.is_whitespace() || c == '"')
            && !s.starts_with(':')
            && !s.ends_with(':');
        if ok {
            Ok(Self(s))
        } else {
            Err(KbError::InvalidName(s))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn prefix(&self) -> Option<&str> {
        self.0.rsplit_once(':').map(|(p, _)| p)
    }

    pub fn local(&self) -> &str {
        self.0.rsplit_once(':').map_or(&self.0, |(_, l)| l)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Name {
    type Err = KbError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Name::new(s)
    }
}

impl AsRef<str> for Name {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Data property value. Numbers are kept at micrometre resolution so the
/// dump format round-trips exactly.
#[derive(Debug, Clone)]
pub enum Value {
    Num(f64),
    Text(String),
}

pub fn quantize(v: f64) -> f64 {
    let q = (v * 1e6).round() / 1e6;
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

/// Formats a number with at most six decimals and no trailing zeros.
pub fn format_number(v: f64) -> String {
    let s = format!("{:.6}", quantize(v));
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

impl Value {
    pub fn num(v: f64) -> Self {
        Value::Num(quantize(v))
    }

    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Num(v) => Some(*v),
            Value::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            Value::Num(_) => None,
        }
    }

    fn normalized(self) -> Self {
        match self {
            Value::Num(v) => Value::num(v),
            t => t,
        }
    }

    /// Parses `"quoted text"` or a decimal number.
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix('"') {
            let body = rest
                .strip_suffix('"')
                .ok_or_else(|| format!("unterminated text value {s:?}"))?;
            return unescape(body).map(Value::Text);
        }
        let v: f64 = s.parse().map_err(|_| format!("invalid value {s:?}"))?;
        if !v.is_finite() {
            return Err(format!("non-finite value {s:?}"));
        }
        Ok(Value::num(v))
    }
}

pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn unescape(body: &str) -> Result<String, String> {
    let mut out = String::with_capacity(body.len());
    let mut chars = body.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some('"') => out.push('"'),
                Some('\\') => out.push('\\'),
                Some('n') => out.push('\n'),
                other => return Err(format!("bad escape \\{}", other.map_or(String::new(), String::from))),
            },
            '"' => return Err("unescaped quote inside text".into()),
            c => out.push(c),
        }
    }
    Ok(out)
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(v) => f.write_str(&format_number(*v)),
            Value::Text(s) => f.write_str(&quote(s)),
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Value::Num(a), Value::Num(b)) => a.total_cmp(b),
            (Value::Num(_), Value::Text(_)) => Less,
            (Value::Text(_), Value::Num(_)) => Greater,
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
        }
    }
}

type Index2<V> = BTreeMap<Name, BTreeMap<Name, BTreeSet<V>>>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KnowledgeBase {
    classes: BTreeSet<Name>,
    parents: BTreeMap<Name, BTreeSet<Name>>,
    children: BTreeMap<Name, BTreeSet<Name>>,
    object_properties: BTreeSet<Name>,
    /// class -> explicit members
    members: BTreeMap<Name, BTreeSet<Name>>,
    /// individual -> explicit classes
    types: BTreeMap<Name, BTreeSet<Name>>,
    /// property -> subject -> objects
    objects: Index2<Name>,
    /// property -> subject -> values
    data: Index2<Value>,
    facts: usize,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares `name`, optionally under `parent`. Fails without side effects
    /// if the edge would close a cycle.
    pub fn declare_class(&mut self, name: &Name, parent: Option<&Name>) -> Result<(), KbError> {
        if let Some(p) = parent {
            if p == name || self.ancestors(p).contains(name) {
                return Err(KbError::Cycle {
                    child: name.clone(),
                    parent: p.clone(),
                });
            }
            self.classes.insert(p.clone());
            self.parents.entry(name.clone()).or_default().insert(p.clone());
            self.children.entry(p.clone()).or_default().insert(name.clone());
        }
        self.classes.insert(name.clone());
        Ok(())
    }

    pub fn declare_object_property(&mut self, prop: &Name) {
        self.object_properties.insert(prop.clone());
    }

    pub fn has_class(&self, name: &Name) -> bool {
        self.classes.contains(name)
    }

    pub fn classes(&self) -> impl Iterator<Item = &Name> {
        self.classes.iter()
    }

    pub fn object_properties(&self) -> impl Iterator<Item = &Name> {
        self.object_properties.iter()
    }

    pub fn direct_parents(&self, class: &Name) -> impl Iterator<Item = &Name> {
        self.parents.get(class).into_iter().flatten()
    }

    pub fn direct_children(&self, class: &Name) -> impl Iterator<Item = &Name> {
        self.children.get(class).into_iter().flatten()
    }

    /// Strict ancestors.
    pub fn ancestors(&self, class: &Name) -> BTreeSet<Name> {
        Self::closure(&self.parents, class)
    }

    /// Strict descendants.
    pub fn descendants(&self, class: &Name) -> BTreeSet<Name> {
        Self::closure(&self.children, class)
    }

    fn closure(edges: &BTreeMap<Name, BTreeSet<Name>>, start: &Name) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(c) = stack.pop() {
            for n in edges.get(c).into_iter().flatten() {
                if out.insert(n.clone()) {
                    stack.push(n);
                }
            }
        }
        out
    }

    /// Reflexive subclass test.
    pub fn is_subclass_of(&self, class: &Name, ancestor: &Name) -> bool {
        class == ancestor || self.ancestors(class).contains(ancestor)
    }

    pub fn fact_count(&self) -> usize {
        self.facts
    }

    pub fn assert_class(&mut self, individual: &Name, class: &Name) -> bool {
        self.classes.insert(class.clone());
        let added = self
            .members
            .entry(class.clone())
            .or_default()
            .insert(individual.clone());
        if added {
            self.types
                .entry(individual.clone())
                .or_default()
                .insert(class.clone());
            self.facts += 1;
        }
        added
    }

    pub fn retract_class(&mut self, individual: &Name, class: &Name) -> bool {
        let removed = self
            .members
            .get_mut(class)
            .is_some_and(|m| m.remove(individual));
        if removed {
            if let Some(t) = self.types.get_mut(individual) {
                t.remove(class);
                if t.is_empty() {
                    self.types.remove(individual);
                }
            }
            if self.members.get(class).is_some_and(BTreeSet::is_empty) {
                self.members.remove(class);
            }
            self.facts -= 1;
        }
        removed
    }

    pub fn assert_object(&mut self, subject: &Name, prop: &Name, object: &Name) -> bool {
        let added = self
            .objects
            .entry(prop.clone())
            .or_default()
            .entry(subject.clone())
            .or_default()
            .insert(object.clone());
        self.facts += usize::from(added);
        added
    }

    pub fn assert_data(&mut self, subject: &Name, prop: &Name, value: Value) -> bool {
        let added = self
            .data
            .entry(prop.clone())
            .or_default()
            .entry(subject.clone())
            .or_default()
            .insert(value.normalized());
        self.facts += usize::from(added);
        added
    }

    /// Members of `class` and of all its transitive subclasses, sorted.
    pub fn individuals_of(&self, class: &Name) -> Vec<Name> {
        let mut out: BTreeSet<&Name> = BTreeSet::new();
        let mut classes = self.descendants(class);
        classes.insert(class.clone());
        for c in &classes {
            out.extend(self.members.get(c).into_iter().flatten());
        }
        out.into_iter().cloned().collect()
    }

    pub fn is_instance(&self, individual: &Name, class: &Name) -> bool {
        self.classes_of(individual)
            .any(|c| self.is_subclass_of(c, class))
    }

    /// Explicitly asserted classes of an individual.
    pub fn classes_of(&self, individual: &Name) -> impl Iterator<Item = &Name> {
        self.types.get(individual).into_iter().flatten()
    }

    pub fn values_of(&self, individual: &Name, prop: &Name) -> Vec<Value> {
        self.data
            .get(prop)
            .and_then(|m| m.get(individual))
            .map(|s| s.iter().cloned().collect())
            .unwrap_or_default()
    }

    /// First numeric value of a data property, if any.
    pub fn number_of(&self, individual: &Name, prop: &Name) -> Option<f64> {
        self.data
            .get(prop)?
            .get(individual)?
            .iter()
            .find_map(Value::as_f64)
    }

    pub fn objects_of(&self, subject: &Name, prop: &Name) -> Vec<Name> {
        self.objects
            .get(prop)
            .and_then(|m| m.get(subject))
            .map(|s| s.iter().cloned().collect())
            .unwrap_or_default()
    }

    pub fn has_object(&self, subject: &Name, prop: &Name, object: &Name) -> bool {
        self.objects
            .get(prop)
            .and_then(|m| m.get(subject))
            .is_some_and(|s| s.contains(object))
    }

    pub fn has_data(&self, subject: &Name, prop: &Name, value: &Value) -> bool {
        self.data
            .get(prop)
            .and_then(|m| m.get(subject))
            .is_some_and(|s| s.contains(value))
    }

    /// All `(subject, object)` pairs of an object property, sorted.
    pub fn object_pairs<'a>(&'a self, prop: &Name) -> impl Iterator<Item = (&'a Name, &'a Name)> + 'a {
        self.objects
            .get(prop)
            .into_iter()
            .flat_map(|m| m.iter().flat_map(|(s, os)| os.iter().map(move |o| (s, o))))
    }

    /// All `(subject, value)` pairs of a data property, sorted.
    pub fn data_pairs<'a>(&'a self, prop: &Name) -> impl Iterator<Item = (&'a Name, &'a Value)> + 'a {
        self.data
            .get(prop)
            .into_iter()
            .flat_map(|m| m.iter().flat_map(|(s, vs)| vs.iter().map(move |v| (s, v))))
    }

    /// Every individual that appears in a class or property assertion.
    pub fn individuals(&self) -> BTreeSet<Name> {
        let mut out: BTreeSet<Name> = self.types.keys().cloned().collect();
        for m in self.objects.values() {
            for (s, os) in m {
                out.insert(s.clone());
                out.extend(os.iter().cloned());
            }
        }
        for m in self.data.values() {
            out.extend(m.keys().cloned());
        }
        out
    }

    pub fn dump(&self) -> String {
        let mut sections: [Vec<String>; 6] = Default::default();
        for c in &self.classes {
            if !self.parents.contains_key(c) {
                sections[0].push(format!("declare {c}"));
            }
        }
        for p in &self.object_properties {
            sections[1].push(format!("objprop {p}"));
        }
        for (c, ps) in &self.parents {
            for p in ps {
                sections[2].push(format!("subclass {c} {p}"));
            }
        }
        for (i, cs) in &self.types {
            for c in cs {
                sections[3].push(format!("class {i} {c}"));
            }
        }
        for (p, m) in &self.objects {
            for (s, os) in m {
                for o in os {
                    sections[4].push(format!("obj {s} {p} {o}"));
                }
            }
        }
        for (p, m) in &self.data {
            for (s, vs) in m {
                for v in vs {
                    sections[5].push(format!("data {s} {p} {v}"));
                }
            }
        }
        let mut out = String::new();
        for mut lines in sections {
            lines.sort();
            for l in lines {
                out.push_str(&l);
                out.push('\n');
            }
        }
        out
    }

    pub fn load(text: &str) -> Result<Self, KbError> {
        let mut kb = KnowledgeBase::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| KbError::Parse {
                line: i + 1,
                message,
            };
            let (kind, rest) = split_token(line);
            let name = |s: &str| Name::new(s).map_err(|e| err(e.to_string()));
            let fields = |n: usize| -> Result<Vec<&str>, KbError> {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() == n {
                    Ok(f)
                } else {
                    Err(err(format!("{kind} expects {n} fields, found {}", f.len())))
                }
            };
            match kind {
                "declare" => {
                    let f = fields(1)?;
                    kb.declare_class(&name(f[0])?, None)
                        .map_err(|e| err(e.to_string()))?;
                }
                "objprop" => {
                    let f = fields(1)?;
                    kb.declare_object_property(&name(f[0])?);
                }
                "subclass" => {
                    let f = fields(2)?;
                    kb.declare_class(&name(f[0])?, Some(&name(f[1])?))
                        .map_err(|e| err(e.to_string()))?;
                }
                "class" => {
                    let f = fields(2)?;
                    kb.assert_class(&name(f[0])?, &name(f[1])?);
                }
                "obj" => {
                    let f = fields(3)?;
                    kb.assert_object(&name(f[0])?, &name(f[1])?, &name(f[2])?);
                }
                "data" => {
                    let (s, rest) = split_token(rest);
                    let (p, value) = split_token(rest);
                    if s.is_empty() || p.is_empty() || value.is_empty() {
                        return Err(err("data expects subject, property and value".into()));
                    }
                    let v = Value::parse(value).map_err(err)?;
                    kb.assert_data(&name(s)?, &name(p)?, v);
                }
                other => return Err(err(format!("unknown line kind {other:?}"))),
            }
        }
        Ok(kb)
    }
}

fn split_token(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], s[i..].trim()),
        None => (s, ""),
    }
}
