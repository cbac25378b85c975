use std::fmt;

use crate::kb::{quote, Name};

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Variable(String),
    Individual(Name),
    Number(f64),
    Text(String),
}

impl Term {
    pub fn variable(&self) -> Option<&str> {
        match self {
            Term::Variable(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Variable(v) => write!(f, "?{v}"),
            Term::Individual(n) => write!(f, "{n}"),
            Term::Number(x) => write!(f, "{x}"),
            Term::Text(s) => f.write_str(&quote(s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    Class { class: Name, arg: Term },
    Property { prop: Name, subject: Term, object: Term },
    BuiltIn { name: Name, args: Vec<Term> },
}

impl Atom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Class { arg, .. } => vec![arg],
            Atom::Property { subject, object, .. } => vec![subject, object],
            Atom::BuiltIn { args, .. } => args.iter().collect(),
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.terms().into_iter().filter_map(Term::variable)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Class { class, arg } => write!(f, "{class}({arg})"),
            Atom::Property {
                prop,
                subject,
                object,
            } => write!(f, "{prop}({subject}, {object})"),
            Atom::BuiltIn { name, args } => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub label: String,
    pub antecedent: Vec<Atom>,
    pub consequent: Vec<Atom>,
}

impl Rule {
    /// Antecedent and consequent equal, label ignored.
    pub fn same_body(&self, other: &Rule) -> bool {
        self.antecedent == other.antecedent && self.consequent == other.consequent
    }

    /// `label: body`, the ruleset line form.
    pub fn to_line(&self) -> String {
        if self.label.is_empty() {
            self.to_string()
        } else {
            format!("{}: {self}", self.label)
        }
    }
}

fn join(f: &mut fmt::Formatter<'_>, atoms: &[Atom]) -> fmt::Result {
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            f.write_str(" ^ ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

/// Canonical text; ASCII arrow, built-ins under their canonical names.
impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        join(f, &self.antecedent)?;
        f.write_str(" -> ")?;
        join(f, &self.consequent)
    }
}
