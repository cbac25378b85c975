//! Rule text grammar:
//!
//! ```text
//! ruleset := { line } ; line := comment | blank | [label ":"] rule
//! rule    := atoms ("→" | "->") atoms ; atoms := atom { "^" atom }
//! atom    := name "(" term { "," term } ")"
//! term    := "?" ident | number | quoted-text | name
//! name    := [prefix ":"] ident
//! ```
//!
//! A ruleset label must be followed by whitespace after its colon, which
//! keeps it apart from a prefixed name such as `swrlb:lessThan`.

use std::collections::BTreeSet;

use super::ast::{Atom, Rule, Term};
use super::builtins::{BuiltInKind, BuiltInRegistry};
use super::RuleError;
use crate::kb::{unescape, Name};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    Caret,
    Arrow,
    Var(String),
    Text(String),
    Word(String),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Caret => "'^'".into(),
            Tok::Arrow => "arrow".into(),
            Tok::Var(v) => format!("variable ?{v}"),
            Tok::Text(_) => "quoted text".into(),
            Tok::Word(w) => format!("{w:?}"),
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | ':' | '-' | '+')
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn syntax(pos: usize, expected: &str, found: &str) -> RuleError {
    RuleError::Syntax {
        line: 1,
        column: pos + 1,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

/// Tokens with their character offsets.
fn lex(text: &str) -> Result<Vec<(usize, Tok)>, RuleError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => {
                out.push((start, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((start, Tok::RParen));
                i += 1;
            }
            ',' => {
                out.push((start, Tok::Comma));
                i += 1;
            }
            '^' => {
                out.push((start, Tok::Caret));
                i += 1;
            }
            '→' => {
                out.push((start, Tok::Arrow));
                i += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((start, Tok::Arrow));
                i += 2;
            }
            '?' => {
                i += 1;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                if i == start + 1 {
                    return Err(syntax(start, "variable name after '?'", "nothing"));
                }
                out.push((start, Tok::Var(chars[start + 1..i].iter().collect())));
            }
            '"' => {
                i += 1;
                let mut body = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(syntax(start, "closing '\"'", "end of input")),
                        Some('\\') => {
                            body.push('\\');
                            if let Some(&n) = chars.get(i + 1) {
                                body.push(n);
                            }
                            i += 2;
                        }
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some(&ch) => {
                            body.push(ch);
                            i += 1;
                        }
                    }
                }
                let text = unescape(&body).map_err(|e| syntax(start, "valid text escape", &e))?;
                out.push((start, Tok::Text(text)));
            }
            c if is_word_char(c) => {
                while i < chars.len()
                    && is_word_char(chars[i])
                    && !(chars[i] == '-' && chars.get(i + 1) == Some(&'>'))
                {
                    i += 1;
                }
                out.push((start, Tok::Word(chars[start..i].iter().collect())));
            }
            other => return Err(syntax(start, "atom, term or operator", &other.to_string())),
        }
    }
    Ok(out)
}

/// Words opening with a sign or dot must be numbers; words opening with a
/// digit are numbers when they parse as one (`3D_swrlb_Topology:Upper` is a name).
fn looks_numeric(w: &str) -> bool {
    w.starts_with(|c: char| matches!(c, '+' | '-' | '.'))
        || (w.starts_with(|c: char| c.is_ascii_digit()) && w.parse::<f64>().is_ok())
}

fn word_to_name(pos: usize, w: &str) -> Result<Name, RuleError> {
    let valid_ident = |s: &str| {
        s.starts_with(|c: char| c.is_alphanumeric() || c == '_')
            && s.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '-'))
    };
    let ok = match w.rsplit_once(':') {
        Some((prefix, local)) => valid_ident(local) && prefix.split(':').all(valid_ident),
        None => valid_ident(w),
    };
    if !ok {
        return Err(syntax(pos, "name", w));
    }
    Name::new(w).map_err(|_| syntax(pos, "name", w))
}

struct Parser<'r> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    registry: &'r BuiltInRegistry,
}

impl<'r> Parser<'r> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn found(&self) -> String {
        self.peek().map_or("end of input".into(), Tok::describe)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), RuleError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(syntax(self.offset(), what, &self.found()))
        }
    }

    fn term(&mut self) -> Result<Term, RuleError> {
        let at = self.offset();
        let t = match self.peek().cloned() {
            Some(Tok::Var(v)) => Term::Variable(v),
            Some(Tok::Text(s)) => Term::Text(s),
            Some(Tok::Word(w)) if looks_numeric(&w) => match w.parse::<f64>() {
                Ok(v) if v.is_finite() => Term::Number(v),
                _ => return Err(syntax(at, "number", &w)),
            },
            Some(Tok::Word(w)) => Term::Individual(word_to_name(at, &w)?),
            _ => return Err(syntax(at, "term", &self.found())),
        };
        self.pos += 1;
        Ok(t)
    }

    fn atom(&mut self, in_consequent: bool) -> Result<Atom, RuleError> {
        let at = self.offset();
        let name = match self.peek().cloned() {
            Some(Tok::Word(w)) if !looks_numeric(&w) => word_to_name(at, &w)?,
            _ => return Err(syntax(at, "atom name", &self.found())),
        };
        self.pos += 1;
        self.expect(Tok::LParen, "'('")?;
        let mut args = vec![self.term()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            args.push(self.term()?);
        }
        self.expect(Tok::RParen, "',' or ')'")?;
        self.classify(at, name, args, in_consequent)
    }

    fn classify(
        &self,
        at: usize,
        name: Name,
        mut args: Vec<Term>,
        in_consequent: bool,
    ) -> Result<Atom, RuleError> {
        if let Some(spec) = self.registry.resolve(&name) {
            if args.len() != spec.arity {
                return Err(RuleError::Arity {
                    name: spec.name.clone(),
                    expected: spec.arity,
                    found: args.len(),
                });
            }
            if !in_consequent {
                return Ok(Atom::BuiltIn {
                    name: spec.name.clone(),
                    args,
                });
            }
            let not_storable = || {
                syntax(
                    at,
                    "class or property atom in consequent",
                    &format!("built-in {}", spec.name),
                )
            };
            let relation = spec.relation.as_ref().ok_or_else(not_storable)?;
            let param = match args.len() {
                2 => None,
                3 => match args.pop() {
                    Some(Term::Number(d)) => Some(d),
                    _ => return Err(not_storable()),
                },
                _ => return Err(not_storable()),
            };
            let prop = relation.property_for(param).ok_or_else(not_storable)?;
            let object = args.pop().expect("arity checked");
            let subject = args.pop().expect("arity checked");
            return Ok(Atom::Property {
                prop,
                subject,
                object,
            });
        }
        if let Some(prefix) = name.prefix() {
            if self.registry.is_builtin_namespace(prefix) {
                return Err(syntax(at, "registered built-in", name.as_str()));
            }
        }
        match args.len() {
            1 => Ok(Atom::Class {
                class: name,
                arg: args.pop().unwrap(),
            }),
            2 => {
                let object = args.pop().unwrap();
                let subject = args.pop().unwrap();
                Ok(Atom::Property {
                    prop: name,
                    subject,
                    object,
                })
            }
            n => Err(RuleError::Arity {
                name,
                expected: 2,
                found: n,
            }),
        }
    }

    fn atoms(&mut self, in_consequent: bool) -> Result<Vec<Atom>, RuleError> {
        let mut out = vec![self.atom(in_consequent)?];
        while self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            out.push(self.atom(in_consequent)?);
        }
        Ok(out)
    }
}

/// Parses one rule (label left empty) and checks safety.
pub fn parse_rule(text: &str, registry: &BuiltInRegistry) -> Result<Rule, RuleError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
        registry,
    };
    let antecedent = p.atoms(false)?;
    p.expect(Tok::Arrow, "'^' or arrow")?;
    let consequent = p.atoms(true)?;
    if p.peek().is_some() {
        return Err(syntax(p.offset(), "'^' or end of rule", &p.found()));
    }
    let rule = Rule {
        label: String::new(),
        antecedent,
        consequent,
    };
    check_safety(&rule, registry)?;
    Ok(rule)
}

/// Every consequent variable must occur in the antecedent.
fn check_safety(rule: &Rule, registry: &BuiltInRegistry) -> Result<(), RuleError> {
    let bound: BTreeSet<&str> = rule.antecedent.iter().flat_map(Atom::variables).collect();
    for atom in &rule.consequent {
        for v in atom.variables() {
            if !bound.contains(v) {
                return Err(RuleError::Safety {
                    label: rule.label.clone(),
                    variable: v.to_string(),
                });
            }
        }
    }
    // Generators may only produce their first argument.
    for atom in &rule.antecedent {
        if let Atom::BuiltIn { name, args } = atom {
            let gen = registry
                .get(name)
                .is_some_and(|s| s.kind() == BuiltInKind::Generator);
            if gen && args.is_empty() {
                return Err(RuleError::Arity {
                    name: name.clone(),
                    expected: 1,
                    found: 0,
                });
            }
        }
    }
    Ok(())
}

fn split_label(line: &str) -> (Option<&str>, &str) {
    if let Some((head, rest)) = line.split_once(':') {
        let head_t = head.trim();
        let is_label = !head_t.is_empty()
            && head_t.chars().all(|c| is_ident_char(c) || c == '-')
            && rest.starts_with(char::is_whitespace);
        if is_label {
            return (Some(head_t), rest);
        }
    }
    (None, line)
}

/// One rule per line; `#` comments and blank lines are skipped.
pub fn parse_ruleset(text: &str, registry: &BuiltInRegistry) -> Result<Vec<Rule>, RuleError> {
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (label, body) = split_label(line);
        let label = label.map_or_else(|| format!("r{line_no}"), str::to_string);
        let body_offset = line.chars().count() - body.chars().count();
        let mut rule = parse_rule(body, registry).map_err(|e| match e {
            RuleError::Syntax {
                column,
                expected,
                found,
                ..
            } => RuleError::Syntax {
                line: line_no,
                column: column + body_offset,
                expected,
                found,
            },
            RuleError::Safety { variable, .. } => RuleError::Safety {
                label: label.clone(),
                variable,
            },
            other => RuleError::AtLine {
                line: line_no,
                source: Box::new(other),
            },
        })?;
        rule.label = label;
        rules.push(rule);
    }
    Ok(rules)
}
