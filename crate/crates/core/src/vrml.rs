//! VRML 2.0 export of annotated boxes, coloured by class.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::kb::{format_number, KnowledgeBase, Name};
use crate::rules::box_of;
use crate::vocab;

#[derive(Debug, Error, PartialEq)]
pub enum VrmlError {
    #[error("{0} is classified but has no geometry")]
    MissingGeometry(Name),
    #[error("colour map line {line}: {message}")]
    ColorParse { line: usize, message: String },
}

pub type Rgb = [f64; 3];

pub const FALLBACK: Rgb = [0.5, 0.5, 0.5];

#[derive(Debug, Clone, PartialEq)]
pub struct ColorMap {
    colors: BTreeMap<String, Rgb>,
}

impl Default for ColorMap {
    fn default() -> Self {
        let entries: [(&str, Rgb); 11] = [
            ("Mast", [0.0, 0.0, 1.0]),
            ("BigMast", [0.0, 0.0, 1.0]),
            ("NormalMast", [0.0, 0.0, 1.0]),
            ("Main_Signal", [1.0, 0.0, 0.0]),
            ("Distant_Signal", [1.0, 0.5, 0.0]),
            ("Vorsignalbake", [1.0, 1.0, 0.0]),
            ("Breakpoint_table", [1.0, 1.0, 0.0]),
            ("Chess_board", [1.0, 1.0, 0.0]),
            ("Schalthouse", [0.0, 1.0, 0.0]),
            ("SchaltSchrack", [0.0, 1.0, 0.0]),
            (vocab::VERTICAL_BB, FALLBACK),
        ];
        let mut colors: BTreeMap<String, Rgb> =
            entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        colors.insert(vocab::HORIZONTAL_BB.to_string(), FALLBACK);
        Self { colors }
    }
}

impl ColorMap {
    pub fn get(&self, class: &str) -> Option<Rgb> {
        self.colors.get(class).copied()
    }

    pub fn set(&mut self, class: &str, rgb: Rgb) {
        self.colors.insert(class.to_string(), rgb);
    }

    /// Applies `<ClassName> r g b` lines on top of the current entries.
    pub fn apply_overrides(&mut self, text: &str) -> Result<(), VrmlError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| VrmlError::ColorParse {
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [class, r, g, b] = fields[..] else {
                return Err(err(format!("expected `Class r g b`, got {line:?}")));
            };
            let mut rgb = [0.0; 3];
            for (slot, s) in rgb.iter_mut().zip([r, g, b]) {
                let v: f64 = s.parse().map_err(|_| err(format!("bad component {s:?}")))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(err(format!("component {v} outside [0, 1]")));
                }
                *slot = v;
            }
            self.set(class, rgb);
        }
        Ok(())
    }

    /// Colour of the most specific mapped class of `individual`; box classes
    /// only count when no domain class is mapped.
    pub fn color_for(&self, kb: &KnowledgeBase, individual: &Name) -> Rgb {
        let mut classes: Vec<Name> = Vec::new();
        for class in kb.classes_of(individual) {
            classes.push(class.clone());
            classes.extend(kb.ancestors(class));
        }
        classes
            .into_iter()
            .filter(|c| self.colors.contains_key(c.as_str()))
            .map(|c| (!is_box_class(&c), kb.ancestors(&c).len(), c))
            .max_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(b.2.cmp(&a.2)))
            .and_then(|(_, _, c)| self.get(c.as_str()))
            .unwrap_or(FALLBACK)
    }
}

fn is_box_class(c: &Name) -> bool {
    c.as_str() == vocab::VERTICAL_BB || c.as_str() == vocab::HORIZONTAL_BB
}

fn triple(v: [f64; 3]) -> String {
    v.map(format_number).join(" ")
}

/// Smallest box side written, since VRML boxes must have positive size.
const MIN_SIZE: f64 = 1e-3;

pub fn export_vrml(kb: &KnowledgeBase, colors: &ColorMap) -> Result<String, VrmlError> {
    let domain = Name::new(vocab::DOMAIN_CONCEPT).expect("valid");
    let mut out = String::from("#VRML V2.0 utf8\n");
    for individual in kb.individuals() {
        let Some(aabb) = box_of(kb, &individual) else {
            if kb.is_instance(&individual, &domain) {
                return Err(VrmlError::MissingGeometry(individual));
            }
            continue;
        };
        let c = aabb.center();
        let size = aabb.extent().map(|s| s.max(MIN_SIZE));
        let rgb = colors.color_for(kb, &individual);
        write!(
            out,
            "DEF {individual} Transform {{\n  translation {}\n  children [\n    Shape {{\n      appearance Appearance {{ material Material {{ diffuseColor {} }} }}\n      geometry Box {{ size {} }}\n    }}\n  ]\n}}\n",
            triple([c.x, c.y, c.z]),
            triple(rgb),
            triple(size),
        )
        .expect("write to string");
    }
    Ok(out)
}
