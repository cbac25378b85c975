use crate::kb::{KnowledgeBase, Name};
use crate::vocab;

use super::RailwayError;

/// `(class, parent)` in declaration order.
pub const TAXONOMY: &[(&str, Option<&str>)] = &[
    (vocab::ALGORITHM, None),
    (vocab::CHARACTERISTICS, None),
    (vocab::DOMAIN_CONCEPT, None),
    (vocab::GEOMETRY, None),
    (vocab::SCENE, None),
    ("Signals", Some(vocab::DOMAIN_CONCEPT)),
    ("Primary_signal", Some("Signals")),
    ("Main_Signal", Some("Primary_signal")),
    ("Distant_Signal", Some("Primary_signal")),
    ("Secondary_signal", Some("Signals")),
    ("Vorsignalbake", Some("Secondary_signal")),
    ("Breakpoint_table", Some("Secondary_signal")),
    ("Chess_board", Some("Secondary_signal")),
    ("Mast", Some(vocab::DOMAIN_CONCEPT)),
    ("BigMast", Some("Mast")),
    ("NormalMast", Some("Mast")),
    ("Schaltanlage", Some(vocab::DOMAIN_CONCEPT)),
    ("Schalthouse", Some("Schaltanlage")),
    ("SchaltSchrack", Some("Schaltanlage")),
    (vocab::VERTICAL_BB, Some(vocab::GEOMETRY)),
    (vocab::HORIZONTAL_BB, Some(vocab::GEOMETRY)),
];

pub const OBJECT_PROPERTIES: [&str; 4] = [
    vocab::HAS_TOPOLOGIC_RELATION,
    vocab::IS_DESIGNED_FOR,
    vocab::HAS_GEOMETRY,
    vocab::HAS_CHARACTERISTICS,
];

/// Classes detections are finally labelled with; each has a range row.
pub const LEAF_CLASSES: [&str; 9] = [
    "Main_Signal",
    "Distant_Signal",
    "Vorsignalbake",
    "Breakpoint_table",
    "Chess_board",
    "BigMast",
    "NormalMast",
    "Schalthouse",
    "SchaltSchrack",
];

/// The shipped taxonomy in dump format.
pub fn taxonomy_text() -> &'static str {
    include_str!("../../data/railway.taxonomy")
}

fn name(s: &str) -> Name {
    Name::new(s).expect("taxonomy names are valid")
}

pub fn leaf_classes() -> Vec<Name> {
    LEAF_CLASSES.iter().map(|c| name(c)).collect()
}

/// Declares the taxonomy and the general object properties. Idempotent.
/// A KB that already places a taxonomy class under a different parent is
/// rejected before anything is changed.
pub fn install_schema(kb: &mut KnowledgeBase) -> Result<(), RailwayError> {
    for (class, parent) in TAXONOMY {
        let c = name(class);
        let expected = parent.map(name);
        if let Some(other) = kb
            .direct_parents(&c)
            .find(|p| Some(*p) != expected.as_ref())
        {
            return Err(RailwayError::SchemaConflict(format!(
                "{c} is declared under {other}"
            )));
        }
    }
    let mut staged = kb.clone();
    for (class, parent) in TAXONOMY {
        let p = parent.map(name);
        staged.declare_class(&name(class), p.as_ref())?;
    }
    for p in OBJECT_PROPERTIES {
        staged.declare_object_property(&name(p));
    }
    *kb = staged;
    Ok(())
}
