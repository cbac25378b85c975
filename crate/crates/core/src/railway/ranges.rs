use std::collections::BTreeMap;

use serde::Deserialize;

/// Real interval with independently open or closed ends; infinite ends
/// mean unconstrained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
    pub min_inclusive: bool,
    pub max_inclusive: bool,
}

impl Interval {
    pub const ANY: Interval = Interval {
        min: f64::NEG_INFINITY,
        max: f64::INFINITY,
        min_inclusive: false,
        max_inclusive: false,
    };

    pub fn between(min: f64, max: f64) -> Self {
        Self {
            min,
            max,
            min_inclusive: true,
            max_inclusive: true,
        }
    }

    pub fn more_than(min: f64) -> Self {
        Self { min, ..Self::ANY }
    }

    pub fn less_than(max: f64) -> Self {
        Self { max, ..Self::ANY }
    }

    pub fn at_most(max: f64) -> Self {
        Self {
            max,
            max_inclusive: true,
            ..Self::ANY
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        let lo = if self.min_inclusive { v >= self.min } else { v > self.min };
        let hi = if self.max_inclusive { v <= self.max } else { v < self.max };
        lo && hi
    }

    pub fn is_constrained(&self) -> bool {
        self.min.is_finite() || self.max.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassRanges {
    pub height: Interval,
    pub length: Interval,
    pub width: Interval,
}

impl ClassRanges {
    pub fn contains(&self, height: f64, length: f64, width: f64) -> bool {
        self.height.contains(height) && self.length.contains(length) && self.width.contains(width)
    }

    /// Number of constrained dimensions.
    pub fn constraint_count(&self) -> usize {
        [self.height, self.length, self.width]
            .iter()
            .filter(|i| i.is_constrained())
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RangeParams {
    /// Upper bound standing for "close to 0".
    pub zeta: f64,
}

impl Default for RangeParams {
    fn default() -> Self {
        Self { zeta: 0.5 }
    }
}

/// Per leaf class bounding-box ranges; blank cells are unconstrained,
/// "between" is closed, "more/less than" is strict.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricRanges {
    pub zeta: f64,
    classes: BTreeMap<&'static str, ClassRanges>,
}

impl Default for GeometricRanges {
    fn default() -> Self {
        Self::new(RangeParams::default().zeta)
    }
}

impl GeometricRanges {
    pub fn new(zeta: f64) -> Self {
        let any = Interval::ANY;
        let zero = Interval::at_most(zeta);
        let row = |height, length, width| ClassRanges {
            height,
            length,
            width,
        };
        let classes = BTreeMap::from([
            ("Main_Signal", row(Interval::between(4.0, 6.0), any, any)),
            ("Distant_Signal", row(Interval::between(4.0, 6.0), any, any)),
            ("Vorsignalbake", row(Interval::between(1.5, 2.5), any, zero)),
            (
                "Breakpoint_table",
                row(Interval::between(1.0, 2.0), Interval::between(1.0, 1.5), zero),
            ),
            ("Chess_board", row(Interval::between(1.0, 1.5), zero, zero)),
            ("BigMast", row(Interval::more_than(6.0), any, any)),
            ("NormalMast", row(Interval::between(5.0, 6.0), zero, any)),
            ("Schalthouse", row(Interval::less_than(1.0), any, any)),
            ("SchaltSchrack", row(Interval::less_than(0.5), any, any)),
        ]);
        Self { zeta, classes }
    }

    pub fn get(&self, class: &str) -> Option<&ClassRanges> {
        self.classes.get(class)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &ClassRanges)> {
        self.classes.iter().map(|(k, v)| (*k, v))
    }

    /// Whether `class` has ranges and the extents satisfy them.
    pub fn satisfies(&self, class: &str, height: f64, length: f64, width: f64) -> bool {
        self.get(class)
            .is_some_and(|r| r.contains(height, length, width))
    }
}
