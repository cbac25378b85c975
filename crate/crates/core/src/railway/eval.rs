use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::pipeline::leaf_labels;
use crate::kb::{KnowledgeBase, Name};
use crate::vocab;

/// Ground-plane distance within which a prediction may match a truth object.
pub const MATCH_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub class: Name,
    pub predicted: Name,
    pub truth: Name,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassScore {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// 1.0 when nothing was predicted; see `no_predictions`.
    pub precision: f64,
    /// 1.0 when the class has no truth objects.
    pub recall: f64,
    pub no_predictions: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalResult {
    pub classes: BTreeMap<Name, ClassScore>,
    pub matches: Vec<Match>,
}

fn labelled(kb: &KnowledgeBase) -> BTreeMap<Name, Vec<(Name, Option<(f64, f64)>)>> {
    let cx = Name::new(vocab::CX).expect("valid");
    let cy = Name::new(vocab::CY).expect("valid");
    let mut out: BTreeMap<Name, Vec<_>> = BTreeMap::new();
    for ind in kb.individuals() {
        let pos = kb.number_of(&ind, &cx).zip(kb.number_of(&ind, &cy));
        for class in leaf_labels(kb, &ind) {
            out.entry(class).or_default().push((ind.clone(), pos));
        }
    }
    out
}

/// Greedy one-to-one matching per leaf class, closest pairs first.
pub fn evaluate(pred: &KnowledgeBase, truth: &KnowledgeBase) -> EvalResult {
    let p = labelled(pred);
    let t = labelled(truth);
    let mut result = EvalResult::default();
    let classes: Vec<&Name> = {
        let mut c: Vec<&Name> = p.keys().chain(t.keys()).collect();
        c.sort();
        c.dedup();
        c
    };
    let empty = Vec::new();
    for class in classes {
        let preds = p.get(class).unwrap_or(&empty);
        let truths = t.get(class).unwrap_or(&empty);
        let mut pairs = Vec::new();
        for (i, (_, pp)) in preds.iter().enumerate() {
            for (j, (_, tp)) in truths.iter().enumerate() {
                if let (Some(a), Some(b)) = (pp, tp) {
                    let d = (a.0 - b.0).hypot(a.1 - b.1);
                    if d <= MATCH_RADIUS {
                        pairs.push((d, i, j));
                    }
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let mut used_p = vec![false; preds.len()];
        let mut used_t = vec![false; truths.len()];
        let mut tp = 0;
        for (d, i, j) in pairs {
            if used_p[i] || used_t[j] {
                continue;
            }
            used_p[i] = true;
            used_t[j] = true;
            tp += 1;
            result.matches.push(Match {
                class: class.clone(),
                predicted: preds[i].0.clone(),
                truth: truths[j].0.clone(),
                distance: d,
            });
        }
        let fp = preds.len() - tp;
        let fn_ = truths.len() - tp;
        result.classes.insert(
            class.clone(),
            ClassScore {
                true_positives: tp,
                false_positives: fp,
                false_negatives: fn_,
                precision: if preds.is_empty() { 1.0 } else { tp as f64 / preds.len() as f64 },
                recall: if truths.is_empty() { 1.0 } else { tp as f64 / truths.len() as f64 },
                no_predictions: preds.is_empty(),
            },
        );
    }
    result
}

impl EvalResult {
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<18} {:>4} {:>4} {:>4} {:>9} {:>6}\n",
            "class", "tp", "fp", "fn", "precision", "recall"
        );
        for (class, s) in &self.classes {
            let flag = if s.no_predictions { "  (no predictions)" } else { "" };
            writeln!(
                out,
                "{:<18} {:>4} {:>4} {:>4} {:>9.2} {:>6.2}{flag}",
                class.as_str(),
                s.true_positives,
                s.false_positives,
                s.false_negatives,
                s.precision,
                s.recall
            )
            .expect("write to string");
        }
        out
    }
}
