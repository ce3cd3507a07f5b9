//! Character shadows of linear complexes: position -> multiset of
//! `(element, shift)`.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use crate::coxeter::{CoxeterGroup, Element};
use crate::error::{OkitError, Result};

/// Which linearity condition a profile must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Linearity {
    /// Position `l` holds `T(y)<l>`.
    Coresolution,
    /// Position `l` holds `P(y)<-l>`, i.e. generated in degree `l`.
    Resolution,
}

impl Linearity {
    pub fn shift_at(self, pos: usize) -> i32 {
        match self {
            Linearity::Coresolution => pos as i32,
            Linearity::Resolution => -(pos as i32),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexProfile {
    block: String,
    x: Element,
    linearity: Linearity,
    terms: BTreeMap<usize, BTreeMap<(Element, i32), u64>>,
}

/// Discrepancy at one `(position, element)`: the `(shift, mult)` lists on
/// each side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiffEntry {
    pub pos: usize,
    pub w: String,
    pub left: Vec<(i32, u64)>,
    pub right: Vec<(i32, u64)>,
}

impl ComplexProfile {
    pub fn new(block: impl Into<String>, x: Element, linearity: Linearity) -> Self {
        Self { block: block.into(), x, linearity, terms: BTreeMap::new() }
    }

    pub fn block(&self) -> &str {
        &self.block
    }

    pub fn x(&self) -> Element {
        self.x
    }

    pub fn linearity(&self) -> Linearity {
        self.linearity
    }

    /// Adds `mult` copies of `(w, shift)` at `pos`.
    pub fn add(&mut self, pos: usize, w: Element, shift: i32, mult: u64) {
        if mult == 0 {
            return;
        }
        *self.terms.entry(pos).or_default().entry((w, shift)).or_default() += mult;
    }

    /// Adds a linear summand, with the shift implied by the position.
    pub fn add_linear(&mut self, pos: usize, w: Element, mult: u64) {
        self.add(pos, w, self.linearity.shift_at(pos), mult);
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.keys().copied()
    }

    pub fn summands(&self, pos: usize) -> impl Iterator<Item = (Element, i32, u64)> + '_ {
        self.terms
            .get(&pos)
            .into_iter()
            .flat_map(|m| m.iter().map(|(&(w, s), &k)| (w, s, k)))
    }

    pub fn multiplicity(&self, pos: usize, w: Element) -> u64 {
        self.summands(pos).filter(|t| t.0 == w).map(|t| t.2).sum()
    }

    /// Largest occupied position, `None` for the zero complex.
    pub fn max_position(&self) -> Option<usize> {
        self.terms.keys().next_back().copied()
    }

    pub fn total_at(&self, pos: usize) -> u64 {
        self.summands(pos).map(|t| t.2).sum()
    }

    pub fn is_linear(&self) -> bool {
        self.terms
            .iter()
            .all(|(&p, m)| m.keys().all(|&(_, s)| s == self.linearity.shift_at(p)))
    }

    pub fn check_linear(&self, group: &CoxeterGroup) -> Result<()> {
        for (&p, m) in &self.terms {
            for &(w, s) in m.keys() {
                if s != self.linearity.shift_at(p) {
                    return Err(OkitError::InvariantBreach(format!(
                        "non-linear summand ({}, {s}) at position {p}",
                        group.format(w)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn compare(&self, other: &ComplexProfile, group: &CoxeterGroup) -> Result<(bool, Vec<DiffEntry>)> {
        if self.block != other.block {
            return Err(OkitError::BlockMismatch(self.block.clone(), other.block.clone()));
        }
        let collect = |p: &ComplexProfile| {
            let mut m: BTreeMap<(usize, Element), Vec<(i32, u64)>> = BTreeMap::new();
            for (&pos, t) in &p.terms {
                for (&(w, s), &k) in t {
                    m.entry((pos, w)).or_default().push((s, k));
                }
            }
            m
        };
        let (l, r) = (collect(self), collect(other));
        let mut keys: Vec<&(usize, Element)> = l.keys().chain(r.keys()).collect();
        keys.sort();
        keys.dedup();
        let diff: Vec<DiffEntry> = keys
            .into_iter()
            .filter_map(|k| {
                let (a, b) = (l.get(k).cloned().unwrap_or_default(), r.get(k).cloned().unwrap_or_default());
                (a != b).then(|| DiffEntry { pos: k.0, w: group.format(k.1), left: a, right: b })
            })
            .collect();
        Ok((diff.is_empty(), diff))
    }

    pub fn to_json(&self, group: &CoxeterGroup) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(pos, m)| {
                let summands: Vec<Value> = m
                    .iter()
                    .map(|(&(w, s), k)| json!({ "w": group.format(w), "shift": s, "mult": k }))
                    .collect();
                json!({ "pos": pos, "summands": summands })
            })
            .collect();
        json!({ "block": self.block, "x": group.format(self.x), "terms": terms })
    }

    /// One line per position, e.g. `1: T(1)<1>`.
    pub fn render(&self, group: &CoxeterGroup, sym: &str) -> String {
        let mut out = String::new();
        for (pos, m) in &self.terms {
            let parts: Vec<String> = m
                .iter()
                .map(|(&(w, s), &k)| {
                    let mult = if k == 1 { String::new() } else { format!("{k}") };
                    format!("{mult}{sym}({})<{s}>", group.label(w))
                })
                .collect();
            out.push_str(&format!("{pos}: {}\n", parts.join(" + ")));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compare_and_json() {
        let g = CoxeterGroup::build("A1".parse().unwrap()).unwrap();
        let (e, s) = (g.identity(), g.longest());
        let mut p = ComplexProfile::new("A1;flavor=regular", e, Linearity::Coresolution);
        p.add_linear(0, e, 1);
        p.add_linear(1, s, 1);
        assert!(p.is_linear());
        assert_eq!(p.compare(&p, &g).unwrap(), (true, vec![]));

        let mut q = ComplexProfile::new("A1;flavor=regular", e, Linearity::Coresolution);
        q.add_linear(0, e, 1);
        q.add(1, s, 2, 1);
        assert!(!q.is_linear());
        let (same, diff) = p.compare(&q, &g).unwrap();
        assert!(!same);
        assert_eq!(diff.len(), 1);
        assert_eq!(diff[0].left, vec![(1, 1)]);
        assert_eq!(diff[0].right, vec![(2, 1)]);

        let other = ComplexProfile::new("A2;flavor=regular", e, Linearity::Coresolution);
        assert!(matches!(p.compare(&other, &g), Err(OkitError::BlockMismatch(..))));

        assert_eq!(
            p.to_json(&g).to_string(),
            r#"{"block":"A1;flavor=regular","x":"","terms":[{"pos":0,"summands":[{"w":"","shift":0,"mult":1}]},{"pos":1,"summands":[{"w":"1","shift":1,"mult":1}]}]}"#
        );
        assert_eq!(p.render(&g, "T"), "0: T(e)<0>\n1: T(1)<1>\n");
    }
}
