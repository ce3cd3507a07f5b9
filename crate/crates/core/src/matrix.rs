//! Square matrices over Laurent polynomials, indexed by group elements.

use std::collections::HashMap;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::coxeter::{CoxeterGroup, Element};
use crate::error::{OkitError, Result};
use crate::laurent::LaurentPoly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultMatrix {
    index: Vec<Element>,
    pos: HashMap<Element, usize>,
    rows: Vec<Vec<LaurentPoly>>,
}

impl MultMatrix {
    pub fn new(index: Vec<Element>, rows: Vec<Vec<LaurentPoly>>) -> Result<Self> {
        let n = index.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(OkitError::InvariantBreach("matrix is not square".into()));
        }
        let pos: HashMap<Element, usize> = index.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        if pos.len() != n {
            return Err(OkitError::InvariantBreach("matrix index has duplicates".into()));
        }
        Ok(Self { index, pos, rows })
    }

    /// Builds a matrix entry by entry from positions; rows are filled in
    /// parallel.
    pub fn from_fn<F>(index: Vec<Element>, f: F) -> Self
    where
        F: Fn(usize, usize) -> LaurentPoly + Sync,
    {
        let n = index.len();
        let rows = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| f(i, j)).collect())
            .collect();
        Self::new(index, rows).expect("index must be duplicate-free")
    }

    pub fn identity(index: Vec<Element>) -> Self {
        Self::from_fn(index, |i, j| if i == j { LaurentPoly::one() } else { LaurentPoly::zero() })
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn index(&self) -> &[Element] {
        &self.index
    }

    pub fn position(&self, x: Element) -> Option<usize> {
        self.pos.get(&x).copied()
    }

    pub fn at(&self, i: usize, j: usize) -> &LaurentPoly {
        &self.rows[i][j]
    }

    /// Entry by row and column element.
    pub fn get(&self, x: Element, y: Element) -> Option<&LaurentPoly> {
        Some(&self.rows[self.position(x)?][self.position(y)?])
    }

    pub fn rows(&self) -> &[Vec<LaurentPoly>] {
        &self.rows
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.index.clone(), |i, j| self.rows[j][i].clone())
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(&LaurentPoly) -> LaurentPoly + Sync,
    {
        Self::from_fn(self.index.clone(), |i, j| f(&self.rows[i][j]))
    }

    pub fn multiply(&self, other: &MultMatrix) -> Result<Self> {
        if self.index != other.index {
            return Err(OkitError::InvariantBreach("matrix index lists differ".into()));
        }
        let n = self.len();
        Ok(Self::from_fn(self.index.clone(), |i, j| {
            let mut acc = LaurentPoly::zero();
            for k in 0..n {
                let a = &self.rows[i][k];
                if a.is_zero() {
                    continue;
                }
                let b = &other.rows[k][j];
                if !b.is_zero() {
                    acc += &(a * b);
                }
            }
            acc
        }))
    }

    /// Restriction to the rows and columns listed in `sub`, in that order.
    pub fn submatrix(&self, sub: &[Element]) -> Result<Self> {
        let idx: Vec<usize> = sub
            .iter()
            .map(|&x| {
                self.position(x)
                    .ok_or_else(|| OkitError::NotInIndexSet(format!("element #{}", x.index())))
            })
            .collect::<Result<_>>()?;
        let rows = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.rows[i][j].clone()).collect())
            .collect();
        Self::new(sub.to_vec(), rows)
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..i).all(|j| self.rows[i][j] == self.rows[j][i]))
    }

    pub fn is_identity(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| {
            (0..n).all(|j| if i == j { self.rows[i][j].is_one() } else { self.rows[i][j].is_zero() })
        })
    }

    pub fn is_upper_unitriangular(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| self.rows[i][i].is_one() && (0..i).all(|j| self.rows[i][j].is_zero()))
    }

    pub fn is_lower_unitriangular(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| self.rows[i][i].is_one() && (i + 1..n).all(|j| self.rows[i][j].is_zero()))
    }

    /// Exact inverse of an upper or lower unitriangular matrix.
    pub fn unitriangular_inverse(&self) -> Result<Self> {
        if self.is_upper_unitriangular() {
            Ok(upper_inverse(self))
        } else if self.is_lower_unitriangular() {
            Ok(upper_inverse(&self.transpose()).transpose())
        } else {
            Err(OkitError::NonInvertible("matrix is not unitriangular".into()))
        }
    }

    /// Every entry satisfies `pred`.
    pub fn all_entries<F: Fn(usize, usize, &LaurentPoly) -> bool>(&self, pred: F) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| pred(i, j, &self.rows[i][j])))
    }

    /// `{"index":[...],"rows":[[ [[exp,coef],...], ...]]}`
    pub fn to_json(&self, group: &CoxeterGroup) -> Value {
        let index: Vec<String> = self.index.iter().map(|&x| group.format(x)).collect();
        json!({ "index": index, "rows": self.rows })
    }

    /// CSV with a header row of element labels and polynomial strings in
    /// `var` (descending exponents).
    pub fn to_csv(&self, group: &CoxeterGroup, var: &str) -> String {
        let labels: Vec<String> = self.index.iter().map(|&x| csv_field(&group.format(x))).collect();
        let mut out = String::from("index");
        for l in &labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&labels[i]);
            for p in row {
                out.push(',');
                out.push_str(&csv_field(&p.to_string_descending(var)));
            }
            out.push('\n');
        }
        out
    }

    /// Aligned text table.
    pub fn to_table(&self, group: &CoxeterGroup, var: &str) -> String {
        let labels: Vec<String> = self.index.iter().map(|&x| group.label(x)).collect();
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|p| p.to_string_descending(var)).collect())
            .collect();
        let n = self.len();
        let first = labels.iter().map(|l| l.len()).max().unwrap_or(1);
        let widths: Vec<usize> = (0..n)
            .map(|j| (0..n).map(|i| cells[i][j].len()).max().unwrap_or(1).max(labels[j].len()))
            .collect();
        let mut out = format!("{:first$}", "");
        for j in 0..n {
            out.push_str(&format!("  {:>w$}", labels[j], w = widths[j]));
        }
        out.push('\n');
        for i in 0..n {
            out.push_str(&format!("{:first$}", labels[i]));
            for j in 0..n {
                out.push_str(&format!("  {:>w$}", cells[i][j], w = widths[j]));
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn upper_inverse(m: &MultMatrix) -> MultMatrix {
    // Columns are independent: solve M x = e_j by back substitution.
    let n = m.len();
    let cols: Vec<Vec<LaurentPoly>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut x = vec![LaurentPoly::zero(); n];
            x[j] = LaurentPoly::one();
            for i in (0..j).rev() {
                let mut acc = LaurentPoly::zero();
                for k in i + 1..=j {
                    if !m.rows[i][k].is_zero() && !x[k].is_zero() {
                        acc -= &(&m.rows[i][k] * &x[k]);
                    }
                }
                x[i] = acc;
            }
            x
        })
        .collect();
    MultMatrix::from_fn(m.index.clone(), |i, j| cols[j][i].clone())
}
