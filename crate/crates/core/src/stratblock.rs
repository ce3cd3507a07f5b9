//! Character-level models of the properly stratified blocks `B_G^H` and
//! `C_e^H`.
//!
//! Both are idempotent truncations, so their Cartan matrices are
//! submatrices of a parabolic (for B) or the regular (for C) Cartan matrix.
//! Standard objects are free over the coinvariants of the wall group, with
//! Hilbert series `h(v)`; proper standard objects are truncations of the
//! regular standard objects.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use crate::coxeter::{CoxeterGroup, Element, Extremity, IndexKind, ParabolicSubset, Side};
use crate::error::{OkitError, Result};
use crate::grblock::{Basis, CharVector, RegularBlock};
use crate::laurent::LaurentPoly;
use crate::linres::{tilting_matrix, LinearData};
use crate::matrix::MultMatrix;
use crate::parablock::{coinvariant_hilbert, Block, BlockSpec, Flavor};

/// `c(theta_out Delta_G(w)) = sum_{x in wG} v^{l(w)-l(x)} c(Delta(x))`.
pub fn theta_out_char(group: &CoxeterGroup, gs: ParabolicSubset, w: Element) -> Result<CharVector> {
    group.check(w)?;
    group.check_subset(gs)?;
    if !group.in_index_set(IndexKind::WG, gs, ParabolicSubset::EMPTY, w) {
        return Err(OkitError::NotInIndexSet(group.format(w)));
    }
    let mut c = CharVector::new(Basis::Delta);
    for x in group.coset(w, gs, Side::Left) {
        c.add(x, &LaurentPoly::monomial((group.length(w) - group.length(x)) as i32, 1));
    }
    Ok(c)
}

#[derive(Clone, Debug)]
pub struct StratBlockData {
    pub spec: BlockSpec,
    pub index: Vec<Element>,
    pub cartan: MultMatrix,
    /// `G` for B blocks, `H` for C blocks.
    pub wall: ParabolicSubset,
    /// Coinvariant Hilbert series of the wall group.
    pub h: LaurentPoly,
}

pub fn b_block_data(regular: &Arc<RegularBlock>, gs: ParabolicSubset, hs: ParabolicSubset) -> Result<StratBlockData> {
    let g = regular.group().clone();
    let spec = BlockSpec::new(g.diagram(), gs, hs, Flavor::B)?;
    let index = spec.index_set(&g);
    if index.is_empty() {
        return Err(OkitError::EmptyIndexSet);
    }
    let parabolic = Block::new(regular.clone(), BlockSpec::new(g.diagram(), ParabolicSubset::EMPTY, hs, Flavor::Parabolic)?)?;
    let cartan = parabolic.cartan().submatrix(&index)?;
    Ok(StratBlockData { spec, index, cartan, wall: gs, h: coinvariant_hilbert(&g, gs) })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub pass: bool,
    pub checked_entries: usize,
    /// `(x, y)` labels of mismatching entries.
    pub failures: Vec<(String, String)>,
}

/// Compares the B-block Cartan with `h_G` times the Cartan of the
/// singular-parabolic block `A_G^H`.
pub fn verify_t11_identity(regular: &Arc<RegularBlock>, gs: ParabolicSubset, hs: ParabolicSubset) -> Result<IdentityReport> {
    let g = regular.group().clone();
    let b = b_block_data(regular, gs, hs)?;
    let a = Block::new(regular.clone(), BlockSpec::new(g.diagram(), gs, hs, Flavor::SingularParabolic)?)?;
    if a.index() != b.index.as_slice() {
        return Err(OkitError::InvariantBreach("B and A_G^H index sets differ".into()));
    }
    let mut failures = Vec::new();
    let n = b.index.len();
    for i in 0..n {
        for j in 0..n {
            if *b.cartan.at(i, j) != &b.h * a.cartan().at(i, j) {
                failures.push((g.format(b.index[i]), g.format(b.index[j])));
            }
        }
    }
    Ok(IdentityReport { pass: failures.is_empty(), checked_entries: n * n, failures })
}

/// The block `C_e^H`, indexed by `V_e^H` (longest in `Hx`).
pub struct CBlock {
    regular: Arc<RegularBlock>,
    spec: BlockSpec,
    n: usize,
    h: LaurentPoly,
    index: Vec<Element>,
    proper: MultMatrix,
    standard: MultMatrix,
    cartan: MultMatrix,
    tilting: MultMatrix,
}

impl CBlock {
    pub fn new(regular: Arc<RegularBlock>, hs: ParabolicSubset) -> Result<Self> {
        let g = regular.group().clone();
        let spec = BlockSpec::new(g.diagram(), ParabolicSubset::EMPTY, hs, Flavor::C)?;
        let index = spec.index_set(&g);
        let w0h = g.longest_element(hs);
        let n = g.length(w0h);
        let h = coinvariant_hilbert(&g, hs);

        // proper standards are the truncations of regular standards
        let proper = regular.dec_matrix().submatrix(&index)?;
        let standard = proper.map(|p| &h * p);
        let cartan = regular.cartan_matrix().submatrix(&index)?;
        let tilting = tilting_matrix(&proper)?;

        let block = Self { regular, spec, n, h, index, proper, standard, cartan, tilting };
        block.check_tilting_duality()?;
        Ok(block)
    }

    /// Tilting objects satisfy `bar(c_L(T)) = v^{-2N} c_L(T)`, N = l(w0^H).
    fn check_tilting_duality(&self) -> Result<()> {
        let k = self.index.len();
        for i in 0..k {
            for j in 0..k {
                let mut l = LaurentPoly::zero();
                for z in 0..k {
                    let (a, d) = (self.tilting.at(i, z), self.standard.at(z, j));
                    if !a.is_zero() && !d.is_zero() {
                        l += &(a * d);
                    }
                }
                if l.bar() != l.shift(-2 * self.n as i32) {
                    return Err(OkitError::InvariantBreach(format!(
                        "C tilting {} is not self-dual",
                        self.regular.group().format(self.index[i])
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &BlockSpec {
        &self.spec
    }

    pub fn index(&self) -> &[Element] {
        &self.index
    }

    pub fn wall_length(&self) -> usize {
        self.n
    }

    pub fn hilbert(&self) -> &LaurentPoly {
        &self.h
    }

    /// Simple-basis characters of proper standard objects.
    pub fn proper_dec_matrix(&self) -> &MultMatrix {
        &self.proper
    }

    /// Simple-basis characters of standard objects, `h_H` times proper.
    pub fn standard_dec_matrix(&self) -> &MultMatrix {
        &self.standard
    }

    pub fn cartan(&self) -> &MultMatrix {
        &self.cartan
    }

    /// Rows tiltings, columns standards, coefficients in `v`.
    pub fn tilting_matrix(&self) -> &MultMatrix {
        &self.tilting
    }

    pub fn data(&self) -> StratBlockData {
        StratBlockData {
            spec: self.spec,
            index: self.index.clone(),
            cartan: self.cartan.clone(),
            wall: self.spec.h,
            h: self.h.clone(),
        }
    }
}

pub fn c_block_data(regular: &Arc<RegularBlock>, hs: ParabolicSubset) -> Result<StratBlockData> {
    Ok(CBlock::new(regular.clone(), hs)?.data())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CStandardFlags {
    pub proper_standard: CharVector,
    pub standard: CharVector,
    /// Multiplicity of proper standards in the standard flag.
    pub proper_flag_poly: LaurentPoly,
}

pub fn c_standard_flags(c: &CBlock, x: Element) -> Result<CStandardFlags> {
    let g = c.regular.group();
    g.check(x)?;
    let i = c.proper.position(x).ok_or_else(|| OkitError::NotInIndexSet(g.format(x)))?;
    let mut proper = CharVector::new(Basis::L);
    let mut standard = CharVector::new(Basis::L);
    for (j, &y) in c.index.iter().enumerate() {
        proper.add(y, c.proper.at(i, j));
        standard.add(y, c.standard.at(i, j));
    }
    Ok(CStandardFlags { proper_standard: proper, standard, proper_flag_poly: c.h.clone() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtEntry {
    pub k: usize,
    pub m: i32,
    pub dim: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtReport {
    pub x: Element,
    pub y: Element,
    pub entries: Vec<ExtEntry>,
    pub rank: u64,
    pub ext_dim: BigInt,
    pub bounds_ok: bool,
}

impl ExtReport {
    pub fn to_json(&self, group: &CoxeterGroup) -> Value {
        json!({
            "x": group.format(self.x),
            "y": group.format(self.y),
            "entries": self.entries,
            "rank": self.rank,
            "ext_dim": self.ext_dim.to_u64(),
            "bounds_ok": self.bounds_ok,
        })
    }
}

/// Graded Ext profile between standard objects `Delta_C(y)` and proper
/// costandard `x` in `C_e^H`, read off the linear tilting coresolution of
/// `Delta_C(y)`: tilting objects are the `<-2N>` shifts of the cotilting
/// ones, whose proper costandard flags are the tilting flags.
pub fn c_ext_profile(data: &LinearData, c: &CBlock, x: Element, y: Element) -> Result<ExtReport> {
    let g = data.group().clone();
    if data.spec().flavor != Flavor::C || data.spec() != c.spec() {
        return Err(OkitError::UnsupportedFlavor(format!("ext profiles need a C block, got {}", data.spec())));
    }
    let tm = c.tilting_matrix();
    let xi = tm.position(g.check(x)?).ok_or_else(|| OkitError::NotInIndexSet(g.format(x)))?;
    tm.position(g.check(y)?).ok_or_else(|| OkitError::NotInIndexSet(g.format(y)))?;
    if x == y || !g.le(y, x) {
        return Err(OkitError::OrderViolation { x: g.format(x), y: g.format(y) });
    }
    let n2 = 2 * c.n as i32;
    let gap = g.length(x) - g.length(y);
    let res = data.linear_tilting_coresolution(y)?;
    let mut acc: BTreeMap<(usize, i32), u64> = BTreeMap::new();
    for k in res.positions() {
        for (z, _, mult) in res.summands(k) {
            let zi = tm.position(z).expect("summand in index");
            // flag variable u^e corresponds to v^-e
            for (ev, coef) in tm.at(zi, xi).terms() {
                let e = -ev;
                let coef = coef
                    .to_u64()
                    .ok_or_else(|| OkitError::InvariantBreach("negative tilting flag coefficient".into()))?;
                *acc.entry((k, k as i32 - n2 - e)).or_default() += coef * mult;
            }
        }
    }
    let entries: Vec<ExtEntry> = acc.into_iter().map(|((k, m), dim)| ExtEntry { k, m, dim }).collect();
    let bounds_ok = entries.iter().all(|e| e.m + n2 <= e.k as i32 && e.k <= gap);
    if !bounds_ok {
        let bad = entries.iter().find(|e| !(e.m + n2 <= e.k as i32 && e.k <= gap)).unwrap();
        return Err(OkitError::InvariantBreach(format!(
            "ext entry k={} m={} outside {} <= k <= {gap} for ({}, {})",
            bad.k,
            bad.m,
            bad.m + n2,
            g.format(x),
            g.format(y)
        )));
    }
    let rank = res.multiplicity(gap, x);
    let ext_dim = BigInt::from(rank) * c.h.eval_one();
    Ok(ExtReport { x, y, entries, rank, ext_dim, bounds_ok })
}

/// Index-level check: `x -> x^-1 w0` maps `V_e^H` onto the shortest
/// representatives of `W / (w0 H w0)`.
pub fn dual_index_check(group: &CoxeterGroup, hs: ParabolicSubset) -> bool {
    let w0 = group.longest();
    let mut image: Vec<Element> = group
        .index_set(IndexKind::VGH, ParabolicSubset::EMPTY, hs)
        .into_iter()
        .map(|x| group.mul(group.inverse(x), w0))
        .collect();
    image.sort();
    image == group.coset_reps(group.conjugate_by_w0(hs), Side::Left, Extremity::Shortest)
}
