//! Linear tilting coresolutions and linear projective resolutions of
//! standard objects, at the level of characters.
//!
//! Two independent routes for the regular block: solving the Euler
//! identity against the (unitriangular) tilting or projective transition
//! matrix, and the translation-functor cone construction.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::coxeter::{CoxeterGroup, Element};
use crate::error::{OkitError, Result};
use crate::grblock::{Basis, CharVector, RegularBlock};
use crate::laurent::LaurentPoly;
use crate::matrix::MultMatrix;
use crate::parablock::{Block, BlockSpec, Flavor};
use crate::profile::{ComplexProfile, Linearity};
use crate::stratblock::CBlock;

/// Standard-basis characters of the self-dual tilting objects of a
/// quasi-hereditary block, from its decomposition matrix `D` (rows
/// standards, columns simples, upper unitriangular).
///
/// Writing `T(x) = sum_z a_z Delta(z)`, self-duality of the simple-basis
/// character reads `a_z - bar(a_z) = sum_{y<z} bar(a_y) R_{y,z}` with
/// `R = bar(D) D^-1`, which determines `a_z` as the negative-degree part
/// of the right-hand side.
pub fn tilting_matrix(dec: &MultMatrix) -> Result<MultMatrix> {
    let r = dec.map(LaurentPoly::bar).multiply(&dec.unitriangular_inverse()?)?;
    let n = dec.len();
    let rows: Vec<Vec<LaurentPoly>> = (0..n)
        .map(|i| {
            let mut a = vec![LaurentPoly::zero(); n];
            a[i] = LaurentPoly::one();
            for z in i + 1..n {
                let mut rhs = LaurentPoly::zero();
                for y in i..z {
                    if !a[y].is_zero() && !r.at(y, z).is_zero() {
                        rhs += &(&a[y].bar() * r.at(y, z));
                    }
                }
                if !rhs.coeff(0).is_zero() || rhs.bar() != -rhs.clone() {
                    return Err(OkitError::InvariantBreach(format!(
                        "no self-dual tilting character through row {i}, column {z}"
                    )));
                }
                let az = rhs.negative_part();
                if !az.is_nonnegative() {
                    return Err(OkitError::InvariantBreach(format!(
                        "negative standard multiplicity in tilting row {i}"
                    )));
                }
                a[z] = az;
            }
            Ok(a)
        })
        .collect::<Result<_>>()?;
    MultMatrix::new(dec.index().to_vec(), rows)
}

/// Everything needed to solve Euler identities in one block.
pub struct LinearData {
    spec: BlockSpec,
    group: Arc<CoxeterGroup>,
    regular: Arc<RegularBlock>,
    index: Vec<Element>,
    /// Rows standards, columns simples.
    dec: MultMatrix,
    /// Rows tiltings, columns standards; `None` when unsupported.
    tilting: Option<MultMatrix>,
    tilting_inv: OnceLock<Result<MultMatrix>>,
    proj_inv: OnceLock<Result<MultMatrix>>,
}

impl LinearData {
    pub fn new(regular: Arc<RegularBlock>, spec: BlockSpec) -> Result<Self> {
        let group = regular.group().clone();
        let (index, dec, tilting) = match spec.flavor {
            Flavor::B => return Err(OkitError::UnsupportedFlavor("B".into())),
            Flavor::C => {
                let c = CBlock::new(regular.clone(), spec.h)?;
                (c.index().to_vec(), c.standard_dec_matrix().clone(), Some(c.tilting_matrix().clone()))
            }
            Flavor::Regular => {
                let t = regular.tilting_flag_matrix().map(LaurentPoly::bar);
                (group.elements().collect(), regular.dec_matrix().clone(), Some(t))
            }
            Flavor::Parabolic => {
                let b = Block::new(regular.clone(), spec)?;
                let t = tilting_matrix(b.dec_matrix())?;
                (b.index().to_vec(), b.dec_matrix().clone(), Some(t))
            }
            Flavor::Singular | Flavor::SingularParabolic => {
                let b = Block::new(regular.clone(), spec)?;
                (b.index().to_vec(), b.dec_matrix().clone(), None)
            }
        };
        Ok(Self {
            spec,
            group,
            regular,
            index,
            dec,
            tilting,
            tilting_inv: OnceLock::new(),
            proj_inv: OnceLock::new(),
        })
    }

    pub fn spec(&self) -> &BlockSpec {
        &self.spec
    }

    pub fn group(&self) -> &Arc<CoxeterGroup> {
        &self.group
    }

    pub fn regular(&self) -> &Arc<RegularBlock> {
        &self.regular
    }

    pub fn index(&self) -> &[Element] {
        &self.index
    }

    pub fn dec_matrix(&self) -> &MultMatrix {
        &self.dec
    }

    pub fn tilting_matrix(&self) -> Result<&MultMatrix> {
        self.tilting
            .as_ref()
            .ok_or_else(|| OkitError::UnsupportedFlavor(format!("tilting data for {} blocks", self.spec.flavor)))
    }

    fn position(&self, x: Element) -> Result<usize> {
        self.group.check(x)?;
        self.dec.position(x).ok_or_else(|| OkitError::NotInIndexSet(self.group.format(x)))
    }

    /// Rows projectives `P(y)`, columns standards: `(P(y) : Delta(z)) = d_{z,y}`.
    pub fn projective_matrix(&self) -> MultMatrix {
        self.dec.transpose()
    }

    pub fn linear_tilting_coresolution(&self, x: Element) -> Result<ComplexProfile> {
        let i = self.position(x)?;
        let inv = self
            .tilting_inv
            .get_or_init(|| self.tilting_matrix().and_then(|t| t.unitriangular_inverse()))
            .as_ref()
            .map_err(Clone::clone)?;
        self.solve(inv, i, Linearity::Coresolution)
    }

    pub fn linear_projective_resolution(&self, x: Element) -> Result<ComplexProfile> {
        if self.spec.flavor == Flavor::C {
            return Err(OkitError::UnsupportedFlavor("projective resolutions in C blocks".into()));
        }
        let i = self.position(x)?;
        let inv = self
            .proj_inv
            .get_or_init(|| self.projective_matrix().unitriangular_inverse())
            .as_ref()
            .map_err(Clone::clone)?;
        self.solve(inv, i, Linearity::Resolution)
    }

    /// Reads the profile off row `i` of the inverse transition matrix: the
    /// coefficient `c v^e` at column `y` gives position `l` with
    /// `v^{-shift(l)} = v^e` and multiplicity `(-1)^l c`.
    fn solve(&self, inv: &MultMatrix, i: usize, lin: Linearity) -> Result<ComplexProfile> {
        let g = &self.group;
        let x = self.index[i];
        let mut p = ComplexProfile::new(self.spec.to_string(), x, lin);
        for (j, &y) in self.index.iter().enumerate() {
            for (e, c) in inv.at(i, j).terms() {
                let l = match lin {
                    Linearity::Coresolution => -e,
                    Linearity::Resolution => e,
                };
                let m = if l % 2 == 0 { c.clone() } else { -c };
                if l < 0 || m.is_negative() {
                    return Err(OkitError::InvariantBreach(format!(
                        "{}: coefficient {c}v^{e} at {} in the Euler solve for {}",
                        self.spec,
                        g.format(y),
                        g.format(x)
                    )));
                }
                let m = m.to_u64().ok_or_else(|| OkitError::InvariantBreach("multiplicity overflow".into()))?;
                p.add_linear(l as usize, y, m);
            }
        }
        if p.multiplicity(0, x) != 1 {
            return Err(OkitError::InvariantBreach(format!("top term of {} is not simple", g.format(x))));
        }
        Ok(p)
    }

    /// `sum_l (-1)^l v^{-shift} mult c(B(y))` in the standard basis, with
    /// `B` tiltings or projectives according to the profile.
    pub fn euler_char(&self, p: &ComplexProfile) -> Result<CharVector> {
        let basis = match p.linearity() {
            Linearity::Coresolution => self.tilting_matrix()?.clone(),
            Linearity::Resolution => self.projective_matrix(),
        };
        let mut out = CharVector::new(Basis::Delta);
        for pos in p.positions() {
            for (y, shift, k) in p.summands(pos) {
                let sign: i64 = if pos % 2 == 0 { 1 } else { -1 };
                let coef = LaurentPoly::monomial(-shift, sign * k as i64);
                let row = basis.position(y).ok_or_else(|| OkitError::NotInIndexSet(self.group.format(y)))?;
                for (j, &z) in self.index.iter().enumerate() {
                    let b = basis.at(row, j);
                    if !b.is_zero() {
                        out.add(z, &(&coef * b));
                    }
                }
            }
        }
        Ok(out)
    }

    /// True when the profile's Euler character is exactly `c(Delta(x))`.
    pub fn euler_roundtrip(&self, p: &ComplexProfile) -> Result<bool> {
        Ok(self.euler_char(p)? == CharVector::unit(Basis::Delta, p.x()))
    }
}

/// Coresolutions of all standards of the regular block by the cone
/// construction, memoized along the downward induction from `w0`.
pub struct ConeSolver {
    regular: Arc<RegularBlock>,
    label: String,
    memo: HashMap<Element, ComplexProfile>,
}

impl ConeSolver {
    pub fn new(regular: Arc<RegularBlock>) -> Self {
        let label = BlockSpec::regular(regular.group().diagram()).to_string();
        Self { regular, label, memo: HashMap::new() }
    }

    pub fn coresolution(&mut self, x: Element) -> Result<ComplexProfile> {
        let g = self.regular.group().clone();
        g.check(x)?;
        if let Some(p) = self.memo.get(&x) {
            return Ok(p.clone());
        }
        let p = if x == g.longest() {
            let mut p = ComplexProfile::new(self.label.clone(), x, Linearity::Coresolution);
            p.add_linear(0, x, 1);
            p
        } else {
            let s = (0..g.rank()).find(|&s| !g.right_descents(x).contains(s)).expect("x is not w0");
            let up = self.coresolution(g.right_mul_gen(x, s))?;
            self.step(&g, &up, x, s)?
        };
        self.memo.insert(x, p.clone());
        Ok(p)
    }

    /// From the coresolution `T` of `Delta(xs)`: the complex with
    /// `Q^l = theta_s T^l + T^{l-1}<1>`, minus the contractible pairs.
    fn step(&self, g: &CoxeterGroup, up: &ComplexProfile, x: Element, s: usize) -> Result<ComplexProfile> {
        let mut q: BTreeMap<(usize, Element, i32), i64> = BTreeMap::new();
        for pos in up.positions() {
            for (w, shift, m) in up.summands(pos) {
                for (w2, d) in self.regular.theta_tilting(w, s)? {
                    *q.entry((pos, w2, shift + d)).or_default() += m as i64;
                }
                *q.entry((pos + 1, w, shift + 1)).or_default() += m as i64;
            }
        }
        let nonlinear: Vec<((usize, Element, i32), i64)> =
            q.iter().filter(|(k, _)| k.2 != k.0 as i32).map(|(k, v)| (*k, *v)).collect();
        for ((pos, w, shift), m) in nonlinear {
            let partner = if shift == pos as i32 + 1 {
                pos + 1
            } else if shift == pos as i32 - 1 && pos > 0 {
                pos - 1
            } else {
                return Err(OkitError::InvariantBreach(format!(
                    "cone term T({})<{shift}> at position {pos} has no partner",
                    g.format(w)
                )));
            };
            *q.get_mut(&(pos, w, shift)).unwrap() -= m;
            *q.entry((partner, w, shift)).or_default() -= m;
        }
        let mut p = ComplexProfile::new(self.label.clone(), x, Linearity::Coresolution);
        for ((pos, w, shift), m) in q {
            if m < 0 || (m > 0 && shift != pos as i32) {
                return Err(OkitError::InvariantBreach(format!(
                    "cone leaves {m} x T({})<{shift}> at position {pos}",
                    g.format(w)
                )));
            }
            p.add(pos, w, shift, m as u64);
        }
        Ok(p)
    }
}

/// Convenience wrapper building the block data for a single call.
pub fn linear_tilting_coresolution(regular: Arc<RegularBlock>, spec: BlockSpec, x: Element) -> Result<ComplexProfile> {
    LinearData::new(regular, spec)?.linear_tilting_coresolution(x)
}

pub fn linear_projective_resolution(regular: Arc<RegularBlock>, spec: BlockSpec, x: Element) -> Result<ComplexProfile> {
    LinearData::new(regular, spec)?.linear_projective_resolution(x)
}

pub fn linear_coresolution_via_translation(regular: Arc<RegularBlock>, x: Element) -> Result<ComplexProfile> {
    ConeSolver::new(regular).coresolution(x)
}

/// Per-position totals of a profile at `v = 1`, summed over shifts.
pub fn totals_by_element(p: &ComplexProfile) -> BTreeMap<Element, BigInt> {
    let mut out: BTreeMap<Element, BigInt> = BTreeMap::new();
    for pos in p.positions() {
        for (w, _, k) in p.summands(pos) {
            *out.entry(w).or_insert_with(BigInt::zero) += k;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::ParabolicSubset;
    use crate::hecke_kl::KlTable;

    fn reg(d: &str) -> Arc<RegularBlock> {
        let g = CoxeterGroup::build(d.parse().unwrap()).unwrap();
        Arc::new(RegularBlock::new(Arc::new(KlTable::build(g))))
    }

    #[test]
    fn generic_tilting_matches_w0_rule() {
        for d in ["A1", "A2", "A3", "B2"] {
            let r = reg(d);
            let t = tilting_matrix(r.dec_matrix()).unwrap();
            assert_eq!(t, r.tilting_flag_matrix().map(LaurentPoly::bar), "{d}");
        }
    }

    #[test]
    fn a1_coresolution() {
        let r = reg("A1");
        let g = r.group().clone();
        let data = LinearData::new(r.clone(), "A1".parse().unwrap()).unwrap();
        let p = data.linear_tilting_coresolution(g.identity()).unwrap();
        assert_eq!(p.render(&g, "T"), "0: T(e)<0>\n1: T(1)<1>\n");
        let w0 = data.linear_tilting_coresolution(g.longest()).unwrap();
        assert_eq!(w0.render(&g, "T"), "0: T(1)<0>\n");
        let cone = linear_coresolution_via_translation(r, g.identity()).unwrap();
        assert_eq!(cone, p);
    }

    #[test]
    fn a1_resolution() {
        let r = reg("A1");
        let g = r.group().clone();
        let data = LinearData::new(r, "A1".parse().unwrap()).unwrap();
        assert_eq!(data.linear_projective_resolution(g.identity()).unwrap().render(&g, "P"), "0: P(e)<0>\n");
        let p = data.linear_projective_resolution(g.longest()).unwrap();
        assert_eq!(p.render(&g, "P"), "0: P(1)<0>\n1: P(e)<-1>\n");
        assert!(data.euler_roundtrip(&p).unwrap());
    }

    #[test]
    fn euler_and_cone_agree() {
        for d in ["A2", "A3", "B2"] {
            let r = reg(d);
            let g = r.group().clone();
            let data = LinearData::new(r.clone(), BlockSpec::regular(g.diagram())).unwrap();
            let mut cone = ConeSolver::new(r.clone());
            let top = g.length(g.longest());
            for x in g.elements() {
                let p = data.linear_tilting_coresolution(x).unwrap();
                assert!(p.is_linear());
                assert!(data.euler_roundtrip(&p).unwrap());
                assert!(p.max_position().unwrap() <= top - g.length(x));
                let c = cone.coresolution(x).unwrap();
                assert_eq!(p.compare(&c, &g).unwrap(), (true, vec![]), "{d} {}", g.format(x));
            }
        }
    }

    #[test]
    fn a2_dominant_coresolution_has_length_three() {
        let r = reg("A2");
        let g = r.group().clone();
        let p = linear_tilting_coresolution(r, "A2".parse().unwrap(), g.identity()).unwrap();
        assert_eq!(p.max_position(), Some(3));
        assert_eq!(p.summands(3).collect::<Vec<_>>(), vec![(g.longest(), 3, 1)]);
    }

    #[test]
    fn regular_resolution_totals_match_inverse_kl() {
        for d in ["A2", "A3", "B2"] {
            let r = reg(d);
            let g = r.group().clone();
            let inv = r.kl().inverse_kl_matrix();
            let data = LinearData::new(r.clone(), BlockSpec::regular(g.diagram())).unwrap();
            for x in g.elements() {
                let p = data.linear_projective_resolution(x).unwrap();
                assert!(p.max_position().unwrap() <= g.length(x));
                let totals = totals_by_element(&p);
                for y in g.elements() {
                    let expect = inv.get(y, x).unwrap().eval_one();
                    assert_eq!(totals.get(&y).cloned().unwrap_or_default(), expect, "{d}");
                }
            }
        }
    }

    #[test]
    fn a2_w0_resolution_ranks() {
        let r = reg("A2");
        let g = r.group().clone();
        let p = linear_projective_resolution(r, "A2".parse().unwrap(), g.longest()).unwrap();
        let ranks: Vec<u64> = (0..=3).map(|l| p.total_at(l)).collect();
        assert_eq!(ranks, vec![1, 2, 2, 1]);
    }

    #[test]
    fn parabolic_and_singular_profiles() {
        for d in ["A2", "A3", "B2"] {
            let r = reg(d);
            let g = r.group().clone();
            for s in ParabolicSubset::all(g.rank()) {
                for flavor in [Flavor::Parabolic, Flavor::Singular] {
                    let (gs, hs) = match flavor {
                        Flavor::Parabolic => (ParabolicSubset::EMPTY, s),
                        _ => (s, ParabolicSubset::EMPTY),
                    };
                    let spec = BlockSpec::new(g.diagram(), gs, hs, flavor).unwrap();
                    let data = LinearData::new(r.clone(), spec).unwrap();
                    for &x in data.index() {
                        let p = data.linear_projective_resolution(x).unwrap();
                        assert!(p.is_linear() && data.euler_roundtrip(&p).unwrap(), "{spec}");
                        if flavor == Flavor::Parabolic {
                            let c = data.linear_tilting_coresolution(x).unwrap();
                            assert!(c.is_linear() && data.euler_roundtrip(&c).unwrap(), "{spec}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn errors() {
        let r = reg("A2");
        let g = r.group().clone();
        let data = LinearData::new(r.clone(), "A2;H=1".parse().unwrap()).unwrap();
        assert!(matches!(data.linear_tilting_coresolution(g.parse("1").unwrap()), Err(OkitError::NotInIndexSet(_))));
        let sing = LinearData::new(r.clone(), "A2;G=1".parse().unwrap()).unwrap();
        assert!(matches!(sing.linear_tilting_coresolution(g.parse("1").unwrap()), Err(OkitError::UnsupportedFlavor(_))));
        assert!(matches!(LinearData::new(r, "A2;G=1;flavor=B".parse().unwrap()), Err(OkitError::UnsupportedFlavor(_))));
    }
}
