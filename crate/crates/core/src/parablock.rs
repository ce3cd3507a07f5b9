//! Singular, parabolic and singular-parabolic blocks.
//!
//! Parabolic decomposition numbers are alternating sums over the parabolic
//! subgroup `W_H`; singular data is the restriction of the regular data to
//! the longest coset representatives.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use crate::coxeter::{CoxeterDiagram, CoxeterGroup, Element, Extremity, IndexKind, ParabolicSubset, Side};
use crate::error::{OkitError, Result};
use crate::grblock::{Basis, CharVector, RegularBlock};
use crate::laurent::LaurentPoly;
use crate::matrix::MultMatrix;
use crate::profile::{ComplexProfile, Linearity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    Regular,
    Singular,
    Parabolic,
    SingularParabolic,
    B,
    C,
}

impl Flavor {
    pub fn name(&self) -> &'static str {
        match self {
            Flavor::Regular => "regular",
            Flavor::Singular => "singular",
            Flavor::Parabolic => "parabolic",
            Flavor::SingularParabolic => "singular-parabolic",
            Flavor::B => "B",
            Flavor::C => "C",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Flavor {
    type Err = OkitError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "regular" => Flavor::Regular,
            "singular" => Flavor::Singular,
            "parabolic" => Flavor::Parabolic,
            "singular-parabolic" => Flavor::SingularParabolic,
            "b" | "b-block" => Flavor::B,
            "c" | "c-block" => Flavor::C,
            other => return Err(OkitError::InvalidBlockSpec(format!("unknown flavor {other:?}"))),
        })
    }
}

/// A diagram, a singular wall `G`, a parabolic truncation `H` and a flavor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BlockSpec {
    pub diagram: CoxeterDiagram,
    pub g: ParabolicSubset,
    pub h: ParabolicSubset,
    pub flavor: Flavor,
}

impl BlockSpec {
    pub fn new(diagram: CoxeterDiagram, g: ParabolicSubset, h: ParabolicSubset, flavor: Flavor) -> Result<Self> {
        let rank = diagram.rank();
        for (name, s) in [("G", g), ("H", h)] {
            if !s.is_subset_of(&ParabolicSubset::full(rank)) {
                return Err(OkitError::InvalidBlockSpec(format!("{name}={s} exceeds rank {rank}")));
            }
        }
        let bad = |why: &str| Err(OkitError::InvalidBlockSpec(format!("{flavor} block {why}")));
        match flavor {
            Flavor::Regular if !g.is_empty() || !h.is_empty() => return bad("takes neither G nor H"),
            Flavor::Singular if !h.is_empty() => return bad("takes no H"),
            Flavor::Parabolic if !g.is_empty() => return bad("takes no G"),
            Flavor::C if !g.is_empty() => {
                return Err(OkitError::UnsupportedFlavor("C blocks with nonempty G".into()))
            }
            _ => {}
        }
        Ok(Self { diagram, g, h, flavor })
    }

    pub fn regular(diagram: CoxeterDiagram) -> Self {
        Self { diagram, g: ParabolicSubset::EMPTY, h: ParabolicSubset::EMPTY, flavor: Flavor::Regular }
    }

    /// Flavor implied by which of `G`, `H` are nonempty.
    pub fn default_flavor(g: ParabolicSubset, h: ParabolicSubset) -> Flavor {
        match (g.is_empty(), h.is_empty()) {
            (true, true) => Flavor::Regular,
            (false, true) => Flavor::Singular,
            (true, false) => Flavor::Parabolic,
            (false, false) => Flavor::SingularParabolic,
        }
    }

    pub fn index_set(&self, group: &CoxeterGroup) -> Vec<Element> {
        match self.flavor {
            Flavor::Regular => group.elements().collect(),
            Flavor::Singular => group.index_set(IndexKind::WG, self.g, ParabolicSubset::EMPTY),
            Flavor::Parabolic | Flavor::SingularParabolic | Flavor::B => {
                group.index_set(IndexKind::WGH, self.g, self.h)
            }
            Flavor::C => group.index_set(IndexKind::VGH, self.g, self.h),
        }
    }
}

impl fmt::Display for BlockSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.diagram)?;
        if !self.g.is_empty() {
            write!(f, ";G={}", self.g)?;
        }
        if !self.h.is_empty() {
            write!(f, ";H={}", self.h)?;
        }
        write!(f, ";flavor={}", self.flavor)
    }
}

impl FromStr for BlockSpec {
    type Err = OkitError;

    /// `A3;G=1,2;H=3;flavor=singular-parabolic`; a missing flavor is
    /// inferred from `G` and `H`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(';');
        let diagram: CoxeterDiagram = parts.next().unwrap_or("").parse()?;
        let (mut g, mut h, mut flavor) = (ParabolicSubset::EMPTY, ParabolicSubset::EMPTY, None);
        for part in parts {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| OkitError::InvalidBlockSpec(format!("expected key=value, got {part:?}")))?;
            match k.trim() {
                "G" => g = v.parse()?,
                "H" => h = v.parse()?,
                "flavor" => flavor = Some(v.parse()?),
                other => return Err(OkitError::InvalidBlockSpec(format!("unknown key {other:?}"))),
            }
        }
        Self::new(diagram, g, h, flavor.unwrap_or_else(|| Self::default_flavor(g, h)))
    }
}

/// `h_G(v) = sum_{u in W_G} v^{2 l(u)}`.
pub fn coinvariant_hilbert(group: &CoxeterGroup, g: ParabolicSubset) -> LaurentPoly {
    LaurentPoly::from_terms(group.parabolic_elements(g).into_iter().map(|u| (2 * group.length(u) as i32, 1)))
}

fn parabolic_d(reg: &RegularBlock, wh: &[Element], x: Element, y: Element) -> LaurentPoly {
    let g = reg.group();
    let mut acc = LaurentPoly::zero();
    for &u in wh {
        let d = reg.d(g.mul(u, x), y);
        if !d.is_zero() {
            let l = g.length(u) as i32;
            acc += &d.shift(l).scale(&(if l % 2 == 0 { 1 } else { -1 }).into());
        }
    }
    acc
}

/// `d^H_{x,y}(v) = sum_{u in W_H} (-1)^{l(u)} v^{l(u)} d_{ux,y}(v)` for `x`
/// shortest in `W_H x`.
pub fn parabolic_dec_poly(reg: &RegularBlock, h: ParabolicSubset, x: Element, y: Element) -> Result<LaurentPoly> {
    let g = reg.group();
    g.check(x)?;
    g.check(y)?;
    g.check_subset(h)?;
    if !g.is_coset_extreme(x, h, Side::Right, Extremity::Shortest) {
        return Err(OkitError::NotShortestRep(g.format(x)));
    }
    Ok(parabolic_d(reg, &g.parabolic_elements(h), x, y))
}

pub fn singular_dec_poly(reg: &RegularBlock, gs: ParabolicSubset, x: Element, y: Element) -> Result<LaurentPoly> {
    let g = reg.group();
    g.check(x)?;
    g.check(y)?;
    g.check_subset(gs)?;
    for w in [x, y] {
        if !g.in_index_set(IndexKind::WG, gs, ParabolicSubset::EMPTY, w) {
            return Err(OkitError::NotInIndexSet(g.format(w)));
        }
    }
    Ok(reg.d(x, y).clone())
}

/// A quasi-hereditary block (regular, singular, parabolic or
/// singular-parabolic) with its decomposition and Cartan matrices over the
/// block's index set.
pub struct Block {
    spec: BlockSpec,
    regular: Arc<RegularBlock>,
    index: Vec<Element>,
    dec: MultMatrix,
    cartan: OnceLock<MultMatrix>,
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Block").field("spec", &self.spec.to_string()).finish()
    }
}

impl Block {
    pub fn new(regular: Arc<RegularBlock>, spec: BlockSpec) -> Result<Self> {
        let g = regular.group().clone();
        if spec.diagram != g.diagram() {
            return Err(OkitError::InvalidBlockSpec(format!("{spec} does not match group {}", g.diagram())));
        }
        if matches!(spec.flavor, Flavor::B | Flavor::C) {
            return Err(OkitError::UnsupportedFlavor(spec.flavor.to_string()));
        }
        let index = spec.index_set(&g);
        if index.is_empty() {
            return Err(OkitError::EmptyIndexSet);
        }
        let dec = match spec.flavor {
            Flavor::Regular => regular.dec_matrix().clone(),
            Flavor::Singular => regular.dec_matrix().submatrix(&index)?,
            _ => {
                let wh = g.parabolic_elements(spec.h);
                MultMatrix::from_fn(index.clone(), |i, j| parabolic_d(&regular, &wh, index[i], index[j]))
            }
        };
        Ok(Self { spec, regular, index, dec, cartan: OnceLock::new() })
    }

    pub fn spec(&self) -> &BlockSpec {
        &self.spec
    }

    pub fn regular(&self) -> &Arc<RegularBlock> {
        &self.regular
    }

    pub fn group(&self) -> &Arc<CoxeterGroup> {
        self.regular.group()
    }

    pub fn index(&self) -> &[Element] {
        &self.index
    }

    pub fn position(&self, x: Element) -> Result<usize> {
        self.group().check(x)?;
        self.dec.position(x).ok_or_else(|| OkitError::NotInIndexSet(self.group().format(x)))
    }

    /// Rows standards, columns simples, both over the index set.
    pub fn dec_matrix(&self) -> &MultMatrix {
        &self.dec
    }

    /// `C = D^T D` over the index set.
    pub fn cartan(&self) -> &MultMatrix {
        self.cartan.get_or_init(|| {
            let d = &self.dec;
            let n = d.len();
            MultMatrix::from_fn(self.index.clone(), |i, j| {
                let mut acc = LaurentPoly::zero();
                for z in 0..n {
                    let (a, b) = (d.at(z, i), d.at(z, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc += &(a * b);
                    }
                }
                acc
            })
        })
    }
}

/// The parabolically induced BGG complex of `w` in `W_G`: position `i`
/// holds `Delta(x)` generated in degree `i` for every `x` in `wG` with
/// `l(x) = l(w) - l(w0^G) + i`.
pub fn bgg_complex_profile(reg: &RegularBlock, gs: ParabolicSubset, w: Element) -> Result<ComplexProfile> {
    let g = reg.group();
    g.check(w)?;
    g.check_subset(gs)?;
    if !g.in_index_set(IndexKind::WG, gs, ParabolicSubset::EMPTY, w) {
        return Err(OkitError::NotInIndexSet(g.format(w)));
    }
    let n = g.length(g.longest_element(gs));
    let base = g.length(w) - n;
    let mut p = ComplexProfile::new(BlockSpec::regular(g.diagram()).to_string(), w, Linearity::Resolution);
    for x in g.coset(w, gs, Side::Left) {
        p.add_linear(g.length(x) - base, x, 1);
    }
    Ok(p)
}

/// `sum_i (-1)^i v^i sum_{x at i} c(Delta(x))` in the simple basis.
pub fn bgg_euler_char(reg: &RegularBlock, profile: &ComplexProfile) -> Result<CharVector> {
    let mut delta = CharVector::new(Basis::Delta);
    for pos in profile.positions() {
        for (x, shift, k) in profile.summands(pos) {
            let sign = if pos % 2 == 0 { 1 } else { -1 };
            delta.add(x, &LaurentPoly::monomial(-shift, sign * k as i64));
        }
    }
    reg.to_simple(&delta)
}

/// The singular Cartan computed as the regular Cartan restricted to `W_G`
/// and divided by `h_G`. Fails if some entry is not divisible.
pub fn singular_cartan_by_division(reg: &RegularBlock, gs: ParabolicSubset) -> Result<MultMatrix> {
    let g = reg.group();
    let index = g.index_set(IndexKind::WG, gs, ParabolicSubset::EMPTY);
    let sub = reg.cartan_matrix().submatrix(&index)?;
    let h = coinvariant_hilbert(g, gs);
    let rows = (0..sub.len())
        .map(|i| {
            (0..sub.len())
                .map(|j| {
                    sub.at(i, j).div_exact(&h).ok_or_else(|| {
                        OkitError::InvariantBreach(format!(
                            "regular Cartan entry ({}, {}) not divisible by h_G",
                            g.format(index[i]),
                            g.format(index[j])
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    MultMatrix::new(index, rows)
}
