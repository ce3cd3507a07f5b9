//! Finite Coxeter groups of types A, B/C, D and I2(m).
//!
//! Every element is stored once, in the order (length, ShortLex of its
//! canonical word). The canonical word is the ShortLex-least reduced
//! expression; it is produced directly by breadth-first enumeration with
//! generators tried in increasing order. Products go through a faithful
//! permutation representation (signed permutations for B/C/D, the regular
//! polygon for dihedral groups).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{OkitError, Result};

/// Default cap on the order of a group that may be built.
pub const DEFAULT_ORDER_CAP: u64 = 10_000;

static NEXT_GROUP_ID: AtomicU32 = AtomicU32::new(1);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    A,
    B,
    C,
    D,
    /// Dihedral group of order `2m`.
    I2(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CoxeterDiagram {
    family: Family,
    rank: usize,
}

impl CoxeterDiagram {
    pub fn new(family: Family, rank: usize) -> Result<Self> {
        let ok = match family {
            Family::A | Family::B | Family::C => rank >= 1,
            Family::D => rank >= 2,
            Family::I2(m) => rank == 2 && m >= 2,
        };
        // ranks above 31 do not fit the generator bitsets
        if !ok || rank > 31 {
            return Err(OkitError::NonFiniteType(format!("{family:?} of rank {rank}")));
        }
        Ok(Self { family, rank })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Order of the group, computed from the classification.
    pub fn group_order(&self) -> u64 {
        let n = self.rank as u64;
        let fact = |k: u64| (1..=k).try_fold(1u64, |acc, i| acc.checked_mul(i));
        let order = match self.family {
            Family::A => fact(n + 1),
            Family::B | Family::C => fact(n).and_then(|f| f.checked_mul(1u64 << n.min(63))),
            Family::D => fact(n).and_then(|f| f.checked_mul(1u64 << (n - 1).min(63))),
            Family::I2(m) => Some(2 * m as u64),
        };
        order.unwrap_or(u64::MAX)
    }

    /// Number of points the permutation representation acts on.
    fn degree(&self) -> usize {
        match self.family {
            Family::A => self.rank + 1,
            Family::B | Family::C | Family::D => 2 * self.rank,
            Family::I2(2) => 4,
            Family::I2(m) => m as usize,
        }
    }

    /// Permutations of the simple generators, as image arrays.
    fn generator_perms(&self) -> Vec<Vec<u8>> {
        let deg = self.degree();
        let ident: Vec<u8> = (0..deg as u8).collect();
        let swap = |p: &mut Vec<u8>, a: usize, b: usize| p.swap(a, b);
        let n = self.rank;
        let mut gens = Vec::with_capacity(n);
        match self.family {
            Family::A => {
                for i in 0..n {
                    let mut p = ident.clone();
                    swap(&mut p, i, i + 1);
                    gens.push(p);
                }
            }
            Family::B | Family::C | Family::D => {
                // point k < n is +e_{k+1}, point n + k is -e_{k+1}
                for i in 0..n - 1 {
                    let mut p = ident.clone();
                    swap(&mut p, i, i + 1);
                    swap(&mut p, n + i, n + i + 1);
                    gens.push(p);
                }
                let mut p = ident.clone();
                if self.family == Family::D {
                    swap(&mut p, n - 2, 2 * n - 1);
                    swap(&mut p, n - 1, 2 * n - 2);
                } else {
                    swap(&mut p, n - 1, 2 * n - 1);
                }
                gens.push(p);
            }
            Family::I2(2) => {
                let mut p = ident.clone();
                swap(&mut p, 0, 1);
                gens.push(p);
                let mut p = ident;
                swap(&mut p, 2, 3);
                gens.push(p);
            }
            Family::I2(m) => {
                let m = m as i64;
                let refl = |shift: i64| -> Vec<u8> {
                    (0..m).map(|i| (shift - i).rem_euclid(m) as u8).collect()
                };
                gens.push(refl(0));
                gens.push(refl(1));
            }
        }
        gens
    }

    /// The Coxeter matrix, derived from the orders of products of pairs of
    /// generators in the permutation representation.
    pub fn coxeter_matrix(&self) -> Vec<Vec<u32>> {
        let gens = self.generator_perms();
        let n = gens.len();
        let mut m = vec![vec![1u32; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m[i][j] = perm_order(&compose(&gens[i], &gens[j]));
                }
            }
        }
        m
    }
}

impl fmt::Display for CoxeterDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::A => write!(f, "A{}", self.rank),
            Family::B => write!(f, "B{}", self.rank),
            Family::C => write!(f, "C{}", self.rank),
            Family::D => write!(f, "D{}", self.rank),
            Family::I2(m) => write!(f, "I2({m})"),
        }
    }
}

impl FromStr for CoxeterDiagram {
    type Err = OkitError;

    /// Accepts `A3`, `B2`, `C4`, `D4` and `I2(5)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("I2(").and_then(|r| r.strip_suffix(')')) {
            let m: u32 = rest
                .parse()
                .map_err(|_| OkitError::Parse(format!("bad dihedral label {s:?}")))?;
            return Self::new(Family::I2(m), 2);
        }
        let mut chars = s.chars();
        let fam = chars.next().ok_or_else(|| OkitError::Parse("empty diagram".into()))?;
        let rank: usize = chars
            .as_str()
            .parse()
            .map_err(|_| OkitError::Parse(format!("bad diagram {s:?}")))?;
        let family = match fam.to_ascii_uppercase() {
            'A' => Family::A,
            'B' => Family::B,
            'C' => Family::C,
            'D' => Family::D,
            _ => return Err(OkitError::NonFiniteType(s.to_string())),
        };
        Self::new(family, rank)
    }
}

fn compose(a: &[u8], b: &[u8]) -> Vec<u8> {
    b.iter().map(|&p| a[p as usize]).collect()
}

fn invert(a: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; a.len()];
    for (i, &p) in a.iter().enumerate() {
        out[p as usize] = i as u8;
    }
    out
}

fn perm_order(p: &[u8]) -> u32 {
    let mut q = p.to_vec();
    let mut k = 1;
    while q.iter().enumerate().any(|(i, &x)| x as usize != i) {
        q = compose(p, &q);
        k += 1;
    }
    k
}

/// A set of simple generators, numbered from 1 in the external form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParabolicSubset(u32);

impl ParabolicSubset {
    pub const EMPTY: ParabolicSubset = ParabolicSubset(0);

    /// From 1-based generator indices.
    pub fn from_generators(gens: &[usize]) -> Result<Self> {
        let mut bits = 0u32;
        for &g in gens {
            if g == 0 || g > 31 {
                return Err(OkitError::Parse(format!("generator index {g} out of range")));
            }
            bits |= 1 << (g - 1);
        }
        Ok(Self(bits))
    }

    pub fn full(rank: usize) -> Self {
        Self(((1u64 << rank) - 1) as u32)
    }

    pub fn from_bits(bits: u32) -> Self {
        Self(bits)
    }

    pub fn bits(&self) -> u32 {
        self.0
    }

    /// Membership test for a 0-based generator.
    pub fn contains(&self, gen0: usize) -> bool {
        self.0 >> gen0 & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    /// 0-based generator indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..32).filter(move |i| self.contains(*i))
    }

    pub fn is_subset_of(&self, other: &ParabolicSubset) -> bool {
        self.0 & !other.0 == 0
    }

    /// All subsets of `{1..rank}`.
    pub fn all(rank: usize) -> impl Iterator<Item = ParabolicSubset> {
        (0..1u32 << rank).map(ParabolicSubset)
    }

    fn check_rank(&self, rank: usize) -> Result<()> {
        if self.0 >> rank != 0 {
            return Err(OkitError::Parse(format!(
                "generator subset {self} exceeds rank {rank}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ParabolicSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|i| (i + 1).to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for ParabolicSubset {
    type Err = OkitError;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_generators(&parse_index_list(s)?)
    }
}

/// Parses `"1,2,1"` (or the empty string) into 1-based indices.
pub fn parse_index_list(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() || s == "e" {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| OkitError::Parse(format!("bad generator index {t:?} in {s:?}")))
        })
        .collect()
}

/// A group element. Cheap to copy; carries the identity of its group so
/// that mixing elements of different groups is detected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    gid: u32,
    idx: u32,
}

impl Element {
    /// Position in the (length, ShortLex) order of the group.
    pub fn index(&self) -> usize {
        self.idx as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Cosets `wG`.
    Left,
    /// Cosets `Gw`.
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremity {
    Shortest,
    Longest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IndexKind {
    /// Longest representatives of `W/G`.
    WG,
    /// Longest in `wG` and shortest in `Hw`.
    WGH,
    /// Longest in `wG` and longest in `Hw`.
    VGH,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Involution {
    /// `w -> w^-1 w0`
    InvW0,
    /// `w -> w0 w`
    W0Left,
    /// `w -> w0 w w0`
    ConjW0,
    /// `w -> w0 w^-1 w0`
    RingelKoszul,
}

pub struct CoxeterGroup {
    id: u32,
    diagram: CoxeterDiagram,
    coxeter_matrix: Vec<Vec<u32>>,
    perms: Vec<Vec<u8>>,
    words: Vec<Vec<u8>>,
    lengths: Vec<u32>,
    lookup: HashMap<Vec<u8>, u32>,
    rmul: Vec<u32>,
    lmul: Vec<u32>,
    inverse: Vec<u32>,
    right_desc: Vec<u32>,
    left_desc: Vec<u32>,
    bruhat: Vec<Vec<u64>>,
    lower_covers: Vec<Vec<u32>>,
    w0: u32,
}

impl fmt::Debug for CoxeterGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoxeterGroup")
            .field("diagram", &self.diagram.to_string())
            .field("order", &self.order())
            .finish()
    }
}

impl CoxeterGroup {
    pub fn build(diagram: CoxeterDiagram) -> Result<Arc<Self>> {
        Self::build_with_cap(diagram, DEFAULT_ORDER_CAP)
    }

    pub fn build_with_cap(diagram: CoxeterDiagram, cap: u64) -> Result<Arc<Self>> {
        let order = diagram.group_order();
        if order > cap {
            return Err(OkitError::RankLimit { order, cap });
        }
        let coxeter_matrix = diagram.coxeter_matrix();
        validate_coxeter_matrix(&coxeter_matrix)?;

        let gens = diagram.generator_perms();
        let rank = gens.len();
        let ident: Vec<u8> = (0..diagram.degree() as u8).collect();

        let mut perms = vec![ident.clone()];
        let mut parent: Vec<(u32, u8)> = vec![(u32::MAX, 0)];
        let mut lengths = vec![0u32];
        let mut lookup: HashMap<Vec<u8>, u32> = HashMap::new();
        lookup.insert(ident, 0);
        let mut rmul = Vec::new();
        // breadth-first: discovery order is (length, ShortLex)
        let mut head = 0;
        while head < perms.len() {
            for (s, g) in gens.iter().enumerate() {
                let next = compose(&perms[head], g);
                let idx = match lookup.get(&next) {
                    Some(&i) => i,
                    None => {
                        let i = perms.len() as u32;
                        lookup.insert(next.clone(), i);
                        perms.push(next);
                        parent.push((head as u32, s as u8));
                        lengths.push(lengths[head] + 1);
                        i
                    }
                };
                rmul.push(idx);
            }
            head += 1;
        }
        let n = perms.len();
        if n as u64 != order {
            return Err(OkitError::InvariantBreach(format!(
                "enumerated {n} elements for {diagram}, expected {order}"
            )));
        }

        let mut words: Vec<Vec<u8>> = Vec::with_capacity(n);
        words.push(Vec::new());
        for i in 1..n {
            let (p, s) = parent[i];
            let mut w = words[p as usize].clone();
            w.push(s);
            words.push(w);
        }

        let mut lmul = Vec::with_capacity(n * rank);
        let mut inverse = Vec::with_capacity(n);
        for p in &perms {
            for g in &gens {
                lmul.push(lookup[&compose(g, p)]);
            }
            inverse.push(lookup[&invert(p)]);
        }

        let mut right_desc = vec![0u32; n];
        let mut left_desc = vec![0u32; n];
        for w in 0..n {
            for s in 0..rank {
                if lengths[rmul[w * rank + s] as usize] < lengths[w] {
                    right_desc[w] |= 1 << s;
                }
                if lengths[lmul[w * rank + s] as usize] < lengths[w] {
                    left_desc[w] |= 1 << s;
                }
            }
        }

        // Bruhat ideals from the subword property along canonical words:
        // [e, ys] together with its right translate by s is [e, y].
        let blocks = n.div_ceil(64);
        let mut bruhat: Vec<Vec<u64>> = Vec::with_capacity(n);
        let mut first = vec![0u64; blocks];
        first[0] = 1;
        bruhat.push(first);
        for y in 1..n {
            let (p, s) = parent[y];
            let mut set = bruhat[p as usize].clone();
            for x in iter_bits(&bruhat[p as usize]) {
                let xs = rmul[x * rank + s as usize] as usize;
                set[xs / 64] |= 1 << (xs % 64);
            }
            bruhat.push(set);
        }

        // Lower covers via reflections: x = yt with length dropping by one.
        let mut reflections: HashSet<u32> = HashSet::new();
        for p in &perms {
            let pinv = invert(p);
            for g in &gens {
                reflections.insert(lookup[&compose(&compose(p, g), &pinv)]);
            }
        }
        let mut reflections: Vec<u32> = reflections.into_iter().collect();
        reflections.sort_unstable();
        let mut lower_covers = vec![Vec::new(); n];
        for y in 0..n {
            for &t in &reflections {
                let x = lookup[&compose(&perms[y], &perms[t as usize])] as usize;
                if lengths[x] + 1 == lengths[y] {
                    lower_covers[y].push(x as u32);
                }
            }
            lower_covers[y].sort_unstable();
        }

        let w0 = (n - 1) as u32;
        Ok(Arc::new(Self {
            id: NEXT_GROUP_ID.fetch_add(1, Ordering::Relaxed),
            diagram,
            coxeter_matrix,
            perms,
            words,
            lengths,
            lookup,
            rmul,
            lmul,
            inverse,
            right_desc,
            left_desc,
            bruhat,
            lower_covers,
            w0,
        }))
    }

    pub fn diagram(&self) -> CoxeterDiagram {
        self.diagram
    }

    pub fn coxeter_matrix(&self) -> &[Vec<u32>] {
        &self.coxeter_matrix
    }

    pub fn rank(&self) -> usize {
        self.diagram.rank
    }

    pub fn order(&self) -> usize {
        self.perms.len()
    }

    fn elem(&self, idx: usize) -> Element {
        Element { gid: self.id, idx: idx as u32 }
    }

    /// Element by its position in the (length, ShortLex) order.
    pub fn element(&self, idx: usize) -> Element {
        assert!(idx < self.order(), "element index {idx} out of range");
        self.elem(idx)
    }

    pub fn elements(&self) -> impl DoubleEndedIterator<Item = Element> + ExactSizeIterator + '_ {
        (0..self.order()).map(move |i| self.elem(i))
    }

    pub fn identity(&self) -> Element {
        self.elem(0)
    }

    pub fn longest(&self) -> Element {
        self.elem(self.w0 as usize)
    }

    /// The simple reflection with 1-based index `i`.
    pub fn generator(&self, i: usize) -> Result<Element> {
        if i == 0 || i > self.rank() {
            return Err(OkitError::Parse(format!("no generator {i} in {}", self.diagram)));
        }
        Ok(self.right_mul_gen(self.identity(), i - 1))
    }

    pub fn owns(&self, x: Element) -> bool {
        x.gid == self.id && (x.idx as usize) < self.order()
    }

    pub fn check(&self, x: Element) -> Result<Element> {
        if self.owns(x) {
            Ok(x)
        } else {
            Err(OkitError::GroupMismatch)
        }
    }

    pub fn length(&self, x: Element) -> usize {
        self.lengths[x.index()] as usize
    }

    /// Canonical word, 1-based generator indices.
    pub fn word(&self, x: Element) -> Vec<usize> {
        self.words[x.index()].iter().map(|&s| s as usize + 1).collect()
    }

    /// Comma-separated canonical word; the identity is the empty string.
    pub fn format(&self, x: Element) -> String {
        let parts: Vec<String> = self.word(x).iter().map(|s| s.to_string()).collect();
        parts.join(",")
    }

    /// Label used in human-readable tables, `e` for the identity.
    pub fn label(&self, x: Element) -> String {
        if x.idx == 0 {
            "e".to_string()
        } else {
            self.format(x)
        }
    }

    /// Evaluates an arbitrary (not necessarily reduced) word.
    pub fn from_word(&self, word: &[usize]) -> Result<Element> {
        let mut x = self.identity();
        for &s in word {
            if s == 0 || s > self.rank() {
                return Err(OkitError::Parse(format!(
                    "generator {s} out of range for {}",
                    self.diagram
                )));
            }
            x = self.right_mul_gen(x, s - 1);
        }
        Ok(x)
    }

    pub fn parse(&self, s: &str) -> Result<Element> {
        self.from_word(&parse_index_list(s)?)
    }

    pub fn product(&self, x: Element, y: Element) -> Result<Element> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.mul(x, y))
    }

    pub(crate) fn mul(&self, x: Element, y: Element) -> Element {
        let p = compose(&self.perms[x.index()], &self.perms[y.index()]);
        self.elem(self.lookup[&p] as usize)
    }

    pub fn inverse(&self, x: Element) -> Element {
        self.elem(self.inverse[x.index()] as usize)
    }

    /// `x * s` for a 0-based generator `s`.
    pub fn right_mul_gen(&self, x: Element, s: usize) -> Element {
        self.elem(self.rmul[x.index() * self.rank() + s] as usize)
    }

    /// `s * x` for a 0-based generator `s`.
    pub fn left_mul_gen(&self, x: Element, s: usize) -> Element {
        self.elem(self.lmul[x.index() * self.rank() + s] as usize)
    }

    pub fn right_descents(&self, x: Element) -> ParabolicSubset {
        ParabolicSubset(self.right_desc[x.index()])
    }

    pub fn left_descents(&self, x: Element) -> ParabolicSubset {
        ParabolicSubset(self.left_desc[x.index()])
    }

    /// Bruhat order, checked variant.
    pub fn bruhat_leq(&self, x: Element, y: Element) -> Result<bool> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.le(x, y))
    }

    /// Bruhat order for elements known to belong to this group.
    pub fn le(&self, x: Element, y: Element) -> bool {
        debug_assert!(self.owns(x) && self.owns(y));
        let xi = x.index();
        self.bruhat[y.index()][xi / 64] >> (xi % 64) & 1 == 1
    }

    /// All `x <= y`, in element order.
    pub fn lower_interval(&self, y: Element) -> impl Iterator<Item = Element> + '_ {
        iter_bits(&self.bruhat[y.index()]).map(move |i| self.elem(i))
    }

    pub fn lower_covers(&self, y: Element) -> impl Iterator<Item = Element> + '_ {
        self.lower_covers[y.index()].iter().map(move |&i| self.elem(i as usize))
    }

    /// Bruhat order as reachability in the cover graph (independent of the
    /// subword tables).
    pub fn bruhat_leq_by_covers(&self, x: Element, y: Element) -> bool {
        let target = x.index();
        let mut seen = vec![false; self.order()];
        let mut stack = vec![y.index()];
        while let Some(z) = stack.pop() {
            if z == target {
                return true;
            }
            if seen[z] || self.lengths[z] <= self.lengths[target] {
                continue;
            }
            seen[z] = true;
            stack.extend(self.lower_covers[z].iter().map(|&c| c as usize));
        }
        false
    }

    /// Elements of the parabolic subgroup generated by `g`.
    pub fn parabolic_elements(&self, g: ParabolicSubset) -> Vec<Element> {
        self.elements()
            .filter(|&w| self.words[w.index()].iter().all(|&s| g.contains(s as usize)))
            .collect()
    }

    pub fn longest_element(&self, g: ParabolicSubset) -> Element {
        let mut w = self.identity();
        loop {
            let up = g.iter().find(|&s| s < self.rank() && !self.right_descents(w).contains(s));
            match up {
                Some(s) => w = self.right_mul_gen(w, s),
                None => return w,
            }
        }
    }

    /// Moves `w` to the extremal element of its coset `wG` (side Left) or
    /// `Gw` (side Right).
    pub fn coset_extreme(
        &self,
        w: Element,
        g: ParabolicSubset,
        side: Side,
        extremity: Extremity,
    ) -> Element {
        let mut w = w;
        loop {
            let desc = match side {
                Side::Left => self.right_descents(w),
                Side::Right => self.left_descents(w),
            };
            let step = g.iter().find(|&s| match extremity {
                Extremity::Shortest => desc.contains(s),
                Extremity::Longest => !desc.contains(s),
            });
            match step {
                Some(s) => {
                    w = match side {
                        Side::Left => self.right_mul_gen(w, s),
                        Side::Right => self.left_mul_gen(w, s),
                    }
                }
                None => return w,
            }
        }
    }

    pub fn is_coset_extreme(
        &self,
        w: Element,
        g: ParabolicSubset,
        side: Side,
        extremity: Extremity,
    ) -> bool {
        let desc = match side {
            Side::Left => self.right_descents(w),
            Side::Right => self.left_descents(w),
        };
        match extremity {
            Extremity::Shortest => desc.bits() & g.bits() == 0,
            Extremity::Longest => g.is_subset_of(&desc),
        }
    }

    pub fn coset_reps(&self, g: ParabolicSubset, side: Side, extremity: Extremity) -> Vec<Element> {
        self.elements()
            .filter(|&w| self.is_coset_extreme(w, g, side, extremity))
            .collect()
    }

    /// The full coset `wG` (side Left) or `Gw` (side Right), in element order.
    pub fn coset(&self, w: Element, g: ParabolicSubset, side: Side) -> Vec<Element> {
        let mut out: Vec<Element> = self
            .parabolic_elements(g)
            .into_iter()
            .map(|u| match side {
                Side::Left => self.mul(w, u),
                Side::Right => self.mul(u, w),
            })
            .collect();
        out.sort();
        out
    }

    pub fn index_set(&self, kind: IndexKind, g: ParabolicSubset, h: ParabolicSubset) -> Vec<Element> {
        self.elements()
            .filter(|&w| self.in_index_set(kind, g, h, w))
            .collect()
    }

    pub fn in_index_set(&self, kind: IndexKind, g: ParabolicSubset, h: ParabolicSubset, w: Element) -> bool {
        let in_wg = self.is_coset_extreme(w, g, Side::Left, Extremity::Longest);
        in_wg
            && match kind {
                IndexKind::WG => true,
                IndexKind::WGH => self.is_coset_extreme(w, h, Side::Right, Extremity::Shortest),
                IndexKind::VGH => self.is_coset_extreme(w, h, Side::Right, Extremity::Longest),
            }
    }

    pub fn involution(&self, kind: Involution, x: Element) -> Element {
        let w0 = self.longest();
        match kind {
            Involution::InvW0 => self.mul(self.inverse(x), w0),
            Involution::W0Left => self.mul(w0, x),
            Involution::ConjW0 => self.mul(self.mul(w0, x), w0),
            Involution::RingelKoszul => self.mul(self.mul(w0, self.inverse(x)), w0),
        }
    }

    /// `w0 G w0` as a generator subset. Conjugation by `w0` permutes the
    /// simple reflections.
    pub fn conjugate_by_w0(&self, g: ParabolicSubset) -> ParabolicSubset {
        let w0 = self.longest();
        let mut bits = 0u32;
        for s in g.iter() {
            let c = self.mul(self.mul(w0, self.generator(s + 1).unwrap()), w0);
            let img = self.word(c);
            debug_assert_eq!(img.len(), 1);
            bits |= 1 << (img[0] - 1);
        }
        ParabolicSubset(bits)
    }

    /// Validates that a subset refers only to generators of this group.
    pub fn check_subset(&self, g: ParabolicSubset) -> Result<ParabolicSubset> {
        g.check_rank(self.rank())?;
        Ok(g)
    }
}

fn validate_coxeter_matrix(m: &[Vec<u32>]) -> Result<()> {
    for (i, row) in m.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            let ok = if i == j { x == 1 } else { x >= 2 && m[j][i] == x };
            if !ok {
                return Err(OkitError::NonFiniteType(format!(
                    "invalid Coxeter matrix entry m({},{}) = {x}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

fn iter_bits(set: &[u64]) -> impl Iterator<Item = usize> + '_ {
    set.iter().enumerate().flat_map(|(b, &word)| {
        let mut w = word;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let t = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(b * 64 + t)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(s: &str) -> Arc<CoxeterGroup> {
        CoxeterGroup::build(s.parse().unwrap()).unwrap()
    }

    fn el(g: &CoxeterGroup, w: &str) -> Element {
        g.parse(w).unwrap()
    }

    fn brute_order(diagram: &str) -> usize {
        let d: CoxeterDiagram = diagram.parse().unwrap();
        let gens = d.generator_perms();
        let mut seen: HashSet<Vec<u8>> = HashSet::new();
        let mut stack = vec![(0..d.degree() as u8).collect::<Vec<u8>>()];
        while let Some(p) = stack.pop() {
            if seen.insert(p.clone()) {
                for g in &gens {
                    stack.push(compose(&p, g));
                }
            }
        }
        seen.len()
    }

    #[test]
    fn orders_match_classification() {
        for d in ["A1", "A2", "A3", "A4", "B2", "B3", "C3", "D2", "D3", "D4", "I2(2)", "I2(5)", "I2(6)"] {
            let g = group(d);
            assert_eq!(g.order(), brute_order(d), "{d}");
            assert_eq!(g.order() as u64, g.diagram().group_order(), "{d}");
        }
        assert_eq!(group("A3").order(), 24);
        assert_eq!(group("B3").order(), 48);
        assert_eq!(group("D4").order(), 192);
    }

    #[test]
    fn small_groups() {
        let a1 = group("A1");
        assert_eq!(a1.order(), 2);
        let labels: Vec<String> = a1.elements().map(|w| a1.format(w)).collect();
        assert_eq!(labels, vec!["", "1"]);

        let a2 = group("A2");
        assert_eq!(a2.order(), 6);
        assert_eq!(a2.format(a2.longest()), "1,2,1");

        let b2 = group("B2");
        assert_eq!(b2.order(), 8);
        assert_eq!(b2.length(b2.longest()), 4);
    }

    #[test]
    fn coxeter_matrices() {
        assert_eq!(group("A3").coxeter_matrix(), &[vec![1, 3, 2], vec![3, 1, 3], vec![2, 3, 1]]);
        assert_eq!(group("B3").coxeter_matrix()[1][2], 4);
        let d4 = group("D4");
        let m = d4.coxeter_matrix();
        assert_eq!((m[1][3], m[2][3], m[0][3]), (3, 2, 2));
        assert_eq!(group("I2(5)").coxeter_matrix()[0][1], 5);
    }

    #[test]
    fn rejects_unsupported_types() {
        assert!(matches!("E6".parse::<CoxeterDiagram>(), Err(OkitError::NonFiniteType(_))));
        assert!(matches!("I2(1)".parse::<CoxeterDiagram>(), Err(OkitError::NonFiniteType(_))));
        assert!(matches!("A0".parse::<CoxeterDiagram>(), Err(OkitError::NonFiniteType(_))));
        assert!(matches!("X".parse::<CoxeterDiagram>(), Err(OkitError::Parse(_))));
    }

    #[test]
    fn order_cap() {
        let d: CoxeterDiagram = "A7".parse().unwrap();
        assert_eq!(
            CoxeterGroup::build(d).unwrap_err(),
            OkitError::RankLimit { order: 40320, cap: DEFAULT_ORDER_CAP }
        );
        assert!(CoxeterGroup::build_with_cap("A2".parse().unwrap(), 5).is_err());
    }

    #[test]
    fn products() {
        let a2 = group("A2");
        let (e, s1) = (a2.identity(), el(&a2, "1"));
        for w in a2.elements() {
            assert_eq!(a2.product(e, w).unwrap(), w);
        }
        assert_eq!(a2.product(s1, s1).unwrap(), e);
        assert_eq!(a2.product(el(&a2, "1,2"), s1).unwrap(), a2.longest());
        let other = group("A2");
        assert_eq!(a2.product(s1, other.identity()), Err(OkitError::GroupMismatch));
    }

    #[test]
    fn canonical_words_are_shortlex_least() {
        for d in ["A3", "B3", "D4", "I2(5)"] {
            let g = group(d);
            // brute force: every reduced word of w is >= its canonical word
            for w in g.elements() {
                let word = g.word(w);
                assert_eq!(word.len(), g.length(w));
                assert_eq!(g.from_word(&word).unwrap(), w);
                let mut x = g.identity();
                let mut greedy = Vec::new();
                // ShortLex-least word via smallest left descents
                let mut rest = w;
                while rest != g.identity() {
                    let s = g.left_descents(rest).iter().next().unwrap();
                    greedy.push(s + 1);
                    rest = g.left_mul_gen(rest, s);
                    x = g.right_mul_gen(x, s);
                }
                assert_eq!(greedy, word, "{d} {}", g.format(w));
                assert_eq!(x, w);
            }
        }
    }

    #[test]
    fn bruhat_examples() {
        let a2 = group("A2");
        for w in a2.elements() {
            assert!(a2.le(a2.identity(), w));
        }
        assert!(!a2.bruhat_leq(el(&a2, "1"), el(&a2, "2")).unwrap());
        assert!(a2.bruhat_leq(el(&a2, "1"), el(&a2, "2,1")).unwrap());
    }

    #[test]
    fn bruhat_subword_matches_cover_reachability() {
        for d in ["A1", "A2", "A3", "B2", "I2(5)"] {
            let g = group(d);
            for x in g.elements() {
                for y in g.elements() {
                    assert_eq!(g.le(x, y), g.bruhat_leq_by_covers(x, y), "{d}");
                }
            }
            for y in g.elements() {
                for c in g.lower_covers(y) {
                    assert_eq!(g.length(c) + 1, g.length(y));
                }
            }
        }
    }

    #[test]
    fn length_distribution_is_symmetric() {
        for d in ["A3", "B3", "D4"] {
            let g = group(d);
            let top = g.length(g.longest());
            let mut counts = vec![0usize; top + 1];
            for w in g.elements() {
                counts[g.length(w)] += 1;
            }
            let rev: Vec<usize> = counts.iter().rev().copied().collect();
            assert_eq!(counts, rev, "{d}");
        }
    }

    #[test]
    fn longest_elements() {
        let a2 = group("A2");
        assert_eq!(a2.longest_element(ParabolicSubset::EMPTY), a2.identity());
        assert_eq!(a2.format(a2.longest_element("1,2".parse().unwrap())), "1,2,1");
        let a3 = group("A3");
        let w = a3.longest_element("1,3".parse().unwrap());
        assert_eq!(a3.format(w), "1,3");
        assert_eq!(a3.mul(w, w), a3.identity());
    }

    #[test]
    fn coset_representatives() {
        let a1 = group("A1");
        let g1: ParabolicSubset = "1".parse().unwrap();
        let fmt = |g: &CoxeterGroup, v: Vec<Element>| v.iter().map(|&w| g.format(w)).collect::<Vec<_>>();
        assert_eq!(fmt(&a1, a1.coset_reps(g1, Side::Left, Extremity::Longest)), vec!["1"]);
        let a2 = group("A2");
        assert_eq!(
            fmt(&a2, a2.coset_reps(g1, Side::Left, Extremity::Longest)),
            vec!["1", "2,1", "1,2,1"]
        );
        assert_eq!(
            fmt(&a2, a2.coset_reps(g1, Side::Right, Extremity::Shortest)),
            vec!["", "2", "2,1"]
        );
    }

    #[test]
    fn coset_structure() {
        for d in ["A3", "B3"] {
            let g = group(d);
            for sub in ParabolicSubset::all(g.rank()) {
                let w0g = g.longest_element(sub);
                let size = g.parabolic_elements(sub).len();
                let short = g.coset_reps(sub, Side::Left, Extremity::Shortest);
                assert_eq!(short.len() * size, g.order());
                for &u in &short {
                    let long = g.coset_extreme(u, sub, Side::Left, Extremity::Longest);
                    assert_eq!(long, g.mul(u, w0g));
                    assert_eq!(g.length(long), g.length(u) + g.length(w0g));
                    let coset = g.coset(u, sub, Side::Left);
                    assert_eq!(coset.iter().filter(|&&x| g.length(x) == g.length(u)).count(), 1);
                    assert_eq!(coset.iter().filter(|&&x| g.length(x) == g.length(long)).count(), 1);
                }
            }
        }
    }

    #[test]
    fn index_sets() {
        let a2 = group("A2");
        let (g1, g2): (ParabolicSubset, ParabolicSubset) = ("1".parse().unwrap(), "2".parse().unwrap());
        assert_eq!(a2.index_set(IndexKind::WG, ParabolicSubset::EMPTY, ParabolicSubset::EMPTY).len(), 6);
        let wgh = a2.index_set(IndexKind::WGH, g1, g2);
        let wg = a2.index_set(IndexKind::WG, g1, ParabolicSubset::EMPTY);
        let hshort = a2.coset_reps(g2, Side::Right, Extremity::Shortest);
        let expected: Vec<Element> = wg.iter().copied().filter(|w| hshort.contains(w)).collect();
        assert_eq!(wgh, expected);
        assert_eq!(wgh.iter().map(|&w| a2.format(w)).collect::<Vec<_>>(), vec!["1"]);

        let a1 = group("A1");
        let v = a1.index_set(IndexKind::VGH, ParabolicSubset::EMPTY, "1".parse().unwrap());
        assert_eq!(v, vec![a1.longest()]);
    }

    #[test]
    fn index_set_intersection_rule() {
        for d in ["A3", "B3"] {
            let g = group(d);
            for gs in ParabolicSubset::all(g.rank()) {
                for hs in ParabolicSubset::all(g.rank()) {
                    let wg = g.index_set(IndexKind::WG, gs, hs);
                    let short = g.coset_reps(hs, Side::Right, Extremity::Shortest);
                    let expected: Vec<Element> = wg.iter().copied().filter(|w| short.contains(w)).collect();
                    assert_eq!(g.index_set(IndexKind::WGH, gs, hs), expected);
                }
            }
        }
    }

    #[test]
    fn involutions() {
        let a1 = group("A1");
        let s = a1.longest();
        assert_eq!(a1.involution(Involution::InvW0, a1.identity()), s);
        assert_eq!(a1.involution(Involution::InvW0, s), a1.identity());
        let a2 = group("A2");
        assert_eq!(a2.involution(Involution::RingelKoszul, el(&a2, "1")), el(&a2, "2"));
        assert_eq!(a2.involution(Involution::W0Left, a2.longest()), a2.identity());
        for d in ["A3", "B2", "D4"] {
            let g = group(d);
            for w in g.elements() {
                let i = |k, x| g.involution(k, x);
                assert_eq!(i(Involution::InvW0, i(Involution::InvW0, w)), i(Involution::ConjW0, w));
                assert_eq!(i(Involution::RingelKoszul, i(Involution::RingelKoszul, w)), w);
            }
        }
    }

    #[test]
    fn conjugation_by_w0_on_generators() {
        let a2 = group("A2");
        assert_eq!(a2.conjugate_by_w0("1".parse().unwrap()), "2".parse().unwrap());
        let b2 = group("B2");
        assert_eq!(b2.conjugate_by_w0("1".parse().unwrap()), "1".parse().unwrap());
    }

    #[test]
    fn element_string_roundtrip() {
        let b3 = group("B3");
        for w in b3.elements() {
            assert_eq!(b3.parse(&b3.format(w)).unwrap(), w);
        }
        assert!(b3.parse("1,4").is_err());
    }
}
