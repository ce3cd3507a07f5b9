//! Sparse Laurent polynomials in one variable with exact integer coefficients.
//!
//! Every multiplicity, character and Hilbert series in the crate is one of
//! these. Zero coefficients are never stored, so structural equality is
//! mathematical equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    terms: BTreeMap<i32, BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 1)
    }

    pub fn monomial(exp: i32, coef: impl Into<BigInt>) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, coef.into());
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i32, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c.into());
        }
        p
    }

    pub fn add_term(&mut self, exp: i32, coef: BigInt) {
        if coef.is_zero() {
            return;
        }
        let slot = self.terms.entry(exp).or_insert_with(BigInt::zero);
        *slot += coef;
        if slot.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coeff(0).is_one()
    }

    pub fn coeff(&self, exp: i32) -> BigInt {
        self.terms.get(&exp).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i32, &BigInt)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Multiplication by `var^k`.
    pub fn shift(&self, k: i32) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// The bar involution `var -> var^-1`.
    pub fn bar(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (-e, c.clone())).collect(),
        }
    }

    /// Substitution `var -> var^k` for a nonzero integer `k`.
    pub fn substitute_power(&self, k: i32) -> Self {
        assert!(k != 0, "substitute_power needs a nonzero exponent");
        Self {
            terms: self.terms.iter().map(|(e, c)| (e * k, c.clone())).collect(),
        }
    }

    /// Substitution `var -> -var`.
    pub fn negate_var(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e, if e % 2 == 0 { c.clone() } else { -c }))
                .collect(),
        }
    }

    /// Value at `var = 1`.
    pub fn eval_one(&self) -> BigInt {
        self.terms.values().sum()
    }

    /// Terms with exponent `< 0`.
    pub fn negative_part(&self) -> Self {
        Self {
            terms: self.terms.range(..0).map(|(e, c)| (*e, c.clone())).collect(),
        }
    }

    /// True when `p(var^-1) == var^-2k * p(var)`, i.e. `p` is palindromic
    /// around `var^k`.
    pub fn is_palindromic_around(&self, k: i32) -> bool {
        self.terms.iter().all(|(e, c)| self.coeff(2 * k - e) == *c)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect(),
        }
    }

    /// Renders the polynomial with ascending exponents, e.g. `1+q`.
    pub fn to_string_ascending(&self, var: &str) -> String {
        render(self.terms.iter(), var)
    }

    /// Renders the polynomial with descending exponents, e.g. `v^2+1`.
    pub fn to_string_descending(&self, var: &str) -> String {
        render(self.terms.iter().rev(), var)
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`
    /// in `Z[var, var^-1]`.
    pub fn div_exact(&self, d: &LaurentPoly) -> Option<Self> {
        let (dlo, dhi) = (d.min_exp()?, d.max_exp()?);
        let lead = d.terms[&dhi].clone();
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some(top) = rem.max_exp() {
            let c = &rem.terms[&top];
            if top - dhi < rem.min_exp()? - dlo || !(c % &lead).is_zero() {
                return None;
            }
            let t = Self::monomial(top - dhi, c / &lead);
            rem -= &(&t * d);
            quot += &t;
        }
        Some(quot)
    }

    /// Exponent/coefficient pairs sorted by exponent.
    pub fn to_pairs(&self) -> Vec<(i32, BigInt)> {
        self.terms.iter().map(|(e, c)| (*e, c.clone())).collect()
    }
}

fn render<'a>(terms: impl Iterator<Item = (&'a i32, &'a BigInt)>, var: &str) -> String {
    let mut out = String::new();
    for (e, c) in terms {
        let neg = c.is_negative();
        let mag = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push(if neg { '-' } else { '+' });
        }
        let unit = mag.is_one();
        match *e {
            0 => out.push_str(&mag.to_string()),
            _ => {
                if !unit {
                    out.push_str(&mag.to_string());
                }
                out.push_str(var);
                if *e != 1 {
                    out.push('^');
                    if *e < 0 {
                        out.push_str(&format!("({e})"));
                    } else {
                        out.push_str(&e.to_string());
                    }
                }
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_descending("v"))
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({})", self)
    }
}

impl From<i64> for LaurentPoly {
    fn from(c: i64) -> Self {
        Self::monomial(0, c)
    }
}

impl Add<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(mut self, rhs: LaurentPoly) -> LaurentPoly {
        self += &rhs;
        self
    }
}

impl AddAssign<&LaurentPoly> for LaurentPoly {
    fn add_assign(&mut self, rhs: &LaurentPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c.clone());
        }
    }
}

impl Sub<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(mut self, rhs: LaurentPoly) -> LaurentPoly {
        self -= &rhs;
        self
    }
}

impl SubAssign<&LaurentPoly> for LaurentPoly {
    fn sub_assign(&mut self, rhs: &LaurentPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, -c.clone());
        }
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

impl Mul<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        &self * &rhs
    }
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.terms.len()))?;
        for (e, c) in &self.terms {
            match c.to_i64() {
                Some(small) => seq.serialize_element(&(*e, small))?,
                None => seq.serialize_element(&(*e, c.to_string()))?,
            }
        }
        seq.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CoefRepr {
    Small(i64),
    Big(String),
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let pairs: Vec<(i32, CoefRepr)> = Vec::deserialize(deserializer)?;
        let mut p = LaurentPoly::zero();
        for (e, c) in pairs {
            let c = match c {
                CoefRepr::Small(x) => BigInt::from(x),
                CoefRepr::Big(s) => s.parse::<BigInt>().map_err(serde::de::Error::custom)?,
            };
            p.add_term(e, c);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(terms: &[(i32, i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(terms.iter().copied())
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let p = poly(&[(1, 2), (1, -2), (0, 1)]);
        assert_eq!(p, LaurentPoly::one());
        assert_eq!(p.num_terms(), 1);
    }

    #[test]
    fn rendering() {
        assert_eq!(poly(&[(0, 1), (1, 1)]).to_string_ascending("q"), "1+q");
        assert_eq!(poly(&[(0, 1), (2, 1)]).to_string_descending("v"), "v^2+1");
        assert_eq!(poly(&[(-1, -3), (0, 1)]).to_string_ascending("v"), "-3v^(-1)+1");
        assert_eq!(LaurentPoly::zero().to_string(), "0");
    }

    #[test]
    fn inexact_division() {
        assert_eq!(poly(&[(0, 1), (2, 2)]).div_exact(&poly(&[(0, 1), (2, 1)])), None);
        assert_eq!(poly(&[(1, 2)]).div_exact(&poly(&[(0, 2)])), Some(poly(&[(1, 1)])));
        assert_eq!(poly(&[(1, 1)]).div_exact(&poly(&[(0, 2)])), None);
    }

    #[test]
    fn negate_var_and_bar() {
        let p = poly(&[(0, 1), (1, 2), (3, -1)]);
        assert_eq!(p.negate_var(), poly(&[(0, 1), (1, -2), (3, 1)]));
        assert_eq!(p.bar(), poly(&[(0, 1), (-1, 2), (-3, -1)]));
        assert_eq!(poly(&[(0, 1), (2, 1)]).is_palindromic_around(1), true);
    }

    #[test]
    fn json_roundtrip_with_big_coefficient() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let mut p = poly(&[(0, 1)]);
        p.add_term(3, big);
        let s = serde_json::to_string(&p).unwrap();
        let back: LaurentPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(p, back);
    }

    fn arb_poly() -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec((-6i32..6, -5i64..5), 0..6).prop_map(LaurentPoly::from_terms)
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a - &b) + &b, a.clone());
        }

        #[test]
        fn exact_division_inverts_multiplication(a in arb_poly(), b in arb_poly()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!((&a * &b).div_exact(&b), Some(a.clone()));
        }

        #[test]
        fn substitutions_are_ring_maps(a in arb_poly(), b in arb_poly()) {
            prop_assert_eq!((&a * &b).bar(), &a.bar() * &b.bar());
            prop_assert_eq!((&a * &b).negate_var(), &a.negate_var() * &b.negate_var());
            prop_assert_eq!((&a * &b).eval_one(), a.eval_one() * b.eval_one());
        }
    }
}
