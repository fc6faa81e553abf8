//! Finite-support generalized power series `sum a_g t^g`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::hahn::group::{Bound, GroupElement};
use crate::scalar::Scalar;

/// A finite-support Hahn series; terms are kept sorted by exponent with no
/// zero coefficients, so the zero series is the empty list.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HahnSeries<C> {
    terms: Vec<(GroupElement, C)>,
}

impl<C: Scalar> Default for HahnSeries<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Scalar> HahnSeries<C> {
    pub fn zero() -> Self {
        HahnSeries { terms: Vec::new() }
    }

    pub fn monomial(coeff: C, exp: GroupElement) -> Self {
        if coeff.is_zero() {
            return Self::zero();
        }
        HahnSeries { terms: vec![(exp, coeff)] }
    }

    pub fn constant(coeff: C, rank: usize) -> Self {
        Self::monomial(coeff, GroupElement::zero(rank))
    }

    pub fn one(rank: usize) -> Self {
        Self::constant(C::one(), rank)
    }

    /// `t^g`.
    pub fn t_pow(exp: GroupElement) -> Self {
        Self::monomial(C::one(), exp)
    }

    /// Builds a series from arbitrary terms, merging equal exponents.
    pub fn from_terms<I: IntoIterator<Item = (GroupElement, C)>>(terms: I) -> Self {
        let mut map: BTreeMap<GroupElement, C> = BTreeMap::new();
        for (e, c) in terms {
            accumulate(&mut map, e, c);
        }
        Self::from_map(map)
    }

    fn from_map(map: BTreeMap<GroupElement, C>) -> Self {
        HahnSeries { terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn terms(&self) -> &[(GroupElement, C)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(GroupElement, C)> {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Rank of the exponents, if any term is present.
    pub fn rank(&self) -> Option<usize> {
        self.terms.first().map(|(e, _)| e.rank())
    }

    pub fn leading(&self) -> Option<(&GroupElement, &C)> {
        self.terms.first().map(|(e, c)| (e, c))
    }

    pub fn valuation(&self) -> Bound {
        self.terms.first().map_or(Bound::Infinite, |(e, _)| Bound::Finite(e.clone()))
    }

    pub fn max_exponent(&self) -> Option<&GroupElement> {
        self.terms.last().map(|(e, _)| e)
    }

    pub fn coeff(&self, exp: &GroupElement) -> C {
        self.terms
            .binary_search_by(|(e, _)| e.cmp(exp))
            .map_or_else(|_| C::zero(), |i| self.terms[i].1.clone())
    }

    /// Drops every term with exponent `>= bound`.
    pub fn truncate(&self, bound: &Bound) -> Self {
        match bound {
            Bound::Infinite => self.clone(),
            Bound::Finite(b) => HahnSeries {
                terms: self.terms.iter().take_while(|(e, _)| e < b).cloned().collect(),
            },
        }
    }

    /// Keeps only terms with exponent `<= bound`.
    pub fn truncate_inclusive(&self, bound: &GroupElement) -> Self {
        HahnSeries { terms: self.terms.iter().take_while(|(e, _)| e <= bound).cloned().collect() }
    }

    /// Multiplication by `t^g`.
    pub fn shift(&self, g: &GroupElement) -> Self {
        HahnSeries { terms: self.terms.iter().map(|(e, c)| (e + g, c.clone())).collect() }
    }

    pub fn scale(&self, k: &C) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        HahnSeries { terms: self.terms.iter().map(|(e, c)| (e.clone(), c.clone() * k.clone())).collect() }
    }

    /// Product with every term of exponent `>= bound` discarded.
    pub fn mul_truncated(&self, other: &Self, bound: &Bound) -> Self {
        let mut map: BTreeMap<GroupElement, C> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea + eb;
                if !bound.exceeds(&e) {
                    break;
                }
                accumulate(&mut map, e, ca.clone() * cb.clone());
            }
        }
        Self::from_map(map)
    }

    pub fn pow_truncated(&self, n: u32, bound: &Bound, rank: usize) -> Self {
        let mut acc = Self::one(rank).truncate(bound);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_truncated(&base, bound);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_truncated(&base, bound);
            }
        }
        acc
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> HahnSeries<D> {
        HahnSeries::from_terms(self.terms.iter().map(|(e, c)| (e.clone(), f(c))))
    }

    /// True when every term sits at exponent zero.
    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(e, _)| e.is_zero())
    }
}

fn accumulate<C: Scalar>(map: &mut BTreeMap<GroupElement, C>, e: GroupElement, c: C) {
    if c.is_zero() {
        return;
    }
    match map.get_mut(&e) {
        Some(slot) => {
            let v = slot.clone() + c;
            *slot = v;
        }
        None => {
            map.insert(e, c);
        }
    }
}

impl<C: Scalar> Add for &HahnSeries<C> {
    type Output = HahnSeries<C>;
    fn add(self, rhs: &HahnSeries<C>) -> HahnSeries<C> {
        let mut out = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < rhs.terms.len() {
            let (ea, ca) = &self.terms[i];
            let (eb, cb) = &rhs.terms[j];
            match ea.cmp(eb) {
                std::cmp::Ordering::Less => {
                    out.push((ea.clone(), ca.clone()));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((eb.clone(), cb.clone()));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = ca.clone() + cb.clone();
                    if !c.is_zero() {
                        out.push((ea.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&rhs.terms[j..]);
        HahnSeries { terms: out }
    }
}

impl<C: Scalar> Neg for &HahnSeries<C> {
    type Output = HahnSeries<C>;
    fn neg(self) -> HahnSeries<C> {
        HahnSeries { terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect() }
    }
}

impl<C: Scalar> Sub for &HahnSeries<C> {
    type Output = HahnSeries<C>;
    fn sub(self, rhs: &HahnSeries<C>) -> HahnSeries<C> {
        self + &(-rhs)
    }
}

impl<C: Scalar> Mul for &HahnSeries<C> {
    type Output = HahnSeries<C>;
    fn mul(self, rhs: &HahnSeries<C>) -> HahnSeries<C> {
        self.mul_truncated(rhs, &Bound::Infinite)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<C: Scalar> $tr for HahnSeries<C> {
            type Output = HahnSeries<C>;
            fn $m(self, rhs: HahnSeries<C>) -> HahnSeries<C> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<C: Scalar> Neg for HahnSeries<C> {
    type Output = HahnSeries<C>;
    fn neg(self) -> HahnSeries<C> {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_rational::BigRational;

    fn s(terms: &[(i64, i64, i64)]) -> HahnSeries<BigRational> {
        HahnSeries::from_terms(terms.iter().map(|&(c, n, d)| (GroupElement::ratio(n, d), rat(c, 1))))
    }

    #[test]
    fn cancellation_and_order() {
        let a = s(&[(1, -1, 1), (2, 0, 1)]);
        let b = s(&[(-1, -1, 1), (1, 1, 1)]);
        assert_eq!(&a + &b, s(&[(2, 0, 1), (1, 1, 1)]));
        assert!(s(&[(1, 1, 1), (-1, 1, 1)]).is_zero());
    }

    #[test]
    fn truncated_product() {
        let a = s(&[(1, 0, 1), (1, 1, 1)]);
        let b = s(&[(1, 0, 1), (-1, 1, 1)]);
        assert_eq!(&a * &b, s(&[(1, 0, 1), (-1, 2, 1)]));
        let p = a.pow_truncated(5, &Bound::Finite(GroupElement::int(3)), 1);
        assert_eq!(p, s(&[(1, 0, 1), (5, 1, 1), (10, 2, 1)]));
    }

    #[test]
    fn coefficient_lookup() {
        let a = s(&[(3, 1, 2), (1, 1, 1)]);
        assert_eq!(a.coeff(&GroupElement::ratio(1, 2)), rat(3, 1));
        assert_eq!(a.coeff(&GroupElement::int(0)), rat(0, 1));
        assert_eq!(a.valuation(), Bound::Finite(GroupElement::ratio(1, 2)));
    }
}
