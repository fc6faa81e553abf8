//! The value group `Q^d` under the lexicographic order.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::parse_rational;

/// An element of `Q^d`, ordered lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct GroupElement {
    coords: Vec<BigRational>,
}

impl GroupElement {
    pub fn new(coords: Vec<BigRational>) -> Self {
        assert!(!coords.is_empty(), "value group rank must be at least one");
        GroupElement { coords }
    }

    pub fn zero(rank: usize) -> Self {
        Self::new(vec![BigRational::zero(); rank])
    }

    /// Rank-one element.
    pub fn rational(q: BigRational) -> Self {
        Self::new(vec![q])
    }

    pub fn int(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::rational(BigRational::new(n.into(), d.into()))
    }

    /// `q * e_1`: the rank-`rank` element with `q` in the leading coordinate.
    pub fn leading(q: BigRational, rank: usize) -> Self {
        let mut coords = vec![BigRational::zero(); rank];
        coords[0] = q;
        Self::new(coords)
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn sign(&self) -> Ordering {
        self.coords
            .iter()
            .find(|c| !c.is_zero())
            .map_or(Ordering::Equal, |c| if c.is_positive() { Ordering::Greater } else { Ordering::Less })
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.sign() == Ordering::Less
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self::new(self.coords.iter().map(|c| c * q).collect())
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(&BigRational::from_integer(k.into()))
    }

    pub fn div_int(&self, n: i64) -> Self {
        self.scale(&BigRational::new(BigInt::one(), n.into()))
    }

    /// Smallest `k >= 0` with `k * self >= target`, for `self > 0`.
    /// `None` when no multiple reaches the target (only possible for rank > 1).
    pub fn steps_to_reach(&self, target: &GroupElement) -> Option<u64> {
        assert!(self.is_positive(), "step must be positive");
        if !target.is_positive() {
            return Some(0);
        }
        let i = self.coords.iter().position(|c| !c.is_zero())?;
        let j = target.coords.iter().position(|c| !c.is_zero())?;
        match j.cmp(&i) {
            Ordering::Less => None,
            Ordering::Greater => Some(1),
            Ordering::Equal => {
                let q = &target.coords[i] / &self.coords[i];
                let mut k = q.ceil().to_integer().to_u64()?;
                if &self.scale_int(k as i64) < target {
                    k += 1;
                }
                Some(k)
            }
        }
    }

    /// Least common denominator of the coordinates.
    pub fn denominator(&self) -> BigInt {
        self.coords.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    pub fn check_rank(&self, other: &GroupElement) -> Result<()> {
        if self.rank() == other.rank() {
            Ok(())
        } else {
            Err(Error::RankMismatch(self.rank(), other.rank()))
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let coords: Option<Vec<_>> = s.split(',').map(parse_rational).collect();
        match coords {
            Some(c) if !c.is_empty() => Ok(Self::new(c)),
            _ => Err(Error::SeriesSyntax(format!("bad exponent `{s}`"))),
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl Add for &GroupElement {
    type Output = GroupElement;
    fn add(self, rhs: &GroupElement) -> GroupElement {
        assert_eq!(self.rank(), rhs.rank(), "value group rank mismatch");
        GroupElement::new(self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &GroupElement {
    type Output = GroupElement;
    fn sub(self, rhs: &GroupElement) -> GroupElement {
        assert_eq!(self.rank(), rhs.rank(), "value group rank mismatch");
        GroupElement::new(self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &GroupElement {
    type Output = GroupElement;
    fn neg(self) -> GroupElement {
        GroupElement::new(self.coords.iter().map(|c| -c).collect())
    }
}

impl Add for GroupElement {
    type Output = GroupElement;
    fn add(self, rhs: GroupElement) -> GroupElement {
        &self + &rhs
    }
}

impl Sub for GroupElement {
    type Output = GroupElement;
    fn sub(self, rhs: GroupElement) -> GroupElement {
        &self - &rhs
    }
}

impl Neg for GroupElement {
    type Output = GroupElement;
    fn neg(self) -> GroupElement {
        -&self
    }
}

/// A group element or `+infinity`; used for valuations and precisions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Bound {
    Finite(GroupElement),
    Infinite,
}

impl Bound {
    pub fn finite(&self) -> Option<&GroupElement> {
        match self {
            Bound::Finite(g) => Some(g),
            Bound::Infinite => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn shift(&self, g: &GroupElement) -> Bound {
        match self {
            Bound::Finite(p) => Bound::Finite(p + g),
            Bound::Infinite => Bound::Infinite,
        }
    }

    pub fn plus(&self, other: &Bound) -> Bound {
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a + b),
            _ => Bound::Infinite,
        }
    }

    /// Strict comparison against a group element.
    pub fn exceeds(&self, g: &GroupElement) -> bool {
        match self {
            Bound::Finite(p) => p > g,
            Bound::Infinite => true,
        }
    }
}

impl From<GroupElement> for Bound {
    fn from(g: GroupElement) -> Self {
        Bound::Finite(g)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(g) => write!(f, "{g}"),
            Bound::Infinite => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g2(a: i64, b: i64) -> GroupElement {
        GroupElement::new(vec![BigRational::from_integer(a.into()), BigRational::from_integer(b.into())])
    }

    #[test]
    fn lex_order() {
        assert!(g2(0, 5) < g2(1, -7));
        assert!(g2(1, 0) > g2(0, 100));
        assert!(g2(0, 1).is_positive());
        assert!(Bound::Finite(g2(9, 9)) < Bound::Infinite);
    }

    #[test]
    fn reaching_multiples() {
        let half = GroupElement::ratio(1, 2);
        assert_eq!(half.steps_to_reach(&GroupElement::int(3)), Some(6));
        assert_eq!(half.steps_to_reach(&GroupElement::ratio(5, 4)), Some(3));
        assert_eq!(half.steps_to_reach(&GroupElement::int(-1)), Some(0));
        assert_eq!(g2(0, 1).steps_to_reach(&g2(1, 0)), None);
        assert_eq!(g2(0, 2).steps_to_reach(&g2(0, 5)), Some(3));
        assert_eq!(g2(1, -3).steps_to_reach(&g2(0, 5)), Some(1));
        assert_eq!(g2(1, -3).steps_to_reach(&g2(2, 0)), Some(3));
    }

    #[test]
    fn parse_display() {
        let g = GroupElement::parse("1/2,-3").unwrap();
        assert_eq!(g.rank(), 2);
        assert_eq!(g.to_string(), "1/2,-3");
        assert!(GroupElement::parse("").is_err());
    }
}
