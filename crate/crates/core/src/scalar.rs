//! Coefficient fields for the series types.
//!
//! Every series type in this crate is generic over a [`Scalar`]: an exact,
//! ordered field. Floating point types are deliberately not implemented,
//! since sign and zero tests must be decidable.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

/// An exact ordered field usable as a coefficient type.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + Ord
    + Signed
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Embeds an exact rational.
    fn from_rational(q: &BigRational) -> Self;

    /// The value as an exact rational.
    fn to_rational(&self) -> BigRational;

    /// The positive `n`-th root, when it exists in the field.
    fn exact_root(&self, n: u32) -> Option<Self>;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }
}

fn exact_int_root<T: Roots + Clone + Mul<Output = T> + PartialEq + One>(
    v: &T,
    n: u32,
) -> Option<T> {
    let r = v.nth_root(n);
    let mut p = T::one();
    for _ in 0..n {
        p = p * r.clone();
    }
    (p == *v).then_some(r)
}

impl Scalar for BigRational {
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }

    fn exact_root(&self, n: u32) -> Option<Self> {
        if n == 0 || self.is_negative() {
            return None;
        }
        let num = exact_int_root(self.numer(), n)?;
        let den = exact_int_root(self.denom(), n)?;
        Some(Ratio::new(num, den))
    }
}

/// Fixed-width rationals: fast, but overflow panics. Suitable for small
/// desk computations only.
impl Scalar for Ratio<i64> {
    fn from_rational(q: &BigRational) -> Self {
        use num_traits::ToPrimitive;
        let n = q.numer().to_i64().expect("numerator exceeds i64");
        let d = q.denom().to_i64().expect("denominator exceeds i64");
        Ratio::new(n, d)
    }

    fn to_rational(&self) -> BigRational {
        Ratio::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }

    fn exact_root(&self, n: u32) -> Option<Self> {
        if n == 0 || self.is_negative() {
            return None;
        }
        let num = exact_int_root(self.numer(), n)?;
        let den = exact_int_root(self.denom(), n)?;
        Some(Ratio::new(num, den))
    }
}

/// Parses `a` or `a/b` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Ratio::new(n, d))
}

pub fn rat(n: i64, d: i64) -> BigRational {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_roots() {
        assert_eq!(rat(4, 9).exact_root(2), Some(rat(2, 3)));
        assert_eq!(rat(2, 1).exact_root(2), None);
        assert_eq!(rat(-8, 1).exact_root(3), None);
        assert_eq!(Ratio::<i64>::new(27, 8).exact_root(3), Some(Ratio::new(3, 2)));
    }

    #[test]
    fn parse() {
        assert_eq!(parse_rational("-3/6"), Some(rat(-1, 2)));
        assert_eq!(parse_rational("7"), Some(rat(7, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }
}
