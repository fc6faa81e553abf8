use std::fmt;

use num_rational::BigRational;

use crate::hahn::{Bound, GroupElement, TruncatedSeries};
use crate::rv::rv_lambda;
use crate::scalar::Scalar;

/// A polynomial in one variable, coefficients from low to high degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial<C> {
    coeffs: Vec<TruncatedSeries<C>>,
    rank: usize,
}

impl<C: Scalar> Polynomial<C> {
    /// Drops exactly-zero leading coefficients.
    pub fn new(mut coeffs: Vec<TruncatedSeries<C>>, rank: usize) -> Self {
        while coeffs.last().is_some_and(TruncatedSeries::is_exactly_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs, rank }
    }

    /// Rational coefficients, low to high.
    pub fn from_rationals(coeffs: &[C], rank: usize) -> Self {
        Self::new(coeffs.iter().map(|c| TruncatedSeries::constant(c.clone(), rank)).collect(), rank)
    }

    pub fn x(rank: usize) -> Self {
        Self::new(vec![TruncatedSeries::zero(rank), TruncatedSeries::one(rank)], rank)
    }

    pub fn constant(c: TruncatedSeries<C>) -> Self {
        let rank = c.rank();
        Self::new(vec![c], rank)
    }

    pub fn coeffs(&self) -> &[TruncatedSeries<C>] {
        &self.coeffs
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &TruncatedSeries<C>) -> TruncatedSeries<C> {
        self.coeffs.iter().rev().fold(TruncatedSeries::zero(self.rank), |acc, c| &(&acc * x) + c)
    }

    /// Horner evaluation with every step capped at precision `prec`.
    pub fn eval_truncated(&self, x: &TruncatedSeries<C>, prec: &Bound) -> TruncatedSeries<C> {
        self.coeffs.iter().rev().fold(TruncatedSeries::zero(self.rank), |acc, c| (&(&acc * x) + c).truncate(prec))
    }

    /// `p(x)` to just enough precision for `rv_lambda` to succeed, falling
    /// back to exact evaluation.
    pub fn eval_for_rv(&self, x: &TruncatedSeries<C>, lambda: &GroupElement) -> TruncatedSeries<C> {
        let mut offset = 2;
        for _ in 0..4 {
            let target = Bound::Finite(lambda + &GroupElement::leading(BigRational::from_integer(offset.into()), self.rank));
            let y = self.eval_truncated(x, &target);
            if rv_lambda(&y, lambda).is_ok() {
                return y;
            }
            offset *= 2;
        }
        self.eval(x)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c.scale(&C::from_int(i as i64))).collect();
        Self::new(coeffs, self.rank)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = TruncatedSeries::zero(self.rank);
        let coeffs = (0..n).map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero)).collect();
        Self::new(coeffs, self.rank)
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect(), self.rank)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::new(Vec::new(), self.rank);
        }
        let mut out = vec![TruncatedSeries::zero(self.rank); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Self::new(out, self.rank)
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(TruncatedSeries::one(self.rank)), |acc, _| acc.mul(self))
    }
}

impl<C: Scalar> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_exactly_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let unit = c.is_exact() && c.approx().is_constant() && c.approx().coeff(&GroupElement::zero(self.rank)).is_one();
            match (i, unit) {
                (0, _) => write!(f, "({c})")?,
                (1, true) => f.write_str("x")?,
                (1, false) => write!(f, "({c})*x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "({c})*x^{i}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}
