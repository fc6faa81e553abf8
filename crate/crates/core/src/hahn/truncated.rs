//! Precision-tracked series: a finite approximation together with a bound
//! on the valuation of the error.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::hahn::group::{Bound, GroupElement};
use crate::hahn::series::HahnSeries;
use crate::scalar::Scalar;

/// A value `x` of the Hahn field known as `approx` with `v(x - approx) >= prec`.
///
/// Every exponent stored in `approx` is strictly below `prec`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncatedSeries<C> {
    approx: HahnSeries<C>,
    prec: Bound,
    rank: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
}

impl<C: Scalar> TruncatedSeries<C> {
    pub fn new(approx: HahnSeries<C>, prec: Bound, rank: usize) -> Self {
        if let Some(r) = approx.rank() {
            assert_eq!(r, rank, "value group rank mismatch");
        }
        if let Bound::Finite(p) = &prec {
            assert_eq!(p.rank(), rank, "value group rank mismatch");
        }
        TruncatedSeries { approx: approx.truncate(&prec), prec, rank }
    }

    pub fn exact(approx: HahnSeries<C>, rank: usize) -> Self {
        Self::new(approx, Bound::Infinite, rank)
    }

    pub fn zero(rank: usize) -> Self {
        Self::exact(HahnSeries::zero(), rank)
    }

    pub fn one(rank: usize) -> Self {
        Self::exact(HahnSeries::one(rank), rank)
    }

    pub fn constant(c: C, rank: usize) -> Self {
        Self::exact(HahnSeries::constant(c, rank), rank)
    }

    pub fn monomial(c: C, exp: GroupElement) -> Self {
        let rank = exp.rank();
        Self::exact(HahnSeries::monomial(c, exp), rank)
    }

    /// `0 + O(t^prec)`.
    pub fn unknown(prec: GroupElement) -> Self {
        let rank = prec.rank();
        Self::new(HahnSeries::zero(), Bound::Finite(prec), rank)
    }

    pub fn approx(&self) -> &HahnSeries<C> {
        &self.approx
    }

    pub fn prec(&self) -> &Bound {
        &self.prec
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_exact(&self) -> bool {
        !self.prec.is_finite()
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.is_exact() && self.approx.is_zero()
    }

    /// True when the approximation is zero (the value may still be nonzero
    /// beyond the precision).
    pub fn approx_is_zero(&self) -> bool {
        self.approx.is_zero()
    }

    /// Lowers the precision to at most `bound`.
    pub fn truncate(&self, bound: &Bound) -> Self {
        let prec = (&self.prec).min(bound).clone();
        Self::new(self.approx.clone(), prec, self.rank)
    }

    pub fn with_prec(&self, prec: Bound) -> Self {
        self.truncate(&prec)
    }

    pub fn shift(&self, g: &GroupElement) -> Self {
        Self::new(self.approx.shift(g), self.prec.shift(g), self.rank)
    }

    pub fn scale(&self, k: &C) -> Self {
        if k.is_zero() {
            return Self::zero(self.rank);
        }
        Self::new(self.approx.scale(k), self.prec.clone(), self.rank)
    }

    /// Lower bound on the valuation, always available.
    pub fn valuation_lower_bound(&self) -> Bound {
        if self.approx.is_zero() {
            self.prec.clone()
        } else {
            self.approx.valuation()
        }
    }

    /// The valuation `v(x)`, or `Infinite` for the exact zero.
    pub fn valuation(&self) -> Result<Bound> {
        if self.approx.is_zero() && self.prec.is_finite() {
            return Err(Error::UndecidableAtPrecision);
        }
        Ok(self.approx.valuation())
    }

    /// Leading exponent and coefficient of a nonzero value.
    pub fn leading(&self) -> Result<(GroupElement, C)> {
        match self.approx.leading() {
            Some((e, c)) => Ok((e.clone(), c.clone())),
            None if self.prec.is_finite() => Err(Error::UndecidableAtPrecision),
            None => Err(Error::ZeroOrUncertainLeadingTerm),
        }
    }

    /// Sign in the ordered field; `t` is a positive infinitesimal.
    pub fn compare_sign(&self) -> Result<Sign> {
        match self.approx.leading() {
            Some((_, c)) if c.is_positive() => Ok(Sign::Positive),
            Some(_) => Ok(Sign::Negative),
            None if self.prec.is_finite() => Err(Error::UndecidableAtPrecision),
            None => Ok(Sign::Zero),
        }
    }

    /// The real closest to `x`, for `x` in the valuation ring.
    pub fn standard_part(&self) -> Result<C> {
        let zero = GroupElement::zero(self.rank);
        if let Some((e, _)) = self.approx.leading() {
            if e.is_negative() {
                return Err(Error::NotInValuationRing);
            }
        }
        if !self.prec.exceeds(&zero) {
            return Err(Error::UndecidableAtPrecision);
        }
        Ok(self.approx.coeff(&zero))
    }

    pub fn field_op(&self, kind: FieldOp, other: &Self) -> Self {
        match kind {
            FieldOp::Add => self + other,
            FieldOp::Sub => self - other,
            FieldOp::Mul => self * other,
        }
    }

    /// Multiplicative inverse, accurate to `target` (or better when the
    /// input is an exact monomial). Refines the inverted leading term by the
    /// geometric series of the unit part.
    pub fn invert(&self, target: &Bound) -> Result<Self> {
        let (g, c) = self.approx.leading().map(|(e, c)| (e.clone(), c.clone())).ok_or(Error::ZeroOrUncertainLeadingTerm)?;
        let c_inv = C::one() / c.clone();
        // u = x / (c t^g) - 1, with v(u) > 0
        let unit = self.approx.shift(&-&g).scale(&c_inv);
        let u = &unit - &HahnSeries::one(self.rank);
        let from_input = self.prec.shift(&g.scale_int(-2));
        let out_prec = if u.is_zero() { from_input } else { target.min(&from_input).clone() };
        let rel = out_prec.shift(&g);
        let series = geometric_inverse(&u, &rel, self.rank)?;
        Ok(Self::new(series.scale(&c_inv).shift(&-&g), out_prec, self.rank))
    }

    /// Positive `n`-th root of a positive value, accurate to `target`.
    ///
    /// Splits off `b = r t^(v/n)` with `r^n` the leading coefficient and
    /// expands the remaining unit root `(1 + u)^(1/n)` by the binomial series.
    pub fn nth_root(&self, n: u32, target: &Bound) -> Result<Self> {
        assert!(n >= 1, "root index must be positive");
        if self.compare_sign()? != Sign::Positive {
            return Err(Error::NotPositive);
        }
        let (g, c) = self.leading()?;
        let r = c.exact_root(n).ok_or(Error::NoRationalRoot(n))?;
        let g_root = g.div_int(n as i64);
        let unit = self.approx.shift(&-&g).scale(&(C::one() / c));
        let u = &unit - &HahnSeries::one(self.rank);
        let from_input = self.prec.shift(&(&g_root - &g));
        let out_prec = if u.is_zero() { from_input } else { target.min(&from_input).clone() };
        let rel = out_prec.shift(&-&g_root);
        let series = binomial_root(&u, n, &rel, self.rank)?;
        Ok(Self::new(series.scale(&r).shift(&g_root), out_prec, self.rank))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.rank);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }
}

/// `sum_k (-u)^k` truncated at `rel`, for `v(u) > 0`.
fn geometric_inverse<C: Scalar>(u: &HahnSeries<C>, rel: &Bound, rank: usize) -> Result<HahnSeries<C>> {
    let neg_u = -u;
    series_in(&neg_u, rel, rank, |_| C::one())
}

/// `sum_k binom(1/n, k) u^k` truncated at `rel`.
fn binomial_root<C: Scalar>(u: &HahnSeries<C>, n: u32, rel: &Bound, rank: usize) -> Result<HahnSeries<C>> {
    let alpha = BigRational::new(BigInt::one(), BigInt::from(n));
    let mut coeffs = vec![BigRational::one()];
    series_in(u, rel, rank, move |k| {
        while coeffs.len() <= k {
            let j = coeffs.len() - 1;
            let next = &coeffs[j] * (&alpha - BigRational::from_integer(j.into())) / BigRational::from_integer((j + 1).into());
            coeffs.push(next);
        }
        C::from_rational(&coeffs[k])
    })
}

/// Evaluates `sum_k a_k w^k` truncated at `rel` where `v(w) > 0`.
pub(crate) fn series_in<C: Scalar>(
    w: &HahnSeries<C>,
    rel: &Bound,
    rank: usize,
    mut coeff: impl FnMut(usize) -> C,
) -> Result<HahnSeries<C>> {
    let mut sum = HahnSeries::constant(coeff(0), rank).truncate(rel);
    if w.is_zero() {
        return Ok(sum);
    }
    let vw = w.leading().map(|(e, _)| e.clone()).expect("nonzero");
    debug_assert!(vw.is_positive());
    let max_k = match rel {
        Bound::Infinite => return Err(Error::UnreachablePrecision),
        Bound::Finite(r) => vw.steps_to_reach(r).ok_or(Error::UnreachablePrecision)?,
    };
    let mut power = HahnSeries::one(rank);
    for k in 1..=max_k as usize {
        power = power.mul_truncated(w, rel);
        if power.is_zero() {
            break;
        }
        let a = coeff(k);
        if !a.is_zero() {
            sum = &sum + &power.scale(&a);
        }
    }
    Ok(sum)
}

impl<C: Scalar> Add for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn add(self, rhs: &TruncatedSeries<C>) -> TruncatedSeries<C> {
        assert_eq!(self.rank, rhs.rank, "value group rank mismatch");
        let prec = (&self.prec).min(&rhs.prec).clone();
        TruncatedSeries::new(&self.approx + &rhs.approx, prec, self.rank)
    }
}

impl<C: Scalar> Sub for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn sub(self, rhs: &TruncatedSeries<C>) -> TruncatedSeries<C> {
        self + &(-rhs)
    }
}

impl<C: Scalar> Neg for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn neg(self) -> TruncatedSeries<C> {
        TruncatedSeries { approx: -&self.approx, prec: self.prec.clone(), rank: self.rank }
    }
}

impl<C: Scalar> Mul for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn mul(self, rhs: &TruncatedSeries<C>) -> TruncatedSeries<C> {
        assert_eq!(self.rank, rhs.rank, "value group rank mismatch");
        let va = self.approx.valuation();
        let vb = rhs.approx.valuation();
        let prec = self
            .prec
            .plus(&vb)
            .min(rhs.prec.plus(&va))
            .min(self.prec.plus(&rhs.prec));
        let approx = self.approx.mul_truncated(&rhs.approx, &prec);
        TruncatedSeries::new(approx, prec, self.rank)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<C: Scalar> $tr for TruncatedSeries<C> {
            type Output = TruncatedSeries<C>;
            fn $m(self, rhs: TruncatedSeries<C>) -> TruncatedSeries<C> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<C: Scalar> Neg for TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn neg(self) -> TruncatedSeries<C> {
        -&self
    }
}

impl<C: Scalar> From<HahnSeries<C>> for TruncatedSeries<C> {
    /// Exact value; rank one is assumed for the zero series.
    fn from(s: HahnSeries<C>) -> Self {
        let rank = s.rank().unwrap_or(1);
        TruncatedSeries::exact(s, rank)
    }
}

impl Ord for Sign {
    fn cmp(&self, other: &Self) -> Ordering {
        let k = |s: &Sign| match s {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        };
        k(self).cmp(&k(other))
    }
}

impl PartialOrd for Sign {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
