//! Dense univariate polynomials over the rationals, coefficients low to high.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational as Q;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type QPoly = Vec<Q>;

pub fn trim(mut p: QPoly) -> QPoly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

/// Degree, `None` for the zero polynomial.
pub fn deg(p: &[Q]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn eval(p: &[Q], z: &Q) -> Q {
    p.iter().rev().fold(Q::zero(), |acc, c| acc * z + c)
}

pub fn derivative(p: &[Q]) -> QPoly {
    trim(p.iter().enumerate().skip(1).map(|(i, c)| c * Q::from_integer(i.into())).collect())
}

pub fn add(a: &[Q], b: &[Q]) -> QPoly {
    let n = a.len().max(b.len());
    trim((0..n).map(|i| a.get(i).cloned().unwrap_or_else(Q::zero) + b.get(i).cloned().unwrap_or_else(Q::zero)).collect())
}

pub fn neg(a: &[Q]) -> QPoly {
    a.iter().map(|c| -c).collect()
}

pub fn sub(a: &[Q], b: &[Q]) -> QPoly {
    add(a, &neg(b))
}

pub fn mul(a: &[Q], b: &[Q]) -> QPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

pub fn scale(a: &[Q], k: &Q) -> QPoly {
    trim(a.iter().map(|c| c * k).collect())
}

/// Quotient and remainder; panics on a zero divisor.
pub fn divrem(a: &[Q], b: &[Q]) -> (QPoly, QPoly) {
    let db = deg(b).expect("division by the zero polynomial");
    let lead = &b[db];
    let mut r = trim(a.to_vec());
    let mut q = vec![Q::zero(); r.len().saturating_sub(db).max(1)];
    while let Some(dr) = deg(&r) {
        if dr < db {
            break;
        }
        let k = &r[dr] / lead;
        for (j, c) in b.iter().enumerate().take(db + 1) {
            r[dr - db + j] -= &k * c;
        }
        q[dr - db] = k;
        r = trim(r);
    }
    (trim(q), r)
}

pub fn monic(a: &[Q]) -> QPoly {
    match deg(a) {
        Some(d) => scale(a, &(Q::one() / &a[d])),
        None => Vec::new(),
    }
}

/// Monic greatest common divisor.
pub fn gcd(a: &[Q], b: &[Q]) -> QPoly {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let (_, r) = divrem(&a, &b);
        a = b;
        b = r;
    }
    monic(&a)
}

/// Square-free decomposition `p = c * prod f_k^k` (Yun), as `(f_k, k)` with
/// every `f_k` monic and non-constant.
pub fn yun(p: &[Q]) -> Vec<(QPoly, usize)> {
    let p = monic(p);
    let mut out = Vec::new();
    if deg(&p).unwrap_or(0) == 0 {
        return out;
    }
    let dp = derivative(&p);
    let a0 = gcd(&p, &dp);
    let mut b = divrem(&p, &a0).0;
    let mut c = divrem(&dp, &a0).0;
    let mut d = sub(&c, &derivative(&b));
    let mut k = 1;
    while deg(&b).unwrap_or(0) > 0 {
        let a = gcd(&b, &d);
        if deg(&a).unwrap_or(0) > 0 {
            out.push((a.clone(), k));
        }
        b = divrem(&b, &a).0;
        c = divrem(&d, &a).0;
        d = sub(&c, &derivative(&b));
        k += 1;
    }
    out
}

/// Scales to coprime integer coefficients with a positive leading term.
pub fn to_integer(p: &[Q]) -> Vec<BigInt> {
    let l = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * Q::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    let sign = if ints.iter().rev().find(|c| !c.is_zero()).is_some_and(Signed::is_negative) { -BigInt::one() } else { BigInt::one() };
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|c| c / &g * &sign).collect()
}

pub fn from_integer(p: &[BigInt]) -> QPoly {
    trim(p.iter().map(|c| Q::from_integer(c.clone())).collect())
}

pub fn sign(q: &Q) -> Ordering {
    q.cmp(&Q::zero())
}

/// Sturm sequence of a square-free polynomial.
pub fn sturm(p: &[Q]) -> Vec<QPoly> {
    let mut seq = vec![trim(p.to_vec()), derivative(p)];
    while !seq.last().expect("nonempty").is_empty() {
        let n = seq.len();
        let (_, r) = divrem(&seq[n - 2], &seq[n - 1]);
        seq.push(neg(&r));
    }
    seq.pop();
    seq
}

fn sign_changes(seq: &[QPoly], z: &Q) -> usize {
    let signs: Vec<Ordering> = seq.iter().map(|p| sign(&eval(p, z))).filter(|s| *s != Ordering::Equal).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Number of distinct real roots in the half-open interval `(a, b]`.
pub fn count_roots(seq: &[QPoly], a: &Q, b: &Q) -> usize {
    sign_changes(seq, a) - sign_changes(seq, b)
}

/// Every real root has absolute value below this bound.
pub fn root_bound(p: &[Q]) -> Q {
    let d = deg(p).expect("nonzero polynomial");
    let lead = p[d].abs();
    Q::one() + p[..d].iter().map(|c| c.abs() / &lead).max().unwrap_or_else(Q::zero)
}

/// Disjoint isolating intervals `(a, b]`, in increasing order, one per real
/// root of a square-free polynomial.
pub fn isolate_real_roots(p: &[Q]) -> Vec<(Q, Q)> {
    if deg(p).unwrap_or(0) == 0 {
        return Vec::new();
    }
    let seq = sturm(p);
    let r = root_bound(p);
    let mut out = Vec::new();
    let mut stack = vec![(-r.clone(), r)];
    while let Some((a, b)) = stack.pop() {
        match count_roots(&seq, &a, &b) {
            0 => {}
            1 => out.push((a, b)),
            _ => {
                let m = (&a + &b) / Q::from_integer(2.into());
                stack.push((a, m.clone()));
                stack.push((m, b));
            }
        }
    }
    out.sort();
    out
}

/// Halves an isolating interval `(a, b]` of a square-free polynomial.
pub fn bisect(p: &[Q], a: &Q, b: &Q) -> (Q, Q) {
    let m = (a + b) / Q::from_integer(2.into());
    let sm = sign(&eval(p, &m));
    if sm == Ordering::Equal {
        return (m.clone(), m);
    }
    let sb = sign(&eval(p, b));
    if sb == Ordering::Equal || sb == sm {
        if sb == Ordering::Equal {
            return (m, b.clone());
        }
        (a.clone(), m)
    } else {
        (m, b.clone())
    }
}

/// The rational with the smallest denominator in `[a, b]`.
pub fn simplest_between(a: &Q, b: &Q) -> Q {
    assert!(a <= b);
    let fa = a.floor();
    if &fa == a {
        return a.clone();
    }
    if fa.clone() + Q::one() <= *b {
        return if a.is_negative() && b.is_positive() { Q::zero() } else if b.is_positive() { fa + Q::one() } else { b.floor().max(fa + Q::one()) };
    }
    // a and b share the integer part: recurse on the reciprocals of the fractional parts
    let inner = simplest_between(&(Q::one() / (b - &fa)), &(Q::one() / (a - &fa)));
    fa + Q::one() / inner
}

/// The root in `(a, b]`, when it is rational.
pub fn rational_root_in(p: &[Q], a: &Q, b: &Q) -> Option<Q> {
    let ints = to_integer(p);
    let lead = ints.iter().rev().find(|c| !c.is_zero())?.abs();
    let width = Q::new(BigInt::one(), &lead * &lead * BigInt::from(2));
    let (mut lo, mut hi) = (a.clone(), b.clone());
    while &hi - &lo > width {
        (lo, hi) = bisect(p, &lo, &hi);
    }
    let q = simplest_between(&lo, &hi);
    (q.denom() <= &lead && eval(p, &q).is_zero()).then_some(q)
}

/// Real roots of `p` with multiplicity: exact rationals, and isolating
/// intervals `(a, b]` with their square-free irrational witness; plus the
/// number of complex-conjugate pairs per multiplicity.
#[derive(Clone, Debug, Default)]
pub struct RootSplit {
    pub rational: Vec<(Q, usize)>,
    pub irrational: Vec<(IntervalCoeff, usize)>,
    pub complex_pairs: Vec<(QPoly, usize)>,
}

pub fn split_roots(p: &[Q]) -> RootSplit {
    let mut out = RootSplit::default();
    for (f, k) in yun(p) {
        let mut rest = f.clone();
        let mut irrational = 0;
        for (a, b) in isolate_real_roots(&f) {
            match rational_root_in(&f, &a, &b) {
                Some(q) => {
                    rest = divrem(&rest, &[-q.clone(), Q::one()]).0;
                    out.rational.push((q, k));
                }
                None => {
                    irrational += 1;
                    out.irrational.push((IntervalCoeff { lower: a, upper: b, witness: Some(to_integer(&f)) }, k));
                }
            }
        }
        let complex = deg(&rest).unwrap_or(0) - irrational;
        for _ in 0..complex / 2 {
            out.complex_pairs.push((rest.clone(), k));
        }
    }
    out.rational.sort();
    out
}

/// An enclosure `(lower, upper]` of a real algebraic number, optionally with
/// a square-free integer polynomial having exactly one root there.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntervalCoeff {
    pub lower: Q,
    pub upper: Q,
    pub witness: Option<Vec<BigInt>>,
}

impl IntervalCoeff {
    pub fn exact(q: Q) -> Self {
        IntervalCoeff { lower: q.clone(), upper: q, witness: None }
    }

    pub fn width(&self) -> Q {
        &self.upper - &self.lower
    }

    pub fn contains(&self, q: &Q) -> bool {
        (&self.lower < q && q <= &self.upper) || (self.lower == self.upper && &self.lower == q)
    }

    /// Halves the enclosure using the witness; no-op without one.
    pub fn refine(&mut self) {
        if let Some(w) = &self.witness {
            if self.lower < self.upper {
                let p = from_integer(w);
                (self.lower, self.upper) = bisect(&p, &self.lower, &self.upper);
            }
        }
    }

    pub fn refined_below(&self, width: &Q, limit: usize) -> Result<Self> {
        let mut c = self.clone();
        for _ in 0..limit {
            if &c.width() <= width {
                return Ok(c);
            }
            c.refine();
        }
        if &c.width() <= width {
            Ok(c)
        } else {
            Err(Error::UndecidedSign)
        }
    }

    /// The sign, refining at most `limit` times.
    pub fn sign(&self, limit: usize) -> Result<Ordering> {
        let mut c = self.clone();
        for _ in 0..=limit {
            if c.lower.is_positive() || (c.lower.is_zero() && c.lower < c.upper) {
                return Ok(Ordering::Greater);
            }
            if c.upper.is_negative() {
                return Ok(Ordering::Less);
            }
            if c.lower.is_zero() && c.upper.is_zero() {
                return Ok(Ordering::Equal);
            }
            if c.witness.is_none() {
                break;
            }
            c.refine();
        }
        Err(Error::UndecidedSign)
    }

    pub fn add(&self, other: &Self) -> Self {
        IntervalCoeff { lower: &self.lower + &other.lower, upper: &self.upper + &other.upper, witness: None }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let products = [&self.lower * &other.lower, &self.lower * &other.upper, &self.upper * &other.lower, &self.upper * &other.upper];
        let lower = products.iter().min().expect("four products").clone();
        let upper = products.iter().max().expect("four products").clone();
        IntervalCoeff { lower, upper, witness: None }
    }

    /// Closed-interval enclosure of `p` on this interval.
    pub fn eval_poly(&self, p: &[Q]) -> Self {
        p.iter().rev().fold(IntervalCoeff::exact(Q::zero()), |acc, c| acc.mul(self).add(&IntervalCoeff::exact(c.clone())))
    }

    /// True when zero lies in the closed enclosure.
    pub fn straddles_zero(&self) -> bool {
        !self.lower.is_positive() && !self.upper.is_negative()
    }
}

impl fmt::Display for IntervalCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lower == self.upper {
            return write!(f, "{}", self.lower);
        }
        write!(f, "({}, {}]", self.lower, self.upper)?;
        if let Some(w) = &self.witness {
            let terms: Vec<String> = w.iter().enumerate().rev().filter(|(_, c)| !c.is_zero()).map(|(i, c)| format!("{c}*z^{i}")).collect();
            write!(f, " root of {}", terms.join(" + "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use proptest::prelude::*;

    fn qp(c: &[i64]) -> QPoly {
        c.iter().map(|&x| rat(x, 1)).collect()
    }

    #[test]
    fn division_and_gcd() {
        let a = qp(&[-1, 0, 1]);
        let b = qp(&[-1, 1]);
        let (q, r) = divrem(&a, &b);
        assert_eq!(q, qp(&[1, 1]));
        assert!(r.is_empty());
        assert_eq!(gcd(&mul(&a, &qp(&[2, 1])), &mul(&b, &qp(&[3, 1]))), qp(&[-1, 1]));
    }

    #[test]
    fn yun_multiplicities() {
        // (z - 1)^2 (z + 2)^3 z
        let p = mul(&mul(&mul(&qp(&[-1, 1]), &qp(&[-1, 1])), &mul(&mul(&qp(&[2, 1]), &qp(&[2, 1])), &qp(&[2, 1]))), &qp(&[0, 1]));
        let parts = yun(&p);
        assert_eq!(parts, vec![(qp(&[0, 1]), 1), (qp(&[-1, 1]), 2), (qp(&[2, 1]), 3)]);
    }

    #[test]
    fn isolation_and_rationality() {
        let p = mul(&qp(&[-2, 0, 1]), &qp(&[-1, 3]));
        let roots = isolate_real_roots(&p);
        assert_eq!(roots.len(), 3);
        let rational: Vec<Option<Q>> = roots.iter().map(|(a, b)| rational_root_in(&p, a, b)).collect();
        assert_eq!(rational, vec![None, Some(rat(1, 3)), None]);
        let split = split_roots(&mul(&p, &qp(&[1, 0, 1])));
        assert_eq!(split.rational, vec![(rat(1, 3), 1)]);
        assert_eq!(split.irrational.len(), 2);
        assert_eq!(split.complex_pairs.len(), 1);
    }

    #[test]
    fn interval_sign_and_refinement() {
        let sqrt2 = IntervalCoeff { lower: rat(0, 1), upper: rat(2, 1), witness: Some(vec![(-2).into(), 0.into(), 1.into()]) };
        assert_eq!(sqrt2.sign(4), Ok(Ordering::Greater));
        let tight = sqrt2.refined_below(&rat(1, 1000), 64).unwrap();
        assert!(tight.lower < rat(14143, 10000) && tight.upper > rat(14142, 10000));
        let loose = IntervalCoeff { lower: rat(-1, 1), upper: rat(1, 1), witness: None };
        assert_eq!(loose.sign(10), Err(Error::UndecidedSign));
        assert!(tight.eval_poly(&qp(&[-2, 0, 1])).straddles_zero());
    }

    #[test]
    fn simplest_rational() {
        assert_eq!(simplest_between(&rat(1, 3), &rat(1, 2)), rat(1, 2));
        assert_eq!(simplest_between(&rat(3, 10), &rat(2, 5)), rat(1, 3));
        assert_eq!(simplest_between(&rat(-7, 2), &rat(-3, 1)), rat(-3, 1));
        assert_eq!(simplest_between(&rat(-1, 2), &rat(1, 2)), rat(0, 1));
    }

    proptest! {
        #[test]
        fn rational_roots_found(roots in prop::collection::vec((-20i64..20, 1i64..6), 1..5)) {
            let mut p = qp(&[1]);
            for (n, d) in &roots {
                p = mul(&p, &[rat(-*n, *d), rat(1, 1)]);
            }
            let split = split_roots(&p);
            let total: usize = split.rational.iter().map(|(_, k)| k).sum();
            prop_assert_eq!(total, roots.len());
            for (n, d) in &roots {
                prop_assert!(split.rational.iter().any(|(q, _)| q == &rat(*n, *d)));
            }
        }
    }
}
