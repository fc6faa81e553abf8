//! Degree-truncated multivariate power series with Hahn-series coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::hahn::{parse_series, Bound, GroupElement, HahnSeries, TruncatedSeries};
use crate::scalar::Scalar;

/// Exponent vector of a monomial `x1^a1 ... xn^an`.
pub type Monomial = Vec<u32>;

pub fn degree(m: &[u32]) -> u32 {
    m.iter().sum()
}

/// A power series in `nvars` variables with coefficients in the Hahn field,
/// known modulo the ideal spanned by monomials of degree `> degree_bound`
/// (when `tail` is set) and by coefficients of valuation `>= prec`.
///
/// Without `tail` the series is a polynomial: every monomial not stored is
/// exactly zero, and `degree_bound` is its degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiSeries<C> {
    nvars: usize,
    rank: usize,
    degree_bound: u32,
    tail: bool,
    prec: Bound,
    coeffs: BTreeMap<Monomial, HahnSeries<C>>,
}

impl<C: Scalar> MultiSeries<C> {
    pub fn new<I>(nvars: usize, rank: usize, degree_bound: u32, tail: bool, prec: Bound, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, HahnSeries<C>)>,
    {
        let mut coeffs: BTreeMap<Monomial, HahnSeries<C>> = BTreeMap::new();
        for (m, c) in terms {
            assert_eq!(m.len(), nvars, "monomial arity mismatch");
            if let Some(r) = c.rank() {
                assert_eq!(r, rank, "value group rank mismatch");
            }
            if tail && degree(&m) > degree_bound {
                continue;
            }
            let slot = coeffs.entry(m).or_default();
            *slot = &*slot + &c;
        }
        let coeffs: BTreeMap<Monomial, HahnSeries<C>> = coeffs
            .into_iter()
            .map(|(m, c)| (m, c.truncate(&prec)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        let degree_bound = if tail {
            degree_bound
        } else {
            coeffs.keys().map(|m| degree(m)).max().unwrap_or(0)
        };
        MultiSeries { nvars, rank, degree_bound, tail, prec, coeffs }
    }

    /// An exact polynomial.
    pub fn polynomial<I>(nvars: usize, rank: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, HahnSeries<C>)>,
    {
        Self::new(nvars, rank, 0, false, Bound::Infinite, terms)
    }

    pub fn zero(nvars: usize, rank: usize) -> Self {
        Self::polynomial(nvars, rank, [])
    }

    pub fn constant(nvars: usize, c: HahnSeries<C>, rank: usize) -> Self {
        Self::polynomial(nvars, rank, [(vec![0; nvars], c)])
    }

    pub fn one(nvars: usize, rank: usize) -> Self {
        Self::constant(nvars, HahnSeries::one(rank), rank)
    }

    /// The coordinate function `x_{i+1}` (zero-based index `i`).
    pub fn var(nvars: usize, i: usize, rank: usize) -> Self {
        let mut m = vec![0; nvars];
        m[i] = 1;
        Self::polynomial(nvars, rank, [(m, HahnSeries::one(rank))])
    }

    pub fn monomial(nvars: usize, m: Monomial, c: HahnSeries<C>, rank: usize) -> Self {
        assert_eq!(m.len(), nvars);
        Self::polynomial(nvars, rank, [(m, c)])
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    pub fn is_truncated(&self) -> bool {
        self.tail
    }

    pub fn prec(&self) -> &Bound {
        &self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &HahnSeries<C>)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// True when nothing nonzero is stored (the value may still be nonzero
    /// modulo the truncation ideal).
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.coeffs.is_empty() && !self.tail && !self.prec.is_finite()
    }

    pub fn coeff(&self, m: &[u32]) -> TruncatedSeries<C> {
        let approx = self.coeffs.get(m).cloned().unwrap_or_default();
        TruncatedSeries::new(approx, self.prec.clone(), self.rank)
    }

    /// Largest stored total degree.
    pub fn max_degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|m| degree(m)).max()
    }

    /// Lowest degree that may carry a nonzero term.
    fn order(&self) -> Option<u32> {
        match self.coeffs.keys().map(|m| degree(m)).min() {
            Some(d) => Some(d),
            None if self.tail => Some(self.degree_bound + 1),
            None => None,
        }
    }

    /// Minimal coefficient valuation of the stored terms.
    pub fn norm(&self) -> Bound {
        self.coeffs.values().map(|c| c.valuation()).min().unwrap_or(Bound::Infinite)
    }

    /// Projection modulo (degree `> d`) + (coefficient valuation `>= prec`).
    pub fn reduce(&self, d: u32, prec: &Bound) -> Self {
        let dropped = self.coeffs.keys().any(|m| degree(m) > d);
        let tail = self.tail || dropped;
        let bound = if tail { self.degree_bound.min(d) } else { self.degree_bound };
        let prec = (&self.prec).min(prec).clone();
        Self::new(self.nvars, self.rank, bound, tail, prec, self.coeffs.clone())
    }

    pub fn with_prec(&self, prec: &Bound) -> Self {
        let prec = (&self.prec).min(prec).clone();
        Self::new(self.nvars, self.rank, self.degree_bound, self.tail, prec, self.coeffs.clone())
    }

    pub fn map_terms(&self, f: impl Fn(&Monomial, &HahnSeries<C>) -> (Monomial, HahnSeries<C>)) -> Self {
        Self::new(self.nvars, self.rank, self.degree_bound, self.tail, self.prec.clone(), self.coeffs.iter().map(|(m, c)| f(m, c)))
    }

    /// Multiplication by the coefficient `t^g`.
    pub fn shift(&self, g: &GroupElement) -> Self {
        let prec = self.prec.shift(g);
        Self::new(self.nvars, self.rank, self.degree_bound, self.tail, prec, self.coeffs.iter().map(|(m, c)| (m.clone(), c.shift(g))))
    }

    pub fn scale(&self, k: &TruncatedSeries<C>) -> Self {
        let c = Self::new(self.nvars, self.rank, 0, false, k.prec().clone(), [(vec![0; self.nvars], k.approx().clone())]);
        self * &c
    }

    pub fn derivative(&self, var: usize) -> Self {
        let terms = self.coeffs.iter().filter(|(m, _)| m[var] > 0).map(|(m, c)| {
            let mut m2 = m.clone();
            m2[var] -= 1;
            (m2, c.scale(&C::from_int(m[var] as i64)))
        });
        let bound = self.degree_bound.saturating_sub(1);
        Self::new(self.nvars, self.rank, bound, self.tail, self.prec.clone(), terms)
    }

    /// Reinterprets the variables: variable `i` of `self` becomes variable
    /// `map[i]` of a series in `nvars` variables.
    pub fn embed(&self, map: &[usize], nvars: usize) -> Self {
        assert_eq!(map.len(), self.nvars);
        let terms = self.coeffs.iter().map(|(m, c)| {
            let mut out = vec![0; nvars];
            for (i, &e) in m.iter().enumerate() {
                out[map[i]] += e;
            }
            (out, c.clone())
        });
        Self::new(nvars, self.rank, self.degree_bound, self.tail, self.prec.clone(), terms)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars, self.rank);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Substitutes `subs[i]` for variable `i` in the stored terms.
    pub fn compose(&self, subs: &[MultiSeries<C>]) -> Result<Self> {
        if subs.len() != self.nvars {
            return Err(Error::BadVariable(subs.len()));
        }
        let m = subs.first().map_or(0, |s| s.nvars);
        let mut powers: Vec<Vec<MultiSeries<C>>> = subs.iter().map(|s| vec![Self::one(s.nvars, self.rank), s.clone()]).collect();
        let mut acc = Self::new(m, self.rank, self.degree_bound, self.tail, self.prec.clone(), []);
        if !self.tail {
            acc = Self::zero(m, self.rank).with_prec(&self.prec);
        }
        for (mono, c) in &self.coeffs {
            let mut term = Self::constant(m, c.clone(), self.rank).with_prec(&self.prec);
            for (i, &e) in mono.iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().expect("nonempty") * &subs[i];
                    powers[i].push(next);
                }
                term = &term * &powers[i][e as usize];
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// Value of a polynomial at the given points.
    pub fn eval_at(&self, points: &[TruncatedSeries<C>]) -> Result<TruncatedSeries<C>> {
        if self.tail {
            return Err(Error::Unsupported("evaluating a degree-truncated series".into()));
        }
        if points.len() != self.nvars {
            return Err(Error::BadVariable(points.len()));
        }
        let mut acc = TruncatedSeries::zero(self.rank).with_prec(self.prec.clone());
        for (mono, c) in &self.coeffs {
            let mut term = TruncatedSeries::new(c.clone(), self.prec.clone(), self.rank);
            for (p, &e) in points.iter().zip(mono) {
                term = &term * &p.pow(e);
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }
}

impl<C: Scalar> Add for &MultiSeries<C> {
    type Output = MultiSeries<C>;
    fn add(self, rhs: &MultiSeries<C>) -> MultiSeries<C> {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let tail = self.tail || rhs.tail;
        let bound = match (self.tail, rhs.tail) {
            (true, true) => self.degree_bound.min(rhs.degree_bound),
            (true, false) => self.degree_bound,
            (false, true) => rhs.degree_bound,
            (false, false) => self.degree_bound.max(rhs.degree_bound),
        };
        let prec = (&self.prec).min(&rhs.prec).clone();
        let terms = self.coeffs.iter().chain(&rhs.coeffs).map(|(m, c)| (m.clone(), c.clone()));
        MultiSeries::new(self.nvars, self.rank, bound, tail, prec, terms)
    }
}

impl<C: Scalar> Neg for &MultiSeries<C> {
    type Output = MultiSeries<C>;
    fn neg(self) -> MultiSeries<C> {
        self.map_terms(|m, c| (m.clone(), -c))
    }
}

impl<C: Scalar> Sub for &MultiSeries<C> {
    type Output = MultiSeries<C>;
    fn sub(self, rhs: &MultiSeries<C>) -> MultiSeries<C> {
        self + &(-rhs)
    }
}

impl<C: Scalar> Mul for &MultiSeries<C> {
    type Output = MultiSeries<C>;
    fn mul(self, rhs: &MultiSeries<C>) -> MultiSeries<C> {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let known = |a: &MultiSeries<C>, b: &MultiSeries<C>| a.tail.then(|| b.order().map(|o| a.degree_bound + o)).flatten();
        let limits: Vec<u32> = [known(self, rhs), known(rhs, self)].into_iter().flatten().collect();
        let (tail, bound) = match limits.iter().min() {
            Some(&d) => (true, d),
            None => (false, self.degree_bound + rhs.degree_bound),
        };
        let prec = self.prec.plus(&rhs.norm()).min(rhs.prec.plus(&self.norm())).min(self.prec.plus(&rhs.prec));
        let mut out: BTreeMap<Monomial, HahnSeries<C>> = BTreeMap::new();
        for (ma, ca) in &self.coeffs {
            for (mb, cb) in &rhs.coeffs {
                let m: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                if tail && degree(&m) > bound {
                    continue;
                }
                let c = ca.mul_truncated(cb, &prec);
                let slot = out.entry(m).or_default();
                *slot = &*slot + &c;
            }
        }
        MultiSeries::new(self.nvars, self.rank, bound, tail, prec, out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<C: Scalar> $tr for MultiSeries<C> {
            type Output = MultiSeries<C>;
            fn $m(self, rhs: MultiSeries<C>) -> MultiSeries<C> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<C: Scalar> fmt::Display for MultiSeries<C> {
    /// `[1 - 1*t^(1)]*x1^2 + [3/2]*x2`, terms in descending lex order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            f.write_str("0")?;
        }
        for (i, (m, c)) in self.coeffs.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "[{}]", TruncatedSeries::new(c.clone(), self.prec.clone(), self.rank))?;
            for (v, &e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", v + 1)?,
                    _ => write!(f, "*x{}^{}", v + 1, e)?,
                }
            }
        }
        if self.tail {
            write!(f, " + O(deg {})", self.degree_bound + 1)?;
        }
        Ok(())
    }
}

fn syntax(msg: impl Into<String>) -> Error {
    Error::SeriesSyntax(msg.into())
}

/// Parses the bracketed text format. Variables are `x1 .. xn`.
pub fn parse_multi<C: Scalar>(src: &str, nvars: usize, rank: usize) -> Result<MultiSeries<C>> {
    let s = src.trim();
    if s == "0" {
        return Ok(MultiSeries::zero(nvars, rank));
    }
    let mut terms = Vec::new();
    let mut prec = Bound::Infinite;
    let mut tail_bound: Option<u32> = None;
    let mut rest = s;
    let mut negate = false;
    loop {
        rest = rest.trim_start();
        if let Some(r) = rest.strip_prefix("O(deg ") {
            let end = r.find(')').ok_or_else(|| syntax("unclosed degree bound"))?;
            let n: u32 = r[..end].trim().parse().map_err(|_| syntax("bad degree bound"))?;
            if n == 0 {
                return Err(syntax("degree bound must be positive"));
            }
            tail_bound = Some(n - 1);
            rest = &r[end + 1..];
            if !rest.trim().is_empty() {
                return Err(syntax("text after degree bound"));
            }
            break;
        }
        let r = rest.strip_prefix('[').ok_or_else(|| syntax(format!("expected `[` in `{src}`")))?;
        let end = r.find(']').ok_or_else(|| syntax("unclosed coefficient"))?;
        let coeff: TruncatedSeries<C> = parse_series(&r[..end], rank)?;
        prec = prec.min(coeff.prec().clone());
        let mut mono = vec![0u32; nvars];
        rest = &r[end + 1..];
        while let Some(r) = rest.strip_prefix("*x") {
            let digits = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
            let v: usize = r[..digits].parse().map_err(|_| syntax("bad variable index"))?;
            if v == 0 || v > nvars {
                return Err(Error::BadVariable(v));
            }
            rest = &r[digits..];
            let mut e = 1;
            if let Some(r) = rest.strip_prefix('^') {
                let digits = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
                e = r[..digits].parse().map_err(|_| syntax("bad exponent"))?;
                rest = &r[digits..];
            }
            mono[v - 1] += e;
        }
        let c = coeff.approx().clone();
        terms.push((mono, if negate { -&c } else { c }));
        rest = rest.trim_start();
        if rest.is_empty() {
            break;
        }
        negate = match rest.as_bytes()[0] {
            b'+' => false,
            b'-' => true,
            _ => return Err(syntax(format!("unexpected `{rest}`"))),
        };
        rest = &rest[1..];
    }
    Ok(match tail_bound {
        Some(d) => MultiSeries::new(nvars, rank, d, true, prec, terms),
        None => MultiSeries::new(nvars, rank, 0, false, prec, terms),
    })
}
