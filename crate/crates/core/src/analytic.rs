//! Restricted analytic functions evaluated at infinitesimal arguments,
//! Hensel roots, implicit-function series and the shifted square root.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hahn::{Bound, GroupElement, HahnSeries, TruncatedSeries};
use crate::scalar::{parse_rational, Scalar};
use crate::weierstrass::{degree, regular_degree, unit_invert, weierstrass_divide, Monomial, MultiSeries};

/// How Taylor coefficients are produced.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Rule {
    Exp,
    Sin,
    Cos,
    /// `log(1 + x)`.
    Log1p,
    /// `1 / (1 - x)`.
    Geometric,
    /// Univariate coefficients `c0, c1, ...`, zero beyond the table.
    Table(Vec<BigRational>),
    /// Finitely many multivariate coefficients.
    Polynomial(BTreeMap<Monomial, BigRational>),
    /// Termwise derivative of a univariate rule.
    Derivative(Box<Rule>),
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

impl Rule {
    pub fn builtin(id: &str) -> Option<Rule> {
        Some(match id {
            "exp" => Rule::Exp,
            "sin" => Rule::Sin,
            "cos" => Rule::Cos,
            "log1p" => Rule::Log1p,
            "geometric" => Rule::Geometric,
            _ => return None,
        })
    }

    /// Univariate coefficient of `x^k`.
    pub fn coeff(&self, k: u32) -> BigRational {
        let inv_fact = || BigRational::new(BigInt::one(), factorial(k));
        let sign = |e: u32| if e % 2 == 0 { BigRational::one() } else { -BigRational::one() };
        match self {
            Rule::Exp => inv_fact(),
            Rule::Sin if k % 2 == 1 => sign((k - 1) / 2) * inv_fact(),
            Rule::Cos if k % 2 == 0 => sign(k / 2) * inv_fact(),
            Rule::Sin | Rule::Cos => BigRational::zero(),
            Rule::Log1p if k == 0 => BigRational::zero(),
            Rule::Log1p => sign(k + 1) * BigRational::new(BigInt::one(), BigInt::from(k)),
            Rule::Geometric => BigRational::one(),
            Rule::Table(c) => c.get(k as usize).cloned().unwrap_or_else(BigRational::zero),
            Rule::Polynomial(map) => map.get(&vec![k]).cloned().unwrap_or_else(BigRational::zero),
            Rule::Derivative(inner) => BigRational::from_integer(BigInt::from(k + 1)) * inner.coeff(k + 1),
        }
    }

    /// Coefficient of a multi-index.
    pub fn coeff_multi(&self, mu: &[u32]) -> BigRational {
        match self {
            Rule::Polynomial(map) => map.get(mu).cloned().unwrap_or_else(BigRational::zero),
            _ if mu.len() == 1 => self.coeff(mu[0]),
            _ => BigRational::zero(),
        }
    }

    /// Degree of a rule with finitely many nonzero coefficients.
    pub fn finite_degree(&self) -> Option<u32> {
        match self {
            Rule::Table(c) => Some(c.iter().rposition(|q| !q.is_zero()).map_or(0, |i| i as u32)),
            Rule::Polynomial(map) => Some(map.iter().filter(|(_, q)| !q.is_zero()).map(|(m, _)| degree(m)).max().unwrap_or(0)),
            Rule::Derivative(inner) => inner.finite_degree().map(|d| d.saturating_sub(1)),
            _ => None,
        }
    }

    /// Radius of convergence of the series; `None` for entire functions.
    pub fn natural_radius(&self) -> Option<BigRational> {
        match self {
            Rule::Log1p | Rule::Geometric => Some(BigRational::one()),
            Rule::Derivative(inner) => inner.natural_radius(),
            _ => None,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Exp => f.write_str("exp"),
            Rule::Sin => f.write_str("sin"),
            Rule::Cos => f.write_str("cos"),
            Rule::Log1p => f.write_str("log1p"),
            Rule::Geometric => f.write_str("geometric"),
            Rule::Table(c) => {
                f.write_str("table:")?;
                for q in c {
                    write!(f, " {q}")?;
                }
                Ok(())
            }
            Rule::Polynomial(map) => write!(f, "polynomial({} terms)", map.len()),
            Rule::Derivative(inner) => write!(f, "d/dx {inner}"),
        }
    }
}

/// A restricted analytic function with rational Taylor coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AnalyticFunction {
    pub name: String,
    pub nvars: usize,
    pub rule: Rule,
    /// Radius `alpha > 1` of the closed polydisc the function lives on.
    pub radius: BigRational,
    /// Declared Gauss norm at most one.
    pub norm_bound: bool,
}

impl AnalyticFunction {
    pub fn new(name: &str, nvars: usize, rule: Rule, radius: BigRational, norm_bound: bool) -> Self {
        AnalyticFunction { name: name.to_string(), nvars, rule, radius, norm_bound }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::MalformedRule(format!("{}: {msg}", self.name)));
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') || !self.name.starts_with(|c: char| c.is_ascii_alphabetic()) {
            return bad("name must be an identifier");
        }
        if self.nvars == 0 {
            return bad("at least one variable required");
        }
        match &self.rule {
            Rule::Polynomial(map) if map.keys().any(|m| m.len() != self.nvars) => return bad("multi-index arity mismatch"),
            Rule::Polynomial(_) => {}
            _ if self.nvars != 1 => return bad("univariate rule used with several variables"),
            Rule::Table(c) if c.is_empty() => return bad("empty table"),
            _ => {}
        }
        if self.radius <= BigRational::one() {
            return bad("radius must exceed 1");
        }
        if let Some(r) = self.rule.natural_radius() {
            if self.radius > r {
                return bad("radius exceeds the radius of convergence");
            }
        }
        Ok(())
    }

    pub fn derivative(&self) -> Self {
        AnalyticFunction {
            name: format!("{}_prime", self.name),
            nvars: self.nvars,
            rule: Rule::Derivative(Box::new(self.rule.clone())),
            radius: self.radius.clone(),
            norm_bound: self.norm_bound,
        }
    }

    /// Parses one line `name <n> vars <k> radius <a> rule <id | table: c0 c1 ...> [norm1]`.
    pub fn parse_line(line: &str) -> Result<Self> {
        let bad = |msg: &str| Error::MalformedRule(format!("{msg} in `{line}`"));
        let words: Vec<&str> = line.split_whitespace().collect();
        let field = |i: usize, key: &str| -> Result<&str> {
            match (words.get(i), words.get(i + 1)) {
                (Some(k), Some(v)) if *k == key => Ok(v),
                _ => Err(bad(&format!("expected `{key} <value>`"))),
            }
        };
        let name = field(0, "name")?;
        let nvars: usize = field(2, "vars")?.parse().map_err(|_| bad("bad variable count"))?;
        let radius = parse_rational(field(4, "radius")?).ok_or_else(|| bad("bad radius"))?;
        if words.get(6) != Some(&"rule") {
            return Err(bad("expected `rule`"));
        }
        let mut rest = &words[7.min(words.len())..];
        let mut norm_bound = false;
        if rest.last() == Some(&"norm1") {
            norm_bound = true;
            rest = &rest[..rest.len() - 1];
        }
        let rule = match rest {
            [] => return Err(bad("missing rule")),
            ["table:", coeffs @ ..] => Rule::Table(coeffs.iter().map(|c| parse_rational(c).ok_or_else(|| bad("bad table entry"))).collect::<Result<_>>()?),
            [id] => Rule::builtin(id).ok_or_else(|| bad("unknown builtin"))?,
            _ => return Err(bad("unexpected rule text")),
        };
        let f = AnalyticFunction::new(name, nvars, rule, radius, norm_bound);
        f.validate()?;
        Ok(f)
    }
}

impl fmt::Display for AnalyticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "name {} vars {} radius {} rule {}", self.name, self.nvars, self.radius, self.rule)?;
        if self.norm_bound {
            f.write_str(" norm1")?;
        }
        Ok(())
    }
}

/// Append-only set of named functions.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    functions: BTreeMap<String, AnalyticFunction>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    /// `exp`, `sin` and `cos` on the polydisc of radius 2.
    pub fn with_builtins() -> Self {
        let mut r = Registry::empty();
        for (name, rule) in [("exp", Rule::Exp), ("sin", Rule::Sin), ("cos", Rule::Cos)] {
            r.register(AnalyticFunction::new(name, 1, rule, BigRational::from_integer(2.into()), true)).expect("builtins are valid");
        }
        r
    }

    pub fn register(&mut self, f: AnalyticFunction) -> Result<&AnalyticFunction> {
        f.validate()?;
        if self.functions.contains_key(&f.name) {
            return Err(Error::DuplicateName(f.name));
        }
        let name = f.name.clone();
        Ok(self.functions.entry(name).or_insert(f))
    }

    /// Registers every non-empty, non-comment line of a registration file.
    pub fn load(&mut self, text: &str) -> Result<usize> {
        let mut n = 0;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            self.register(AnalyticFunction::parse_line(line)?)?;
            n += 1;
        }
        Ok(n)
    }

    pub fn get(&self, name: &str) -> Option<&AnalyticFunction> {
        self.functions.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.functions.keys().map(String::as_str)
    }
}

/// `sum_mu taylor(mu) a^mu` truncated at `target`.
///
/// Arguments must be infinitesimal unless the rule is a polynomial; the
/// number of terms is bounded by `target / min v(a_i)`.
pub fn evaluate_analytic<C: Scalar>(f: &AnalyticFunction, a: &[TruncatedSeries<C>], target: &Bound) -> Result<TruncatedSeries<C>> {
    if a.len() != f.nvars {
        return Err(Error::ArityMismatch { name: f.name.clone(), expected: f.nvars, got: a.len() });
    }
    let rank = a[0].rank();
    let finite = f.rule.finite_degree();
    let zero = GroupElement::zero(rank);
    let min_v = a.iter().map(|x| x.valuation_lower_bound()).min().expect("at least one argument");
    if finite.is_none() && !min_v.exceeds(&zero) {
        return Err(Error::NotInfinitesimal);
    }
    let max_degree = match (finite, &min_v, target) {
        (Some(d), _, _) => d,
        (None, Bound::Infinite, _) => 0,
        (None, Bound::Finite(_), Bound::Infinite) => return Err(Error::UnreachablePrecision),
        (None, Bound::Finite(v), Bound::Finite(p)) => {
            let k = v.steps_to_reach(p).ok_or(Error::UnreachablePrecision)?;
            u32::try_from(k).map_err(|_| Error::UnreachablePrecision)?
        }
    };
    let coeff = |mu: &[u32]| C::from_rational(&f.rule.coeff_multi(mu));
    let mut acc = TruncatedSeries::zero(rank).with_prec(target.clone());
    if f.nvars == 1 {
        let mut power = TruncatedSeries::one(rank);
        for k in 0..=max_degree {
            if k > 0 {
                power = (&power * &a[0]).truncate(target);
            }
            let c = coeff(&[k]);
            if !c.is_zero() {
                acc = &acc + &power.scale(&c);
            }
        }
        return Ok(acc);
    }
    let mut powers: Vec<Vec<TruncatedSeries<C>>> = a.iter().map(|_| vec![TruncatedSeries::one(rank)]).collect();
    for mu in multi_indices(f.nvars, max_degree) {
        let c = coeff(&mu);
        if c.is_zero() {
            continue;
        }
        let mut term = TruncatedSeries::constant(c, rank);
        for (i, &e) in mu.iter().enumerate() {
            while powers[i].len() <= e as usize {
                let next = (powers[i].last().expect("nonempty") * &a[i]).truncate(target);
                powers[i].push(next);
            }
            term = (&term * &powers[i][e as usize]).truncate(target);
        }
        acc = &acc + &term;
    }
    Ok(acc)
}

/// All exponent vectors in `n` variables of total degree `<= d`.
pub fn multi_indices(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for m in &out {
            let used = degree(m);
            for e in 0..=d - used {
                let mut m2 = m.clone();
                m2.push(e);
                next.push(m2);
            }
        }
        out = next;
    }
    out
}

/// A Hensel root with the residual valuations seen along the Newton iteration.
#[derive(Clone, Debug)]
pub struct HenselRoot<C> {
    pub root: TruncatedSeries<C>,
    /// Lower bounds on `v(p(y_k))`, starting at `y_0 = -1`.
    pub residuals: Vec<Bound>,
}

/// The root with standard part `-1` of `1 + y + a_2 y^2 + ... + a_d y^d`
/// where every `v(a_i) > 0`, by Newton iteration from `-1`.
pub fn hensel_root<C: Scalar>(coeffs: &[TruncatedSeries<C>], target: &Bound) -> Result<HenselRoot<C>> {
    let rank = coeffs.first().map_or_else(|| target.finite().map_or(1, GroupElement::rank), TruncatedSeries::rank);
    let zero = GroupElement::zero(rank);
    for a in coeffs {
        if !a.valuation_lower_bound().exceeds(&zero) {
            return Err(Error::NotInfinitesimal);
        }
        if a.prec() < target {
            return Err(Error::PrecisionStall);
        }
    }
    let one = TruncatedSeries::one(rank);
    let poly = |y: &TruncatedSeries<C>| -> (TruncatedSeries<C>, TruncatedSeries<C>) {
        // Horner for p and p'
        let mut p = TruncatedSeries::zero(rank);
        let mut dp = TruncatedSeries::zero(rank);
        let all: Vec<TruncatedSeries<C>> = [one.clone(), one.clone()].into_iter().chain(coeffs.iter().cloned()).collect();
        for c in all.iter().rev() {
            dp = &(&dp * y) + &p;
            p = &(&p * y) + c;
        }
        (p, dp)
    };
    let mut y = -&one;
    let mut residuals = Vec::new();
    for _ in 0..64 {
        let (p, dp) = poly(&y);
        residuals.push(p.valuation_lower_bound());
        if p.is_exactly_zero() {
            return Ok(HenselRoot { root: y, residuals });
        }
        if p.approx_is_zero() && p.prec() >= target {
            return Ok(HenselRoot { root: y.truncate(target), residuals });
        }
        let step = &p * &dp.invert(target)?;
        y = (&y - &step).truncate(target);
    }
    Err(Error::PrecisionStall)
}

fn implicit_error(e: Error) -> Error {
    match e {
        Error::NotRegular | Error::NormNotOne(_) | Error::InsufficientPrecision => Error::NotRegularDegreeOne,
        e => e,
    }
}

/// `f(x, r(x))` for `f` in `(x, y)` and `r` in `x`.
pub fn substitute_y<C: Scalar>(f: &MultiSeries<C>, r: &MultiSeries<C>) -> Result<MultiSeries<C>> {
    let x = MultiSeries::var(1, 0, f.rank());
    f.compose(&[x, r.clone()])
}

/// The series `r(x)` with `f(x, r(x)) = 0` modulo the truncation ideal, for
/// `f(x, y)` of norm zero and regular of degree one in `y`.
///
/// `r` is the remainder of dividing `y` by `f`; a Newton pass
/// `r <- r - f(x, r) / f_y(x, r)` then runs until the residual vanishes.
pub fn implicit_series<C: Scalar>(f: &MultiSeries<C>, d_out: u32, prec_out: &Bound) -> Result<MultiSeries<C>> {
    if f.nvars() != 2 {
        return Err(Error::BadVariable(f.nvars()));
    }
    if regular_degree(f, 1).map_err(implicit_error)? != 1 {
        return Err(Error::NotRegularDegreeOne);
    }
    let rank = f.rank();
    let y = MultiSeries::var(2, 1, rank);
    let div = weierstrass_divide(f, &y, 1, d_out, prec_out).map_err(implicit_error)?;
    let mut r = div.remainders[0].embed(&[0, 0], 1);
    let fy = f.derivative(1);
    for _ in 0..=(d_out + 8) {
        let residual = substitute_y(f, &r)?.reduce(d_out, prec_out);
        if residual.is_empty() {
            return Ok(r);
        }
        let slope = substitute_y(&fy, &r)?.reduce(d_out, prec_out);
        let inv = unit_invert(&slope, d_out, prec_out)?;
        r = (&r - &(&residual * &inv)).reduce(d_out, prec_out);
    }
    Err(Error::PrecisionStall)
}

/// `r` with `(r(x) + eps)^2 = x + eps^2`, via the implicit function of
/// `x - 2 eps y - y^2`.
pub fn sqrt_shifted<C: Scalar>(epsilon: &C, d_out: u32) -> Result<MultiSeries<C>> {
    if !epsilon.is_positive() {
        return Err(Error::NotPositive);
    }
    let c = |q: C| HahnSeries::constant(q, 1);
    let h = MultiSeries::polynomial(
        2,
        1,
        [
            (vec![1, 0], c(C::one())),
            (vec![0, 1], c(-(epsilon.clone() + epsilon.clone()))),
            (vec![0, 2], c(-C::one())),
        ],
    );
    implicit_series(&h, d_out, &Bound::Infinite)
}

/// `U(x) = 1 + g(delta / (x - c)) + h((x - c) / eps)` on the annulus
/// `v(eps) < v(x - c) < v(delta)`.
#[derive(Clone, Debug)]
pub struct AnnulusUnit<C> {
    pub center: TruncatedSeries<C>,
    pub delta: TruncatedSeries<C>,
    pub epsilon: TruncatedSeries<C>,
    /// Univariate polynomials.
    pub g: MultiSeries<C>,
    pub h: MultiSeries<C>,
}

impl<C: Scalar> AnnulusUnit<C> {
    /// True when both `g` and `h` have positive additive norm.
    pub fn is_strong(&self) -> bool {
        let zero = Bound::Finite(GroupElement::zero(self.center.rank()));
        self.g.norm() > zero && self.h.norm() > zero
    }

    pub fn in_annulus(&self, x: &TruncatedSeries<C>) -> Result<bool> {
        let v = (x - &self.center).valuation()?;
        Ok(self.epsilon.valuation()? < v && v < self.delta.valuation()?)
    }

    pub fn eval(&self, x: &TruncatedSeries<C>, target: &Bound) -> Result<TruncatedSeries<C>> {
        if !self.in_annulus(x)? {
            return Err(Error::DomainViolation);
        }
        let shifted = x - &self.center;
        let inner = &self.delta * &shifted.invert(target)?;
        let outer = &shifted * &self.epsilon.invert(target)?;
        let one = TruncatedSeries::one(self.center.rank());
        let sum = &(&one + &self.g.eval_at(&[inner])?) + &self.h.eval_at(&[outer])?;
        Ok(sum.truncate(target))
    }
}
