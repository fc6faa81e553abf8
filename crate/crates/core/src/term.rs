//! One-variable terms: parsing, printing, evaluation at series points and
//! preparation by candidate generation plus sampled verification.
//!
//! Grammar (whitespace between tokens is free):
//!
//! ```text
//! term  := sum
//! sum   := prod (('+' | '-') prod)*
//! prod  := unary (('*' | '/') unary)*
//! unary := atom | '-' unary
//! atom  := rational | 't^(' exp ')' | 'x' | ident '(' term (',' term)* ')'
//!        | '(' term ')' | atom '^' integer
//! ```
//!
//! A rational literal `p/q` is one token only when written without spaces;
//! `inv(e)` is the multiplicative inverse.

use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::analytic::{evaluate_analytic, multi_indices, Registry};
use crate::error::{Error, Result};
use crate::hahn::{Bound, GroupElement, TruncatedSeries};
use crate::preparation::{candidate_set, verify_preparation_with, Polynomial, PrepareOptions, PreparedPoint, PreparingSet, Provenance};
use crate::rv::{rv_lambda, VerificationReport};
use crate::scalar::{parse_rational, Scalar};

const MAX_POWER: i64 = 1000;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Term {
    Rat(BigRational),
    /// `t^(g)`.
    Mono(GroupElement),
    Var,
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Div(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Pow(Box<Term>, i64),
    Inv(Box<Term>),
    App(String, Vec<Term>),
}

impl Term {
    pub fn int(n: i64) -> Term {
        Term::Rat(BigRational::from_integer(n.into()))
    }

    fn is_literal_zero(&self) -> bool {
        matches!(self, Term::Rat(q) if q.is_zero())
    }

    fn level(&self) -> u8 {
        match self {
            Term::Add(..) | Term::Sub(..) => 1,
            Term::Mul(..) | Term::Div(..) => 2,
            Term::Neg(_) => 3,
            Term::Rat(q) if q.is_negative() => 0,
            _ => 4,
        }
    }

    fn children(&self) -> Vec<&Term> {
        match self {
            Term::Rat(_) | Term::Mono(_) | Term::Var => Vec::new(),
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) | Term::Div(a, b) => vec![a, b],
            Term::Neg(a) | Term::Pow(a, _) | Term::Inv(a) => vec![a],
            Term::App(_, args) => args.iter().collect(),
        }
    }

    /// Every function application, outermost first.
    pub fn applications(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if matches!(t, Term::App(..)) {
                out.push(t);
            }
            stack.extend(t.children().into_iter().rev());
        }
        out
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// The term as a polynomial in `x`, when it uses only ring operations
    /// and non-negative powers.
    pub fn to_polynomial<C: Scalar>(&self, rank: usize) -> Option<Polynomial<C>> {
        Some(match self {
            Term::Rat(q) => Polynomial::constant(TruncatedSeries::constant(C::from_rational(q), rank)),
            Term::Mono(g) if g.rank() == rank => Polynomial::constant(TruncatedSeries::monomial(C::one(), g.clone())),
            Term::Var => Polynomial::x(rank),
            Term::Add(a, b) => a.to_polynomial(rank)?.add(&b.to_polynomial(rank)?),
            Term::Sub(a, b) => a.to_polynomial(rank)?.add(&b.to_polynomial(rank)?.neg()),
            Term::Mul(a, b) => a.to_polynomial(rank)?.mul(&b.to_polynomial(rank)?),
            Term::Neg(a) => a.to_polynomial(rank)?.neg(),
            Term::Pow(a, n) if *n >= 0 => a.to_polynomial(rank)?.pow(*n as u32),
            _ => return None,
        })
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.level() < min {
            f.write_str("(")?;
            self.write(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Term::Rat(q) => write!(f, "{q}"),
            Term::Mono(g) => write!(f, "t^({g})"),
            Term::Var => f.write_str("x"),
            Term::Add(a, b) => binary(f, a, " + ", b, 1),
            Term::Sub(a, b) => binary(f, a, " - ", b, 1),
            Term::Mul(a, b) => binary(f, a, " * ", b, 2),
            Term::Div(a, b) => binary(f, a, " / ", b, 2),
            Term::Neg(a) => {
                f.write_str("-")?;
                a.write(f, 3)
            }
            Term::Pow(a, n) => {
                a.write(f, 4)?;
                write!(f, "^{n}")
            }
            Term::Inv(a) => {
                f.write_str("inv(")?;
                a.write(f, 0)?;
                f.write_str(")")
            }
            Term::App(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    a.write(f, 0)?;
                }
                f.write_str(")")
            }
        }
    }
}

fn binary(f: &mut fmt::Formatter<'_>, a: &Term, op: &str, b: &Term, level: u8) -> fmt::Result {
    a.write(f, level)?;
    f.write_str(op)?;
    b.write(f, level + 1)
}

/// Canonical text: binary operators spaced, minimal parentheses.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    registry: &'a Registry,
}

impl<'a> Parser<'a> {
    fn err(&self, at: usize, msg: impl Into<String>) -> Error {
        let before = &self.src[..at];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Error::Syntax { line, col, msg: msg.into() }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn ws(&mut self) {
        while let Some(c) = self.peek().filter(|c| c.is_whitespace()) {
            self.pos += c.len_utf8();
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(self.pos, format!("expected `{c}`")))
        }
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn sum(&mut self) -> Result<Term> {
        let mut lhs = self.prod()?;
        loop {
            self.ws();
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    lhs = Term::Add(Box::new(lhs), Box::new(self.prod()?));
                }
                Some('-') => {
                    self.pos += 1;
                    lhs = Term::Sub(Box::new(lhs), Box::new(self.prod()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn prod(&mut self) -> Result<Term> {
        let mut lhs = self.unary()?;
        loop {
            self.ws();
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    lhs = Term::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some('/') => {
                    self.pos += 1;
                    self.ws();
                    let at = self.pos;
                    let rhs = self.unary()?;
                    if rhs.is_literal_zero() {
                        return Err(self.err(at, "division by a literal zero"));
                    }
                    lhs = Term::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Term> {
        self.ws();
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(Term::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn rational(&mut self) -> Result<Term> {
        let start = self.pos;
        self.digits();
        let rest = &self.src[self.pos..];
        if rest.starts_with('/') && rest[1..].starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
            self.digits();
        }
        let text = &self.src[start..self.pos];
        match parse_rational(text) {
            Some(q) => Ok(Term::Rat(q)),
            None => Err(self.err(start, format!("bad rational `{text}`"))),
        }
    }

    fn exponent(&mut self) -> Result<GroupElement> {
        let start = self.pos;
        let len = self.src[start..].find(')').ok_or_else(|| self.err(self.src.len(), "expected `)`"))?;
        self.pos = start + len + 1;
        let text: String = self.src[start..start + len].chars().filter(|c| !c.is_whitespace()).collect();
        GroupElement::parse(&text).map_err(|_| self.err(start, format!("bad exponent `{text}`")))
    }

    fn integer(&mut self) -> Result<i64> {
        self.ws();
        let start = self.pos;
        let negative = self.peek() == Some('-');
        if negative {
            self.pos += 1;
        }
        let d = self.digits();
        if d.is_empty() {
            return Err(self.err(self.pos, "expected an integer exponent"));
        }
        match d.parse::<i64>() {
            Ok(n) if n <= MAX_POWER => Ok(if negative { -n } else { n }),
            _ => Err(self.err(start, "exponent too large")),
        }
    }

    fn application(&mut self, name: &str) -> Result<Term> {
        let expected = match name {
            "inv" => 1,
            _ => self.registry.get(name).ok_or_else(|| Error::UnknownFunction(name.to_string()))?.nvars,
        };
        self.expect('(')?;
        let mut args = Vec::new();
        let mut arg_at = Vec::new();
        loop {
            self.ws();
            arg_at.push(self.pos);
            args.push(self.sum()?);
            self.ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.err(self.pos, "expected `,` or `)`")),
            }
        }
        if args.len() != expected {
            return Err(Error::ArityMismatch { name: name.to_string(), expected, got: args.len() });
        }
        if name == "inv" {
            let arg = args.pop().expect("one argument");
            if arg.is_literal_zero() {
                return Err(self.err(arg_at[0], "inverse of a literal zero"));
            }
            return Ok(Term::Inv(Box::new(arg)));
        }
        Ok(Term::App(name.to_string(), args))
    }

    fn atom(&mut self) -> Result<Term> {
        self.ws();
        let start = self.pos;
        let mut base = match self.peek() {
            None => return Err(self.err(start, "unexpected end of input")),
            Some(c) if c.is_ascii_digit() => self.rational()?,
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                self.expect(')')?;
                inner
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                match &self.src[start..self.pos] {
                    "x" => Term::Var,
                    "t" => {
                        self.expect('^')?;
                        self.expect('(')?;
                        Term::Mono(self.exponent()?)
                    }
                    name => {
                        let name = name.to_string();
                        self.application(&name)?
                    }
                }
            }
            Some(c) => return Err(self.err(start, format!("unexpected `{c}`"))),
        };
        loop {
            let save = self.pos;
            self.ws();
            if self.peek() != Some('^') {
                self.pos = save;
                return Ok(base);
            }
            self.pos += 1;
            let at = self.pos;
            let n = self.integer()?;
            if n < 0 && base.is_literal_zero() {
                return Err(self.err(at, "negative power of a literal zero"));
            }
            base = Term::Pow(Box::new(base), n);
        }
    }
}

/// Parses a term; function names are checked against `registry`.
pub fn parse_term(src: &str, registry: &Registry) -> Result<Term> {
    let mut p = Parser { src, pos: 0, registry };
    let term = p.sum()?;
    p.ws();
    match p.peek() {
        None => Ok(term),
        Some(c) => Err(p.err(p.pos, format!("unexpected `{c}`"))),
    }
}

struct Evaluator<'a> {
    registry: &'a Registry,
    inv_zero_is_zero: bool,
}

impl Evaluator<'_> {
    fn inverse<C: Scalar>(&self, a: &TruncatedSeries<C>, work: &Bound) -> Result<TruncatedSeries<C>> {
        if a.is_exactly_zero() {
            return if self.inv_zero_is_zero { Ok(TruncatedSeries::zero(a.rank())) } else { Err(Error::DivisionByZero) };
        }
        a.invert(work)
    }

    fn eval<C: Scalar>(&self, term: &Term, x: &TruncatedSeries<C>, work: &Bound) -> Result<TruncatedSeries<C>> {
        let rank = x.rank();
        let ev = |t: &Term| self.eval(t, x, work);
        Ok(match term {
            Term::Rat(q) => TruncatedSeries::constant(C::from_rational(q), rank),
            Term::Mono(g) => {
                if g.rank() != rank {
                    return Err(Error::RankMismatch(g.rank(), rank));
                }
                TruncatedSeries::monomial(C::one(), g.clone())
            }
            Term::Var => x.clone(),
            Term::Add(a, b) => &ev(a)? + &ev(b)?,
            Term::Sub(a, b) => &ev(a)? - &ev(b)?,
            Term::Mul(a, b) => (&ev(a)? * &ev(b)?).truncate(work),
            Term::Div(a, b) => (&ev(a)? * &self.inverse(&ev(b)?, work)?).truncate(work),
            Term::Neg(a) => -&ev(a)?,
            Term::Inv(a) => self.inverse(&ev(a)?, work)?,
            Term::Pow(a, n) => {
                let base = ev(a)?;
                let base = if *n < 0 { self.inverse(&base, work)? } else { base };
                let mut acc = TruncatedSeries::one(rank);
                for _ in 0..n.unsigned_abs() {
                    acc = (&acc * &base).truncate(work);
                }
                acc
            }
            Term::App(name, args) => {
                let f = self.registry.get(name).ok_or_else(|| Error::UnknownFunction(name.clone()))?;
                let vals = args.iter().map(ev).collect::<Result<Vec<_>>>()?;
                evaluate_analytic(f, &vals, work).map_err(|e| match e {
                    Error::NotInfinitesimal => Error::DomainError(format!("`{name}` needs infinitesimal arguments")),
                    e => e,
                })?
            }
        })
    }

    /// Evaluates with a working precision raised until the result meets
    /// `target` or stops improving.
    fn eval_to<C: Scalar>(&self, term: &Term, x: &TruncatedSeries<C>, target: &Bound) -> Result<TruncatedSeries<C>> {
        let mut work = target.clone();
        let mut best: Option<TruncatedSeries<C>> = None;
        for _ in 0..6 {
            let value = self.eval(term, x, &work)?;
            if value.prec() >= target {
                return Ok(value.truncate(target));
            }
            let (Bound::Finite(t), Bound::Finite(p), Bound::Finite(w)) = (target, value.prec(), &work) else {
                return Ok(value);
            };
            if best.as_ref().is_some_and(|b| b.prec() >= value.prec()) {
                break;
            }
            work = Bound::Finite(w + &(t - p));
            best = Some(value);
        }
        Ok(best.expect("at least one round"))
    }
}

/// Value of `term` at `x`, accurate to `target` where the input precision
/// allows. `1/0` is an error unless `inv_zero_is_zero` is set.
pub fn eval_term<C: Scalar>(term: &Term, x: &TruncatedSeries<C>, target: &Bound, registry: &Registry, inv_zero_is_zero: bool) -> Result<TruncatedSeries<C>> {
    Evaluator { registry, inv_zero_is_zero }.eval_to(term, x, target)
}

/// Evaluates with enough precision to read off `rv_lambda` of the value.
pub fn eval_for_rv<C: Scalar>(term: &Term, x: &TruncatedSeries<C>, lambda: &GroupElement, registry: &Registry, inv_zero_is_zero: bool) -> Result<TruncatedSeries<C>> {
    let rank = lambda.rank();
    let step = GroupElement::leading(BigRational::from_integer(4.into()), rank);
    let mut target = lambda + &step;
    let mut last = Err(Error::InsufficientPrecision);
    for _ in 0..8 {
        let value = eval_term(term, x, &Bound::Finite(target.clone()), registry, inv_zero_is_zero)?;
        if rv_lambda(&value, lambda).is_ok() {
            return Ok(value);
        }
        target = match value.valuation() {
            Ok(Bound::Finite(v)) if &(&v + lambda) + &step > target => &(&v + lambda) + &step,
            _ => &target + &step,
        };
        last = Ok(value);
    }
    last
}

/// A quotient of polynomials, used as the algebraic skeleton of a term.
#[derive(Clone)]
struct Fraction<C> {
    num: Polynomial<C>,
    den: Polynomial<C>,
}

impl<C: Scalar> Fraction<C> {
    fn poly(p: Polynomial<C>, rank: usize) -> Self {
        Fraction { num: p, den: Polynomial::constant(TruncatedSeries::one(rank)) }
    }

    fn add(&self, other: &Self) -> Self {
        if self.den == other.den {
            return Fraction { num: self.num.add(&other.num), den: self.den.clone() };
        }
        Fraction { num: self.num.mul(&other.den).add(&other.num.mul(&self.den)), den: self.den.mul(&other.den) }
    }

    fn neg(&self) -> Self {
        Fraction { num: self.num.neg(), den: self.den.clone() }
    }

    fn mul(&self, other: &Self) -> Self {
        Fraction { num: self.num.mul(&other.num), den: self.den.mul(&other.den) }
    }

    fn inv(&self, zero_ok: bool, rank: usize) -> Result<Self> {
        match self.num.degree() {
            None if zero_ok => Ok(Fraction::poly(Polynomial::new(Vec::new(), rank), rank)),
            None => Err(Error::DivisionByZero),
            Some(_) => Ok(Fraction { num: self.den.clone(), den: self.num.clone() }),
        }
    }

    fn pow(&self, n: i64, zero_ok: bool, rank: usize) -> Result<Self> {
        let base = if n < 0 { self.inv(zero_ok, rank)? } else { self.clone() };
        let k = n.unsigned_abs() as u32;
        Ok(Fraction { num: base.num.pow(k), den: base.den.pow(k) })
    }
}

/// Collects the skeleton of `term`, replacing each analytic application by
/// its Taylor polynomial of degree `taylor` in the argument skeletons.
/// Argument skeletons of applications are pushed to `args`.
fn skeleton<C: Scalar>(
    term: &Term,
    rank: usize,
    taylor: u32,
    eval: &Evaluator<'_>,
    args: &mut Vec<Fraction<C>>,
) -> Result<Fraction<C>> {
    let rec = |t: &Term, args: &mut Vec<Fraction<C>>| skeleton(t, rank, taylor, eval, args);
    let zero_ok = eval.inv_zero_is_zero;
    Ok(match term {
        Term::Mono(g) if g.rank() != rank => return Err(Error::RankMismatch(g.rank(), rank)),
        Term::Rat(_) | Term::Mono(_) | Term::Var => Fraction::poly(term.to_polynomial(rank).expect("leaf of matching rank"), rank),
        Term::Add(a, b) => rec(a, args)?.add(&rec(b, args)?),
        Term::Sub(a, b) => rec(a, args)?.add(&rec(b, args)?.neg()),
        Term::Mul(a, b) => rec(a, args)?.mul(&rec(b, args)?),
        Term::Div(a, b) => rec(a, args)?.mul(&rec(b, args)?.inv(zero_ok, rank)?),
        Term::Neg(a) => rec(a, args)?.neg(),
        Term::Inv(a) => rec(a, args)?.inv(zero_ok, rank)?,
        Term::Pow(a, n) => rec(a, args)?.pow(*n, zero_ok, rank)?,
        Term::App(name, inner) => {
            let f = eval.registry.get(name).ok_or_else(|| Error::UnknownFunction(name.clone()))?;
            let parts = inner.iter().map(|t| rec(t, args)).collect::<Result<Vec<_>>>()?;
            args.extend(parts.iter().cloned());
            let degree = f.rule.finite_degree().unwrap_or(taylor);
            let one = Fraction::poly(Polynomial::constant(TruncatedSeries::one(rank)), rank);
            let mut acc = Fraction::poly(Polynomial::new(Vec::new(), rank), rank);
            for mu in multi_indices(f.nvars, degree) {
                let c = f.rule.coeff_multi(&mu);
                if c.is_zero() {
                    continue;
                }
                let mut term = Fraction::poly(Polynomial::constant(TruncatedSeries::constant(C::from_rational(&c), rank)), rank);
                for (part, &e) in parts.iter().zip(&mu) {
                    term = term.mul(&(0..e).fold(one.clone(), |acc, _| acc.mul(part)));
                }
                acc = acc.add(&term);
            }
            acc
        }
    })
}

/// True when every application of a function with infinitely many Taylor
/// terms receives infinitesimal arguments at `c`.
fn in_domain<C: Scalar>(term: &Term, c: &TruncatedSeries<C>, eval: &Evaluator<'_>) -> bool {
    let rank = c.rank();
    let zero = GroupElement::zero(rank);
    let target = Bound::Finite(GroupElement::leading(BigRational::from_integer(1.into()), rank));
    term.applications().into_iter().all(|app| {
        let Term::App(name, args) = app else { unreachable!() };
        if eval.registry.get(name).is_some_and(|f| f.rule.finite_degree().is_some()) {
            return true;
        }
        args.iter().all(|a| match eval.eval_to(a, c, &target) {
            Ok(v) => v.valuation_lower_bound().exceeds(&zero),
            Err(Error::DomainError(_)) => false,
            Err(_) => true,
        })
    })
}

/// Candidate centers for `term` at branch depth `depth`: roots of the
/// skeleton's numerator and denominator and of the application arguments,
/// with their derivatives, restricted to the domain of the term.
fn term_candidates<C: Scalar>(term: &Term, rank: usize, depth: &BigRational, taylor: u32, eval: &Evaluator<'_>) -> Result<PreparingSet<C>> {
    let mut parts = Vec::new();
    let whole = skeleton::<C>(term, rank, taylor, eval, &mut parts)?;
    parts.push(whole);
    let mut set = PreparingSet::new();
    for frac in &parts {
        for p in [&frac.num, &frac.den] {
            if p.degree().unwrap_or(0) >= 1 {
                set.extend(candidate_set(p, depth)?);
            }
        }
    }
    set.points.retain(|p| in_domain(term, &p.series, eval));
    if set.is_empty() {
        set.insert(PreparedPoint {
            series: TruncatedSeries::zero(rank),
            depth: BigRational::zero(),
            provenance: Provenance { poly: term.to_string(), derivative_order: 0 },
        });
    }
    Ok(set)
}

/// Builds a preparing set for `term` and returns it with a passing report.
/// Each failed verification deepens the branches and the Taylor skeleton;
/// after `budget.retries` deepenings the report with fewest violations is
/// returned inside [`Error::BudgetExhausted`].
pub fn prepare_term<C: Scalar>(
    term: &Term,
    lambda: &GroupElement,
    registry: &Registry,
    inv_zero_is_zero: bool,
    budget: &PrepareOptions,
) -> Result<(PreparingSet<C>, VerificationReport)> {
    let rank = lambda.rank();
    if rank != 1 {
        return Err(Error::Unsupported("preparation needs a rank-one value group".into()));
    }
    let eval = Evaluator { registry, inv_zero_is_zero };
    let mut depth = budget.initial_depth(lambda);
    let mut taylor = 4;
    let mut best: Option<VerificationReport> = None;
    for _ in 0..=budget.retries {
        let set = term_candidates::<C>(term, rank, &depth, taylor, &eval)?;
        let report = verify_preparation_with(
            &budget.sampler,
            |x| eval_for_rv(term, x, lambda, registry, inv_zero_is_zero),
            &set,
            lambda,
            budget.trials,
            budget.seed,
        );
        if report.passed() {
            return Ok((set, report));
        }
        if best.as_ref().is_none_or(|b| report.violations.len() < b.violations.len()) {
            best = Some(report);
        }
        depth = &depth + &budget.deepen;
        taylor += 2;
    }
    Err(Error::BudgetExhausted(Box::new(best.expect("at least one attempt"))))
}
