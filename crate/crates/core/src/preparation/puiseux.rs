use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational as Q;
use num_traits::One;

use super::bivariate::squarefree_series;
use super::qpoly::{split_roots, IntervalCoeff, QPoly};
use super::Polynomial;
use crate::error::{Error, Result};
use crate::hahn::{Bound, GroupElement, HahnSeries};
use crate::scalar::Scalar;

/// Root valuations with multiplicities, read off the lower convex hull of
/// `(i, v(a_i))` from left to right. Roots at zero (vanishing low
/// coefficients) are not listed.
pub fn newton_polygon<C: Scalar>(p: &Polynomial<C>) -> Result<Vec<(GroupElement, usize)>> {
    let d = p.degree().ok_or(Error::ConstantPolynomial)?;
    let coeffs = p.coeffs();
    if coeffs[d].approx_is_zero() {
        return Err(Error::InsufficientPrecision);
    }
    let mut points = Vec::new();
    let mut undetermined = Vec::new();
    for (i, c) in coeffs.iter().enumerate() {
        match (c.approx_is_zero(), c.prec()) {
            (false, _) => points.push((i, c.approx().valuation().finite().expect("nonzero").clone())),
            (true, Bound::Infinite) => {}
            (true, Bound::Finite(g)) => undetermined.push((i, g.clone())),
        }
    }
    let first = points[0].0;
    if undetermined.iter().any(|(i, _)| *i < first) {
        return Err(Error::InsufficientPrecision);
    }
    let edges = lower_hull(&points);
    // an undetermined coefficient must lie strictly above the hull
    for (i, bound) in &undetermined {
        let (a, b) = edges.iter().find(|(a, b)| a.0 <= *i && *i <= b.0).expect("inside the hull");
        let span = (b.0 - a.0) as i64;
        let along = &a.1.scale_int(span) + &(&b.1 - &a.1).scale_int((*i - a.0) as i64);
        if bound.scale_int(span) <= along {
            return Err(Error::InsufficientPrecision);
        }
    }
    Ok(edges.iter().map(|(a, b)| ((&a.1 - &b.1).div_int((b.0 - a.0) as i64), b.0 - a.0)).collect())
}

type Point = (usize, GroupElement);

fn lower_hull(points: &[Point]) -> Vec<(Point, Point)> {
    let mut hull: Vec<Point> = Vec::new();
    for p in points {
        while hull.len() >= 2 {
            let (a, b) = (&hull[hull.len() - 2], &hull[hull.len() - 1]);
            // drop b when it lies on or above the segment a-p
            let lhs = (&b.1 - &a.1).scale_int((p.0 - a.0) as i64);
            let rhs = (&p.1 - &a.1).scale_int((b.0 - a.0) as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p.clone());
    }
    hull.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect()
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BranchCoeff {
    Rational(Q),
    Interval(IntervalCoeff),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Conjugacy {
    Real,
    /// A pair of complex-conjugate roots sharing the recorded real prefix.
    ComplexPair,
}

/// A root of a polynomial over the real closure, known as a finite branch
/// `sum c_k t^(e_k)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PuiseuxRoot {
    /// Least common denominator of the exponents.
    pub ramification: u64,
    pub branch: Vec<(Q, BranchCoeff)>,
    /// The root agrees with the branch at every exponent below `depth`;
    /// a final interval term sits at `depth` itself.
    pub depth: Q,
    /// The branch is the root itself.
    pub exact: bool,
    pub conjugacy: Conjugacy,
    pub multiplicity: usize,
}

impl PuiseuxRoot {
    fn new(branch: Vec<(Q, BranchCoeff)>, depth: Q, exact: bool, conjugacy: Conjugacy, multiplicity: usize) -> Self {
        let ramification = branch.iter().fold(BigInt::one(), |acc, (e, _)| acc.lcm(e.denom()));
        let ramification = u64::try_from(ramification).unwrap_or(u64::MAX);
        PuiseuxRoot { ramification, branch, depth, exact, conjugacy, multiplicity }
    }

    /// The leading terms with rational coefficients.
    pub fn prefix(&self) -> HahnSeries<Q> {
        HahnSeries::from_terms(
            self.branch
                .iter()
                .map_while(|(e, c)| match c {
                    BranchCoeff::Rational(q) => Some((GroupElement::rational(e.clone()), q.clone())),
                    BranchCoeff::Interval(_) => None,
                }),
        )
    }

    pub fn is_rational(&self) -> bool {
        self.branch.iter().all(|(_, c)| matches!(c, BranchCoeff::Rational(_)))
    }

    /// Number of roots of the polynomial this branch stands for.
    pub fn root_count(&self) -> usize {
        match self.conjugacy {
            Conjugacy::Real => self.multiplicity,
            Conjugacy::ComplexPair => 2 * self.multiplicity,
        }
    }
}

impl fmt::Display for PuiseuxRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conjugacy == Conjugacy::ComplexPair {
            f.write_str("complex pair: ")?;
        }
        if self.branch.is_empty() {
            f.write_str("0")?;
        }
        for (i, (e, c)) in self.branch.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match c {
                BranchCoeff::Rational(q) => write!(f, "{q}*t^({e})")?,
                BranchCoeff::Interval(iv) => write!(f, "[{iv}]*t^({e})")?,
            }
        }
        if !self.exact {
            write!(f, " + O(t^({}))", self.depth)?;
        }
        Ok(())
    }
}

/// Real-closure roots of the square-free part of `p`, expanded by the
/// Newton-Puiseux method until `depth`, an irrational coefficient, or a
/// complex-conjugate split.
pub fn puiseux_roots<C: Scalar>(p: &Polynomial<C>, depth: &Q) -> Result<Vec<PuiseuxRoot>> {
    if p.rank() != 1 {
        return Err(Error::Unsupported("Puiseux expansion needs a rank-one value group".into()));
    }
    match p.degree() {
        None | Some(0) => return Err(Error::ConstantPolynomial),
        Some(_) => {}
    }
    let coeffs: Vec<HahnSeries<Q>> = p.coeffs().iter().map(|c| c.approx().map_coeffs(C::to_rational)).collect();
    let sf = squarefree_series(&coeffs);
    let mut out = Vec::new();
    expand(sf, Vec::new(), None, depth, &mut out);
    Ok(out)
}

fn val(c: &HahnSeries<Q>) -> Option<Q> {
    c.valuation().finite().map(|g| g.coords()[0].clone())
}

fn expand(mut p: Vec<HahnSeries<Q>>, prefix: Vec<(Q, BranchCoeff)>, above: Option<Q>, depth: &Q, out: &mut Vec<PuiseuxRoot>) {
    let zeros = p.iter().take_while(|c| c.is_zero()).count();
    if zeros > 0 {
        out.push(PuiseuxRoot::new(prefix.clone(), depth.clone(), true, Conjugacy::Real, zeros));
        p.drain(..zeros);
    }
    if p.len() < 2 {
        return;
    }
    let points: Vec<Point> = p.iter().enumerate().filter_map(|(i, c)| val(c).map(|v| (i, GroupElement::rational(v)))).collect();
    for (a, b) in lower_hull(&points) {
        let gamma = (&a.1 - &b.1).div_int((b.0 - a.0) as i64).coords()[0].clone();
        if above.as_ref().is_some_and(|lo| &gamma <= lo) {
            continue;
        }
        let level = &a.1.coords()[0] + &gamma * Q::from_integer(a.0.into());
        let phi: QPoly = (a.0..=b.0)
            .map(|i| p[i].coeff(&GroupElement::rational(&level - &gamma * Q::from_integer(i.into()))))
            .collect();
        let split = split_roots(&phi);
        if &gamma >= depth {
            let real: Vec<usize> = split.rational.iter().map(|(_, k)| *k).chain(split.irrational.iter().map(|(_, k)| *k)).collect();
            for k in real {
                out.push(PuiseuxRoot::new(prefix.clone(), depth.clone(), false, Conjugacy::Real, k));
            }
            for (_, k) in &split.complex_pairs {
                out.push(PuiseuxRoot::new(prefix.clone(), depth.clone(), false, Conjugacy::ComplexPair, *k));
            }
            continue;
        }
        for (c, _) in &split.rational {
            let mut next = prefix.clone();
            next.push((gamma.clone(), BranchCoeff::Rational(c.clone())));
            let shift = HahnSeries::monomial(c.clone(), GroupElement::rational(gamma.clone()));
            expand(taylor_shift(&p, &shift), next, Some(gamma.clone()), depth, out);
        }
        for (iv, k) in &split.irrational {
            let mut next = prefix.clone();
            next.push((gamma.clone(), BranchCoeff::Interval(iv.clone())));
            out.push(PuiseuxRoot::new(next, gamma.clone(), false, Conjugacy::Real, *k));
        }
        for (_, k) in &split.complex_pairs {
            out.push(PuiseuxRoot::new(prefix.clone(), gamma.clone(), false, Conjugacy::ComplexPair, *k));
        }
    }
}

/// Coefficients of `p(x + c)`.
fn taylor_shift(p: &[HahnSeries<Q>], c: &HahnSeries<Q>) -> Vec<HahnSeries<Q>> {
    let mut out: Vec<HahnSeries<Q>> = Vec::new();
    for a in p.iter().rev() {
        // out <- out * (x + c) + a
        let mut next = vec![HahnSeries::zero(); out.len() + 1];
        for (i, o) in out.iter().enumerate() {
            next[i + 1] = &next[i + 1] + o;
            next[i] = &next[i] + &(o * c);
        }
        next[0] = &next[0] + a;
        out = next;
    }
    while out.last().is_some_and(HahnSeries::is_zero) {
        out.pop();
    }
    out
}
