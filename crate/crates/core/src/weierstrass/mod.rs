//! Gauss norm, regularity, Weierstrass division, the strong splitting and
//! unit inversion for degree-truncated multivariate series.
//!
//! Results are exact modulo the truncation ideal: monomials of degree above
//! `d_out` plus coefficients of valuation at least `prec_out`.

mod multi;

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

pub use multi::{degree, parse_multi, Monomial, MultiSeries};

use crate::error::{Error, Result};
use crate::hahn::{Bound, GroupElement, HahnSeries, TruncatedSeries};
use crate::scalar::Scalar;

/// Additive Gauss norm (minimal coefficient valuation) and the top slice:
/// the rational series of coefficient parts at exponent `norm`.
pub fn gauss_data<C: Scalar>(f: &MultiSeries<C>) -> Result<(Bound, MultiSeries<C>)> {
    if f.is_empty() {
        if f.is_exactly_zero() {
            return Ok((Bound::Infinite, MultiSeries::zero(f.nvars(), f.rank())));
        }
        return Err(Error::InsufficientPrecision);
    }
    let norm = f.norm();
    let g = norm.finite().expect("nonzero series has finite norm").clone();
    let top = f.terms().map(|(m, c)| (m.clone(), HahnSeries::constant(c.coeff(&g), f.rank())));
    Ok((norm.clone(), MultiSeries::polynomial(f.nvars(), f.rank(), top)))
}

fn check_var<C: Scalar>(f: &MultiSeries<C>, var: usize) -> Result<()> {
    if var >= f.nvars() {
        return Err(Error::BadVariable(var + 1));
    }
    Ok(())
}

/// Least `s` such that the top slice restricted to the `var` axis has a
/// nonzero `x_var^s` coefficient.
pub fn regular_degree<C: Scalar>(f: &MultiSeries<C>, var: usize) -> Result<u32> {
    check_var(f, var)?;
    let (norm, top) = gauss_data(f)?;
    if norm != Bound::Finite(GroupElement::zero(f.rank())) {
        return Err(Error::NormNotOne(norm.to_string()));
    }
    top.terms()
        .filter(|(m, _)| m.iter().enumerate().all(|(i, &e)| i == var || e == 0))
        .map(|(m, _)| m[var])
        .min()
        .ok_or(Error::NotRegular)
}

/// Quotient and remainders of a Weierstrass division; `remainders[i]` is
/// the coefficient of `x_var^i` and does not involve `x_var`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Division<C> {
    pub quotient: MultiSeries<C>,
    pub remainders: Vec<MultiSeries<C>>,
}

/// Order in which the division fixed point is iterated. Both orders give
/// the same truncation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DivisionOrder {
    /// Whole-series sweeps `h <- -(A * W)`.
    Jacobi,
    /// One monomial at a time from a work list.
    Worklist,
}

type Poly<C> = BTreeMap<Monomial, HahnSeries<C>>;

/// Projection onto the quotient by the truncation ideal.
struct Proj {
    d: u32,
    prec: Bound,
}

impl Proj {
    fn add_into<C: Scalar>(&self, acc: &mut Poly<C>, m: Monomial, c: &HahnSeries<C>) {
        if degree(&m) > self.d {
            return;
        }
        let c = c.truncate(&self.prec);
        if c.is_zero() {
            return;
        }
        match acc.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn mul<C: Scalar>(&self, a: &Poly<C>, b: &Poly<C>) -> Poly<C> {
        let mut out = Poly::new();
        for (ma, ca) in a {
            for (mb, cb) in b {
                let m: Monomial = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                if degree(&m) > self.d {
                    continue;
                }
                let c = ca.mul_truncated(cb, &self.prec);
                self.add_into(&mut out, m, &c);
            }
        }
        out
    }
}

pub fn weierstrass_divide<C: Scalar>(
    f: &MultiSeries<C>,
    g: &MultiSeries<C>,
    var: usize,
    d_out: u32,
    prec_out: &Bound,
) -> Result<Division<C>> {
    weierstrass_divide_with(DivisionOrder::Jacobi, f, g, var, d_out, prec_out)
}

/// Divides `g` by `f`, regular of degree `s` in `x_var`:
/// `g = Q f + sum_{i<s} R_i x_var^i` modulo the truncation ideal.
///
/// Writes `f = f_hi * (x_var^s + W)` with `f_hi` a unit and every term of
/// `W` either involving another variable or of positive valuation, then
/// iterates `h <- -(A W)` where `A` collects the `x_var^{>= s}` part of `h`.
pub fn weierstrass_divide_with<C: Scalar>(
    order: DivisionOrder,
    f: &MultiSeries<C>,
    g: &MultiSeries<C>,
    var: usize,
    d_out: u32,
    prec_out: &Bound,
) -> Result<Division<C>> {
    check_var(f, var)?;
    assert_eq!(f.nvars(), g.nvars(), "variable count mismatch");
    let (n, rank) = (f.nvars(), f.rank());
    let s = match regular_degree(f, var) {
        Err(Error::NormNotOne(_)) | Err(Error::InsufficientPrecision) => return Err(Error::NonUnitNorm),
        other => other?,
    };
    let mut d = d_out;
    if f.is_truncated() {
        d = d.min(f.degree_bound());
    }
    if g.is_truncated() {
        d = d.min(g.degree_bound());
    }
    let zero_out = |prec: Bound| Division {
        quotient: MultiSeries::new(n, rank, d, true, prec.clone(), []),
        remainders: (0..s).map(|_| MultiSeries::new(n, rank, d, true, prec.clone(), [])).collect(),
    };
    let g_norm = match g.norm() {
        Bound::Finite(v) => v,
        Bound::Infinite => return Ok(zero_out(prec_out.min(g.prec()).clone())),
    };
    let prec = prec_out.min(g.prec()).min(&f.prec().shift(&g_norm)).clone();
    if !prec.exceeds(&g_norm) {
        return Ok(zero_out(prec));
    }
    // normalize g to norm zero; work at the matching relative precision
    let inner = Proj { d, prec: prec.shift(&-&g_norm) };
    let mut g0 = Poly::new();
    for (m, c) in g.terms() {
        inner.add_into(&mut g0, m.clone(), &c.shift(&-&g_norm));
    }
    let (mut lo, mut hi) = (Poly::new(), Poly::new());
    for (m, c) in f.terms() {
        if m[var] >= s {
            let mut m2 = m.clone();
            m2[var] -= s;
            inner.add_into(&mut hi, m2, c);
        } else {
            inner.add_into(&mut lo, m.clone(), c);
        }
    }
    let unit_mono = vec![0; n];
    let c0 = hi.get(&unit_mono).cloned().expect("regular series has a unit leading coefficient");
    let c0_inv = TruncatedSeries::exact(c0, rank).invert(&inner.prec)?.approx().clone();
    let c0_inv_poly: Poly<C> = [(unit_mono.clone(), c0_inv)].into_iter().collect();
    // V = f_hi^{-1} = c0^{-1} sum (-m)^k with m = f_hi c0^{-1} - 1 of order >= 1
    let mut minus_m = inner.mul(&hi, &c0_inv_poly);
    minus_m.remove(&unit_mono);
    for c in minus_m.values_mut() {
        *c = -&*c;
    }
    let mut v = c0_inv_poly.clone();
    let mut power = c0_inv_poly.clone();
    for _ in 0..d {
        power = inner.mul(&power, &minus_m);
        if power.is_empty() {
            break;
        }
        for (m, c) in &power {
            inner.add_into(&mut v, m.clone(), c);
        }
    }
    let w = inner.mul(&lo, &v);
    let cap = iteration_cap(&w, var, d, &inner.prec)?;

    let (q_acc, r_acc) = match order {
        DivisionOrder::Jacobi => divide_jacobi(&inner, g0, &w, var, s, cap)?,
        DivisionOrder::Worklist => divide_worklist(&inner, g0, &w, var, s, cap)?,
    };
    let q = inner.mul(&q_acc, &v);
    let quotient = MultiSeries::new(n, rank, d, true, inner.prec.clone(), q).shift(&g_norm);
    let mut rem: Vec<Poly<C>> = vec![Poly::new(); s as usize];
    for (m, c) in r_acc {
        let i = m[var] as usize;
        let mut m2 = m;
        m2[var] = 0;
        rem[i].insert(m2, c);
    }
    let remainders = rem
        .into_iter()
        .map(|r| MultiSeries::new(n, rank, d, true, inner.prec.clone(), r).shift(&g_norm))
        .collect();
    Ok(Division { quotient, remainders })
}

/// Sweeps needed: each multiplication by `W` raises either the degree in
/// the other variables (at most `d` times) or the valuation by at least the
/// least valuation of a `W` term free of other variables.
fn iteration_cap<C: Scalar>(w: &Poly<C>, var: usize, d: u32, prec: &Bound) -> Result<u64> {
    let slice = w
        .iter()
        .filter(|(m, _)| m.iter().enumerate().all(|(i, &e)| i == var || e == 0))
        .filter_map(|(_, c)| c.valuation().finite().cloned())
        .min();
    let Some(eps) = slice else {
        return Ok(d as u64 + 1);
    };
    debug_assert!(eps.is_positive());
    match prec {
        Bound::Finite(p) => eps.steps_to_reach(p).map(|k| d as u64 + k + 1).ok_or(Error::UnreachablePrecision),
        // exact division may still terminate; give up after a generous budget
        Bound::Infinite => Ok(64 * (d as u64 + 1)),
    }
}

fn split_off<C: Scalar>(m: &Monomial, var: usize, s: u32) -> Option<Monomial> {
    (m[var] >= s).then(|| {
        let mut a = m.clone();
        a[var] -= s;
        a
    })
}

fn divide_jacobi<C: Scalar>(proj: &Proj, g0: Poly<C>, w: &Poly<C>, var: usize, s: u32, cap: u64) -> Result<(Poly<C>, Poly<C>)> {
    let (mut q, mut r) = (Poly::new(), Poly::new());
    let mut h = g0;
    for _ in 0..=cap {
        if h.is_empty() {
            return Ok((q, r));
        }
        let mut a = Poly::new();
        for (m, c) in &h {
            match split_off::<C>(m, var, s) {
                Some(am) => proj.add_into(&mut a, am, c),
                None => proj.add_into(&mut r, m.clone(), c),
            }
        }
        for (m, c) in &a {
            proj.add_into(&mut q, m.clone(), c);
        }
        h = proj.mul(&a, w);
        for c in h.values_mut() {
            *c = -&*c;
        }
    }
    if h.is_empty() {
        Ok((q, r))
    } else {
        Err(Error::UnreachablePrecision)
    }
}

fn divide_worklist<C: Scalar>(proj: &Proj, g0: Poly<C>, w: &Poly<C>, var: usize, s: u32, cap: u64) -> Result<(Poly<C>, Poly<C>)> {
    let (mut q, mut r) = (Poly::new(), Poly::new());
    let mut work = g0;
    let budget = (cap + 1).saturating_mul(work.len() as u64 + w.len() as u64 + 1).saturating_mul(1 + proj.d as u64).saturating_mul(64);
    let mut steps = 0u64;
    // largest monomial first
    while let Some((m, c)) = work.pop_last() {
        steps += 1;
        if steps > budget {
            return Err(Error::UnreachablePrecision);
        }
        match split_off::<C>(&m, var, s) {
            Some(am) => {
                proj.add_into(&mut q, am.clone(), &c);
                let single: Poly<C> = [(am, -&c)].into_iter().collect();
                for (m2, c2) in proj.mul(&single, w) {
                    proj.add_into(&mut work, m2, &c2);
                }
            }
            None => proj.add_into(&mut r, m, &c),
        }
    }
    Ok((q, r))
}

/// `g - Q f - sum R_i x_var^i`.
pub fn division_defect<C: Scalar>(f: &MultiSeries<C>, g: &MultiSeries<C>, var: usize, div: &Division<C>) -> MultiSeries<C> {
    let x = MultiSeries::var(f.nvars(), var, f.rank());
    let mut defect = g - &(&div.quotient * f);
    let mut xp = MultiSeries::one(f.nvars(), f.rank());
    for r in &div.remainders {
        defect = &defect - &(r * &xp);
        xp = &xp * &x;
    }
    defect
}

/// Membership of `h` in (degree `> d`) + (coefficient valuation `>= prec`).
pub fn in_truncation_ideal<C: Scalar>(h: &MultiSeries<C>, d: u32, prec: &Bound) -> bool {
    if h.prec() < prec {
        return false;
    }
    if h.is_truncated() && h.degree_bound() < d {
        return false;
    }
    h.terms().all(|(m, c)| degree(m) > d || c.truncate(prec).is_zero())
}

/// Result of the strong splitting
/// `f(x, e1, e2) = f1(x, e1, e3) + e2 f2(x, e2, e3) + Q (e1 e2 - e3)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StrongSplit<C> {
    /// Variables `(x.., e1, e3)`.
    pub f1: MultiSeries<C>,
    /// Variables `(x.., e2, e3)`.
    pub f2: MultiSeries<C>,
    /// Variables `(x.., e1, e2, e3)`.
    pub q: MultiSeries<C>,
}

/// Splits `f` whose last two variables are `e1, e2`. Each monomial
/// `e1^i e2^j` trades `k = min(i, j)` pairs for `e3^k` via
/// `(e1 e2)^k = e3^k + (e1 e2 - e3) sum_l (e1 e2)^l e3^(k-1-l)`.
pub fn strong_split<C: Scalar>(f: &MultiSeries<C>) -> Result<StrongSplit<C>> {
    let n = f.nvars();
    if n < 2 {
        return Err(Error::BadVariable(n));
    }
    let (e1, e2) = (n - 2, n - 1);
    let (mut f1, mut f2, mut q) = (Vec::new(), Vec::new(), Vec::new());
    for (m, c) in f.terms() {
        let (i, j) = (m[e1], m[e2]);
        let k = i.min(j);
        let base = &m[..e1];
        // remainder term with k pairs replaced by e3^k
        if j == k {
            let mut out = base.to_vec();
            out.extend([i - k, k]);
            f1.push((out, c.clone()));
        } else {
            let mut out = base.to_vec();
            out.extend([j - k - 1, k]);
            f2.push((out, c.clone()));
        }
        for l in 0..k {
            let mut out = base.to_vec();
            out.extend([i - k + l, j - k + l, k - 1 - l]);
            q.push((out, c.clone()));
        }
    }
    let build = |nv: usize, terms: Vec<(Monomial, HahnSeries<C>)>, bound: u32| {
        MultiSeries::new(nv, f.rank(), bound, f.is_truncated(), f.prec().clone(), terms)
    };
    let d = f.degree_bound();
    Ok(StrongSplit { f1: build(n, f1, d), f2: build(n, f2, d.saturating_sub(1)), q: build(n + 1, q, d.saturating_sub(2)) })
}

/// `f1(x, e1, e3) + e2 f2(x, e2, e3) + Q (e1 e2 - e3)` in variables `(x.., e1, e2, e3)`.
pub fn strong_split_recombine<C: Scalar>(split: &StrongSplit<C>) -> MultiSeries<C> {
    let n = split.f1.nvars();
    let base: Vec<usize> = (0..n - 2).collect();
    let (e1, e2, e3) = (n - 2, n - 1, n);
    let map1: Vec<usize> = base.iter().copied().chain([e1, e3]).collect();
    let map2: Vec<usize> = base.iter().copied().chain([e2, e3]).collect();
    let rank = split.f1.rank();
    let v = |i| MultiSeries::var(n + 1, i, rank);
    let pair = &(&v(e1) * &v(e2)) - &v(e3);
    &(&split.f1.embed(&map1, n + 1) + &(&v(e2) * &split.f2.embed(&map2, n + 1))) + &(&split.q * &pair)
}

/// Inverse of a unit `U` (norm zero, top slice nonzero at the origin).
pub fn unit_invert<C: Scalar>(u: &MultiSeries<C>, d_out: u32, prec_out: &Bound) -> Result<MultiSeries<C>> {
    if u.nvars() == 0 {
        return Err(Error::BadVariable(0));
    }
    match regular_degree(u, 0) {
        Ok(0) => {}
        Ok(_) | Err(Error::NotRegular) | Err(Error::NormNotOne(_)) | Err(Error::InsufficientPrecision) => return Err(Error::NotAUnit),
        Err(e) => return Err(e),
    }
    let one = MultiSeries::one(u.nvars(), u.rank());
    Ok(weierstrass_divide(u, &one, 0, d_out, prec_out)?.quotient)
}

/// `f(r x + a)` on the stored terms.
pub fn recenter_rescale<C: Scalar>(f: &MultiSeries<C>, a: &[C], r: &C) -> Result<MultiSeries<C>> {
    if a.len() != f.nvars() {
        return Err(Error::BadVariable(a.len()));
    }
    let (n, rank) = (f.nvars(), f.rank());
    let subs: Vec<MultiSeries<C>> = (0..n)
        .map(|i| {
            let mut m = vec![0; n];
            m[i] = 1;
            MultiSeries::polynomial(n, rank, [(m, HahnSeries::constant(r.clone(), rank)), (vec![0; n], HahnSeries::constant(a[i].clone(), rank))])
        })
        .collect();
    let out = f.compose(&subs)?;
    if f.is_truncated() {
        Ok(MultiSeries::new(n, rank, f.degree_bound(), true, out.prec().clone(), out.terms().map(|(m, c)| (m.clone(), c.clone()))))
    } else {
        Ok(out)
    }
}

#[cfg(test)]
mod tests;
