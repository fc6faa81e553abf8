//! Polynomials in `x` whose coefficients are polynomials in `s = t^(1/N)`,
//! used for exact square-free reduction of polynomials over Hahn series.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational as Q;
use num_traits::{One, ToPrimitive, Zero};

use super::qpoly::{self, QPoly};
use crate::hahn::{GroupElement, HahnSeries};

/// Coefficient of `x^i` at index `i`.
pub type BPoly = Vec<QPoly>;

fn trim(mut p: BPoly) -> BPoly {
    while p.last().is_some_and(|c| c.is_empty()) {
        p.pop();
    }
    p
}

fn deg_x(p: &BPoly) -> Option<usize> {
    p.iter().rposition(|c| !c.is_empty())
}

/// Exponent denominator `N` and the shift making every exponent of every
/// coefficient a non-negative multiple of `1/N`.
fn grid(coeffs: &[HahnSeries<Q>]) -> (BigInt, Q) {
    let mut n = BigInt::one();
    let mut min = None::<Q>;
    for c in coeffs {
        for (e, _) in c.terms() {
            let q = &e.coords()[0];
            n = n.lcm(q.denom());
            if min.as_ref().is_none_or(|m| q < m) {
                min = Some(q.clone());
            }
        }
    }
    (n, min.unwrap_or_else(Q::zero))
}

/// Encodes rank-one coefficients as `t^shift * B(x, t^(1/N))`.
pub fn encode(coeffs: &[HahnSeries<Q>]) -> (BPoly, BigInt, Q) {
    let (n, shift) = grid(coeffs);
    let scale = Q::from_integer(n.clone());
    let p = coeffs
        .iter()
        .map(|c| {
            let mut out: QPoly = Vec::new();
            for (e, v) in c.terms() {
                let k = ((&e.coords()[0] - &shift) * &scale).to_integer().to_usize().expect("small exponent grid");
                if out.len() <= k {
                    out.resize(k + 1, Q::zero());
                }
                out[k] += v;
            }
            qpoly::trim(out)
        })
        .collect();
    (trim(p), n, shift)
}

pub fn decode(p: &BPoly, n: &BigInt, shift: &Q) -> Vec<HahnSeries<Q>> {
    let step = Q::new(BigInt::one(), n.clone());
    p.iter()
        .map(|c| {
            HahnSeries::from_terms(
                c.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (GroupElement::rational(shift + &step * Q::from_integer(k.into())), v.clone())),
            )
        })
        .collect()
}

fn derivative(p: &BPoly) -> BPoly {
    trim(p.iter().enumerate().skip(1).map(|(i, c)| qpoly::scale(c, &Q::from_integer(i.into()))).collect())
}

fn content(p: &BPoly) -> QPoly {
    p.iter().fold(Vec::new(), |acc, c| qpoly::gcd(&acc, c))
}

fn primitive(p: &BPoly) -> BPoly {
    let c = content(p);
    if c.is_empty() {
        return Vec::new();
    }
    trim(p.iter().map(|x| qpoly::divrem(x, &c).0).collect())
}

/// `lc(b)^k * a mod b` in `x`.
fn pseudo_rem(a: &BPoly, b: &BPoly) -> BPoly {
    let db = deg_x(b).expect("nonzero divisor");
    let lb = &b[db];
    let mut r = trim(a.clone());
    while let Some(dr) = deg_x(&r) {
        if dr < db {
            break;
        }
        let lr = r[dr].clone();
        let mut next: BPoly = r.iter().map(|c| qpoly::mul(c, lb)).collect();
        for (j, c) in b.iter().enumerate() {
            next[dr - db + j] = qpoly::sub(&next[dr - db + j], &qpoly::mul(c, &lr));
        }
        r = trim(primitive_keep_zero(next));
    }
    r
}

fn primitive_keep_zero(p: BPoly) -> BPoly {
    if deg_x(&p).is_none() {
        return Vec::new();
    }
    primitive(&p)
}

/// `a / b` in `x` up to a factor from `Q(s)`, assuming `b` divides `a`.
fn pseudo_quotient(a: &BPoly, b: &BPoly) -> BPoly {
    let db = deg_x(b).expect("nonzero divisor");
    let lb = &b[db];
    let mut r = trim(a.clone());
    let da = deg_x(&r).unwrap_or(0);
    if da < db {
        return vec![vec![Q::one()]];
    }
    let mut q: BPoly = vec![Vec::new(); da - db + 1];
    while let Some(dr) = deg_x(&r) {
        if dr < db {
            break;
        }
        let lr = r[dr].clone();
        q = q.iter().map(|c| qpoly::mul(c, lb)).collect();
        q[dr - db] = qpoly::add(&q[dr - db], &lr);
        let mut next: BPoly = r.iter().map(|c| qpoly::mul(c, lb)).collect();
        for (j, c) in b.iter().enumerate() {
            next[dr - db + j] = qpoly::sub(&next[dr - db + j], &qpoly::mul(c, &lr));
        }
        r = trim(next);
    }
    primitive(&trim(q))
}

/// Greatest common divisor over `Q(s)`, primitive in `Q[s][x]`.
pub fn gcd(a: &BPoly, b: &BPoly) -> BPoly {
    let (mut a, mut b) = (primitive(a), primitive(b));
    if deg_x(&a) < deg_x(&b) {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        match deg_x(&b) {
            None => return a,
            Some(0) => return vec![vec![Q::one()]],
            Some(_) => {}
        }
        let r = pseudo_rem(&a, &b);
        a = b;
        b = r;
    }
}

/// True when some specialization `s = s0` keeping the degree in `x` is
/// square-free; the generic gcd with the derivative is then trivial too.
/// `false` is inconclusive.
fn provably_squarefree(p: &BPoly) -> bool {
    let Some(d) = deg_x(p) else { return false };
    for s0 in [2, 3, 5, 7, -2, -3] {
        let s0 = Q::from_integer(s0.into());
        let special: QPoly = qpoly::trim(p.iter().map(|c| qpoly::eval(c, &s0)).collect());
        if qpoly::deg(&special) == Some(d) {
            return qpoly::deg(&qpoly::gcd(&special, &qpoly::derivative(&special))) == Some(0);
        }
    }
    false
}

/// The product of the distinct irreducible factors, up to a unit.
pub fn squarefree(p: &BPoly) -> BPoly {
    if provably_squarefree(p) {
        return trim(p.clone());
    }
    let g = gcd(p, &derivative(p));
    if deg_x(&g).unwrap_or(0) == 0 {
        return primitive(p);
    }
    pseudo_quotient(p, &g)
}

/// Square-free part of a polynomial with rank-one series coefficients.
pub fn squarefree_series(coeffs: &[HahnSeries<Q>]) -> Vec<HahnSeries<Q>> {
    let (p, n, _) = encode(coeffs);
    decode(&squarefree(&p), &n, &Q::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hahn::parse_exact;

    fn s(src: &str) -> HahnSeries<Q> {
        parse_exact(src, 1).unwrap()
    }

    #[test]
    fn round_trip_encoding() {
        let coeffs = vec![s("-1*t^(-1/2) + 2*t^(1)"), s("0"), s("3")];
        let (p, n, shift) = encode(&coeffs);
        assert_eq!(n, BigInt::from(2));
        assert_eq!(decode(&p, &n, &shift), coeffs);
    }

    #[test]
    fn squarefree_examples() {
        // (x - t)^2 (x + 1) = x^3 + (1 - 2t) x^2 + (t^2 - 2t) x + t^2
        let p = vec![s("1*t^(2)"), s("-2*t^(1) + 1*t^(2)"), s("1 - 2*t^(1)"), s("1")];
        let sf = squarefree_series(&p);
        assert_eq!(sf.len(), 3);
        // x^2 - t is already square-free
        let q = vec![s("-1*t^(1)"), s("0"), s("1")];
        assert_eq!(squarefree_series(&q).len(), 3);
        // (x^2 - t)^2
        let q2 = vec![s("1*t^(2)"), s("0"), s("-2*t^(1)"), s("0"), s("1")];
        let sf = squarefree_series(&q2);
        assert_eq!(sf.len(), 3);
        assert!(sf[1].is_zero());
    }

    #[test]
    fn unlucky_specialization_falls_back() {
        // x^2 - (2 - t) is square-free but degenerates at t = 2
        let p = vec![s("-2 + 1*t^(1)"), s("0"), s("1")];
        let sf = squarefree_series(&p);
        assert_eq!(sf.len(), 3);
        assert!(!sf[0].is_zero());
        // (x - t)^2 (x + t) specializes to square-ful polynomials everywhere
        let q = vec![s("1*t^(3)"), s("-1*t^(2)"), s("-1*t^(1)"), s("1")];
        assert_eq!(squarefree_series(&q).len(), 3);
    }
}
