use super::*;
use crate::hahn::parse_exact;
use crate::scalar::rat;
use num_rational::BigRational as Q;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type M = MultiSeries<Q>;

fn m(src: &str, n: usize) -> M {
    parse_multi(src, n, 1).unwrap()
}

fn prec(k: i64) -> Bound {
    Bound::Finite(GroupElement::int(k))
}

#[test]
fn text_round_trip() {
    let f = m("[1 - 1*t^(1)]*x1^2 + [3/2]*x2", 2);
    assert_eq!(f.to_string(), "[1 - 1*t^(1)]*x1^2 + [3/2]*x2");
    let g = m("[2]*x1*x2^3 + [1] + O(deg 5)", 2);
    assert_eq!(g.to_string(), "[2]*x1*x2^3 + [1] + O(deg 5)");
    assert_eq!(g.degree_bound(), 4);
    let h = m("[1 + O(t^(2))]*x1 - [1]", 1);
    assert_eq!(h.to_string(), "[1 + O(t^(2))]*x1 + [-1 + O(t^(2))]");
    assert!(parse_multi::<Q>("[1]*x3", 2, 1).is_err());
    assert!(parse_multi::<Q>("1*x1", 1, 1).is_err());
}

#[test]
fn gauss_data_examples() {
    let (n, top) = gauss_data(&m("[1]*x1 + [1*t^(1)]*x2", 2)).unwrap();
    assert_eq!(n, prec(0));
    assert_eq!(top, m("[1]*x1", 2));
    let (n, top) = gauss_data(&m("[1*t^(2)] + [1*t^(2)]*x1", 1)).unwrap();
    assert_eq!(n, prec(2));
    assert_eq!(top, m("[1] + [1]*x1", 1));
    let (n, top) = gauss_data(&m("[1*t^(-1)]*x1*x2 + [3]*x1", 2)).unwrap();
    assert_eq!(n, prec(-1));
    assert_eq!(top, m("[1]*x1*x2", 2));
}

#[test]
fn regular_degree_examples() {
    assert_eq!(regular_degree(&m("[1]*x1^2 - [1*t^(1)]", 1), 0), Ok(2));
    assert_eq!(regular_degree(&m("[1] - [1]*x1", 1), 0), Ok(0));
    assert_eq!(regular_degree(&m("[1*t^(1)]*x1 + [1]*x2", 2), 0), Err(Error::NotRegular));
    assert!(matches!(regular_degree(&m("[1*t^(1)]*x1", 1), 0), Err(Error::NormNotOne(_))));
}

fn check_division(f: &M, g: &M, var: usize, d: u32, p: &Bound) -> Division<Q> {
    let div = weierstrass_divide(f, g, var, d, p).unwrap();
    let defect = division_defect(f, g, var, &div);
    assert!(in_truncation_ideal(&defect, d, p), "defect {defect}");
    div
}

#[test]
fn division_examples() {
    let f = m("[1]*x1^2 - [1*t^(1)]", 1);
    let div = check_division(&f, &m("[1]*x1^3", 1), 0, 6, &prec(5));
    assert_eq!(div.quotient.terms().count(), 1);
    assert_eq!(div.quotient.coeff(&[1]).approx(), &parse_exact("1", 1).unwrap());
    assert!(div.remainders[0].is_empty());
    assert_eq!(div.remainders[1].coeff(&[0]).approx(), &parse_exact("1*t^(1)", 1).unwrap());
    // the identity is exact here: check it with polynomial arithmetic
    let exact = &(&m("[1]*x1", 1) * &f) + &m("[1*t^(1)]*x1", 1);
    assert_eq!(exact, m("[1]*x1^3", 1));

    let div = check_division(&m("[1] - [1]*x1", 1), &m("[1]", 1), 0, 3, &prec(2));
    assert_eq!(div.quotient.to_string(), "[1 + O(t^(2))]*x1^3 + [1 + O(t^(2))]*x1^2 + [1 + O(t^(2))]*x1 + [1 + O(t^(2))] + O(deg 4)");
    assert!(div.remainders.is_empty());

    let f = m("[1]*x1 + [1*t^(1)]*x2", 2);
    let div = weierstrass_divide(&f, &m("[1]*x1", 2), 0, 4, &Bound::Infinite).unwrap();
    assert_eq!(div.quotient.to_string(), "[1] + O(deg 5)");
    assert_eq!(div.remainders[0].to_string(), "[-1*t^(1)]*x2 + O(deg 5)");
    assert_eq!(&(&div.quotient * &f) + &div.remainders[0], m("[1]*x1 + O(deg 5)", 2));
}

#[test]
fn division_errors() {
    let g = m("[1]", 1);
    assert_eq!(weierstrass_divide(&m("[1*t^(1)]*x1", 1), &g, 0, 3, &prec(2)), Err(Error::NonUnitNorm));
    let f = m("[1*t^(1)]*x1 + [1]*x2", 2);
    assert_eq!(weierstrass_divide(&f, &m("[1]", 2), 0, 3, &prec(2)), Err(Error::NotRegular));
}

#[test]
fn unit_invert_examples() {
    let v = unit_invert(&m("[1] + [1]*x1", 1), 4, &prec(3)).unwrap();
    assert_eq!(v.to_string(), "[1 + O(t^(3))]*x1^4 + [-1 + O(t^(3))]*x1^3 + [1 + O(t^(3))]*x1^2 + [-1 + O(t^(3))]*x1 + [1 + O(t^(3))] + O(deg 5)");
    let u = m("[2 + 1*t^(1)] + [1]*x1", 1);
    let v = unit_invert(&u, 5, &prec(4)).unwrap();
    let residual = &(&u * &v) - &M::one(1, 1);
    assert!(in_truncation_ideal(&residual, 5, &prec(4)));
    // leading coefficients 1/2, -1/4 from 1/(2+t) and -1/(2+t)^2
    assert_eq!(v.coeff(&[0]).approx().coeff(&GroupElement::int(0)), rat(1, 2));
    assert_eq!(v.coeff(&[1]).approx().coeff(&GroupElement::int(0)), rat(-1, 4));
    assert_eq!(unit_invert(&m("[1]*x1", 1), 3, &prec(2)), Err(Error::NotAUnit));
}

#[test]
fn strong_split_examples() {
    let split = strong_split(&m("[1]*x2*x3", 3)).unwrap();
    assert_eq!(split.f1, m("[1]*x3", 3));
    assert!(split.f2.is_empty());
    assert_eq!(split.q, m("[1]", 4));

    let split = strong_split(&m("[1]*x2^2*x3", 3)).unwrap();
    assert_eq!(split.f1, m("[1]*x2*x3", 3));
    assert!(split.f2.is_empty());
    assert_eq!(split.q, m("[1]*x2", 4));

    let split = strong_split(&m("[1]*x2 + [1]*x3", 3)).unwrap();
    assert_eq!(split.f1, m("[1]*x2", 3));
    assert_eq!(split.f2, m("[1]", 3));
    assert!(split.q.is_empty());
}

#[test]
fn recenter_examples() {
    assert_eq!(recenter_rescale(&m("[1]*x1^2", 1), &[rat(1, 1)], &rat(1, 1)).unwrap(), m("[1] + [2]*x1 + [1]*x1^2", 1));
    assert_eq!(recenter_rescale(&m("[1]*x1", 1), &[rat(0, 1)], &rat(1, 2)).unwrap(), m("[1/2]*x1", 1));
}

fn random_coeff<R: Rng>(rng: &mut R, lo: i64, hi: i64) -> HahnSeries<Q> {
    let terms = (0..rng.gen_range(1..=2)).map(|_| {
        let e = GroupElement::ratio(rng.gen_range(lo..=hi), 4);
        let c = rat(rng.gen_range(1..=5) * if rng.gen_bool(0.5) { 1 } else { -1 }, rng.gen_range(1..=3));
        (e, c)
    });
    HahnSeries::from_terms(terms)
}

fn random_monomial<R: Rng>(rng: &mut R, n: usize, d: u32) -> Monomial {
    let mut mono = vec![0; n];
    let total = rng.gen_range(0..=d);
    for _ in 0..total {
        mono[rng.gen_range(0..n)] += 1;
    }
    mono
}

/// A random `f` of norm zero, regular of degree `s` in `var`, and a random `g`.
fn random_instance(seed: u64) -> (M, M, usize, u32) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=3);
    let var = rng.gen_range(0..n);
    let s = rng.gen_range(0..=3u32);
    let d = rng.gen_range(s.max(1)..=6);
    let mut unit = vec![0; n];
    unit[var] = s;
    let mut lead = random_coeff(&mut rng, 1, 8);
    lead = &lead + &HahnSeries::constant(rat(rng.gen_range(1..=4), 1), 1);
    let mut f_terms = vec![(unit, lead)];
    for _ in 0..rng.gen_range(1..=4) {
        let mono = random_monomial(&mut rng, n, d);
        let on_axis = mono.iter().enumerate().all(|(i, &e)| i == var || e == 0);
        let lo = if on_axis && mono[var] <= s { 1 } else { 0 };
        f_terms.push((mono, random_coeff(&mut rng, lo, 8)));
    }
    let f = M::polynomial(n, 1, f_terms);
    let g_terms: Vec<_> = (0..rng.gen_range(1..=4)).map(|_| (random_monomial(&mut rng, n, d), random_coeff(&mut rng, -8, 16))).collect();
    let g = M::polynomial(n, 1, g_terms);
    (f, g, var, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn division_identity_norms_and_uniqueness(seed in any::<u64>()) {
        let (f, g, var, d) = random_instance(seed);
        let p = prec(2);
        let div = weierstrass_divide(&f, &g, var, d, &p).unwrap();
        let defect = division_defect(&f, &g, var, &div);
        prop_assert!(in_truncation_ideal(&defect, d, &p), "f = {}, g = {}, defect = {}", f, g, defect);
        let g_norm = g.norm();
        prop_assert!(div.quotient.norm() >= g_norm);
        for r in &div.remainders {
            prop_assert!(r.norm() >= g_norm);
            prop_assert!(r.terms().all(|(m, _)| m[var] == 0));
        }
        let other = weierstrass_divide_with(DivisionOrder::Worklist, &f, &g, var, d, &p).unwrap();
        prop_assert_eq!(div, other);
    }

    #[test]
    fn strong_split_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms: Vec<_> = (0..rng.gen_range(1..=6)).map(|_| (random_monomial(&mut rng, 3, 7), random_coeff(&mut rng, -4, 8))).collect();
        let f = M::polynomial(3, 1, terms);
        let split = strong_split(&f).unwrap();
        prop_assert_eq!(strong_split_recombine(&split), f.embed(&[0, 1, 2], 4));
    }

    #[test]
    fn unit_inverse_residual(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=2);
        let mut terms = vec![(vec![0; n], &random_coeff(&mut rng, 1, 6) + &HahnSeries::constant(rat(rng.gen_range(1..=3), 1), 1))];
        for _ in 0..3 {
            terms.push((random_monomial(&mut rng, n, 3), random_coeff(&mut rng, 0, 6)));
        }
        let u = M::polynomial(n, 1, terms);
        prop_assume!(regular_degree(&u, 0) == Ok(0));
        let v = unit_invert(&u, 4, &prec(3)).unwrap();
        let residual = &(&u * &v) - &M::one(n, 1);
        prop_assert!(in_truncation_ideal(&residual, 4, &prec(3)));
    }

    #[test]
    fn recentering_composes(seed in any::<u64>(), a in -3i64..3, b in -3i64..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms: Vec<_> = (0..3).map(|_| (random_monomial(&mut rng, 2, 4), random_coeff(&mut rng, 0, 4))).collect();
        let f = M::polynomial(2, 1, terms);
        let (a, b) = (rat(a, 2), rat(b, 3));
        let one = rat(1, 1);
        let twice = recenter_rescale(&recenter_rescale(&f, &[a.clone(), a.clone()], &one).unwrap(), &[b.clone(), b.clone()], &one).unwrap();
        let once = recenter_rescale(&f, &[&a + &b, &a + &b], &one).unwrap();
        prop_assert_eq!(twice, once);
    }
}
