//! Acceptance suites, one line per criterion. Run with
//! `cargo test -p hahn-forge-core --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hahn_forge::analytic::{evaluate_analytic, hensel_root, AnalyticFunction, AnnulusUnit, Registry, Rule};
use hahn_forge::hahn::parse_series;
use hahn_forge::preparation::{
    jacobian_probe, jacobian_probe_with, prepare_polynomial_with, strong_unit_probe, verify_preparation, Polynomial, PrepareOptions, PreparingSet,
};
use hahn_forge::rv::{rv_lambda, same_ball, Sampler};
use hahn_forge::scalar::rat;
use hahn_forge::term::{eval_term, parse_term, prepare_term};
use hahn_forge::weierstrass::{division_defect, in_truncation_ideal, strong_split, strong_split_recombine, weierstrass_divide, Monomial};
use hahn_forge::{Bound, GroupElement, HahnSeries, Multi, Rat, Series, Truncated};

const TIME_BUDGET: Duration = Duration::from_secs(60);

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn prec(q: Rat) -> Bound {
    Bound::Finite(GroupElement::rational(q))
}

fn int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

fn series(s: &str) -> Truncated {
    parse_series(s, 1).expect("fixture series")
}

fn sign<R: Rng>(rng: &mut R) -> i64 {
    if rng.gen_bool(0.5) {
        1
    } else {
        -1
    }
}

/// One or two terms with exponents in `(1/4)Z` between `lo/4` and `hi/4`.
fn quarter_coeff<R: Rng>(rng: &mut R, lo: i64, hi: i64) -> Series {
    let terms = (0..rng.gen_range(1..=2)).map(|_| {
        let e = GroupElement::ratio(rng.gen_range(lo..=hi), 4);
        (e, rat(sign(rng) * rng.gen_range(1..=5), rng.gen_range(1..=3)))
    });
    HahnSeries::from_terms(terms)
}

fn random_monomial<R: Rng>(rng: &mut R, n: usize, d: u32) -> Monomial {
    let mut mono = vec![0; n];
    for _ in 0..rng.gen_range(0..=d) {
        mono[rng.gen_range(0..n)] += 1;
    }
    mono
}

fn weierstrass_division() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let p = prec(int(3));
    for k in 0..200 {
        let n = rng.gen_range(1..=3);
        let var = rng.gen_range(0..n);
        let s = rng.gen_range(0..=3u32);
        let d = rng.gen_range(s.max(1)..=8);
        // unit coefficient on x_var^s; other terms may not undercut it on the axis
        let mut axis = vec![0; n];
        axis[var] = s;
        let lead = &quarter_coeff(&mut rng, 1, 16) + &HahnSeries::constant(int(rng.gen_range(1..=4)), 1);
        let mut f_terms = vec![(axis, lead)];
        for _ in 0..rng.gen_range(1..=4) {
            let mono = random_monomial(&mut rng, n, d);
            let on_axis = mono.iter().enumerate().all(|(i, &e)| i == var || e == 0);
            let lo = if on_axis && mono[var] <= s { 1 } else { 0 };
            f_terms.push((mono, quarter_coeff(&mut rng, lo, 16)));
        }
        let f = Multi::polynomial(n, 1, f_terms);
        let g_terms: Vec<_> = (0..rng.gen_range(1..=4)).map(|_| (random_monomial(&mut rng, n, d), quarter_coeff(&mut rng, -8, 16))).collect();
        let g = Multi::polynomial(n, 1, g_terms);
        let div = weierstrass_divide(&f, &g, var, d, &p).map_err(|e| format!("instance {k}: {e}"))?;
        let defect = division_defect(&f, &g, var, &div);
        ensure(in_truncation_ideal(&defect, d, &p), || format!("instance {k}: defect {defect} for f = {f}, g = {g}"))?;
        let norm = g.norm();
        ensure(div.quotient.norm() >= norm, || format!("instance {k}: quotient norm"))?;
        ensure(div.remainders.iter().all(|r| r.norm() >= norm), || format!("instance {k}: remainder norm"))?;
    }
    Ok("200 instances, 0 failures".into())
}

fn strong_splitting() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for k in 0..200 {
        let terms: Vec<_> = (0..rng.gen_range(1..=6)).map(|_| (random_monomial(&mut rng, 3, 7), quarter_coeff(&mut rng, -8, 16))).collect();
        let f = Multi::polynomial(3, 1, terms);
        let split = strong_split(&f).map_err(|e| format!("polynomial {k}: {e}"))?;
        ensure(strong_split_recombine(&split) == f.embed(&[0, 1, 2], 4), || format!("polynomial {k}: {f} does not recombine"))?;
    }
    Ok("200 polynomials, 0 failures".into())
}

fn binomial(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn hensel_and_implicit() -> Check {
    let target = prec(int(8));
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let valuations = [rat(1, 2), int(1), int(2)];
    for k in 0..100 {
        let degree = rng.gen_range(2..=4);
        let coeffs: Vec<Truncated> = (2..=degree)
            .map(|_| {
                let v = valuations[rng.gen_range(0..3)].clone();
                let mut terms = vec![(GroupElement::rational(v.clone()), rat(sign(&mut rng) * rng.gen_range(1..=5), rng.gen_range(1..=3)))];
                if rng.gen_bool(0.5) {
                    terms.push((GroupElement::rational(&v + rat(rng.gen_range(1..=6), 2)), int(rng.gen_range(1..=4))));
                }
                Truncated::exact(HahnSeries::from_terms(terms), 1)
            })
            .collect();
        let root = hensel_root(&coeffs, &target).map_err(|e| format!("polynomial {k}: {e}"))?.root;
        // residual from exact series arithmetic on the returned approximation
        let y = root.approx();
        let mut residual = Series::one(1) + y.clone();
        let mut power = y.clone();
        for a in &coeffs {
            power = &power * y;
            residual = &residual + &(a.approx() * &power);
        }
        ensure(residual.valuation() >= target, || format!("polynomial {k}: residual valuation {}", residual.valuation()))?;
    }
    // 1 + y + t y^2 has root -C(t) with C the Catalan generating function
    let root = hensel_root(&[series("t^(1)")], &target).map_err(|e| e.to_string())?.root;
    for n in 0..8u64 {
        let catalan = Rat::from_integer(binomial(2 * n, n) / BigInt::from(n + 1));
        let got = root.approx().coeff(&GroupElement::int(n as i64));
        ensure(got == -catalan.clone(), || format!("Catalan coefficient {n}: got {got}, expected {}", -catalan))?;
    }
    Ok("100 random roots with residual >= 8, Catalan fixture exact".into())
}

/// Nonzero series with positive exponents in `(1/2)Z`.
fn infinitesimal<R: Rng>(rng: &mut R) -> Truncated {
    loop {
        let terms: Vec<_> = (0..rng.gen_range(1..=3)).map(|_| (GroupElement::ratio(rng.gen_range(1..=8), 2), int(sign(rng) * rng.gen_range(1..=5)))).collect();
        let x = Truncated::exact(HahnSeries::from_terms(terms), 1);
        if !x.is_exactly_zero() {
            return x;
        }
    }
}

fn analytic_invariants() -> Check {
    let reg = Registry::with_builtins();
    let names = ["exp", "sin", "cos"];
    let target = prec(int(6));
    let zero = prec(int(0));
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for k in 0..1000 {
        let f = reg.get(names[k % 3]).expect("builtin");
        let (a, b) = (infinitesimal(&mut rng), infinitesimal(&mut rng));
        let fa = evaluate_analytic(f, &[a.clone()], &target).map_err(|e| e.to_string())?;
        ensure(fa.valuation_lower_bound() >= zero, || format!("continuity: {}({a})", f.name))?;
        let fb = evaluate_analytic(f, &[b.clone()], &target).map_err(|e| e.to_string())?;
        let d = &a - &b;
        if !d.is_exactly_zero() {
            let bound = d.valuation().map_err(|e| e.to_string())?.min(target.clone());
            ensure((&fa - &fb).valuation_lower_bound() >= bound, || format!("Lipschitz: {}({a}) vs {}({b})", f.name, f.name))?;
        }
    }
    for k in 0..1000 {
        let f = reg.get(["exp", "cos"][k % 2]).expect("builtin");
        let a = infinitesimal(&mut rng);
        let lambda = GroupElement::int(rng.gen_range(0..3));
        let va = a.valuation().map_err(|e| e.to_string())?.finite().expect("nonzero").clone();
        let b = &a + &infinitesimal(&mut rng).shift(&(&va + &lambda));
        let t = prec(&lambda.coords()[0] + int(1));
        let rv = |x: &Truncated| rv_lambda(&evaluate_analytic(f, &[x.clone()], &t).expect("infinitesimal"), &lambda).expect("unit");
        ensure(rv(&a) == rv(&b), || format!("rv-unit: {}({a}) vs {}({b}) at lambda {lambda}", f.name, f.name))?;
    }
    let mut sampled = 0;
    for k in 0..20 {
        let inner = rng.gen_range(2..=4);
        let unit = AnnulusUnit {
            center: Truncated::exact(HahnSeries::from_terms([(GroupElement::int(0), int(rng.gen_range(-3..=3)))]), 1),
            delta: Truncated::monomial(int(1), GroupElement::int(inner)),
            epsilon: Truncated::monomial(int(1), GroupElement::int(inner - rng.gen_range(1..=2))),
            g: Multi::polynomial(1, 1, (1..=2).map(|e| (vec![e], quarter_coeff(&mut rng, 1, 8)))),
            h: Multi::polynomial(1, 1, (1..=2).map(|e| (vec![e], quarter_coeff(&mut rng, 1, 8)))),
        };
        ensure(unit.is_strong(), || format!("unit {k} is not strong"))?;
        let lambda = GroupElement::int(rng.gen_range(0..2));
        let report = strong_unit_probe(&unit, &lambda, 50, k).map_err(|e| format!("unit {k}: {e}"))?;
        ensure(report.passed(), || format!("strong unit {k}: {}", report.to_json()))?;
        sampled += report.trials;
    }
    Ok(format!("1000 continuity/Lipschitz, 1000 rv-unit, {sampled} strong-unit samples, 0 violations"))
}

fn fixture_corpus() -> Vec<Polynomial<Rat>> {
    let reg = Registry::empty();
    let mut texts: Vec<String> = [
        "x^2 - t^(1)",
        "x^2 - 2*t^(1)",
        "(x - 1)*(x - 1 - t^(1))",
        "x",
        "x - 1",
        "x^2",
        "x^2 + 1",
        "x^2 + t^(1)",
        "x^2 - 2",
        "x^3 - 2",
        "x^3 - t^(1)",
        "x^3 - t^(2)",
        "x^5 - t^(1)",
        "x^4 - t^(2)",
        "(x - t^(1))*(x - t^(2))",
        "(x - 1)*(x + 1)",
        "(x^2 - t^(1))*(x - 1)",
        "x^2 - t^(-1)",
        "x^2 + t^(1)*x + t^(3)",
        "(x - t^(1/2))*(x - t^(1/2) - t^(2))",
        "x^3 - 3*t^(2)*x + 2*t^(3)",
        "t^(1)*x^2 - 1",
        "(x - 2)^2*(x + t^(1))",
        "x^4 + t^(1)*x^2 + t^(4)",
        "x^5 - x",
    ]
    .map(String::from)
    .to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    while texts.len() < 50 {
        let degree = rng.gen_range(1..=5);
        let factors: Vec<String> = (0..degree)
            .map(|_| {
                let c0 = rng.gen_range(-2..=2);
                let c1 = rng.gen_range(-3..=3);
                let e = rat(rng.gen_range(1..=6), 2);
                format!("(x - ({c0} + {c1}*t^({e})))")
            })
            .collect();
        texts.push(factors.join("*"));
    }
    texts.iter().map(|s| parse_term(s, &reg).expect("fixture parses").to_polynomial(1).expect("fixture is a polynomial")).collect()
}

fn preparation() -> Check {
    let opts = PrepareOptions { trials: 500, seed: 17, ..PrepareOptions::default() };
    let corpus = fixture_corpus();
    for (k, p) in corpus.iter().enumerate() {
        ensure(p.degree().is_some_and(|d| (1..=5).contains(&d)), || format!("fixture {k} has degree {:?}", p.degree()))?;
        for l in 0..=2 {
                    let lambda = GroupElement::int(l);
            let (_, report) = prepare_polynomial_with(p, &lambda, &opts).map_err(|e| format!("fixture {k} ({p}), lambda {l}: {e}"))?;
            ensure(report.passed() && report.trials >= 500, || format!("fixture {k}: {}", report.to_json()))?;
        }
    }
    // undersized set {0} for x^2 - t
    let p = &corpus[0];
    let zero = GroupElement::int(0);
    let origin = PreparingSet::from_centers(vec![Truncated::zero(1)], "undersized");
    let report = verify_preparation(|x| Ok(p.eval_for_rv(x, &zero)), &origin, &zero, 500, 17);
    let witness = report.violations.first().ok_or("undersized set was not refuted")?;
    let (x, y) = (series(&witness.x), series(&witness.y));
    let same = same_ball(&origin.centers(), &zero, &x, &y).map_err(|e| e.to_string())?;
    let differ = rv_lambda(&p.eval(&x), &zero) != rv_lambda(&p.eval(&y), &zero);
    ensure(same && differ, || format!("witness does not separate: {witness:?}"))?;
    Ok(format!("{} fixtures x 3 depths pass at 500 trials; undersized set refuted by x = {}", corpus.len(), witness.x))
}

fn jacobian() -> Check {
    let zero = GroupElement::int(0);
    let origin = PreparingSet::from_centers(vec![Truncated::zero(1)], "x");
    let target = prec(int(16));
    let square = jacobian_probe(|x: &Truncated| Ok(x * x), &origin, &zero, 500, 23);
    let inverse = jacobian_probe(|x: &Truncated| x.invert(&target), &origin, &zero, 500, 23);
    // s -> root of 1 + y + s y^2, on infinitesimal s; sampled balls stay
    // below depth 8, so that precision decides every shift
    let root_target = prec(int(8));
    let sampler = Sampler { mates: 3, ..Sampler::default() }.with_gamma_range(rat(1, 2), int(4));
    let hensel = jacobian_probe_with(&sampler, |s: &Truncated| Ok(hensel_root(&[s.clone()], &root_target)?.root), &origin, &zero, 500, 23);
    for (name, probe) in [("x^2", &square), ("1/x", &inverse), ("hensel root", &hensel)] {
        ensure(probe.report.passed(), || format!("{name}: {}", probe.to_json()))?;
        ensure(probe.shifts.len() as u64 == probe.report.trials, || format!("{name}: only {} balls probed", probe.shifts.len()))?;
    }
    Ok("x^2, 1/x, Hensel root: 500 trials each, 0 violations".into())
}

/// Coefficients of `exp(a)` below `t^n` from `E' = a' E`.
fn exp_oracle(a: &[Rat], n: usize) -> Vec<Rat> {
    let mut e = vec![Rat::one()];
    for m in 1..n {
        let sum: Rat = (1..=m.min(a.len() - 1)).map(|k| int(k as i64) * &a[k] * &e[m - k]).sum();
        e.push(sum / int(m as i64));
    }
    e
}

fn counting_dimension() -> Check {
    let reg = Registry::with_builtins();
    let exp = reg.get("exp").expect("builtin");
    let exp_term = parse_term("exp(x)", &reg).expect("parses");
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for s in 2..=4usize {
        for k in 0..100 {
            let mut a = vec![Rat::zero(); s];
            while a.iter().all(Zero::is_zero) {
                for c in a.iter_mut().skip(1) {
                    *c = if rng.gen_bool(0.6) { rat(rng.gen_range(-5..=5), rng.gen_range(1..=3)) } else { Rat::zero() };
                }
            }
            let arg = Truncated::exact(HahnSeries::from_terms(a.iter().enumerate().map(|(i, c)| (GroupElement::int(i as i64), c.clone()))), 1);
            let target = prec(int(2 * s as i64));
            let value = evaluate_analytic(exp, &[arg.clone()], &target).map_err(|e| e.to_string())?;
            let via_term = eval_term(&exp_term, &arg, &target, &reg, false).map_err(|e| e.to_string())?;
            ensure(via_term.approx() == value.approx(), || format!("s = {s}, instance {k}: term evaluation differs"))?;
            let oracle = exp_oracle(&a, 2 * s);
            for (i, c) in oracle.iter().enumerate() {
                ensure(&value.approx().coeff(&GroupElement::int(i as i64)) == c, || format!("s = {s}, instance {k}: coefficient {i}"))?;
            }
            ensure(oracle[s..].iter().any(|c| !c.is_zero()), || format!("s = {s}, instance {k}: exp(a) has height below {s}"))?;
        }
    }
    let one = evaluate_analytic(exp, &[Truncated::zero(1)], &prec(int(8))).map_err(|e| e.to_string())?;
    ensure(one.approx() == &Series::one(1), || format!("exp(0) = {one}"))?;
    for k in 0..100 {
        let table: Vec<Rat> = (0..rng.gen_range(1..=4)).map(|_| rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))).collect();
        let f = AnalyticFunction::new("poly", 1, Rule::Table(table), int(2), false);
        let c = Truncated::constant(rat(rng.gen_range(-3..=3), rng.gen_range(1..=4)), 1);
        let v = evaluate_analytic(&f, &[c], &prec(int(8))).map_err(|e| e.to_string())?;
        ensure(v.approx().is_constant(), || format!("constant argument {k} gave {v}"))?;
    }
    Ok("300 nonconstant arguments leave height s; constant arguments stay constant".into())
}

/// JSON produced by the verification paths, for byte comparison.
fn json_battery() -> Vec<String> {
    let mut out = Vec::new();
    let opts = PrepareOptions { trials: 120, seed: 99, ..PrepareOptions::default() };
    for p in fixture_corpus().iter().take(8) {
        match prepare_polynomial_with(p, &GroupElement::int(1), &opts) {
            Ok((set, report)) => out.extend([set.to_json(), report.to_json()]),
            Err(e) => out.push(e.to_string()),
        }
    }
    let origin = PreparingSet::from_centers(vec![Truncated::zero(1)], "x");
    let p = &fixture_corpus()[0];
    out.push(verify_preparation(|x| Ok(p.eval_for_rv(x, &GroupElement::int(0))), &origin, &GroupElement::int(0), 200, 99).to_json());
    out.push(jacobian_probe(|x: &Truncated| Ok(x * x), &origin, &GroupElement::int(0), 100, 99).to_json());
    let reg = Registry::with_builtins();
    for src in ["x^2 - t^(1)", "exp(x) * x", "1/x - x"] {
        let term = parse_term(src, &reg).expect("fixture parses");
        match prepare_term::<Rat>(&term, &GroupElement::int(0), &reg, false, &opts) {
            Ok((set, report)) => out.extend([set.to_json(), report.to_json()]),
            Err(e) => out.push(e.to_string()),
        }
        out.push(eval_term(&term, &series("t^(1) + 2*t^(3/2)"), &prec(int(6)), &reg, false).map_or_else(|e| e.to_string(), |v| v.to_string()));
    }
    out
}

fn determinism() -> Check {
    let (first, second) = (json_battery(), json_battery());
    let bytes: usize = first.iter().map(String::len).sum();
    ensure(first == second, || "outputs differ between runs".into())?;
    Ok(format!("{} documents, {bytes} bytes identical across two runs", first.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("weierstrass division", weierstrass_division),
        ("strong split", strong_splitting),
        ("hensel and implicit", hensel_and_implicit),
        ("analytic invariants", analytic_invariants),
        ("preparation", preparation),
        ("jacobian property", jacobian),
        ("counting dimension", counting_dimension),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > TIME_BUDGET => Err(format!("exceeded {}s", TIME_BUDGET.as_secs())),
            r => r,
        };
        match result {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {:.1}s)", i + 1, elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail}; {:.1}s)", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
