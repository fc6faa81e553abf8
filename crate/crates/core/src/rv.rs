//! Leading-term structure `RV_lambda`, angular components, balls next to
//! finite sets, and the seeded samplers used by the preparation checks.

use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hahn::truncated::series_in;
use crate::hahn::{Bound, GroupElement, HahnSeries, TruncatedSeries};
use crate::scalar::{rat, Scalar};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RvValue<C> {
    Zero,
    /// `x = t^gamma * jet * (1 + m)` with `v(m) > lambda`.
    Unit { gamma: GroupElement, jet: HahnSeries<C> },
}

/// A point of `RV_lambda = K^x / (1 + B_{>lambda}(0)) ∪ {0}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RvElement<C> {
    lambda: GroupElement,
    value: RvValue<C>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RvOp {
    Mul,
    Inv,
}

impl<C: Scalar> RvElement<C> {
    pub fn zero(lambda: GroupElement) -> Self {
        RvElement { lambda, value: RvValue::Zero }
    }

    pub fn lambda(&self) -> &GroupElement {
        &self.lambda
    }

    pub fn value(&self) -> &RvValue<C> {
        &self.value
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.value, RvValue::Zero)
    }

    pub fn gamma(&self) -> Option<&GroupElement> {
        match &self.value {
            RvValue::Zero => None,
            RvValue::Unit { gamma, .. } => Some(gamma),
        }
    }

    pub fn jet(&self) -> Option<&HahnSeries<C>> {
        match &self.value {
            RvValue::Zero => None,
            RvValue::Unit { jet, .. } => Some(jet),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.lambda != other.lambda {
            return Err(Error::LambdaMismatch);
        }
        let value = match (&self.value, &other.value) {
            (RvValue::Unit { gamma: ga, jet: ja }, RvValue::Unit { gamma: gb, jet: jb }) => RvValue::Unit {
                gamma: ga + gb,
                jet: (ja * jb).truncate_inclusive(&self.lambda),
            },
            _ => RvValue::Zero,
        };
        Ok(RvElement { lambda: self.lambda.clone(), value })
    }

    pub fn inv(&self) -> Result<Self> {
        let (gamma, jet) = match &self.value {
            RvValue::Zero => return Err(Error::ZeroInverse),
            RvValue::Unit { gamma, jet } => (gamma, jet),
        };
        let rank = self.lambda.rank();
        let (_, a0) = jet.leading().expect("unit jet is nonzero");
        let a0_inv = C::one() / a0.clone();
        let u = &jet.scale(&a0_inv) - &HahnSeries::one(rank);
        let inverse = match u.leading() {
            None => HahnSeries::one(rank),
            Some((vu, _)) => {
                let rel = Bound::Finite(&self.lambda + vu);
                series_in(&-&u, &rel, rank, |_| C::one())?.truncate_inclusive(&self.lambda)
            }
        };
        Ok(RvElement {
            lambda: self.lambda.clone(),
            value: RvValue::Unit { gamma: -gamma, jet: inverse.scale(&a0_inv) },
        })
    }

    /// The image in `RV_mu` for `mu <= lambda`.
    pub fn coarsen(&self, mu: &GroupElement) -> Result<Self> {
        if mu.is_negative() {
            return Err(Error::NegativeLambda);
        }
        if mu > &self.lambda {
            return Err(Error::InsufficientPrecision);
        }
        let value = match &self.value {
            RvValue::Zero => RvValue::Zero,
            RvValue::Unit { gamma, jet } => RvValue::Unit { gamma: gamma.clone(), jet: jet.truncate_inclusive(mu) },
        };
        Ok(RvElement { lambda: mu.clone(), value })
    }
}

impl<C: Scalar> fmt::Display for RvElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            RvValue::Zero => f.write_str("0"),
            RvValue::Unit { gamma, jet } => write!(f, "t^({gamma})*[{jet}]"),
        }
    }
}

/// `rv_lambda(x)`: the valuation of `x` and its unit part to depth `lambda`.
pub fn rv_lambda<C: Scalar>(x: &TruncatedSeries<C>, lambda: &GroupElement) -> Result<RvElement<C>> {
    if lambda.is_negative() {
        return Err(Error::NegativeLambda);
    }
    if x.is_exactly_zero() {
        return Ok(RvElement::zero(lambda.clone()));
    }
    let gamma = match x.approx().leading() {
        Some((g, _)) => g.clone(),
        None => return Err(Error::InsufficientPrecision),
    };
    let depth = &gamma + lambda;
    if !x.prec().exceeds(&depth) {
        return Err(Error::InsufficientPrecision);
    }
    let jet = x.approx().shift(&-&gamma).truncate_inclusive(lambda);
    Ok(RvElement { lambda: lambda.clone(), value: RvValue::Unit { gamma, jet } })
}

pub fn rv_combine<C: Scalar>(kind: RvOp, a: &RvElement<C>, b: Option<&RvElement<C>>) -> Result<RvElement<C>> {
    match (kind, b) {
        (RvOp::Mul, Some(b)) => a.mul(b),
        (RvOp::Mul, None) => Ok(a.clone()),
        (RvOp::Inv, _) => a.inv(),
    }
}

/// Leading coefficient, i.e. `ac` for the monomial section `g -> t^g`.
pub fn angular_component<C: Scalar>(x: &TruncatedSeries<C>) -> Result<C> {
    match x.approx().leading() {
        Some((_, c)) => Ok(c.clone()),
        None if x.is_exact() => Ok(C::zero()),
        None => Err(Error::InsufficientPrecision),
    }
}

/// A ball lambda-next to `center`: the fiber of `x -> rv_lambda(x - center)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BallDescriptor<C> {
    pub center: TruncatedSeries<C>,
    pub datum: RvElement<C>,
}

impl<C: Scalar> BallDescriptor<C> {
    /// Additive radius `gamma + lambda` (the ball is open), `None` for a singleton.
    pub fn radius(&self) -> Option<GroupElement> {
        self.datum.gamma().map(|g| g + self.datum.lambda())
    }

    pub fn contains(&self, x: &TruncatedSeries<C>) -> Result<bool> {
        Ok(ball_of(x, &self.center, self.datum.lambda())?.datum == self.datum)
    }
}

impl<C: Scalar> fmt::Display for BallDescriptor<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rv_{}(x - ({})) = {}", self.datum.lambda(), self.center, self.datum)
    }
}

pub fn ball_of<C: Scalar>(
    x: &TruncatedSeries<C>,
    center: &TruncatedSeries<C>,
    lambda: &GroupElement,
) -> Result<BallDescriptor<C>> {
    let datum = rv_lambda(&(x - center), lambda)?;
    Ok(BallDescriptor { center: center.clone(), datum })
}

/// Draws a point of the ball; the point is exact with finite support.
pub fn sample_in_ball<C: Scalar>(b: &BallDescriptor<C>, rng_seed: u64, extra_depth: &BigRational) -> Result<TruncatedSeries<C>> {
    let (gamma, jet) = match b.datum.value() {
        RvValue::Zero => return Err(Error::SingletonBall),
        RvValue::Unit { gamma, jet } => (gamma, jet),
    };
    let sampler = Sampler { extra_depth: extra_depth.clone(), ..Sampler::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let radius = gamma + b.datum.lambda();
    let tail = if rng.gen_bool(0.25) { HahnSeries::zero() } else { sampler.random_tail(&mut rng, &radius) };
    let x = &(b.center.approx() + &jet.shift(gamma)) + &tail;
    Ok(TruncatedSeries::exact(x, gamma.rank()))
}

/// The RNG stream for one verification trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Sampling grid for points near a finite set of centers.
///
/// A point is `c + t^gamma * u` with `c` a center, `gamma` on the grid
/// `gamma_min, gamma_min + step, ..., gamma_max` (leading coordinate) and
/// `u` a random unit; ball-mates add a tail above the ball radius.
#[derive(Clone, Debug)]
pub struct Sampler {
    pub gamma_min: BigRational,
    pub gamma_max: BigRational,
    pub step: BigRational,
    pub extra_depth: BigRational,
    pub max_coeff: i64,
    pub mates: usize,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler {
            gamma_min: rat(-2, 1),
            gamma_max: rat(4, 1),
            step: rat(1, 2),
            extra_depth: rat(2, 1),
            max_coeff: 9,
            mates: 2,
        }
    }
}

/// A sampled point together with ball-mates: points in the same ball
/// lambda-next to every center.
#[derive(Clone, Debug)]
pub struct SampledBall<C> {
    pub x: TruncatedSeries<C>,
    pub radius: GroupElement,
    pub mates: Vec<TruncatedSeries<C>>,
}

impl<C: Scalar> SampledBall<C> {
    pub fn describe(&self) -> String {
        format!("{{y : v(y - ({})) > {}}}", self.x, self.radius)
    }
}

impl Sampler {
    pub fn with_gamma_range(mut self, lo: BigRational, hi: BigRational) -> Self {
        self.gamma_min = lo;
        self.gamma_max = hi;
        self
    }

    /// The largest offset a sampled point reaches above its ball radius.
    pub fn reach(&self) -> BigRational {
        &self.gamma_max + &self.extra_depth * rat(2, 1)
    }

    fn gammas(&self) -> Vec<BigRational> {
        let mut out = Vec::new();
        let mut g = self.gamma_min.clone();
        while g <= self.gamma_max {
            out.push(g.clone());
            g = &g + &self.step;
        }
        out
    }

    fn offsets(&self, depth: &BigRational) -> usize {
        (depth / &self.step).floor().to_integer().try_into().unwrap_or(0)
    }

    fn random_coeff<C: Scalar, R: Rng>(&self, rng: &mut R) -> C {
        let k = rng.gen_range(1..=self.max_coeff);
        C::from_int(if rng.gen_bool(0.5) { k } else { -k })
    }

    fn exponent(&self, base: &GroupElement, k: usize) -> GroupElement {
        base + &GroupElement::leading(&self.step * BigRational::from_integer(k.into()), base.rank())
    }

    /// `a_0 + sum a_k t^(k*step)` for `k*step <= depth`, `a_0 != 0`.
    pub fn random_unit<C: Scalar, R: Rng>(&self, rng: &mut R, depth: &BigRational, rank: usize) -> HahnSeries<C> {
        let zero = GroupElement::zero(rank);
        let mut terms = vec![(zero.clone(), self.random_coeff(rng))];
        for k in 1..=self.offsets(depth) {
            if rng.gen_bool(0.5) {
                terms.push((self.exponent(&zero, k), self.random_coeff(rng)));
            }
        }
        HahnSeries::from_terms(terms)
    }

    /// A nonzero series with every exponent strictly above `above`.
    pub fn random_tail<C: Scalar, R: Rng>(&self, rng: &mut R, above: &GroupElement) -> HahnSeries<C> {
        let span = self.offsets(&self.extra_depth).max(1);
        let first = rng.gen_range(1..=span);
        let mut terms = vec![(self.exponent(above, first), self.random_coeff(rng))];
        for k in first + 1..=first + span {
            if rng.gen_bool(0.5) {
                terms.push((self.exponent(above, k), self.random_coeff(rng)));
            }
        }
        HahnSeries::from_terms(terms)
    }

    /// Samples a point near a random center together with `mates` points in
    /// the same ball lambda-next to all `centers`. `None` when the point
    /// landed on a center (a singleton ball).
    pub fn sample_next_to<C: Scalar, R: Rng>(
        &self,
        centers: &[HahnSeries<C>],
        lambda: &GroupElement,
        rng: &mut R,
    ) -> Option<SampledBall<C>> {
        let rank = lambda.rank();
        let c = &centers[rng.gen_range(0..centers.len())];
        let grid = self.gammas();
        let gamma = GroupElement::leading(grid[rng.gen_range(0..grid.len())].clone(), rank);
        let depth = &lambda.coords()[0] + &self.extra_depth;
        let unit: HahnSeries<C> = self.random_unit(rng, &depth, rank);
        let x = c + &unit.shift(&gamma);
        let mut radius: Option<GroupElement> = None;
        for c in centers {
            let d = (&x - c).valuation();
            let r = d.finite()? + lambda;
            if radius.as_ref().is_none_or(|cur| &r > cur) {
                radius = Some(r);
            }
        }
        let radius = radius?;
        let mates = (0..self.mates).map(|_| TruncatedSeries::exact(&x + &self.random_tail(rng, &radius), rank)).collect();
        Some(SampledBall { x: TruncatedSeries::exact(x, rank), radius, mates })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub ball: String,
    pub x: String,
    pub y: String,
}

/// Outcome of a sampling verification; serialized with stable field names.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub op: String,
    pub lambda: String,
    pub trials: u64,
    pub seed: u64,
    pub violations: Vec<Violation>,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Attempts per trial before a trial is given up (sampling collisions and
/// domain errors are resampled).
pub const RESAMPLE_CAP: usize = 16;

/// Runs `trials` sampled balls lambda-next to `centers` through `judge`,
/// which returns a violating mate if the ball breaks the property. A judge
/// error resamples the trial.
pub fn run_trials<C: Scalar>(
    op: &str,
    centers: &[TruncatedSeries<C>],
    lambda: &GroupElement,
    trials: u64,
    seed: u64,
    sampler: &Sampler,
    mut judge: impl FnMut(&SampledBall<C>) -> Result<Option<TruncatedSeries<C>>>,
) -> VerificationReport {
    assert!(!centers.is_empty(), "need at least one center");
    let points: Vec<HahnSeries<C>> = centers.iter().map(|c| c.approx().clone()).collect();
    let mut violations = Vec::new();
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        for _ in 0..RESAMPLE_CAP {
            let Some(ball) = sampler.sample_next_to(&points, lambda, &mut rng) else { continue };
            match judge(&ball) {
                Ok(Some(y)) => {
                    violations.push(Violation { ball: ball.describe(), x: ball.x.to_string(), y: y.to_string() });
                    break;
                }
                Ok(None) => break,
                Err(_) => continue,
            }
        }
    }
    let verdict = if violations.is_empty() { Verdict::Pass } else { Verdict::Fail };
    VerificationReport { op: op.to_string(), lambda: lambda.to_string(), trials, seed, violations, verdict }
}

/// Checks by sampling that every ball lambda-next to `centers` lies inside
/// or outside the set given by `membership`.
pub fn check_prepares<C: Scalar>(
    centers: &[TruncatedSeries<C>],
    membership: impl Fn(&TruncatedSeries<C>) -> bool,
    lambda: &GroupElement,
    trials: u64,
    rng_seed: u64,
) -> VerificationReport {
    check_prepares_with(&Sampler::default(), centers, membership, lambda, trials, rng_seed)
}

pub fn check_prepares_with<C: Scalar>(
    sampler: &Sampler,
    centers: &[TruncatedSeries<C>],
    membership: impl Fn(&TruncatedSeries<C>) -> bool,
    lambda: &GroupElement,
    trials: u64,
    rng_seed: u64,
) -> VerificationReport {
    run_trials("check_prepares", centers, lambda, trials, rng_seed, sampler, |ball| {
        let inside = membership(&ball.x);
        Ok(ball.mates.iter().find(|y| membership(y) != inside).cloned())
    })
}

/// True when `x` and `y` lie in the same ball lambda-next to every center.
pub fn same_ball<C: Scalar>(centers: &[TruncatedSeries<C>], lambda: &GroupElement, x: &TruncatedSeries<C>, y: &TruncatedSeries<C>) -> Result<bool> {
    for c in centers {
        if rv_lambda(&(x - c), lambda)? != rv_lambda(&(y - c), lambda)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The non-negative threshold `lambda` as a group element.
pub fn lambda_of(q: &BigRational, rank: usize) -> Result<GroupElement> {
    if q.is_negative() {
        return Err(Error::NegativeLambda);
    }
    Ok(GroupElement::leading(q.clone(), rank))
}
