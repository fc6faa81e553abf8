use num_rational::BigRational;
use serde::Serialize;

use super::PreparingSet;
use crate::analytic::AnnulusUnit;
use crate::error::{Error, Result};
use crate::hahn::{Bound, GroupElement, TruncatedSeries};
use crate::rv::{rv_lambda, run_trials, Sampler, VerificationReport};
use crate::scalar::{rat, Scalar};

fn centers_or_origin<C: Scalar>(set: &PreparingSet<C>, rank: usize) -> Vec<TruncatedSeries<C>> {
    let centers = set.centers();
    if centers.is_empty() {
        vec![TruncatedSeries::zero(rank)]
    } else {
        centers
    }
}

/// Samples ball-mates next to `set` and checks that `term` has the same
/// `rv_lambda` value on each pair. An empty set is sampled around zero.
pub fn verify_preparation<C: Scalar>(
    term: impl Fn(&TruncatedSeries<C>) -> Result<TruncatedSeries<C>>,
    set: &PreparingSet<C>,
    lambda: &GroupElement,
    trials: u64,
    rng_seed: u64,
) -> VerificationReport {
    verify_preparation_with(&Sampler::default(), term, set, lambda, trials, rng_seed)
}

pub fn verify_preparation_with<C: Scalar>(
    sampler: &Sampler,
    term: impl Fn(&TruncatedSeries<C>) -> Result<TruncatedSeries<C>>,
    set: &PreparingSet<C>,
    lambda: &GroupElement,
    trials: u64,
    rng_seed: u64,
) -> VerificationReport {
    let centers = centers_or_origin(set, lambda.rank());
    run_trials("verify_preparation", &centers, lambda, trials, rng_seed, sampler, |ball| {
        let at_x = rv_lambda(&term(&ball.x)?, lambda)?;
        for y in &ball.mates {
            if rv_lambda(&term(y)?, lambda)? != at_x {
                return Ok(Some(y.clone()));
            }
        }
        Ok(None)
    })
}

/// The shift `v(f(x) - f(y)) - v(x - y)` observed on one sampled ball.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct BallShift {
    pub ball: String,
    pub shift: String,
}

#[derive(Clone, Debug)]
pub struct JacobianReport {
    pub report: VerificationReport,
    pub shifts: Vec<BallShift>,
}

impl JacobianReport {
    pub fn to_json(&self) -> String {
        let report: serde_json::Value = serde_json::from_str(&self.report.to_json()).expect("report is JSON");
        let doc = serde_json::json!({ "report": report, "shifts": self.shifts });
        serde_json::to_string_pretty(&doc).expect("plain data serializes")
    }
}

fn shift_of<C: Scalar>(fx: &TruncatedSeries<C>, fy: &TruncatedSeries<C>, x: &TruncatedSeries<C>, y: &TruncatedSeries<C>) -> Result<GroupElement> {
    let num = (fx - fy).valuation()?;
    let den = (x - y).valuation()?;
    match (num, den) {
        (Bound::Finite(a), Bound::Finite(b)) => Ok(&a - &b),
        _ => Err(Error::UndecidableAtPrecision),
    }
}

/// On balls `lambda`-next to `set`, estimates the shift from one pair and
/// checks it on the remaining ball-mates.
pub fn jacobian_probe<C: Scalar>(
    f: impl Fn(&TruncatedSeries<C>) -> Result<TruncatedSeries<C>>,
    set: &PreparingSet<C>,
    lambda: &GroupElement,
    trials: u64,
    rng_seed: u64,
) -> JacobianReport {
    let sampler = Sampler { mates: 3, ..Sampler::default() };
    jacobian_probe_with(&sampler, f, set, lambda, trials, rng_seed)
}

pub fn jacobian_probe_with<C: Scalar>(
    sampler: &Sampler,
    f: impl Fn(&TruncatedSeries<C>) -> Result<TruncatedSeries<C>>,
    set: &PreparingSet<C>,
    lambda: &GroupElement,
    trials: u64,
    rng_seed: u64,
) -> JacobianReport {
    assert!(sampler.mates >= 2, "the probe needs a reference pair and a test pair");
    let centers = centers_or_origin(set, lambda.rank());
    let mut shifts = Vec::new();
    let report = run_trials("jacobian_probe", &centers, lambda, trials, rng_seed, sampler, |ball| {
        let fx = f(&ball.x)?;
        let (first, rest) = ball.mates.split_first().expect("at least two mates");
        let shift = shift_of(&fx, &f(first)?, &ball.x, first)?;
        let mut witness = None;
        for y in rest {
            if shift_of(&fx, &f(y)?, &ball.x, y)? != shift {
                witness = Some(y.clone());
                break;
            }
        }
        shifts.push(BallShift { ball: ball.describe(), shift: shift.to_string() });
        Ok(witness)
    });
    JacobianReport { report, shifts }
}

/// Samples pairs in the annulus of `unit` with equal `rv_lambda(x - c)` and
/// checks that `rv_lambda(U(x)) = rv_lambda(U(y))`.
pub fn strong_unit_probe<C: Scalar>(unit: &AnnulusUnit<C>, lambda: &GroupElement, trials: u64, rng_seed: u64) -> Result<VerificationReport> {
    let rank = lambda.rank();
    let lead = |x: &TruncatedSeries<C>| -> Result<BigRational> {
        match x.valuation()? {
            Bound::Finite(g) if rank == 1 => Ok(g.coords()[0].clone()),
            _ => Err(Error::Unsupported("annulus radii must be nonzero rank-one values".into())),
        }
    };
    let (outer, inner) = (lead(&unit.epsilon)?, lead(&unit.delta)?);
    let base = Sampler::default();
    let sampler = base.clone().with_gamma_range(&outer + &base.step, &inner - &base.step);
    if sampler.gamma_min > sampler.gamma_max {
        return Err(Error::DomainViolation);
    }
    let target = Bound::Finite(GroupElement::leading(&lambda.coords()[0] + (&inner - &outer) * rat(2, 1) + rat(2, 1), rank));
    let mut left = false;
    let report = run_trials("strong_unit_probe", std::slice::from_ref(&unit.center), lambda, trials, rng_seed, &sampler, |ball| {
        for p in std::iter::once(&ball.x).chain(&ball.mates) {
            if !unit.in_annulus(p)? {
                left = true;
                return Ok(None);
            }
        }
        let at_x = rv_lambda(&unit.eval(&ball.x, &target)?, lambda)?;
        for y in &ball.mates {
            if rv_lambda(&unit.eval(y, &target)?, lambda)? != at_x {
                return Ok(Some(y.clone()));
            }
        }
        Ok(None)
    });
    if left {
        return Err(Error::DomainViolation);
    }
    Ok(report)
}
