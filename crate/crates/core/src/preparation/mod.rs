//! Newton polygons and Puiseux branches of one-variable polynomials over
//! Hahn series, preparing sets built from them, and sampling probes for
//! preparation, the Jacobian property and strong units.

pub mod bivariate;
mod polynomial;
mod probes;
mod puiseux;
pub mod qpoly;

pub use polynomial::Polynomial;
pub use probes::{jacobian_probe, jacobian_probe_with, strong_unit_probe, verify_preparation, verify_preparation_with, BallShift, JacobianReport};
pub use puiseux::{newton_polygon, puiseux_roots, BranchCoeff, Conjugacy, PuiseuxRoot};
pub use qpoly::IntervalCoeff;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hahn::{parse_series, GroupElement, TruncatedSeries};
use crate::rv::{Sampler, VerificationReport};
use crate::scalar::{parse_rational, Scalar};

/// Where a preparing point came from.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub poly: String,
    pub derivative_order: usize,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PreparedPoint<C> {
    pub series: TruncatedSeries<C>,
    /// Exponent below which the point agrees with the branch it truncates.
    pub depth: BigRational,
    pub provenance: Provenance,
}

/// A finite set of centers, each tagged with its origin.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PreparingSet<C> {
    pub points: Vec<PreparedPoint<C>>,
}

#[derive(Serialize, Deserialize)]
struct PointJson {
    series: String,
    depth: String,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct SetJson {
    points: Vec<PointJson>,
}

impl<C: Scalar> PreparingSet<C> {
    pub fn new() -> Self {
        PreparingSet { points: Vec::new() }
    }

    /// A set of given centers, tagged with `source`.
    pub fn from_centers(centers: Vec<TruncatedSeries<C>>, source: &str) -> Self {
        let points = centers
            .into_iter()
            .map(|series| PreparedPoint { series, depth: BigRational::from_integer(0.into()), provenance: Provenance { poly: source.to_string(), derivative_order: 0 } })
            .collect();
        PreparingSet { points }
    }

    pub fn centers(&self) -> Vec<TruncatedSeries<C>> {
        self.points.iter().map(|p| p.series.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: &TruncatedSeries<C>) -> bool {
        self.points.iter().any(|p| p.series.approx() == x.approx())
    }

    /// Adds a point unless an equal center is already present.
    pub fn insert(&mut self, point: PreparedPoint<C>) {
        if !self.contains(&point.series) {
            self.points.push(point);
        }
    }

    pub fn extend(&mut self, other: PreparingSet<C>) {
        for p in other.points {
            self.insert(p);
        }
    }

    pub fn to_json(&self) -> String {
        let doc = SetJson {
            points: self
                .points
                .iter()
                .map(|p| PointJson { series: p.series.approx().to_string(), depth: p.depth.to_string(), provenance: p.provenance.clone() })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("plain data serializes")
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::from_str(&self.to_json()).expect("round trip")
    }

    pub fn from_json(src: &str, rank: usize) -> Result<Self> {
        let doc: SetJson = serde_json::from_str(src).map_err(|e| Error::SeriesSyntax(e.to_string()))?;
        let points = doc
            .points
            .into_iter()
            .map(|p| {
                let depth = parse_rational(&p.depth).ok_or_else(|| Error::SeriesSyntax(format!("bad depth `{}`", p.depth)))?;
                let series = parse_series::<C>(&p.series, rank)?;
                Ok(PreparedPoint { series: TruncatedSeries::exact(series.approx().clone(), rank), depth, provenance: p.provenance })
            })
            .collect::<Result<_>>()?;
        Ok(PreparingSet { points })
    }
}

impl<C: Scalar> Default for PreparingSet<C> {
    fn default() -> Self {
        Self::new()
    }
}

/// Verification and deepening parameters for [`prepare_polynomial_with`].
#[derive(Clone, Debug)]
pub struct PrepareOptions {
    pub trials: u64,
    pub seed: u64,
    pub sampler: Sampler,
    pub retries: usize,
    pub deepen: BigRational,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        PrepareOptions { trials: 200, seed: 0, sampler: Sampler::default(), retries: 3, deepen: BigRational::from_integer(2.into()) }
    }
}

impl PrepareOptions {
    /// Branch depth that keeps every sampled point farther from a truncated
    /// root than the truncation error.
    pub fn initial_depth(&self, lambda: &GroupElement) -> BigRational {
        &self.sampler.gamma_max + &lambda.coords()[0] + &self.sampler.extra_depth + BigRational::from_integer(1.into())
    }
}

/// Centers from the Puiseux branches of `p` and all its derivatives: exact
/// rational prefixes, truncated at `depth`.
pub fn candidate_set<C: Scalar>(p: &Polynomial<C>, depth: &BigRational) -> Result<PreparingSet<C>> {
    let d = p.degree().ok_or(Error::ConstantPolynomial)?;
    if d == 0 {
        return Err(Error::ConstantPolynomial);
    }
    let rank = p.rank();
    let source = p.to_string();
    let mut set = PreparingSet::new();
    let mut q = p.clone();
    for order in 0..d {
        for root in puiseux_roots(&q, depth)? {
            let series = TruncatedSeries::exact(root.prefix().map_coeffs(C::from_rational), rank);
            set.insert(PreparedPoint { series, depth: root.depth.clone(), provenance: Provenance { poly: source.clone(), derivative_order: order } });
        }
        q = q.derivative();
    }
    Ok(set)
}

pub fn prepare_polynomial<C: Scalar>(p: &Polynomial<C>, lambda: &GroupElement) -> Result<PreparingSet<C>> {
    prepare_polynomial_with(p, lambda, &PrepareOptions::default()).map(|(set, _)| set)
}

/// Builds the candidate set and returns it with a passing report, deepening
/// the branches when verification fails.
pub fn prepare_polynomial_with<C: Scalar>(p: &Polynomial<C>, lambda: &GroupElement, opts: &PrepareOptions) -> Result<(PreparingSet<C>, VerificationReport)> {
    if p.rank() != 1 {
        return Err(Error::Unsupported("preparation needs a rank-one value group".into()));
    }
    let mut depth = opts.initial_depth(lambda);
    for _ in 0..=opts.retries {
        let set = candidate_set(p, &depth)?;
        let report = verify_preparation_with(&opts.sampler, |x| Ok(p.eval_for_rv(x, lambda)), &set, lambda, opts.trials, opts.seed);
        if report.passed() {
            return Ok((set, report));
        }
        depth = &depth + &opts.deepen;
    }
    Err(Error::DepthExhausted)
}
