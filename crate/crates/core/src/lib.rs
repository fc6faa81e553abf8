//! Exact computer algebra for ordered Hahn-series fields `Q((Q^d))`.
//!
//! - [`hahn`]: series with precision tracking, order and valuation.
//! - [`rv`]: the leading-term structure `RV_lambda` and ball sampling.
//! - [`weierstrass`]: truncated multivariate series and Weierstrass division.
//! - [`analytic`]: restricted analytic functions, Hensel and implicit solvers.
//! - [`preparation`]: Newton polygons, Puiseux branches, preparing sets and probes.
//! - [`term`]: a one-variable term language with evaluation and preparation.
//!
//! All types are generic over the coefficient field ([`Scalar`]); the
//! aliases below fix it to arbitrary-precision rationals.

pub mod analytic;
pub mod error;
pub mod hahn;
pub mod preparation;
pub mod rv;
pub mod scalar;
pub mod term;
pub mod weierstrass;

pub use error::{Error, Result};
pub use hahn::{Bound, FieldOp, GroupElement, HahnSeries, Sign, TruncatedSeries};
pub use num_rational::BigRational;
pub use scalar::Scalar;

pub type Rat = BigRational;
pub type Series = HahnSeries<Rat>;
pub type Truncated = TruncatedSeries<Rat>;
pub type Rv = rv::RvElement<Rat>;
pub type Multi = weierstrass::MultiSeries<Rat>;
