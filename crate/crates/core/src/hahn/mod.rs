//! The Hahn field `Q((Q^d))`: finite-support series with precision tracking,
//! field operations, the order, and the natural valuation.
//!
//! Valuations are written additively: `v(t^g) = g`, and `x` lies in the
//! valuation ring iff `v(x) >= 0`.

pub mod group;
pub mod series;
pub mod text;
pub mod truncated;

pub use group::{Bound, GroupElement};
pub use series::HahnSeries;
pub use text::{parse_exact, parse_series};
pub use truncated::{FieldOp, Sign, TruncatedSeries};
