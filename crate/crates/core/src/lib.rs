//! Bounds on the probability form of the n-party Svetlichny expression,
//! computed several independent ways: exclusive-set families in a doubled
//! experiment, exclusivity graphs and their Lovász numbers, and explicit
//! local, hybrid, nonsignaling and quantum models.
//!
//! Numeric code is generic over [`Scalar`] (probability tables, usable with
//! exact rationals) or [`Real`] (semidefinite and statevector code). The
//! aliases below fix the common instantiations.

pub mod doubling;
pub mod error;
pub mod graph;
pub mod models;
pub mod num;
pub mod report;
pub mod scenario;
pub mod sigma;
pub mod theta;

pub use error::{Error, Result};
pub use num::{Real, Scalar};

/// Exact rational scalar.
pub type Rational = num_rational::Ratio<i64>;

pub type Distribution64 = sigma::Distribution<f64>;
pub type Distribution32 = sigma::Distribution<f32>;
pub type RationalDistribution = sigma::Distribution<Rational>;
pub type ProductDistribution64 = doubling::ProductDistribution<f64>;
pub type RationalProductDistribution = doubling::ProductDistribution<Rational>;
pub type ThetaResult64 = theta::ThetaResult<f64>;
pub type ThetaResult32 = theta::ThetaResult<f32>;
