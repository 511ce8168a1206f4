//! Performance portability metrics engine and results repository.
//!
//! * [`metrics`]: portability metrics (arithmetic and harmonic), dispersion,
//!   divergence metrics and Roofline arithmetic. Generic over the scalar type.
//! * [`efficiency`]: the application and architectural efficiency types.
//! * [`repository`]: append-only record store with a best-known baseline index.
//! * [`report`]: per-application and per-suite portability reports and their
//!   text, Markdown and CSV renderings.

pub mod efficiency;
pub mod metrics;
pub mod report;
pub mod repository;
pub mod scalar;

pub use scalar::{RealScalar, Scalar};

/// Exact rational scalar, for results that must come out exactly.
pub type Rational = num_rational::Ratio<i64>;

pub type EfficiencySample = metrics::EfficiencySample<f64>;
pub type PortabilityScore = metrics::PortabilityScore<f64>;
pub type DispersionPair = metrics::DispersionPair<f64>;
pub type RooflineSpec = metrics::RooflineSpec<f64>;
pub type EfficiencyScore = efficiency::EfficiencyScore<f64>;

pub type ExactEfficiencySample = metrics::EfficiencySample<Rational>;
pub type ExactPortabilityScore = metrics::PortabilityScore<Rational>;
