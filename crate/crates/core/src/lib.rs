//! Models of in-DRAM Rowhammer trackers and the tools to evaluate them.
//!
//! The crate covers the tracker state machines (MINT, InDRAM-PARA, PARFM,
//! PRCT, Misra-Gries, plus the DMQ and RFM wrappers), the adversarial
//! activation patterns used against them, closed-form and recurrence-based
//! MinTRH analytics, and a seeded Monte Carlo simulator that cross-checks the
//! analytics at desk scale.
//!
//! Probability models are generic over [`Scalar`]; the aliases below pin the
//! common instantiations.

pub mod analytics;
pub mod attacks;
pub mod dram;
mod error;
pub mod montecarlo;
pub mod rowpress;
pub mod scalar;
pub mod trackers;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational arithmetic for reference computations.
pub type Exact = num_rational::BigRational;

pub type FailureCurveF64 = analytics::FailureCurve<f64>;
pub type FailureCurveF32 = analytics::FailureCurve<f32>;
pub type ExactFailureCurve = analytics::FailureCurve<Exact>;

pub type MarkovDistF64 = analytics::MarkovCountDistribution<f64>;
pub type ExactMarkovDist = analytics::MarkovCountDistribution<Exact>;
