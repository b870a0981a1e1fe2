//! Evaluation toolkit for gender-neutral machine translation of
//! gender-ambiguous English adjectives into Icelandic, Czech and Spanish.
//!
//! The numeric core is generic over [`scalar::Scalar`]; the aliases below
//! fix the two scalars the rest of the crate uses.

pub mod adapter;
pub mod classify;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod scalar;
pub mod suite;

use num_rational::BigRational;

pub type Breakdown = metrics::StrategyBreakdown<f64>;
pub type ExactBreakdown = metrics::StrategyBreakdown<BigRational>;
pub type Response = metrics::ResponseReport<f64>;
pub type ExactResponse = metrics::ResponseReport<BigRational>;
pub type Stereotype = metrics::StereotypeReport<f64>;
pub type ExactStereotype = metrics::StereotypeReport<BigRational>;
