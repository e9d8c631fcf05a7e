//! Exact confidence intervals for the average causal effect on a binary
//! outcome in a completely randomized experiment.
//!
//! The observed data form a 2×2 table of (treatment, outcome) counts; the
//! estimand `tau` is a function of the latent table of potential outcomes.
//! Intervals are obtained by combining hypergeometric intervals for the
//! margins, or by inverting exact randomization tests over the potential
//! tables compatible with the data. All accept/reject decisions are made in
//! exact integer arithmetic.

pub mod binom;
pub mod cli;
pub mod coverage;
pub mod error;
pub mod hypergeom;
pub mod level;
pub mod methods;
pub mod oracle;
pub mod randtest;
pub mod tables;

pub use error::{Error, Result};
pub use level::ConfidenceLevel;
pub use methods::{compute, Method, MethodResult, NTauInterval, Options};
pub use randtest::{PValueMode, Statistic};
pub use tables::{LabelSwitch, ObservedTable, PotentialTable, Rational, TableMove};
