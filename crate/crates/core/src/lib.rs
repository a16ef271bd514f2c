//! Factored monitoring of discrete dynamic Bayesian networks,
//! organised around the degree of separability of conditional probability
//! tables.
//!
//! * [`prob`]: exact table kernel (products, marginals, conditioning, KL, ℓ∞).
//! * [`model`]: two-slice models, the JSON model format and benchmark generators.
//! * [`filtering`]: exact and factored filters, trajectory sampling.
//! * [`separability`]: degree of separability by linear programming and closed forms.
//! * [`error_analysis`]: two-chain error bound and error-source isolation.
//! * [`experiments`]: reproducible Monte-Carlo experiments emitting CSV.

pub mod error;
pub mod prob;
pub mod model;
pub mod filtering;
pub mod separability;
pub mod error_analysis;
pub mod experiments;

pub use error::{Error, Result};
