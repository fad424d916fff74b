//! Relative entropy for statistical morphisms between finite probability
//! spaces and its extension to commuting squares of channels.
//!
//! * [`prob`]: finite sets, distributions, channels, `[0, ∞]`, and `D(p, q)`.
//! * [`finstat`]: morphisms `(f, p, s)` and their relative entropy `RE`.
//! * [`finstat2`]: 2-morphisms, vertical/horizontal composition, convex sums,
//!   conditional relative entropy `CE` and 2-relative entropy `RE₂`.
//! * [`randgen`]: seeded generators of valid instances.
//! * [`harness`]: named randomized suites checking the laws these functionals
//!   satisfy.
//! * [`document`] and [`commands`]: the JSON instance format and the `finstat`
//!   command-line tool.

pub mod commands;
pub mod document;
pub mod error;
pub mod finstat;
pub mod finstat2;
pub mod harness;
pub mod prob;
pub mod randgen;

pub use error::{Error, Result, SquareCondition};
pub use finstat::{bayes_inverse, compose_stat, convex_combine_stat, re, StatMorphism};
pub use finstat2::{ce, ce_closed_form, convex_combine_two, hcompose, re2, vcompose, TwoMorphism};
pub use prob::{conditional_kl, joint, kl, Channel, DetMap, Dist, ExtReal, FinSet, LogBase};

/// Slack accepted when validating probability vectors (sums and negativity).
pub const EPS_STOCH: f64 = 1e-9;
/// Tolerance for entrywise equality of distributions and channels.
pub const EPS_EQ: f64 = 1e-9;
