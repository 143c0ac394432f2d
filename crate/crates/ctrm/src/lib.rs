//! Coupled continuous-time random maxima (CTRM/OCTRM).
//!
//! A CTRM records the running maximum of observations that arrive after
//! random, possibly heavy-tailed waiting times; the overshooting variant
//! (OCTRM) also counts the observation that terminates the waiting interval
//! straddling the query time. When the waiting times have infinite mean the
//! rescaled maxima converge to a time-changed extremal process whose
//! distribution function is most conveniently reached through a Laplace
//! transform in time.
//!
//! The crate provides
//! - exact samplers and path construction for the pre-limit processes,
//! - the limit CDFs by closed-form quadrature, series and numerical Laplace
//!   inversion,
//! - discrete fractional-calculus checks of the governing equations,
//! - Monte-Carlo convergence experiments with reproducible seeding.

pub mod experiment;
pub mod govern;
pub mod laplace;
pub mod limits;
pub mod model;
pub mod process;
pub mod quad;
pub mod rng;

pub use model::{ClExponent, FrechetShape, ModelSpec, ScalingSequences, StableIndex};
pub use process::Which;
