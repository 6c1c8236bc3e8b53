//! Learning to reject with a fixed predictor.
//!
//! A rejector is a real-valued function `r` over examples; an example is
//! accepted when `r > 0` and handed off to a fallback (human, larger model,
//! "no answer") otherwise. Given a rejection cost `c`, the target loss charges
//! `c` for every rejection and `1` for every accepted error. This crate
//! provides:
//!
//! - the exponential surrogate for that loss, with gradients and the
//!   closed-form pointwise minimizer,
//! - calibration-gap machinery relating surrogate excess risk to rejection
//!   excess risk,
//! - synthetic oracle tasks where both risks are computable,
//! - mini-batch training of small rejector models,
//! - precision/coverage evaluation with threshold fitting and the
//!   positive-rate coverage limit.

pub mod curve;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod folds;
pub mod losses;
pub mod models;
pub mod params;
pub mod synthetic;
pub mod theory;
pub mod train;

pub use dataset::{Annotation, Dataset, Example, TitlePolicy};
pub use error::CoreError;
pub use folds::Folds;
pub use params::RejectionParams;

/// Exponent clamp bound shared by every `exp` in loss and gradient code.
/// Keeps f64 arithmetic finite for adversarial inputs; the clamp is inactive
/// everywhere the theory is exercised.
pub const EXP_CLAMP: f64 = 500.0;

pub(crate) fn clamped_exp(z: f64) -> f64 {
    z.clamp(-EXP_CLAMP, EXP_CLAMP).exp()
}
