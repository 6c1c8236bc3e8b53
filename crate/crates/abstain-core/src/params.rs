//! Loss parameters for the exponential rejection surrogate.
//!
//! The surrogate `exp((alpha/2)(r - a)) + c exp(-beta r)` is calibrated
//! against the rejection loss exactly when `2 beta c / alpha` equals
//! `i_bar = c e^{alpha/2} + (1 - c) e^{-alpha/2}`. Constructing parameters
//! without an explicit `beta` solves that constraint for `beta`.

use serde::Serialize;

use crate::error::{CoreError, Result};

/// Relative slack allowed when deciding whether `beta` satisfies the
/// calibration constraint.
pub const CONSTRAINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RejectionParams {
    c: f64,
    alpha: f64,
    beta: f64,
    i_bar: f64,
    gamma: f64,
    constraint_satisfied: bool,
}

impl RejectionParams {
    /// Builds parameters, solving the calibration constraint for `beta`
    /// when it is not supplied.
    pub fn new(c: f64, alpha: f64, beta: Option<f64>) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) || !c.is_finite() {
            return Err(CoreError::InvalidParameter {
                name: "c",
                value: c,
                constraint: "0 < c < 1",
            });
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(CoreError::InvalidParameter {
                name: "alpha",
                value: alpha,
                constraint: "alpha > 0",
            });
        }
        if let Some(b) = beta {
            if !(b > 0.0) || !b.is_finite() {
                return Err(CoreError::InvalidParameter {
                    name: "beta",
                    value: b,
                    constraint: "beta > 0",
                });
            }
        }
        let i_bar = c * (alpha / 2.0).exp() + (1.0 - c) * (-alpha / 2.0).exp();
        let beta = beta.unwrap_or(alpha * i_bar / (2.0 * c));
        let gamma = alpha / (alpha + 2.0 * beta);
        let constraint_satisfied = (2.0 * beta * c / alpha - i_bar).abs() <= CONSTRAINT_TOL * i_bar;
        Ok(Self {
            c,
            alpha,
            beta,
            i_bar,
            gamma,
            constraint_satisfied,
        })
    }

    /// Constraint-satisfying parameters for a cost/sharpness pair.
    pub fn constrained(c: f64, alpha: f64) -> Result<Self> {
        Self::new(c, alpha, None)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `c e^{alpha/2} + (1 - c) e^{-alpha/2}`.
    pub fn i_bar(&self) -> f64 {
        self.i_bar
    }

    /// `alpha / (alpha + 2 beta)`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Whether `2 beta c / alpha = i_bar` holds (up to relative 1e-9).
    pub fn constraint_satisfied(&self) -> bool {
        self.constraint_satisfied
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_beta_from_constraint() {
        let p = RejectionParams::constrained(0.05, 2.0).unwrap();
        assert!((p.i_bar() - 0.485400).abs() < 1e-6);
        assert!((p.beta() - 9.70799).abs() < 1e-5);
        assert!((p.gamma() - 0.093388).abs() < 1e-6);
        assert!(p.constraint_satisfied());
    }

    #[test]
    fn explicit_beta_reports_constraint_violation() {
        let p = RejectionParams::new(0.05, 2.0, Some(1.0)).unwrap();
        assert!(!p.constraint_satisfied());
        assert_eq!(p.beta(), 1.0);
    }

    #[test]
    fn i_bar_and_gamma_are_consistent() {
        for &(c, alpha) in &[(0.02, 0.5), (0.3, 4.0), (0.9, 8.0), (0.5, 1.0)] {
            let p = RejectionParams::constrained(c, alpha).unwrap();
            let i_bar = c * (alpha / 2.0).exp() + (1.0 - c) * (-alpha / 2.0).exp();
            assert!((p.i_bar() - i_bar).abs() <= 1e-12 * i_bar);
            let gamma = alpha / (alpha + 2.0 * p.beta());
            assert!((p.gamma() - gamma).abs() <= 1e-12);
            assert!(p.constraint_satisfied());
        }
    }

    #[test]
    fn rejects_out_of_range_inputs() {
        assert!(RejectionParams::new(0.0, 2.0, None).is_err());
        assert!(RejectionParams::new(1.0, 2.0, None).is_err());
        assert!(RejectionParams::new(1.5, 2.0, None).is_err());
        assert!(RejectionParams::new(0.05, 0.0, None).is_err());
        assert!(RejectionParams::new(0.05, -1.0, None).is_err());
        assert!(RejectionParams::new(0.05, 2.0, Some(0.0)).is_err());
        assert!(RejectionParams::new(f64::NAN, 2.0, None).is_err());
        assert!(RejectionParams::new(0.05, f64::NAN, None).is_err());
        assert!(RejectionParams::new(0.05, 2.0, Some(f64::INFINITY)).is_err());
    }
}
