//! Closed-form optima, calibration gaps and the consistency bound.
//!
//! Everything here is conditional on a single input point, summarized by
//! `eta = P(annotation = +1 | x)`. The conditional risks of both losses have
//! closed-form minimizers; the gap functions measure how far a rejector
//! output sits above those minima, and `verify_bound` checks that the target
//! excess is controlled by a concave transform of the surrogate excess.

use serde::Serialize;

use crate::dataset::Annotation;
use crate::error::{CoreError, Result};
use crate::losses::surrogate_loss;
use crate::params::RejectionParams;

/// `I_eta = eta e^{-alpha/2} + (1-eta) e^{alpha/2}`, the annotation-averaged
/// accept-term weight. Decreasing in `eta`, bounded in `[e^{-alpha/2},
/// e^{alpha/2}]`.
pub fn i_eta(eta: f64, alpha: f64) -> f64 {
    eta * (-0.5 * alpha).exp() + (1.0 - eta) * (0.5 * alpha).exp()
}

/// Pointwise optimum for the target loss: `eta - (1 - c)`. Accepting is
/// optimal exactly when the error probability `1 - eta` is below `c`.
pub fn bayes_rejector(eta: f64, c: f64) -> f64 {
    eta - (1.0 - c)
}

/// Pointwise minimizer of the surrogate conditional risk:
/// `r0 = (2/(2 beta + alpha)) ln(2 beta c / (alpha I_eta))`.
pub fn surrogate_minimizer(eta: f64, p: &RejectionParams) -> f64 {
    let ratio = 2.0 * p.beta() * p.c() / (p.alpha() * i_eta(eta, p.alpha()));
    2.0 / (2.0 * p.beta() + p.alpha()) * ratio.ln()
}

/// Expected target loss at output `r` given `eta`: accept pays the error
/// probability, reject pays `c`. Ties reject.
pub fn conditional_risk_rejection(r: f64, eta: f64, c: f64) -> f64 {
    if r > 0.0 {
        1.0 - eta
    } else {
        c
    }
}

/// Minimum of [`conditional_risk_rejection`] over r: `min(c, 1 - eta)`.
pub fn bayes_risk_rejection(eta: f64, c: f64) -> f64 {
    c.min(1.0 - eta)
}

/// Expected surrogate loss at output `r` given `eta`, computed as the
/// annotation mixture of the clamped pointwise loss so Monte-Carlo
/// estimates and this function agree exactly.
pub fn conditional_risk_surrogate(r: f64, eta: f64, p: &RejectionParams) -> f64 {
    eta * surrogate_loss(r, Annotation::Correct, p)
        + (1.0 - eta) * surrogate_loss(r, Annotation::Incorrect, p)
}

/// Minimum of the surrogate conditional risk over r:
/// `(1/(1-gamma)) (2 beta c / alpha)^gamma I_eta^{1-gamma}`.
pub fn bayes_risk_surrogate(eta: f64, p: &RejectionParams) -> f64 {
    let base = 2.0 * p.beta() * p.c() / p.alpha();
    let g = p.gamma();
    1.0 / (1.0 - g) * base.powf(g) * i_eta(eta, p.alpha()).powf(1.0 - g)
}

/// Excess target risk of output `r` over the pointwise optimum. Equals
/// `|eta - (1 - c)|` when `r` disagrees in sign with the optimum (boundary
/// values of either count as disagreement) and 0 otherwise.
pub fn calibration_gap_rejection(r: f64, eta: f64, c: f64) -> f64 {
    let r_star = bayes_rejector(eta, c);
    if r * r_star <= 0.0 {
        r_star.abs()
    } else {
        0.0
    }
}

/// Excess surrogate risk of output `r` over the pointwise minimum.
/// Non-negative, zero exactly at [`surrogate_minimizer`].
pub fn calibration_gap_surrogate(r: f64, eta: f64, p: &RejectionParams) -> f64 {
    conditional_risk_surrogate(r, eta, p) - bayes_risk_surrogate(eta, p)
}

/// Calibration modulus: the guaranteed surrogate gap at `r = 0` as a
/// function of the target gap `u = |eta - (1 - c)|`,
/// `psi(u) = (1/4) (c I / (c + I)) ((e^{alpha/2} - e^{-alpha/2}) u / I)^2`
/// with `I` the constraint constant for `(c, alpha)`.
pub fn psi(u: f64, c: f64, alpha: f64) -> f64 {
    let i_bar = c * (0.5 * alpha).exp() + (1.0 - c) * (-0.5 * alpha).exp();
    let spread = (0.5 * alpha).exp() - (-0.5 * alpha).exp();
    0.25 * (c * i_bar / (c + i_bar)) * (spread * u / i_bar).powi(2)
}

/// Inverse of [`psi`]: maps a surrogate excess `z` to the largest target
/// excess it permits,
/// `psi_inverse(z) = (2/(e^{alpha/2} - e^{-alpha/2})) sqrt(((c + I) I / c) z)`.
pub fn psi_inverse(z: f64, c: f64, alpha: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(CoreError::InvalidParameter {
            name: "z",
            value: z,
            constraint: "must be >= 0",
        });
    }
    let i_bar = c * (0.5 * alpha).exp() + (1.0 - c) * (-0.5 * alpha).exp();
    let spread = (0.5 * alpha).exp() - (-0.5 * alpha).exp();
    Ok(2.0 / spread * ((c + i_bar) * i_bar / c * z).sqrt())
}

/// Residual of the quadratic refinement of Bernoulli's inequality:
/// `(1 + rx + r(r-1)x^2/4) - (1+x)^r`, non-negative for x, r in (0,1).
pub fn check_bernoulli(x: f64, r: f64) -> Result<f64> {
    for (name, v) in [("x", x), ("r", r)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(CoreError::InvalidParameter {
                name,
                value: v,
                constraint: "must lie in the open interval (0, 1)",
            });
        }
    }
    let rhs = 1.0 + r * x + r * (r - 1.0) * x * x / 4.0;
    let lhs = (1.0 + x).powf(r);
    Ok(rhs - lhs)
}

/// Outcome of checking the consistency bound on a pair of excess risks.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub excess_l1: f64,
    pub excess_l2: f64,
    pub bound_value: f64,
    pub satisfied: bool,
    pub slack: f64,
}

/// Checks `excess_l2 <= psi_inverse(excess_l1)` up to `tolerance`. Small
/// negative excesses (Monte-Carlo noise) are clamped to zero.
pub fn verify_bound(
    excess_l1: f64,
    excess_l2: f64,
    c: f64,
    alpha: f64,
    tolerance: f64,
) -> Result<BoundReport> {
    let e1 = excess_l1.max(0.0);
    let e2 = excess_l2.max(0.0);
    let bound_value = psi_inverse(e1, c, alpha)?;
    let slack = bound_value - e2;
    Ok(BoundReport {
        excess_l1: e1,
        excess_l2: e2,
        bound_value,
        satisfied: e2 <= bound_value + tolerance,
        slack,
    })
}
