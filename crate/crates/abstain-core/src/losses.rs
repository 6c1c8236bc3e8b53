//! Rejection loss and its smooth surrogate.
//!
//! With rejector output `r` (accept when `r > 0`), annotation `a` in
//! {+1, -1} and rejection cost `c`:
//!
//! * target loss: pay 1 for accepting an error, `c` for rejecting;
//! * surrogate: `exp((alpha/2)(r - a)) + c exp(-beta r)`, convex and
//!   differentiable in `r`.
//!
//! Exponents are clamped to `[-EXP_CLAMP, EXP_CLAMP]` so extreme rejector
//! outputs saturate instead of overflowing. The gradient uses the same rule:
//! a term whose exponent is clamped is locally constant, so its derivative
//! contribution is zero. Finite differences therefore agree with the
//! analytic gradient everywhere except exactly at the clamp boundary.

use crate::dataset::Annotation;
use crate::params::RejectionParams;
use crate::{clamped_exp, EXP_CLAMP};

/// Loss actually paid: 1 for accepting an error, `c` for rejecting.
/// Ties (`r = 0`) reject.
pub fn rejection_loss(r: f64, a: Annotation, c: f64) -> f64 {
    if r > 0.0 {
        match a {
            Annotation::Correct => 0.0,
            Annotation::Incorrect => 1.0,
        }
    } else {
        c
    }
}

/// Surrogate loss at rejector output `r`.
pub fn surrogate_loss(r: f64, a: Annotation, p: &RejectionParams) -> f64 {
    let accept_term = clamped_exp(0.5 * p.alpha() * (r - a.as_f64()));
    let reject_term = p.c() * clamped_exp(-p.beta() * r);
    accept_term + reject_term
}

/// Derivative of [`surrogate_loss`] in `r`, consistent with the clamping.
pub fn surrogate_grad(r: f64, a: Annotation, p: &RejectionParams) -> f64 {
    surrogate_loss_grad(r, a, p).1
}

/// Loss and derivative in one evaluation (the exponentials are shared).
pub fn surrogate_loss_grad(r: f64, a: Annotation, p: &RejectionParams) -> (f64, f64) {
    let z1 = 0.5 * p.alpha() * (r - a.as_f64());
    let z2 = -p.beta() * r;
    let e1 = clamped_exp(z1);
    let e2 = clamped_exp(z2);
    let loss = e1 + p.c() * e2;
    let d1 = if z1.abs() <= EXP_CLAMP {
        0.5 * p.alpha() * e1
    } else {
        0.0
    };
    let d2 = if z2.abs() <= EXP_CLAMP {
        -p.beta() * p.c() * e2
    } else {
        0.0
    };
    (loss, d1 + d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> RejectionParams {
        RejectionParams::constrained(0.05, 2.0).unwrap()
    }

    #[test]
    fn surrogate_matches_reference_values() {
        let p = params();
        let l_pos = surrogate_loss(0.0, Annotation::Correct, &p);
        let l_neg = surrogate_loss(0.0, Annotation::Incorrect, &p);
        assert!((l_pos - 0.417879).abs() < 1e-6, "got {l_pos}");
        assert!((l_neg - 2.768282).abs() < 1e-6, "got {l_neg}");
    }

    #[test]
    fn gradient_matches_reference_value() {
        let p = params();
        let g = surrogate_grad(0.0, Annotation::Correct, &p);
        assert!((g - (-0.117520)).abs() < 1e-6, "got {g}");
    }

    #[test]
    fn gradient_matches_central_differences() {
        let p = RejectionParams::constrained(0.2, 4.0).unwrap();
        let h = 1e-6;
        for &a in &[Annotation::Correct, Annotation::Incorrect] {
            for i in -40..=40 {
                let r = i as f64 * 0.1;
                let fd = (surrogate_loss(r + h, a, &p) - surrogate_loss(r - h, a, &p)) / (2.0 * h);
                let g = surrogate_grad(r, a, &p);
                let scale = g.abs().max(1.0);
                assert!(
                    (g - fd).abs() / scale < 1e-6,
                    "r={r} a={a:?}: analytic {g} vs fd {fd}"
                );
            }
        }
    }

    #[test]
    fn ties_at_zero_reject() {
        assert_eq!(rejection_loss(0.0, Annotation::Incorrect, 0.3), 0.3);
        assert_eq!(rejection_loss(0.0, Annotation::Correct, 0.3), 0.3);
        assert_eq!(rejection_loss(1e-12, Annotation::Incorrect, 0.3), 1.0);
        assert_eq!(rejection_loss(1e-12, Annotation::Correct, 0.3), 0.0);
        assert_eq!(rejection_loss(-1.0, Annotation::Correct, 0.3), 0.3);
    }

    #[test]
    fn clamped_region_has_zero_gradient_and_saturated_loss() {
        let p = RejectionParams::constrained(0.05, 2.0).unwrap();
        // beta ~ 9.7, so r = -100 puts the reject exponent near +970: clamped.
        let r = -100.0;
        let (loss, grad) = surrogate_loss_grad(r, Annotation::Correct, &p);
        assert!(loss.is_finite());
        assert!(loss > 1e200, "saturated term should dominate, got {loss}");
        // The clamped term contributes nothing; the live accept term is tiny.
        assert!(grad.abs() < 1e-40, "got {grad}");
    }

    #[test]
    fn surrogate_dominates_rejection_loss_on_a_grid() {
        for &(c, alpha) in &[(0.05, 2.0), (0.3, 4.0), (0.7, 1.0)] {
            let p = RejectionParams::constrained(c, alpha).unwrap();
            for &a in &[Annotation::Correct, Annotation::Incorrect] {
                for i in -50..=50 {
                    let r = i as f64 * 0.2;
                    let l1 = surrogate_loss(r, a, &p);
                    let l2 = rejection_loss(r, a, c);
                    assert!(
                        l1 >= l2 - 1e-12,
                        "c={c} alpha={alpha} r={r} a={a:?}: {l1} < {l2}"
                    );
                }
            }
        }
    }
}
