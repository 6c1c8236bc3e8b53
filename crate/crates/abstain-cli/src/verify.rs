//! Theory property grids behind the `verify` subcommand.
//!
//! Each grid exercises one proved statement on many points and counts
//! violations beyond a small numeric tolerance; all randomness is seeded,
//! so two runs emit identical reports.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use abstain_core::dataset::Annotation;
use abstain_core::losses::{rejection_loss, surrogate_loss};
use abstain_core::models::Rejector;
use abstain_core::params::RejectionParams;
use abstain_core::synthetic::{default_tasks, excess_risks, sample, SyntheticTask};
use abstain_core::theory::{
    bayes_rejector, calibration_gap_surrogate, check_bernoulli, psi, psi_inverse,
    surrogate_minimizer,
};
use abstain_core::train::{train_surrogate, TrainConfig};

const TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct PropertyRow {
    pub property: &'static str,
    pub cells: usize,
    pub violations: usize,
    pub max_violation: f64,
}

impl PropertyRow {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

fn record(row: &mut PropertyRow, excess: f64) {
    row.cells += 1;
    if excess > TOL {
        row.violations += 1;
        row.max_violation = row.max_violation.max(excess);
    }
}

/// Surrogate never drops below the target loss.
fn dominance(quick: bool) -> PropertyRow {
    let n = if quick { 10_000 } else { 100_000 };
    let mut row = PropertyRow {
        property: "dominance",
        cells: 0,
        violations: 0,
        max_violation: 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0xD0411A);
    for _ in 0..n {
        let r: f64 = rng.random_range(-10.0..10.0);
        let a = if rng.random_range(0.0..1.0) < 0.5 {
            Annotation::Correct
        } else {
            Annotation::Incorrect
        };
        let c: f64 = rng.random_range(0.01..0.99);
        let alpha: f64 = rng.random_range(0.5..8.0);
        let params = RejectionParams::constrained(c, alpha).expect("ranges are valid");
        let l1 = surrogate_loss(r, a, &params);
        let l2 = rejection_loss(r, a, c);
        record(&mut row, l2 - l1);
    }
    row
}

fn signum_with_tol(v: f64) -> i8 {
    if v.abs() < TOL {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

/// The surrogate minimizer accepts/rejects exactly where the target optimum
/// does, under the constraint-tied beta.
fn sign_agreement(quick: bool) -> PropertyRow {
    let step: f64 = if quick { 0.01 } else { 0.001 };
    let mut row = PropertyRow {
        property: "sign-agreement",
        cells: 0,
        violations: 0,
        max_violation: 0.0,
    };
    let steps = (1.0 / step).round() as usize;
    for &c in &[0.02, 0.05, 0.1, 0.2, 0.3] {
        for &alpha in &[0.5, 1.0, 2.0, 4.0, 8.0] {
            let params = RejectionParams::constrained(c, alpha).expect("valid");
            for i in 0..=steps {
                let eta = i as f64 * step;
                let r0 = surrogate_minimizer(eta, &params);
                let r_star = bayes_rejector(eta, c);
                row.cells += 1;
                if signum_with_tol(r0) != signum_with_tol(r_star) {
                    row.violations += 1;
                    row.max_violation = row.max_violation.max(r0.abs().min(r_star.abs()));
                }
            }
        }
    }
    row
}

/// Quadratic refinement of Bernoulli's inequality on the open unit square.
fn bernoulli(quick: bool) -> PropertyRow {
    let step: f64 = if quick { 0.01 } else { 0.001 };
    let mut row = PropertyRow {
        property: "bernoulli",
        cells: 0,
        violations: 0,
        max_violation: 0.0,
    };
    let steps = (1.0 / step).round() as usize;
    for i in 1..steps {
        let x = i as f64 * step;
        for j in 1..steps {
            let r = j as f64 * step;
            let residual = check_bernoulli(x, r).expect("grid stays inside (0,1)");
            record(&mut row, -residual);
        }
    }
    row
}

/// The surrogate gap at r = 0 dominates the quadratic floor on the branch
/// where accepting is optimal (eta >= 1 - c). The floor's derivation rests
/// on a Bernoulli-type refinement whose argument must be positive, so it
/// says nothing about the other branch; there the target gap at r = 0 is
/// zero anyway because r = 0 rejects and rejecting is optimal.
fn psi_domination(quick: bool) -> PropertyRow {
    let steps = if quick { 100 } else { 1000 };
    let mut row = PropertyRow {
        property: "psi-domination",
        cells: 0,
        violations: 0,
        max_violation: 0.0,
    };
    for &c in &[0.02, 0.05, 0.1, 0.2, 0.3] {
        for &alpha in &[0.5, 1.0, 2.0, 4.0, 8.0] {
            let params = RejectionParams::constrained(c, alpha).expect("valid");
            for i in 0..=steps {
                let u = c * i as f64 / steps as f64;
                let gap0 = calibration_gap_surrogate(0.0, (1.0 - c) + u, &params);
                let floor = psi(u, c, alpha);
                record(&mut row, floor - gap0);
            }
        }
    }
    row
}

fn check_bound_for(
    row: &mut PropertyRow,
    predict: impl Fn(&[f64]) -> f64,
    task: &SyntheticTask,
    params: &RejectionParams,
    n_mc: usize,
    seed: u64,
) {
    let rep = excess_risks(predict, task, params, n_mc, seed);
    let e1 = rep.excess_surrogate.mean.max(0.0);
    let e2 = rep.excess_rejection.mean.max(0.0);
    let bound = psi_inverse(e1, params.c(), params.alpha()).expect("non-negative excess");
    let tol = 3.0 * rep.excess_rejection.std_error
        + psi_inverse(3.0 * rep.excess_surrogate.std_error, params.c(), params.alpha())
            .expect("non-negative");
    record(row, e2 - bound - tol);
}

/// Excess target risk stays below the transformed excess surrogate risk on
/// every catalog task, for random, trained, and oracle rejectors.
fn consistency_bound(quick: bool) -> PropertyRow {
    let mut row = PropertyRow {
        property: "consistency-bound",
        cells: 0,
        violations: 0,
        max_violation: 0.0,
    };
    let costs: &[f64] = if quick { &[0.05] } else { &[0.05, 0.1] };
    let n_random = if quick { 20 } else { 200 };
    let n_mc = if quick { 10_000 } else { 100_000 };
    let alpha = 2.0;
    for &c in costs {
        let tasks = default_tasks(c);
        let tasks = if quick { &tasks[1..4] } else { &tasks[..] };
        for (ti, (_, task)) in tasks.iter().enumerate() {
            let params = RejectionParams::constrained(c, alpha).expect("valid");
            let mut rng = ChaCha8Rng::seed_from_u64(0xB0u64 + ti as u64);
            for k in 0..n_random {
                let w: f64 = rng.random_range(-3.0..3.0);
                let b: f64 = rng.random_range(-3.0..3.0);
                check_bound_for(
                    &mut row,
                    |x| w * x[0] + b,
                    task,
                    &params,
                    n_mc,
                    1000 + k as u64,
                );
            }
            // Oracle rejector: the pointwise optimum itself.
            check_bound_for(
                &mut row,
                |x| task.eta_at(x) - (1.0 - c),
                task,
                &params,
                n_mc,
                999,
            );
            if !quick {
                let data = sample(task, 4000, 77 + ti as u64).expect("task is valid");
                // Zero start: the reject term e^{-beta r} is stiff for small
                // costs, and random-signed initial weights can overflow it.
                let r0 = Rejector::Linear {
                    dim: task.dim(),
                    weights: vec![0.0; task.dim()],
                    bias: 0.0,
                };
                let cfg = TrainConfig {
                    learning_rate: 0.01,
                    epochs: 200,
                    batch_size: 128,
                    l2_penalty: 0.0,
                    seed: 11,
                };
                let trained = train_surrogate(&data, &params, &r0, &cfg)
                    .expect("training converges on catalog tasks");
                check_bound_for(
                    &mut row,
                    |x| trained.rejector.predict_features(x),
                    task,
                    &params,
                    n_mc,
                    998,
                );
            }
        }
    }
    row
}

/// Runs all property grids; `quick` shrinks grids and sample counts.
pub fn run_verify(quick: bool) -> Vec<PropertyRow> {
    vec![
        dominance(quick),
        sign_agreement(quick),
        bernoulli(quick),
        psi_domination(quick),
        consistency_bound(quick),
    ]
}

pub fn report_csv(rows: &[PropertyRow]) -> String {
    let mut out = String::from("property,cells,violations,max_violation,status\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.property,
            r.cells,
            r.violations,
            abstain_core::curve::fmt_sig(r.max_violation, 6),
            if r.pass() { "pass" } else { "fail" }
        ));
    }
    out
}
