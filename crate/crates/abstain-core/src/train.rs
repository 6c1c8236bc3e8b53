//! Mini-batch gradient descent for rejectors.
//!
//! Two objectives: the surrogate rejection loss (whose trained output is
//! used with threshold 0 directly) and binary cross-entropy (whose output is
//! a score that still needs a fitted threshold downstream).
//!
//! Plain gradient descent, no adaptive state: determinism reduces to the
//! seed. The per-epoch shuffle is drawn from a generator seeded with the
//! config seed alone, never from the data, so the batch schedule is a pure
//! function of (seed, n, epochs).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::dataset::Dataset;
use crate::error::{CoreError, Result};
use crate::losses::{surrogate_loss, surrogate_loss_grad};
use crate::models::Rejector;
use crate::params::RejectionParams;

/// The loss is saturated by exponent clamping, so runaway parameters keep it
/// finite; anything above this is still unambiguous divergence.
const DIVERGENCE_CEILING: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2_penalty: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            epochs: 500,
            batch_size: 64,
            l2_penalty: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(CoreError::InvalidParameter {
                name: "learning_rate",
                value: self.learning_rate,
                constraint: "must be finite and > 0",
            });
        }
        if self.epochs == 0 {
            return Err(CoreError::InvalidParameter {
                name: "epochs",
                value: 0.0,
                constraint: "must be >= 1",
            });
        }
        if self.batch_size == 0 {
            return Err(CoreError::InvalidParameter {
                name: "batch_size",
                value: 0.0,
                constraint: "must be >= 1",
            });
        }
        if !(self.l2_penalty >= 0.0 && self.l2_penalty.is_finite()) {
            return Err(CoreError::InvalidParameter {
                name: "l2_penalty",
                value: self.l2_penalty,
                constraint: "must be finite and >= 0",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub rejector: Rejector,
    /// Mean training loss per epoch (batch losses averaged with their
    /// sizes; batches within an epoch are evaluated at moving parameters).
    pub loss_trace: Vec<f64>,
    /// Last two epoch losses agree to a relative 1e-8.
    pub converged: bool,
}

impl TrainReport {
    pub fn to_json(&self) -> String {
        let wire: serde_json::Value =
            serde_json::from_str(&crate::models::to_json(&self.rejector))
                .expect("rejector wire form is valid JSON");
        json!({
            "rejector": wire,
            "loss_trace": self.loss_trace,
            "converged": self.converged,
        })
        .to_string()
    }
}

/// Per-example loss and its derivative in the rejector output.
trait Objective {
    fn eval(&self, r: f64, a: f64) -> (f64, f64);
}

struct SurrogateObjective<'a>(&'a RejectionParams);

impl Objective for SurrogateObjective<'_> {
    fn eval(&self, r: f64, a: f64) -> (f64, f64) {
        let annot = if a > 0.0 {
            crate::dataset::Annotation::Correct
        } else {
            crate::dataset::Annotation::Incorrect
        };
        surrogate_loss_grad(r, annot, self.0)
    }
}

/// Binary cross-entropy of sigmoid(r) against (a+1)/2, in the stable
/// softplus form.
struct CrossEntropyObjective;

impl Objective for CrossEntropyObjective {
    fn eval(&self, r: f64, a: f64) -> (f64, f64) {
        let y = 0.5 * (a + 1.0);
        let softplus = r.max(0.0) + (-r.abs()).exp().ln_1p();
        let sig = if r >= 0.0 {
            1.0 / (1.0 + (-r).exp())
        } else {
            let e = r.exp();
            e / (1.0 + e)
        };
        (softplus - y * r, sig - y)
    }
}

fn descend(
    dataset: &Dataset,
    rejector0: &Rejector,
    cfg: &TrainConfig,
    objective: &dyn Objective,
) -> Result<TrainReport> {
    cfg.validate()?;
    if !rejector0.trainable() {
        return Err(CoreError::NonTrainable {
            variant: "score-offset",
        });
    }
    if rejector0.dim() != dataset.dim() {
        return Err(CoreError::RejectorDimension {
            expected: rejector0.dim(),
            found: dataset.dim(),
        });
    }

    let n = dataset.len();
    let mut rejector = rejector0.clone();
    let mut theta = rejector.params_flat();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let m = chunk.len() as f64;
            let mut grad = vec![0.0; theta.len()];
            let mut loss = 0.0;
            for &i in chunk {
                let ex = &dataset.examples()[i];
                let r = rejector.predict_features(&ex.features);
                let (l, dl) = objective.eval(r, ex.annotation.as_f64());
                loss += l;
                let g = rejector.param_grad(&ex.features, dl)?;
                for (gs, gi) in grad.iter_mut().zip(&g) {
                    *gs += gi;
                }
            }
            loss /= m;
            for g in grad.iter_mut() {
                *g /= m;
            }
            if cfg.l2_penalty > 0.0 {
                for (g, t) in grad.iter_mut().zip(&theta) {
                    loss += cfg.l2_penalty * t * t;
                    *g += 2.0 * cfg.l2_penalty * t;
                }
            }
            if !loss.is_finite() || loss > DIVERGENCE_CEILING {
                return Err(CoreError::Diverged {
                    epoch,
                    learning_rate: cfg.learning_rate,
                });
            }
            for (t, g) in theta.iter_mut().zip(&grad) {
                *t -= cfg.learning_rate * g;
            }
            rejector = rejector.with_params(&theta)?;
            epoch_loss += loss * m;
        }
        trace.push(epoch_loss / n as f64);
    }

    let converged = match trace.as_slice() {
        [.., prev, last] => (prev - last).abs() <= 1e-8 * last.abs().max(1.0),
        _ => false,
    };
    Ok(TrainReport {
        rejector,
        loss_trace: trace,
        converged,
    })
}

/// Trains under the surrogate loss plus `l2_penalty * |theta|^2`. The result
/// is used with threshold 0; no post-hoc threshold is fitted here.
pub fn train_surrogate(
    dataset: &Dataset,
    params: &RejectionParams,
    rejector0: &Rejector,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    descend(dataset, rejector0, cfg, &SurrogateObjective(params))
}

/// Trains a probability-style scorer with binary cross-entropy; its output
/// needs a fitted threshold before use as a rejector.
pub fn train_cross_entropy(
    dataset: &Dataset,
    rejector0: &Rejector,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    descend(dataset, rejector0, cfg, &CrossEntropyObjective)
}

/// Maximum relative error between the analytic gradient of the mean
/// surrogate loss and central finite differences with step `eps`, scaled by
/// the largest gradient component.
pub fn grad_check(
    rejector: &Rejector,
    dataset: &Dataset,
    params: &RejectionParams,
    eps: f64,
) -> Result<f64> {
    if !rejector.trainable() {
        return Err(CoreError::NonTrainable {
            variant: "score-offset",
        });
    }
    if eps <= 0.0 {
        return Err(CoreError::InvalidParameter {
            name: "eps",
            value: eps,
            constraint: "must be > 0",
        });
    }
    let theta = rejector.params_flat();
    let mean_loss = |flat: &[f64]| -> Result<f64> {
        let r = rejector.with_params(flat)?;
        let mut total = 0.0;
        for ex in dataset.examples() {
            let out = r.predict_features(&ex.features);
            total += surrogate_loss(out, ex.annotation, params);
        }
        Ok(total / dataset.len() as f64)
    };

    let mut analytic = vec![0.0; theta.len()];
    for ex in dataset.examples() {
        let r = rejector.predict_features(&ex.features);
        let (_, dl) = crate::losses::surrogate_loss_grad(r, ex.annotation, params);
        let g = rejector.param_grad(&ex.features, dl)?;
        for (a, gi) in analytic.iter_mut().zip(&g) {
            *a += gi / dataset.len() as f64;
        }
    }

    let mut fd = vec![0.0; theta.len()];
    for i in 0..theta.len() {
        let mut plus = theta.clone();
        plus[i] += eps;
        let mut minus = theta.clone();
        minus[i] -= eps;
        fd[i] = (mean_loss(&plus)? - mean_loss(&minus)?) / (2.0 * eps);
    }

    let scale = analytic
        .iter()
        .chain(fd.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-8);
    Ok(analytic
        .iter()
        .zip(&fd)
        .map(|(a, f)| (a - f).abs() / scale)
        .fold(0.0, f64::max))
}
