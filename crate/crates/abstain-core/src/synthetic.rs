//! Synthetic tasks with analytically known conditional accuracy.
//!
//! A task fixes a feature law and a function `eta(x) = P(annotation = +1 |
//! x)`. Because `eta` is known, conditional expectations over the annotation
//! are computed exactly and only `x` is sampled; zero-variance cases are
//! exactly zero-variance and Monte-Carlo noise is halved.
//!
//! All estimators draw the feature stream with [`sample_features`], so two
//! estimates with the same `(task, n_mc, seed)` see identical inputs. Excess
//! risks computed by [`excess_risks`] are therefore means of pointwise
//! non-negative gaps, and the consistency bound holds on the estimates
//! themselves, not just in expectation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{Annotation, Dataset, Example};
use crate::error::{CoreError, Result};
use crate::models::Rejector;
use crate::params::RejectionParams;
use crate::theory;

/// Conditional accuracy model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EtaSpec {
    /// `eta(x) = value` everywhere.
    ConstantEta { value: f64 },
    /// `eta(x) = 1 / (1 + exp(-(w . x + bias)))`.
    Logistic { weights: Vec<f64>, bias: f64 },
    /// Staircase in the first coordinate: ascending `breakpoints` split the
    /// line into `levels.len()` intervals; `x[0]` in `[b_{j-1}, b_j)` gets
    /// `levels[j]`.
    Piecewise {
        breakpoints: Vec<f64>,
        levels: Vec<f64>,
    },
}

/// Feature sampling law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum FeatureLaw {
    UniformBox {
        dim: usize,
        #[serde(default = "default_low")]
        low: f64,
        #[serde(default = "default_high")]
        high: f64,
    },
    StandardNormal { dim: usize },
}

fn default_low() -> f64 {
    -1.0
}

fn default_high() -> f64 {
    1.0
}

impl FeatureLaw {
    pub fn dim(&self) -> usize {
        match self {
            FeatureLaw::UniformBox { dim, .. } => *dim,
            FeatureLaw::StandardNormal { dim } => *dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTask {
    #[serde(flatten)]
    pub eta: EtaSpec,
    pub x_law: FeatureLaw,
    /// Bundled default rejection cost. Risk estimators take the cost from
    /// their `RejectionParams` argument, never from here; this field only
    /// seeds configuration defaults.
    pub c: f64,
    /// When set, sampled examples carry `score = eta(x) + U(-a, a)`, a noisy
    /// confidence proxy for score-threshold baselines. May leave [0, 1].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score_noise: Option<f64>,
}

impl SyntheticTask {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(CoreError::InvalidTask(format!(
                "cost must lie in (0, 1), got {}",
                self.c
            )));
        }
        if let Some(a) = self.score_noise {
            if !(a.is_finite() && a >= 0.0) {
                return Err(CoreError::InvalidTask(format!(
                    "score_noise must be finite and >= 0, got {a}"
                )));
            }
        }
        match &self.x_law {
            FeatureLaw::UniformBox { dim, low, high } => {
                if *dim == 0 {
                    return Err(CoreError::InvalidTask("dim must be >= 1".into()));
                }
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return Err(CoreError::InvalidTask(format!(
                        "uniform box needs finite low < high, got [{low}, {high}]"
                    )));
                }
            }
            FeatureLaw::StandardNormal { dim } => {
                if *dim == 0 {
                    return Err(CoreError::InvalidTask("dim must be >= 1".into()));
                }
            }
        }
        match &self.eta {
            EtaSpec::ConstantEta { value } => {
                if !(value.is_finite() && (0.0..=1.0).contains(value)) {
                    return Err(CoreError::InvalidTask(format!(
                        "constant eta must lie in [0, 1], got {value}"
                    )));
                }
            }
            EtaSpec::Logistic { weights, bias } => {
                if weights.len() != self.x_law.dim() {
                    return Err(CoreError::InvalidTask(format!(
                        "logistic weights length {} != dim {}",
                        weights.len(),
                        self.x_law.dim()
                    )));
                }
                if weights.iter().chain([bias]).any(|v| !v.is_finite()) {
                    return Err(CoreError::InvalidTask(
                        "logistic parameters must be finite".into(),
                    ));
                }
            }
            EtaSpec::Piecewise {
                breakpoints,
                levels,
            } => {
                if levels.len() != breakpoints.len() + 1 {
                    return Err(CoreError::InvalidTask(format!(
                        "piecewise needs levels.len() == breakpoints.len() + 1, got {} and {}",
                        levels.len(),
                        breakpoints.len()
                    )));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1]))
                    || breakpoints.iter().any(|b| !b.is_finite())
                {
                    return Err(CoreError::InvalidTask(
                        "breakpoints must be finite and strictly ascending".into(),
                    ));
                }
                if levels
                    .iter()
                    .any(|l| !(l.is_finite() && (0.0..=1.0).contains(l)))
                {
                    return Err(CoreError::InvalidTask(
                        "levels must lie in [0, 1]".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.x_law.dim()
    }

    /// `P(annotation = +1 | x)`.
    pub fn eta_at(&self, x: &[f64]) -> f64 {
        match &self.eta {
            EtaSpec::ConstantEta { value } => *value,
            EtaSpec::Logistic { weights, bias } => {
                let t: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias;
                sigmoid(t)
            }
            EtaSpec::Piecewise {
                breakpoints,
                levels,
            } => {
                let idx = breakpoints.partition_point(|&b| x[0] >= b);
                levels[idx]
            }
        }
    }

    /// Expected accuracy `E[eta(x)]` when it has a closed form: constant
    /// tasks, and one-dimensional staircases under a uniform box.
    pub fn mean_eta(&self) -> Option<f64> {
        match (&self.eta, &self.x_law) {
            (EtaSpec::ConstantEta { value }, _) => Some(*value),
            (
                EtaSpec::Piecewise {
                    breakpoints,
                    levels,
                },
                FeatureLaw::UniformBox { dim: 1, low, high },
            ) => {
                let mut total = 0.0;
                let mut left = *low;
                for (j, level) in levels.iter().enumerate() {
                    let right = breakpoints.get(j).copied().unwrap_or(*high).min(*high);
                    if right > left {
                        total += level * (right - left);
                    }
                    left = right.max(left);
                }
                Some(total / (high - low))
            }
            _ => None,
        }
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn draw_x<R: Rng>(law: &FeatureLaw, rng: &mut R) -> Vec<f64> {
    match law {
        FeatureLaw::UniformBox { dim, low, high } => {
            (0..*dim).map(|_| rng.random_range(*low..*high)).collect()
        }
        FeatureLaw::StandardNormal { dim } => {
            (0..*dim).map(|_| rng.sample(StandardNormal)).collect()
        }
    }
}

/// The shared feature stream: every estimator below consumes exactly this
/// sequence for a given `(task, n, seed)`.
pub fn sample_features(task: &SyntheticTask, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| draw_x(&task.x_law, &mut rng)).collect()
}

/// Draws a labeled dataset: `x` from the feature law, then `annotation = +1`
/// with probability `eta(x)`; scores attached when the task carries noise.
pub fn sample(task: &SyntheticTask, n: usize, seed: u64) -> Result<Dataset> {
    task.validate()?;
    if n == 0 {
        return Err(CoreError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut examples = Vec::with_capacity(n);
    for _ in 0..n {
        let x = draw_x(&task.x_law, &mut rng);
        let eta = task.eta_at(&x);
        let u: f64 = rng.random_range(0.0..1.0);
        let annotation = if u < eta {
            Annotation::Correct
        } else {
            Annotation::Incorrect
        };
        let mut ex = Example::new(x, annotation);
        if let Some(a) = task.score_noise {
            let noise = if a > 0.0 { rng.random_range(-a..a) } else { 0.0 };
            ex.score = Some(eta + noise);
        }
        examples.push(ex);
    }
    Dataset::from_examples(examples)
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

fn estimate(values: impl Iterator<Item = f64>) -> RiskEstimate {
    let vals: Vec<f64> = values.collect();
    let n = vals.len();
    assert!(n > 0, "estimate needs at least one sample");
    let first = vals[0];
    // Constant streams are exactly zero-variance; skipping the summation
    // keeps degenerate closed-form cases exact instead of epsilon-off.
    if vals.iter().all(|&v| v == first) {
        return RiskEstimate {
            mean: first,
            std_error: 0.0,
            n,
        };
    }
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    RiskEstimate {
        mean,
        std_error: (var / n as f64).sqrt(),
        n,
    }
}

/// Which loss a risk estimate integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    Rejection,
    Surrogate,
}

fn conditional_risk(r: f64, eta: f64, kind: LossKind, p: &RejectionParams) -> f64 {
    match kind {
        LossKind::Rejection => theory::conditional_risk_rejection(r, eta, p.c()),
        LossKind::Surrogate => theory::conditional_risk_surrogate(r, eta, p),
    }
}

/// Risk of an arbitrary rejector function over the task distribution.
pub fn risk_of_fn(
    predict: impl Fn(&[f64]) -> f64,
    task: &SyntheticTask,
    kind: LossKind,
    params: &RejectionParams,
    n_mc: usize,
    seed: u64,
) -> RiskEstimate {
    let xs = sample_features(task, n_mc, seed);
    estimate(xs.iter().map(|x| {
        let eta = task.eta_at(x);
        conditional_risk(predict(x), eta, kind, params)
    }))
}

/// Risk of a parametric rejector; fails on dimension mismatch or when a
/// score-reading rejector is evaluated on a task without scores.
pub fn risk_of(
    rejector: &Rejector,
    task: &SyntheticTask,
    kind: LossKind,
    params: &RejectionParams,
    n_mc: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    if rejector.reads_score() {
        return Err(CoreError::InvalidRejector(
            "score-reading rejectors have no feature-space risk on a synthetic task; evaluate \
             them on sampled datasets instead"
                .into(),
        ));
    }
    if rejector.dim() != task.dim() {
        return Err(CoreError::RejectorDimension {
            expected: task.dim(),
            found: rejector.dim(),
        });
    }
    Ok(risk_of_fn(
        |x| rejector.predict_features(x),
        task,
        kind,
        params,
        n_mc,
        seed,
    ))
}

/// Minimal achievable risks `(rejection, surrogate)` over the task, averaging
/// the closed-form conditional minima over the feature stream.
pub fn bayes_risks(
    task: &SyntheticTask,
    params: &RejectionParams,
    n_mc: usize,
    seed: u64,
) -> (RiskEstimate, RiskEstimate) {
    let xs = sample_features(task, n_mc, seed);
    let rejection = estimate(
        xs.iter()
            .map(|x| theory::bayes_risk_rejection(task.eta_at(x), params.c())),
    );
    let surrogate = estimate(
        xs.iter()
            .map(|x| theory::bayes_risk_surrogate(task.eta_at(x), params)),
    );
    (rejection, surrogate)
}

/// Coupled excess risks of a rejector function: every quantity is averaged
/// over the same feature stream, so each excess is a mean of pointwise
/// non-negative calibration gaps.
#[derive(Debug, Clone, Serialize)]
pub struct ExcessReport {
    pub risk_rejection: RiskEstimate,
    pub risk_surrogate: RiskEstimate,
    pub bayes_rejection: RiskEstimate,
    pub bayes_surrogate: RiskEstimate,
    pub excess_rejection: RiskEstimate,
    pub excess_surrogate: RiskEstimate,
}

pub fn excess_risks(
    predict: impl Fn(&[f64]) -> f64,
    task: &SyntheticTask,
    params: &RejectionParams,
    n_mc: usize,
    seed: u64,
) -> ExcessReport {
    let xs = sample_features(task, n_mc, seed);
    let mut l2 = Vec::with_capacity(n_mc);
    let mut l1 = Vec::with_capacity(n_mc);
    let mut b2 = Vec::with_capacity(n_mc);
    let mut b1 = Vec::with_capacity(n_mc);
    let mut g2 = Vec::with_capacity(n_mc);
    let mut g1 = Vec::with_capacity(n_mc);
    for x in &xs {
        let eta = task.eta_at(x);
        let r = predict(x);
        let v2 = theory::conditional_risk_rejection(r, eta, params.c());
        let v1 = theory::conditional_risk_surrogate(r, eta, params);
        let m2 = theory::bayes_risk_rejection(eta, params.c());
        let m1 = theory::bayes_risk_surrogate(eta, params);
        l2.push(v2);
        l1.push(v1);
        b2.push(m2);
        b1.push(m1);
        g2.push(v2 - m2);
        g1.push(v1 - m1);
    }
    ExcessReport {
        risk_rejection: estimate(l2.into_iter()),
        risk_surrogate: estimate(l1.into_iter()),
        bayes_rejection: estimate(b2.into_iter()),
        bayes_surrogate: estimate(b1.into_iter()),
        excess_rejection: estimate(g2.into_iter()),
        excess_surrogate: estimate(g1.into_iter()),
    }
}

fn uniform_1d() -> FeatureLaw {
    FeatureLaw::UniformBox {
        dim: 1,
        low: -1.0,
        high: 1.0,
    }
}

/// The bundled task catalog, each with the given cost: constant-accuracy
/// tasks at five levels, a one-dimensional logistic task, and a two-level
/// staircase with mass on both sides of the accept boundary for common
/// costs.
pub fn default_tasks(c: f64) -> Vec<(String, SyntheticTask)> {
    let mut tasks = Vec::new();
    for value in [0.5, 0.8, 0.89, 0.95, 0.99] {
        tasks.push((
            format!("const-{value}"),
            SyntheticTask {
                eta: EtaSpec::ConstantEta { value },
                x_law: uniform_1d(),
                c,
                score_noise: None,
            },
        ));
    }
    tasks.push((
        "logistic-1d".to_string(),
        SyntheticTask {
            eta: EtaSpec::Logistic {
                weights: vec![4.0],
                bias: 0.0,
            },
            x_law: uniform_1d(),
            c,
            score_noise: None,
        },
    ));
    tasks.push((
        "two-level".to_string(),
        SyntheticTask {
            eta: EtaSpec::Piecewise {
                breakpoints: vec![0.0],
                levels: vec![0.6, 0.98],
            },
            x_law: uniform_1d(),
            c,
            score_noise: None,
        },
    ));
    tasks
}

/// A staircase whose mean accuracy (0.89) sits close to a 0.95-precision
/// coverage limit, with a top level below the precision target: learned
/// rejectors can approach the limit here while plain score thresholds
/// cannot, because no threshold on a noisy score reaches the target
/// legitimately.
pub fn near_limit_task(c: f64, score_noise: f64) -> SyntheticTask {
    SyntheticTask {
        eta: EtaSpec::Piecewise {
            breakpoints: vec![-0.923, -0.86, -0.82, -0.74],
            levels: vec![0.25, 0.5, 0.7, 0.875, 0.9375],
        },
        x_law: uniform_1d(),
        c,
        score_noise: Some(score_noise),
    }
}

/// Looks up a catalog task by name; `near-limit` takes its standard noise.
pub fn task_by_name(name: &str, c: f64) -> Option<SyntheticTask> {
    if name == "near-limit" {
        return Some(near_limit_task(c, 0.3));
    }
    default_tasks(c)
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, t)| t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn const_task(value: f64, c: f64) -> SyntheticTask {
        SyntheticTask {
            eta: EtaSpec::ConstantEta { value },
            x_law: uniform_1d(),
            c,
            score_noise: None,
        }
    }

    #[test]
    fn degenerate_accuracy_gives_all_positive_annotations() {
        let d = sample(&const_task(1.0, 0.1), 100, 3).unwrap();
        assert!(d.examples().iter().all(|e| e.annotation.is_correct()));
        assert_eq!(d.positive_rate(), 1.0);
    }

    #[test]
    fn empirical_rate_concentrates() {
        let n = 100_000;
        let d = sample(&const_task(0.8, 0.1), n, 11).unwrap();
        let tol = 3.0 * (0.8 * 0.2 / n as f64).sqrt();
        assert!((d.positive_rate() - 0.8).abs() < tol);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let t = near_limit_task(0.33, 0.3);
        let a = sample(&t, 500, 42).unwrap();
        let b = sample(&t, 500, 42).unwrap();
        assert_eq!(a, b);
        let c = sample(&t, 500, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn constant_task_bayes_risk_is_exact() {
        let p = RejectionParams::constrained(0.05, 2.0).unwrap();
        let (r2, _r1) = bayes_risks(&const_task(0.8, 0.05), &p, 2000, 5);
        assert_eq!(r2.mean, 0.05);
        assert_eq!(r2.std_error, 0.0);
        // At the boundary accuracy both branches cost c.
        let (r2, _) = bayes_risks(&const_task(0.95, 0.05), &p, 2000, 5);
        assert_eq!(r2.mean, 0.05);
    }

    #[test]
    fn always_reject_costs_c_and_always_accept_costs_error_rate() {
        let p = RejectionParams::constrained(0.12, 2.0).unwrap();
        let t = const_task(0.8, 0.12);
        let r = risk_of_fn(|_| -1.0, &t, LossKind::Rejection, &p, 1000, 9);
        assert_eq!(r.mean, 0.12);
        assert_eq!(r.std_error, 0.0);
        let r = risk_of_fn(|_| 1.0, &t, LossKind::Rejection, &p, 1000, 9);
        assert!((r.mean - 0.2).abs() < 1e-15);
    }

    #[test]
    fn oracle_rejector_matches_bayes_risk_on_the_same_stream() {
        let p = RejectionParams::constrained(0.05, 2.0).unwrap();
        let t = SyntheticTask {
            eta: EtaSpec::Logistic {
                weights: vec![4.0],
                bias: 0.0,
            },
            x_law: uniform_1d(),
            c: 0.05,
            score_noise: None,
        };
        let c = p.c();
        let oracle = |x: &[f64]| t.eta_at(x) - (1.0 - c);
        let risk = risk_of_fn(&oracle, &t, LossKind::Rejection, &p, 50_000, 17);
        let (bayes, _) = bayes_risks(&t, &p, 50_000, 17);
        // Same feature stream, so the oracle achieves the minimum pointwise.
        assert!((risk.mean - bayes.mean).abs() < 1e-15);
    }

    #[test]
    fn excess_report_gaps_are_non_negative_and_consistent() {
        let p = RejectionParams::constrained(0.1, 2.0).unwrap();
        let t = near_limit_task(0.1, 0.3);
        let rep = excess_risks(|x| 0.5 - x[0], &t, &p, 20_000, 23);
        assert!(rep.excess_rejection.mean >= 0.0);
        assert!(rep.excess_surrogate.mean >= -1e-15);
        let diff = rep.risk_rejection.mean - rep.bayes_rejection.mean;
        assert!((rep.excess_rejection.mean - diff).abs() < 1e-12);
    }

    #[test]
    fn mean_eta_closed_forms() {
        assert_eq!(const_task(0.7, 0.1).mean_eta(), Some(0.7));
        let t = near_limit_task(0.33, 0.3);
        let m = t.mean_eta().unwrap();
        assert!((m - 0.89).abs() < 2e-5, "got {m}");
        let two = task_by_name("two-level", 0.2).unwrap();
        assert!((two.mean_eta().unwrap() - 0.79).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_malformed_tasks() {
        let mut t = near_limit_task(0.33, 0.3);
        t.c = 1.5;
        assert!(t.validate().is_err());

        let t = SyntheticTask {
            eta: EtaSpec::Piecewise {
                breakpoints: vec![0.5, 0.2],
                levels: vec![0.1, 0.2, 0.3],
            },
            x_law: uniform_1d(),
            c: 0.1,
            score_noise: None,
        };
        assert!(t.validate().is_err());

        let t = SyntheticTask {
            eta: EtaSpec::Logistic {
                weights: vec![1.0, 2.0],
                bias: 0.0,
            },
            x_law: uniform_1d(),
            c: 0.1,
            score_noise: None,
        };
        assert!(t.validate().is_err());
    }

    #[test]
    fn task_round_trips_through_toml_and_json() {
        let t = near_limit_task(0.33, 0.3);
        let toml_text = toml::to_string(&t).unwrap();
        let back: SyntheticTask = toml::from_str(&toml_text).unwrap();
        assert_eq!(t, back);
        let json_text = serde_json::to_string(&t).unwrap();
        let back: SyntheticTask = serde_json::from_str(&json_text).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn scores_track_accuracy_within_noise() {
        let t = near_limit_task(0.33, 0.3);
        let d = sample(&t, 2000, 77).unwrap();
        for e in d.examples() {
            let eta = t.eta_at(&e.features);
            let s = e.score.unwrap();
            assert!((s - eta).abs() < 0.3 + 1e-12);
        }
    }
}
