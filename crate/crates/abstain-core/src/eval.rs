//! Precision/coverage evaluation: metrics, threshold fitting, the coverage
//! ceiling, and cross-validated method sweeps.

use serde::{Deserialize, Serialize};

use crate::curve::CurveRow;
use crate::dataset::{Annotation, Dataset};
use crate::error::{CoreError, Result};
use crate::folds::Folds;
use crate::models::{init_rejector, Rejector, RejectorSpec};
use crate::params::RejectionParams;
use crate::train::{train_cross_entropy, train_surrogate, TrainConfig};

/// Acceptance metrics at a fixed rule: accept iff the rejector value is
/// strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PCPoint {
    /// Accuracy among accepted examples; `None` when nothing was accepted
    /// (never reported as 0 or 1).
    pub precision: Option<f64>,
    /// Accepted fraction of all examples.
    pub coverage: f64,
    pub n_accepted: usize,
    pub n: usize,
}

pub fn precision_coverage(r_values: &[f64], annotations: &[Annotation]) -> Result<PCPoint> {
    if r_values.len() != annotations.len() {
        return Err(CoreError::MismatchedLengths {
            left: r_values.len(),
            right: annotations.len(),
        });
    }
    if r_values.is_empty() {
        return Err(CoreError::EmptyDataset);
    }
    let mut accepted = 0usize;
    let mut correct = 0usize;
    for (r, a) in r_values.iter().zip(annotations) {
        if *r > 0.0 {
            accepted += 1;
            if a.is_correct() {
                correct += 1;
            }
        }
    }
    let n = r_values.len();
    Ok(PCPoint {
        precision: (accepted > 0).then(|| correct as f64 / accepted as f64),
        coverage: accepted as f64 / n as f64,
        n_accepted: accepted,
        n,
    })
}

/// Exhaustive threshold search: candidates are the distinct observed scores
/// with accept rule `score > theta` (so accept-everything is not a
/// candidate). Returns the feasible threshold of maximal coverage, ties
/// broken toward the smaller threshold; `None` when no candidate reaches
/// the target precision.
pub fn fit_threshold(
    scores: &[f64],
    annotations: &[Annotation],
    target_precision: f64,
) -> Result<Option<f64>> {
    if scores.len() != annotations.len() {
        return Err(CoreError::MismatchedLengths {
            left: scores.len(),
            right: annotations.len(),
        });
    }
    if scores.is_empty() {
        return Err(CoreError::EmptyDataset);
    }
    if !(target_precision > 0.0 && target_precision <= 1.0) {
        return Err(CoreError::InvalidParameter {
            name: "target_precision",
            value: target_precision,
            constraint: "must lie in (0, 1]",
        });
    }

    // Sort descending by score; walking down the list, the prefix above each
    // distinct value is exactly the accept set of that threshold.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));

    let mut best: Option<(usize, f64)> = None; // (accepted count, theta)
    let mut accepted = 0usize;
    let mut correct = 0usize;
    let mut pos = 0;
    while pos < order.len() {
        let theta = scores[order[pos]];
        // Consume the whole group of equal scores; they sit below theta.
        let mut group_correct = 0usize;
        let mut group_len = 0usize;
        while pos + group_len < order.len() && scores[order[pos + group_len]] == theta {
            if annotations[order[pos + group_len]].is_correct() {
                group_correct += 1;
            }
            group_len += 1;
        }
        if accepted > 0 {
            let precision = correct as f64 / accepted as f64;
            if precision >= target_precision {
                let better = match best {
                    None => true,
                    // Strictly larger coverage wins; on equal coverage the
                    // smaller theta (seen later while descending) wins.
                    Some((count, t)) => accepted > count || (accepted == count && theta < t),
                };
                if better {
                    best = Some((accepted, theta));
                }
            }
        }
        accepted += group_len;
        correct += group_correct;
        pos += group_len;
    }
    Ok(best.map(|(_, theta)| theta))
}

/// Coverage ceiling at target precision `p` given positive rate `b`:
/// `min(1, b/p)`. Any rule with precision at least `p` accepts at most a
/// `b/p` fraction, because its accepted-correct mass is at most `b`.
pub fn theoretical_limit(positive_rate: f64, target_precision: f64) -> f64 {
    (positive_rate / target_precision).min(1.0)
}

/// Rejection method being swept. Grid entries mean: target precision for
/// the two score-threshold methods, rejection cost for the surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MaxProb,
    CrossEntropy,
    Surrogate,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::MaxProb => "maxprob",
            Method::CrossEntropy => "cross_entropy",
            Method::Surrogate => "surrogate",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "maxprob" => Ok(Method::MaxProb),
            "cross_entropy" => Ok(Method::CrossEntropy),
            "surrogate" => Ok(Method::Surrogate),
            other => Err(format!(
                "unknown method {other:?} (expected maxprob, cross_entropy or surrogate)"
            )),
        }
    }
}

/// Everything a sweep needs besides the grid: training hyper-parameters,
/// the surrogate's alpha, the trainable architecture, and which split the
/// score threshold is fitted on.
#[derive(Debug, Clone, Copy)]
pub struct SweepSettings {
    pub train: TrainConfig,
    /// Margin scale for surrogate cells; beta always from the constraint.
    pub alpha: f64,
    pub model: RejectorSpec,
    /// Fit thresholds on the first half of each held-out fold and evaluate
    /// on the second half, instead of fitting on the training split.
    pub fit_on_half_holdout: bool,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            alpha: 4.0,
            model: RejectorSpec::Linear,
            fit_on_half_holdout: false,
        }
    }
}

/// One (grid entry, fold) evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct CellOutcome {
    pub grid_index: usize,
    pub fold_index: usize,
    pub point: PCPoint,
}

fn cell_seed(base: u64, grid_index: usize, fold_index: usize) -> u64 {
    base.wrapping_add(1_000_003u64.wrapping_mul(grid_index as u64))
        .wrapping_add(fold_index as u64)
}

fn predict_all(rejector: &Rejector, dataset: &Dataset, indices: &[usize]) -> Result<Vec<f64>> {
    indices
        .iter()
        .map(|&i| rejector.predict(&dataset.examples()[i]))
        .collect()
}

fn annots(dataset: &Dataset, indices: &[usize]) -> Vec<Annotation> {
    indices
        .iter()
        .map(|&i| dataset.examples()[i].annotation)
        .collect()
}

fn scores_at(dataset: &Dataset, indices: &[usize]) -> Result<Vec<f64>> {
    indices
        .iter()
        .map(|&i| {
            dataset.examples()[i]
                .score
                .ok_or(CoreError::MissingScore { index: i })
        })
        .collect()
}

/// The all-rejected point reported when no threshold meets the target.
fn empty_point(n: usize) -> PCPoint {
    PCPoint {
        precision: None,
        coverage: 0.0,
        n_accepted: 0,
        n,
    }
}

/// Threshold-based evaluation shared by maxprob and cross-entropy: fit on
/// one index set, apply `score > theta` on another.
fn threshold_cell(
    fit_scores: &[f64],
    fit_annots: &[Annotation],
    eval_scores: &[f64],
    eval_annots: &[Annotation],
    target: f64,
) -> Result<PCPoint> {
    match fit_threshold(fit_scores, fit_annots, target)? {
        Some(theta) => {
            let shifted: Vec<f64> = eval_scores.iter().map(|s| s - theta).collect();
            precision_coverage(&shifted, eval_annots)
        }
        None => Ok(empty_point(eval_scores.len())),
    }
}

/// Splits a held-out fold for the half-holdout protocol.
fn halves(test: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mid = test.len() / 2;
    (test[..mid].to_vec(), test[mid..].to_vec())
}

/// Runs every (grid entry, fold) cell. Surrogate cells train with the cost
/// from the grid and evaluate at threshold 0 on the held-out fold; the
/// score methods fit a threshold (on the training split, or on half the
/// held-out fold under the half-holdout protocol) and evaluate it on the
/// rest. Deterministic: each cell derives its seed from the base seed and
/// its (grid, fold) position.
pub fn sweep_cells(
    dataset: &Dataset,
    method: Method,
    grid: &[f64],
    folds: &Folds,
    settings: &SweepSettings,
) -> Result<Vec<CellOutcome>> {
    if grid.is_empty() {
        return Err(CoreError::EmptyGrid);
    }
    if folds.n() != dataset.len() {
        return Err(CoreError::MismatchedLengths {
            left: folds.n(),
            right: dataset.len(),
        });
    }
    let mut cells = Vec::with_capacity(grid.len() * folds.k());
    for (gi, &entry) in grid.iter().enumerate() {
        for fi in 0..folds.k() {
            let train_idx = folds.train_indices(fi);
            let test_idx = folds.test_indices(fi);
            let seed = cell_seed(settings.train.seed, gi, fi);
            let point = match method {
                Method::MaxProb => {
                    let (fit_idx, eval_idx) = if settings.fit_on_half_holdout {
                        halves(test_idx)
                    } else {
                        (train_idx.clone(), test_idx.to_vec())
                    };
                    threshold_cell(
                        &scores_at(dataset, &fit_idx)?,
                        &annots(dataset, &fit_idx),
                        &scores_at(dataset, &eval_idx)?,
                        &annots(dataset, &eval_idx),
                        entry,
                    )?
                }
                Method::CrossEntropy => {
                    let sub = dataset.subset(&train_idx)?;
                    let r0 = init_rejector(settings.model, dataset.dim(), seed)?;
                    let mut cfg = settings.train;
                    cfg.seed = seed;
                    let report = train_cross_entropy(&sub, &r0, &cfg)?;
                    let (fit_idx, eval_idx) = if settings.fit_on_half_holdout {
                        halves(test_idx)
                    } else {
                        (train_idx.clone(), test_idx.to_vec())
                    };
                    threshold_cell(
                        &predict_all(&report.rejector, dataset, &fit_idx)?,
                        &annots(dataset, &fit_idx),
                        &predict_all(&report.rejector, dataset, &eval_idx)?,
                        &annots(dataset, &eval_idx),
                        entry,
                    )?
                }
                Method::Surrogate => {
                    let params = RejectionParams::constrained(entry, settings.alpha)?;
                    let sub = dataset.subset(&train_idx)?;
                    let r0 = init_rejector(settings.model, dataset.dim(), seed)?;
                    let mut cfg = settings.train;
                    cfg.seed = seed;
                    let report = train_surrogate(&sub, &params, &r0, &cfg)?;
                    let r_values = predict_all(&report.rejector, dataset, test_idx)?;
                    precision_coverage(&r_values, &annots(dataset, test_idx))?
                }
            };
            cells.push(CellOutcome {
                grid_index: gi,
                fold_index: fi,
                point,
            });
        }
    }
    Ok(cells)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Full sweep: every cell, aggregated per grid entry across folds
/// (population standard deviations, 0 for a single fold). Precision is
/// averaged over the folds where it is defined; if no fold accepted
/// anything, the row carries NaN precision columns.
pub fn sweep(
    dataset: &Dataset,
    method: Method,
    grid: &[f64],
    folds: &Folds,
    settings: &SweepSettings,
) -> Result<Vec<CurveRow>> {
    let cells = sweep_cells(dataset, method, grid, folds, settings)?;
    let mut rows = Vec::with_capacity(grid.len());
    for (gi, &entry) in grid.iter().enumerate() {
        let fold_points: Vec<&PCPoint> = cells
            .iter()
            .filter(|c| c.grid_index == gi)
            .map(|c| &c.point)
            .collect();
        let coverages: Vec<f64> = fold_points.iter().map(|p| p.coverage).collect();
        let precisions: Vec<f64> = fold_points.iter().filter_map(|p| p.precision).collect();
        let (coverage_mean, coverage_std) = mean_std(&coverages);
        let (precision_mean, precision_std) = if precisions.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            mean_std(&precisions)
        };
        rows.push(CurveRow {
            method: method.name().to_string(),
            config: entry,
            precision_mean,
            precision_std,
            coverage_mean,
            coverage_std,
            folds: folds.k(),
        });
    }
    Ok(rows)
}
