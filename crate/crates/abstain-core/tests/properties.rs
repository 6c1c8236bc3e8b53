//! Cross-module invariants under randomized inputs.

use proptest::prelude::*;

use abstain_core::dataset::{read_jsonl_str, write_jsonl, Annotation, Dataset, Example, TitlePolicy};
use abstain_core::eval::{fit_threshold, precision_coverage, theoretical_limit};
use abstain_core::folds::Folds;
use abstain_core::losses::{rejection_loss, surrogate_loss};
use abstain_core::models::{from_json, init_rejector, to_json, RejectorSpec};
use abstain_core::params::RejectionParams;
use abstain_core::theory::conditional_risk_surrogate;
use abstain_core::train::{grad_check, train_surrogate, TrainConfig};

fn annotation(correct: bool) -> Annotation {
    if correct {
        Annotation::Correct
    } else {
        Annotation::Incorrect
    }
}

fn small_dataset(features: Vec<Vec<f64>>, correct: Vec<bool>) -> Dataset {
    let examples: Vec<Example> = features
        .into_iter()
        .zip(correct)
        .map(|(f, a)| Example::new(f, annotation(a)))
        .collect();
    Dataset::from_examples(examples).expect("generator keeps dimensions consistent")
}

proptest! {
    #[test]
    fn surrogate_dominates_target_loss(
        r in -10.0..10.0f64,
        correct in any::<bool>(),
        c in 0.01..0.99f64,
        alpha in 0.5..8.0f64,
    ) {
        let params = RejectionParams::constrained(c, alpha).unwrap();
        let a = annotation(correct);
        prop_assert!(surrogate_loss(r, a, &params) >= rejection_loss(r, a, c) - 1e-12);
    }

    // Restricted to r where no exponent clamps; the clamp flattens the far
    // tails by design.
    #[test]
    fn conditional_surrogate_risk_is_strictly_convex(
        r1 in -2.0..2.0f64,
        gap in 0.1..2.0f64,
        eta in 0.0..1.0f64,
        c in 0.05..0.4f64,
        alpha in 0.5..8.0f64,
    ) {
        let params = RejectionParams::constrained(c, alpha).unwrap();
        let r2 = (r1 + gap).min(2.0);
        prop_assume!(r2 - r1 >= 0.1);
        let mid = conditional_risk_surrogate((r1 + r2) / 2.0, eta, &params);
        let avg = (conditional_risk_surrogate(r1, eta, &params)
            + conditional_risk_surrogate(r2, eta, &params)) / 2.0;
        prop_assert!(mid < avg, "midpoint {mid} not below chord {avg}");
    }

    #[test]
    fn kfold_is_a_balanced_partition(
        n in 2..200usize,
        k_raw in 2..12usize,
        seed in any::<u64>(),
    ) {
        let k = k_raw.min(n);
        let folds = Folds::kfold(n, k, seed).unwrap();
        let mut seen = vec![0usize; n];
        let mut sizes = Vec::new();
        for f in 0..k {
            let test = folds.test_indices(f);
            sizes.push(test.len());
            for &i in test {
                seen[i] += 1;
            }
            let train = folds.train_indices(f);
            prop_assert_eq!(train.len() + test.len(), n);
            for i in &train {
                prop_assert!(!test.contains(i));
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1), "not a partition");
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1, "unbalanced: {:?}", sizes);
    }

    #[test]
    fn precision_coverage_is_permutation_invariant(
        pairs in proptest::collection::vec((-5.0..5.0f64, any::<bool>()), 1..80),
        seed in any::<u64>(),
    ) {
        let r: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let a: Vec<Annotation> = pairs.iter().map(|p| annotation(p.1)).collect();
        let before = precision_coverage(&r, &a).unwrap();

        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let rp: Vec<f64> = order.iter().map(|&i| r[i]).collect();
        let ap: Vec<Annotation> = order.iter().map(|&i| a[i]).collect();
        let after = precision_coverage(&rp, &ap).unwrap();
        prop_assert_eq!(before, after);
    }

    // Any threshold the fitter returns respects the counting bound: with
    // precision at least p, the accepted-correct mass is capped by the
    // positive rate, so coverage cannot exceed b/p.
    #[test]
    fn fitted_threshold_respects_target_and_counting_bound(
        pairs in proptest::collection::vec((-5.0..5.0f64, any::<bool>()), 2..120),
        p in 0.05..1.0f64,
    ) {
        let scores: Vec<f64> = pairs.iter().map(|q| q.0).collect();
        let a: Vec<Annotation> = pairs.iter().map(|q| annotation(q.1)).collect();
        if let Some(theta) = fit_threshold(&scores, &a, p).unwrap() {
            let r: Vec<f64> = scores.iter().map(|s| s - theta).collect();
            let point = precision_coverage(&r, &a).unwrap();
            prop_assert!(point.n_accepted > 0);
            prop_assert!(point.precision.unwrap() >= p);
            let b = a.iter().filter(|x| x.is_correct()).count() as f64 / a.len() as f64;
            prop_assert!(point.coverage <= theoretical_limit(b, p) + 1e-12);
        }
    }

    // When scores rank every correct example above every incorrect one,
    // the fitter gets within one example of the coverage ceiling.
    #[test]
    fn separable_scores_reach_the_limit(
        n_pos in 1..60usize,
        n_neg in 1..60usize,
        p in 0.05..1.0f64,
    ) {
        let n = n_pos + n_neg;
        let mut scores = Vec::with_capacity(n);
        let mut a = Vec::with_capacity(n);
        for i in 0..n_pos {
            scores.push(1000.0 - i as f64);
            a.push(Annotation::Correct);
        }
        for i in 0..n_neg {
            scores.push(-1.0 - i as f64);
            a.push(Annotation::Incorrect);
        }
        let theta = fit_threshold(&scores, &a, p).unwrap()
            .expect("accepting the positive block alone already reaches any target");
        let r: Vec<f64> = scores.iter().map(|s| s - theta).collect();
        let point = precision_coverage(&r, &a).unwrap();
        prop_assert!(point.precision.unwrap() >= p);
        let b = n_pos as f64 / n as f64;
        let limit = theoretical_limit(b, p);
        prop_assert!(
            point.coverage >= limit - 1.0 / n as f64 - 1e-12,
            "coverage {} vs limit {} with n {}", point.coverage, limit, n
        );
    }

    #[test]
    fn rejector_json_round_trip_is_bit_faithful(
        family in 0..4usize,
        dim in 1..4usize,
        seed in any::<u64>(),
        offset in -2.0..2.0f64,
    ) {
        let spec = match family {
            0 => RejectorSpec::Constant,
            1 => RejectorSpec::Linear,
            2 => RejectorSpec::Mlp1 { width: 5 },
            _ => RejectorSpec::ScoreOffset { offset },
        };
        let rejector = init_rejector(spec, dim, seed).unwrap();
        let restored = from_json(&to_json(&rejector)).unwrap();
        let a: Vec<u64> = rejector.params_flat().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = restored.params_flat().iter().map(|v| v.to_bits()).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn dataset_jsonl_round_trips(
        rows in proptest::collection::vec(
            (proptest::collection::vec(-5.0..5.0f64, 2), any::<bool>(), proptest::option::of(0.0..1.0f64)),
            1..40,
        ),
    ) {
        let examples: Vec<Example> = rows
            .iter()
            .map(|(f, correct, score)| {
                let e = Example::new(f.clone(), annotation(*correct));
                match score {
                    Some(s) => e.with_score(*s),
                    None => e,
                }
            })
            .collect();
        let data = Dataset::from_examples(examples).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&data, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = read_jsonl_str(&text, TitlePolicy::Correct).unwrap();
        prop_assert_eq!(back.len(), data.len());
        for (x, y) in data.examples().iter().zip(back.examples()) {
            prop_assert_eq!(x.annotation, y.annotation);
            let fx: Vec<u64> = x.features.iter().map(|v| v.to_bits()).collect();
            let fy: Vec<u64> = y.features.iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(fx, fy);
            prop_assert_eq!(x.score.map(f64::to_bits), y.score.map(f64::to_bits));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn analytic_gradient_matches_finite_differences(
        seed in any::<u64>(),
        linear in any::<bool>(),
        features in proptest::collection::vec(
            (-1.0..1.0f64, -1.0..1.0f64, any::<bool>()), 5..40),
        c in 0.05..0.3f64,
        alpha in 0.5..4.0f64,
    ) {
        let feats: Vec<Vec<f64>> = features.iter().map(|t| vec![t.0, t.1]).collect();
        let correct: Vec<bool> = features.iter().map(|t| t.2).collect();
        let data = small_dataset(feats, correct);
        let params = RejectionParams::constrained(c, alpha).unwrap();
        let spec = if linear {
            RejectorSpec::Linear
        } else {
            RejectorSpec::Mlp1 { width: 4 }
        };
        let rejector = init_rejector(spec, 2, seed).unwrap();
        let err = grad_check(&rejector, &data, &params, 1e-6).unwrap();
        prop_assert!(err < 1e-3, "relative error {err}");
    }

    // Identical inputs produce bit-identical trained parameters; the batch
    // order comes from the seed, never from external state.
    #[test]
    fn training_is_deterministic(
        seed in any::<u64>(),
        features in proptest::collection::vec((-1.0..1.0f64, any::<bool>()), 8..40),
    ) {
        let feats: Vec<Vec<f64>> = features.iter().map(|t| vec![t.0]).collect();
        let correct: Vec<bool> = features.iter().map(|t| t.1).collect();
        let data = small_dataset(feats, correct);
        let params = RejectionParams::constrained(0.2, 2.0).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.005,
            epochs: 30,
            batch_size: 8,
            l2_penalty: 0.0,
            seed,
        };
        let init = init_rejector(RejectorSpec::Linear, 1, seed).unwrap();
        let a = train_surrogate(&data, &params, &init, &cfg).unwrap();
        let b = train_surrogate(&data, &params, &init, &cfg).unwrap();
        let pa: Vec<u64> = a.rejector.params_flat().iter().map(|v| v.to_bits()).collect();
        let pb: Vec<u64> = b.rejector.params_flat().iter().map(|v| v.to_bits()).collect();
        prop_assert_eq!(pa, pb);
        prop_assert_eq!(a.loss_trace.len(), b.loss_trace.len());
    }

    // With a single full batch the update is a mean over examples, so
    // reordering the dataset only perturbs floating-point summation order.
    #[test]
    fn full_batch_training_ignores_example_order(
        seed in any::<u64>(),
        features in proptest::collection::vec((-1.0..1.0f64, any::<bool>()), 8..40),
    ) {
        let feats: Vec<Vec<f64>> = features.iter().map(|t| vec![t.0]).collect();
        let correct: Vec<bool> = features.iter().map(|t| t.1).collect();
        let n = feats.len();
        let data = small_dataset(feats.clone(), correct.clone());
        let reversed = small_dataset(
            feats.into_iter().rev().collect(),
            correct.into_iter().rev().collect(),
        );
        let params = RejectionParams::constrained(0.2, 2.0).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.005,
            epochs: 40,
            batch_size: n,
            l2_penalty: 0.0,
            seed,
        };
        let init = init_rejector(RejectorSpec::Linear, 1, seed).unwrap();
        let a = train_surrogate(&data, &params, &init, &cfg).unwrap();
        let b = train_surrogate(&reversed, &params, &init, &cfg).unwrap();
        for (x, y) in a
            .rejector
            .params_flat()
            .iter()
            .zip(b.rejector.params_flat())
        {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{x} vs {y}");
        }
    }
}

#[test]
fn curve_csv_round_trip_is_stable() {
    use abstain_core::curve::{export_curve, parse_curve_str, CurveRow};
    let rows = vec![
        CurveRow {
            method: "maxprob".to_string(),
            config: 0.95,
            precision_mean: 0.9368421052631579,
            precision_std: 0.0123456789,
            coverage_mean: 2.0f64 / 3.0,
            coverage_std: 0.0,
            folds: 4,
        },
        CurveRow {
            method: "surrogate".to_string(),
            config: 0.05,
            precision_mean: f64::NAN,
            precision_std: 1e-18,
            coverage_mean: 1.0,
            coverage_std: 123456.789,
            folds: 1,
        },
    ];
    let mut first = Vec::new();
    export_curve(&rows, &mut first).unwrap();
    let text = String::from_utf8(first).unwrap();
    let parsed = parse_curve_str(&text).unwrap();
    let mut second = Vec::new();
    export_curve(&parsed, &mut second).unwrap();
    // Six significant digits survive one decimal round trip, so a second
    // export reproduces the first byte for byte.
    assert_eq!(text, String::from_utf8(second).unwrap());
}
