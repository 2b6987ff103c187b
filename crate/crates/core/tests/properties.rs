use dirconf::calibration::fit_pwlm_scores;
use dirconf::data::{
    format_examples, parse_examples, sample_span, split, Dataset, DialogueExample, SplitSpec,
};
use dirconf::evidential::{
    predictive_distribution, total_loss_with_grad, DirichletParams, KlVariant, OneHotTarget,
};
use dirconf::methods::{average_probabilities, PredictionRecord};
use dirconf::metrics::{accuracy_f1, auprc, auroc, ece_scores, reject_sweep, EceConfig};
use dirconf::network::{build_specs, Activation, Mlp};
use dirconf::numeric::{digamma, log_gamma, SeededStream, SimplexVector};
use proptest::prelude::*;

fn scored() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..120).prop_flat_map(|n| {
        (
            prop::collection::vec(
                prop_oneof![0.0f64..=1.0, (0u32..=20).prop_map(|k| k as f64 / 20.0)],
                n,
            ),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_filter("both outcomes present", |(_, c)| {
                c.iter().any(|x| *x) && c.iter().any(|x| !*x)
            })
    })
}

fn alpha_target() -> impl Strategy<Value = (Vec<f64>, usize)> {
    (2usize..6).prop_flat_map(|k| (prop::collection::vec(0.1f64..50.0, k), 0..k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ranking_metrics_ignore_monotone_transforms((scores, pos) in scored()) {
        let moved: Vec<f64> = scores.iter().map(|p| p.powi(3) + 2.0 * p - 7.0).collect();
        prop_assert_eq!(auroc(&scores, &pos).unwrap(), auroc(&moved, &pos).unwrap());
        prop_assert_eq!(auprc(&scores, &pos).unwrap(), auprc(&moved, &pos).unwrap());
    }

    #[test]
    fn single_bin_ece_is_global_gap((scores, pos) in scored()) {
        let n = scores.len() as f64;
        let acc = pos.iter().filter(|c| **c).count() as f64 / n;
        let mean = scores.iter().sum::<f64>() / n;
        prop_assert_eq!(ece_scores(&scores, &pos, &EceConfig { num_bins: 1 }).unwrap(), (acc - mean).abs());
    }

    #[test]
    fn pwlm_is_strictly_increasing(
        (scores, pos) in scored(),
        bins in 1usize..20,
        a in 0.0f64..1.0,
        gap in 1e-9f64..1.0,
    ) {
        let conf: Vec<f64> = scores.iter().map(|p| 0.5 + 0.5 * p).collect();
        let map = fit_pwlm_scores(&conf, &pos, 2, bins).unwrap();
        let b = (a + gap).min(1.0);
        prop_assume!(b > a);
        prop_assert!(map.apply(a) < map.apply(b), "{} -> {}, {} -> {}", a, map.apply(a), b, map.apply(b));
        prop_assert!((0.0..=1.0).contains(&map.apply(a)));
    }

    #[test]
    fn pwlm_preserves_ranking_metrics((scores, pos) in scored(), (fit_scores, fit_pos) in scored()) {
        let map = fit_pwlm_scores(&fit_scores, &fit_pos, 2, 10).unwrap();
        let mapped: Vec<f64> = scores.iter().map(|&p| map.apply(p)).collect();
        prop_assert_eq!(auroc(&scores, &pos).unwrap().to_bits(), auroc(&mapped, &pos).unwrap().to_bits());
        prop_assert_eq!(auprc(&scores, &pos).unwrap().to_bits(), auprc(&mapped, &pos).unwrap().to_bits());
    }

    #[test]
    fn spans_stay_in_bounds(t in 1usize..200, frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let min_len = 1 + ((t - 1) as f64 * frac) as usize;
        let (s, e) = sample_span(t, min_len, &mut SeededStream::new(seed, 0)).unwrap();
        prop_assert!(1 <= s && s <= e && e <= t && e - s + 1 >= min_len);
    }

    #[test]
    fn losses_are_permutation_equivariant((alpha, c) in alpha_target(), lambda in 0.0f64..2.0, seed in any::<u64>()) {
        let k = alpha.len();
        let mut perm: Vec<usize> = (0..k).collect();
        SeededStream::new(seed, 0).shuffle(&mut perm);
        let permuted: Vec<f64> = perm.iter().map(|&i| alpha[i]).collect();
        let new_c = perm.iter().position(|&i| i == c).unwrap();
        for variant in [KlVariant::Mean, KlVariant::ExpectedLog] {
            let (l0, g0) = total_loss_with_grad(&DirichletParams::new(alpha.clone()).unwrap(), &OneHotTarget::new(c, k).unwrap(), lambda, variant).unwrap();
            let (l1, g1) = total_loss_with_grad(&DirichletParams::new(permuted.clone()).unwrap(), &OneHotTarget::new(new_c, k).unwrap(), lambda, variant).unwrap();
            prop_assert!((l0.total - l1.total).abs() <= 1e-12 * l0.total.abs().max(1.0));
            for (j, &i) in perm.iter().enumerate() {
                prop_assert!((g1[j] - g0[i]).abs() <= 1e-12 * g0[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn confidence_within_bounds((alpha, _) in alpha_target()) {
        let k = alpha.len() as f64;
        let pi = predictive_distribution(&DirichletParams::new(alpha).unwrap());
        let (_, p) = pi.argmax();
        prop_assert!(p >= 1.0 / k - 1e-15 && p <= 1.0);
    }

    #[test]
    fn reject_at_zero_threshold_keeps_everything(weights in prop::collection::vec((0.01f64..1.0, 0.01f64..1.0, any::<bool>()), 1..80)) {
        let records: Vec<PredictionRecord> = weights
            .iter()
            .enumerate()
            .map(|(i, &(a, b, y))| PredictionRecord::new(format!("r{i}"), "l2", 0, SimplexVector::normalize(&[a, b]).unwrap(), usize::from(y)))
            .collect();
        let point = &reject_sweep(&records, &[0.0])[0];
        let (acc, f1) = accuracy_f1(&records).unwrap();
        prop_assert_eq!(point.coverage, 1.0);
        prop_assert_eq!(point.accuracy, Some(acc));
        prop_assert_eq!(point.f1, Some(f1));
    }

    #[test]
    fn ensemble_average_ignores_member_order(members in prop::collection::vec(prop::collection::vec(0.001f64..1.0, 3), 1..8), seed in any::<u64>()) {
        let probs: Vec<Vec<f64>> = members.iter().map(|w| SimplexVector::normalize(w).unwrap().into_vec()).collect();
        let mut shuffled = probs.clone();
        SeededStream::new(seed, 1).shuffle(&mut shuffled);
        prop_assert_eq!(average_probabilities(&probs).unwrap(), average_probabilities(&shuffled).unwrap());
    }

    #[test]
    fn log_gamma_recurrence(x in 0.1f64..100.0) {
        let r = log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap() - x.ln();
        prop_assert!(r.abs() < 1e-10, "{}", r);
    }

    #[test]
    fn digamma_is_log_gamma_slope(x in 0.1f64..100.0) {
        let h = 1e-5 * x.max(1.0);
        let fd = (log_gamma(x + h).unwrap() - log_gamma(x - h).unwrap()) / (2.0 * h);
        let d = digamma(x).unwrap();
        prop_assert!((fd - d).abs() <= 1e-6 * d.abs().max(1e-3), "{} vs {}", fd, d);
    }

    #[test]
    fn exponential_head_is_positive(seed in any::<u64>(), scale in 0.1f64..3.0, x in prop::collection::vec(-3.0f64..3.0, 4)) {
        let mut net = Mlp::new(build_specs(4, &[8], 3, Activation::Exponential, 0.0)).unwrap();
        net.init(&mut SeededStream::new(seed, 0));
        net.params_mut().iter_mut().for_each(|p| *p *= scale);
        prop_assert!(net.predict(&x).unwrap().iter().all(|a| *a > 0.0));
    }

    #[test]
    fn dataset_text_round_trips(rows in prop::collection::vec((1usize..5, 0usize..3, any::<u64>()), 1..10)) {
        let examples: Vec<DialogueExample> = rows
            .iter()
            .enumerate()
            .map(|(i, &(t, label, seed))| {
                let mut rng = SeededStream::new(seed, 0);
                let features = (0..t).map(|_| (0..3).map(|_| rng.standard_normal() * 1e3).collect()).collect();
                DialogueExample::new(format!("ex{i}"), features, label).unwrap()
            })
            .collect();
        let ds = Dataset::new(3, 3, examples).unwrap();
        prop_assert_eq!(parse_examples(&format_examples(&ds, &[]), "mem").unwrap(), ds);
    }

    #[test]
    fn stratified_split_within_one(sizes in prop::collection::vec(5usize..60, 2..4), seed in any::<u64>()) {
        let mut examples = Vec::new();
        for (label, &n) in sizes.iter().enumerate() {
            for i in 0..n {
                examples.push(DialogueExample::new(format!("c{label}_{i}"), vec![vec![i as f64]], label).unwrap());
            }
        }
        let spec = SplitSpec { seed, ..SplitSpec::default() };
        let (tr, va, te) = split(&examples, &spec).unwrap();
        prop_assert_eq!(tr.len() + va.len() + te.len(), examples.len());
        for (part, f) in [(&tr, 0.6), (&va, 0.2), (&te, 0.2)] {
            for (label, &n) in sizes.iter().enumerate() {
                let got = part.iter().filter(|e| e.label == label).count() as f64;
                prop_assert!((got - n as f64 * f).abs() <= 1.0 + 1e-9);
            }
        }
    }
}
