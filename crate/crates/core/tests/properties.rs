use bdpp::analysis::verify::{contraction_violations, theta_ordering_violations};
use bdpp::analysis::{lipschitz_measure, theta_closed_form};
use bdpp::diffcore::{logsumexp_slice, softmax_slice, Graph, Tensor};
use bdpp::regularizers::{
    alpha_penalty_step, apply_weight_regularizer, AlphaVariant, LambdaSchedule, ScheduleKind, WeightRegularizer,
};
use bdpp::searchspace::{genotype_to_string, string_to_genotype, ArchParams, Genotype, OpSet, NUM_EDGES};
use proptest::prelude::*;

fn row(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, len)
}

fn cell_alpha() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(row(5..=5), NUM_EDGES)
}

proptest! {
    #[test]
    fn softmax_is_a_distribution(r in row(1..=10)) {
        let p = softmax_slice(&r);
        prop_assert!(p.iter().all(|&v| v > 0.0 && v <= 1.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_ignores_shift(r in row(1..=10), c in -50.0f64..50.0) {
        let shifted: Vec<f64> = r.iter().map(|v| v + c).collect();
        for (a, b) in softmax_slice(&r).iter().zip(softmax_slice(&shifted)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn logsumexp_moves_with_shift(r in row(1..=10), c in -50.0f64..50.0) {
        let shifted: Vec<f64> = r.iter().map(|v| v + c).collect();
        let d = logsumexp_slice(&shifted) - logsumexp_slice(&r) - c;
        prop_assert!(d.abs() < 1e-10);
        let max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(logsumexp_slice(&r) >= max);
        prop_assert!(logsumexp_slice(&r) <= max + (r.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn beta_rows_sum_to_one(a in cell_alpha()) {
        let arch = ArchParams::from_rows(&a).unwrap();
        for b in arch.beta() {
            prop_assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn discretize_survives_monotone_maps(a in cell_alpha(), scale in 0.1f64..10.0, shift in -5.0f64..5.0) {
        let arch = ArchParams::from_rows(&a).unwrap();
        let mapped: Vec<Vec<f64>> = a
            .iter()
            .map(|r| r.iter().map(|v| (scale * v + shift).tanh() + v.exp()).collect())
            .collect();
        let other = ArchParams::from_rows(&mapped).unwrap();
        prop_assert_eq!(arch.discretize().unwrap(), other.discretize().unwrap());
    }

    #[test]
    fn beta_decay_step_contracts(r in row(2..=8), le in 0.0f64..=1.0) {
        prop_assert_eq!(contraction_violations(&r, le), 0);
        let before = ArchParams::from_rows(&[r.clone()]).unwrap();
        let zero = Tensor::zeros(&[1, r.len()]);
        let after = alpha_penalty_step(&before, AlphaVariant::BetaDecay, le, 1.0, &zero).unwrap();
        prop_assert!(lipschitz_measure(&after).total <= lipschitz_measure(&before).total + 1e-12);
    }

    #[test]
    fn theta_orders_by_alpha(r in row(2..=8), g in row(8..=8), le in 0.05f64..2.0) {
        prop_assume!(r.iter().any(|&v| v != r[0]));
        let theta = theta_closed_form(&r, AlphaVariant::BetaDecay, le, 1.0, &g[..r.len()]).unwrap();
        prop_assert_eq!(theta_ordering_violations(&r, &theta), 0);
    }

    #[test]
    fn flooded_loss_never_below_level(l in 0.0f64..5.0, b in 0.0f64..3.0) {
        let mut g = Graph::new();
        let loss = g.constant(Tensor::scalar(l));
        let reg = WeightRegularizer::flooding(b).unwrap();
        let eff = apply_weight_regularizer(&mut g, loss, &reg, &[]).unwrap();
        let v = g.value(eff).item();
        prop_assert!(v >= b - 1e-15);
        if l >= b {
            prop_assert!((v - l).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_increase_is_monotone(max in 0.0f64..10.0, epochs in 1usize..100) {
        let s = LambdaSchedule::new(ScheduleKind::LinearIncrease, 0.0, max, epochs).unwrap();
        prop_assert_eq!(s.value(0), 0.0);
        prop_assert!((s.value(epochs) - max).abs() < 1e-12);
        for e in 0..epochs {
            prop_assert!(s.value(e + 1) >= s.value(e));
        }
    }

    #[test]
    fn genotype_strings_round_trip(idx in 0usize..15625) {
        let ops = OpSet::canonical();
        let g = Genotype::from_index(idx, ops.len());
        let s = genotype_to_string(&g, &ops).unwrap();
        prop_assert_eq!(string_to_genotype(&s, &ops).unwrap(), g);
    }
}

#[test]
fn every_genotype_round_trips() {
    let ops = OpSet::canonical();
    let start = std::time::Instant::now();
    let mut failures = 0;
    for g in Genotype::all(ops.len()) {
        let s = genotype_to_string(&g, &ops).unwrap();
        if string_to_genotype(&s, &ops).as_ref() != Ok(&g) {
            failures += 1;
        }
    }
    assert_eq!(failures, 0);
    assert!(start.elapsed().as_secs_f64() < 1.0, "{:?}", start.elapsed());
}
