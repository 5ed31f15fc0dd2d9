mod common;

use bayes_multirate::inference::{
    fit_prior, gate_decision, posterior, BayesParams, GateDecision, PriorSample,
};
use bayes_multirate::rng::CounterStream;
use common::priors::{random_valid_prior, Q_HI, Q_LO};
use common::mc::{max_cell_error, Stream};
use common::rng;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn telescoping_product() {
    let mut r = rng(2024);
    for _ in 0..1000 {
        let prior = random_valid_prior(&mut r);
        let qi: f64 = r.random_range(Q_LO..=Q_HI);
        for k in 1..=4usize {
            let mut prod = 1.0;
            for d in 0..k {
                prod *= prior.prior_split_prob(d as u8, qi);
            }
            let expect = 1.0 - prior.area_below(k, qi);
            assert!((prod - expect).abs() < 1e-12, "k={k} {prod} vs {expect}");
        }
    }
}

#[test]
fn fitted_prior_reproduces_exact_lines() {
    let samples: Vec<PriorSample> = [40u32, 80, 120, 160]
        .iter()
        .map(|&qi| {
            let x = qi as f64;
            PriorSample {
                q_index: qi,
                below: [0.1 + 0.002 * x, 0.3 + 0.0015 * x, 0.5 + 0.001 * x, 0.8 + 0.0005 * x],
            }
        })
        .collect();
    let p = fit_prior(&samples).unwrap();
    let want = [(0.002, 0.1), (0.0015, 0.3), (0.001, 0.5), (0.0005, 0.8)];
    for (l, (s, i)) in p.lines().iter().zip(want) {
        assert!((l.slope - s).abs() < 1e-12 && (l.intercept - i).abs() < 1e-10);
    }
}

proptest! {
    #[test]
    fn posterior_monotone(p0 in 0.001f64..0.999, lp in 0.001f64..1.0, lm in 0.001f64..1.0, dp in 0.0001f64..0.5, dl in 0.0001f64..0.5) {
        let base = posterior(p0, lp, lm);
        prop_assert!((0.0..=1.0).contains(&base));
        prop_assert!(posterior(p0, lp + dl, lm) >= base);
        prop_assert!(posterior((p0 + dp).min(0.999), lp, lm) >= base);
        prop_assert!(posterior(p0, lp, lm + dl) <= base);
    }

    #[test]
    fn prior_bounds_and_cdf(seed in any::<u64>(), qi in 0.0f64..260.0) {
        let mut r = rng(seed);
        let prior = random_valid_prior(&mut r);
        let eps = prior.epsilon();
        let mut last = 0.0;
        for d in 1..=4 {
            let a = prior.area_below(d, qi);
            prop_assert!(a >= eps && a <= 1.0 - eps);
            prop_assert!(a >= last);
            last = a;
        }
        for d in 0..4u8 {
            let p = prior.prior_split_prob(d, qi);
            prop_assert!(p >= eps && p <= 1.0 - eps);
        }
    }
}

#[test]
fn weighted_updates_are_unbiased() {
    let s = Stream::new();
    let truth = s.true_conditional();
    let weighted = max_cell_error(&s.run(100_000, false).normalized_plus(0), &truth);
    let unit = max_cell_error(&s.run(100_000, true).normalized_plus(0), &truth);
    assert!(weighted < 0.02, "weighted error {weighted}");
    assert!(unit > 0.02, "unit-weight bias {unit}");
}

#[test]
fn exploration_weight_variance() {
    let params = BayesParams::new(0.2, 0.05, 0).unwrap();
    let mut rs = CounterStream::new(5, 2);
    let n = 200_000;
    let draws: Vec<f64> = (0..n)
        .map(|_| match gate_decision(0.1, &params, rs.next_f64()) {
            GateDecision::FullSearch { weight } => weight,
            GateDecision::EarlyTerminate => 0.0,
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((mean - 1.0).abs() < 0.05, "mean {mean}");
    let expect = 1.0 / params.tau2 - 1.0;
    assert!((var - expect).abs() < 0.1 * expect, "variance {var} vs {expect}");
}
