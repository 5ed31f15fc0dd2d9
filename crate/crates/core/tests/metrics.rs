mod common;

use bayes_multirate::metrics::{bd_rate, frame_psnr, posterior_histogram, RdPoint};
use bayes_multirate::frame_io::FramePlane;
use bayes_multirate::rng::CounterStream;
use common::bd::{bd_rate_oracle, fixture};
use proptest::prelude::*;

#[test]
fn fixture_matches_numerical_integration() {
    let (a, t) = fixture();
    let got = bd_rate(&a, &t).unwrap();
    let want = bd_rate_oracle(&a, &t);
    assert!((got - want).abs() < 1e-6, "{got} vs {want}");
}

#[test]
fn scaling_gives_exact_percentages() {
    let (a, _) = fixture();
    assert_eq!(bd_rate(&a, &a).unwrap(), 0.0);
    for s in [0.9, 1.05, 1.3] {
        let t: Vec<RdPoint> = a.iter().map(|p| RdPoint { rate: p.rate * s, ..*p }).collect();
        assert!((bd_rate(&a, &t).unwrap() - 100.0 * (s - 1.0)).abs() < 1e-6);
    }
}

#[test]
fn psnr_of_known_error() {
    let a = FramePlane::filled(64, 64, 0, 10).unwrap();
    let b = FramePlane::filled(64, 64, 0, 13).unwrap();
    let want = 10.0 * (255.0f64 * 255.0 / 9.0).log10();
    assert!((frame_psnr(&a, &b).unwrap() - want).abs() < 1e-12);
}

#[test]
fn histogram_of_uniform_samples() {
    let mut s = CounterStream::new(3, 0);
    let samples: Vec<f64> = (0..100_000).map(|_| s.next_f64()).collect();
    let h = posterior_histogram(&samples, 50).unwrap();
    assert!((h.integral() - 1.0).abs() < 1e-12);
    assert_eq!(h.counts.iter().sum::<u64>() as usize, samples.len());
    for d in &h.density {
        assert!((d - 1.0).abs() < 0.1, "density {d}");
    }
}

proptest! {
    #[test]
    fn bd_rate_is_antisymmetric(r0 in 100.0f64..1000.0, g in prop::array::uniform3(1.2f64..2.0),
                                s in prop::array::uniform4(0.8f64..1.25), shift in -0.5f64..0.5) {
        let mut rates = [r0; 4];
        for i in 0..3 {
            rates[i + 1] = rates[i] * g[i];
        }
        let qs = [30.0, 33.0, 36.0, 39.0];
        let a: Vec<RdPoint> = (0..4).map(|i| RdPoint { rate: rates[i], quality: qs[i] }).collect();
        let t: Vec<RdPoint> = (0..4).map(|i| RdPoint { rate: rates[i] * s[i], quality: qs[i] + shift }).collect();
        let x = bd_rate(&a, &t).unwrap() / 100.0;
        let y = bd_rate(&t, &a).unwrap() / 100.0;
        prop_assert!(((1.0 + x) * (1.0 + y) - 1.0).abs() < 1e-9);
    }
}
