//! One line per acceptance criterion; non-zero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use bayes_multirate::clips;
use bayes_multirate::experiment::{
    calibration_samples, cmd_run, execute_run, fit_from_stats, run_calibration_grid, RunConfig,
};
use bayes_multirate::frame_io::{generate_synthetic, FramePlane, SynthSpec};
use bayes_multirate::inference::{gate_decision, posterior, BayesParams, GateDecision, PriorModel};
use bayes_multirate::metrics::{bd_rate, depth_area_stats, depth_compare_stats, time_saving, RdPoint};
use bayes_multirate::multirate::{encode_instance, EncodeMode, InstanceResult, Schedule};
use bayes_multirate::rdo::{brute_force_rdo, rdo_search, AllowAll, CostModelParams};
use common::bd::{bd_rate_oracle, fixture};
use common::mc::{max_cell_error, Stream};
use common::priors::{random_valid_prior, Q_HI, Q_LO};
use common::{q, random_block16, random_frame, rng};
use proptest::strategy::Strategy;
use proptest::test_runner::{Config, TestRunner};
use rand::Rng;

const LOCAL_QS: [u8; 4] = [27, 32, 37, 42];
const REFERENCE_Q: u8 = 22;
const TREND_QS: [u8; 5] = [12, 22, 32, 42, 52];
const TAUS: [f64; 3] = [0.1, 0.2, 0.4];
const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let p = CostModelParams::default();
    let mut r = rng(11);
    let (mut blocks, mut mismatches) = (0, 0);
    for i in 0..170 {
        let f = random_frame(&mut r, 1);
        let prev = (i % 2 == 1).then(|| random_frame(&mut r, 0));
        for qv in [10, 30, 50] {
            let g = random_block16(&mut r);
            let s = rdo_search(&g, &f, prev.as_ref(), q(qv), &p, &mut AllowAll).unwrap();
            let b = brute_force_rdo(&g, &f, prev.as_ref(), q(qv), &p).unwrap();
            blocks += 1;
            if s.tree.cost != b.cost {
                mismatches += 1;
            }
        }
    }
    let t = start.elapsed();
    outcome(
        blocks >= 500 && mismatches == 0 && t < Duration::from_secs(60),
        format!("{blocks} blocks, {mismatches} cost mismatches, {}", secs(t)),
    )
}

fn ac2() -> Outcome {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let prior = random_valid_prior(&mut r);
        let qi: f64 = r.random_range(Q_LO..=Q_HI);
        for k in 1..=4usize {
            let prod: f64 = (0..k).map(|d| prior.prior_split_prob(d as u8, qi)).product();
            worst = worst.max((prod - (1.0 - prior.area_below(k, qi))).abs());
        }
    }
    outcome(worst < 1e-12, format!("1000 priors, max telescoping error {worst:.2e}"))
}

fn ac3() -> Outcome {
    let spot = (posterior(0.3, 0.2, 0.1) - 6.0 / 13.0).abs();
    let mut runner = TestRunner::new(Config {
        cases: 2000,
        failure_persistence: None,
        ..Config::default()
    });
    let strat = (0.001f64..0.999, 0.001f64..1.0, 0.001f64..1.0, 0.0001f64..0.5)
        .prop_map(|(p0, lp, lm, d)| (p0, lp, lm, d));
    let mono = runner
        .run(&strat, |(p0, lp, lm, d)| {
            let base = posterior(p0, lp, lm);
            let ok = (0.0..=1.0).contains(&base)
                && posterior(p0, lp + d, lm) >= base
                && posterior((p0 + d).min(0.999), lp, lm) >= base;
            proptest::prop_assert!(ok);
            Ok(())
        })
        .is_ok();
    outcome(
        spot < 1e-12 && mono,
        format!("6/13 spot error {spot:.1e}, monotonicity property {}", if mono { "held" } else { "violated" }),
    )
}

fn ac4() -> Outcome {
    let start = Instant::now();
    let s = Stream::new();
    let truth = s.true_conditional();
    let weighted = max_cell_error(&s.run(100_000, false).normalized_plus(0), &truth);
    let unit = max_cell_error(&s.run(100_000, true).normalized_plus(0), &truth);
    let t = start.elapsed();
    outcome(
        weighted < 0.02 && unit > 0.02 && t < Duration::from_secs(30),
        format!("max cell error {weighted:.4} with k=1/tau2, {unit:.4} with k=1, {}", secs(t)),
    )
}

fn ac5() -> Outcome {
    let (t1, t2) = (0.2, 0.05);
    let params = BayesParams::new(t1, t2, 0).unwrap();
    let below = |v: f64| v - 1e-12;
    let above = |v: f64| v + 1e-12;
    let ps = [0.0, below(t1), t1, above(t1), 0.5, 1.0];
    let xs = [0.0, below(t2), t2, above(t2), 0.5, below(1.0)];
    let mut bad = Vec::new();
    for &p in &ps {
        for &x in &xs {
            let want = if p <= t1 && x >= t2 {
                GateDecision::EarlyTerminate
            } else if p > t1 {
                GateDecision::FullSearch { weight: 1.0 }
            } else {
                GateDecision::FullSearch { weight: 1.0 / t2 }
            };
            if gate_decision(p, &params, x) != want {
                bad.push((p, x));
            }
        }
    }
    let boundary = gate_decision(t1, &params, t2) == GateDecision::EarlyTerminate
        && gate_decision(t1, &params, below(t2)) == GateDecision::FullSearch { weight: 20.0 }
        && gate_decision(above(t1), &params, t2) == GateDecision::FullSearch { weight: 1.0 };
    outcome(
        bad.is_empty() && boundary,
        format!("{} cases, {} mismatches, boundary p=tau1/X=tau2 terminates: {boundary}", ps.len() * xs.len(), bad.len()),
    )
}

fn clip_config(spec: SynthSpec) -> RunConfig {
    RunConfig {
        q_reference: REFERENCE_Q,
        q_locals: LOCAL_QS.to_vec(),
        tau1: 0.2,
        tau2: 0.05,
        seed: SEED,
        ..RunConfig::with_synth(spec)
    }
}

fn ac6() -> Outcome {
    let start = Instant::now();
    let run = execute_run(&clip_config(clips::drift())).unwrap();
    let t = start.elapsed();
    let mut pass = t < Duration::from_secs(300);
    let mut parts = Vec::new();
    for (qv, b) in &run.bounds {
        let ok = b.all_terminated_below_tau1 && b.n_b <= b.n_t && b.n_t <= b.n && b.bound_holds;
        pass &= ok;
        parts.push(format!(
            "q{qv}: Nb/Nt={:.3} lhs={:.4} rhs={:.4} max_p={:.3}",
            b.nb_over_nt, b.bound_lhs, b.bound_rhs, b.max_terminated_posterior
        ));
    }
    pass &= run.bounds.len() == LOCAL_QS.len();
    outcome(pass, format!("drift, {}; {}", parts.join("; "), secs(t)))
}

/// Full encodes of one clip, computed once and shared by several criteria.
struct ClipRuns {
    name: &'static str,
    sequence: Vec<FramePlane>,
    full: Vec<(u8, InstanceResult)>,
}

impl ClipRuns {
    fn new(name: &'static str, spec: &SynthSpec) -> Self {
        let sequence = generate_synthetic(spec).unwrap();
        let mut qs: Vec<u8> = TREND_QS.iter().chain(LOCAL_QS.iter()).copied().collect();
        qs.sort_unstable();
        qs.dedup();
        let full = qs.into_iter().map(|qv| (qv, full_instance(&sequence, qv))).collect();
        Self { name, sequence, full }
    }

    fn full(&self, qv: u8) -> &InstanceResult {
        &self.full.iter().find(|(x, _)| *x == qv).unwrap().1
    }
}

fn full_instance(seq: &[FramePlane], qv: u8) -> InstanceResult {
    encode_instance(seq, q(qv), &EncodeMode::Full, None, None, &Schedule::default(), &CostModelParams::default())
        .unwrap()
}

fn local_instance(seq: &[FramePlane], qv: u8, mode: &EncodeMode, reference: &InstanceResult, prior: Option<&PriorModel>) -> InstanceResult {
    encode_instance(
        seq,
        q(qv),
        mode,
        Some(&reference.frames),
        prior,
        &Schedule::default(),
        &CostModelParams::default(),
    )
    .unwrap()
}

fn ac7(runs: &[ClipRuns]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for c in runs {
        let stats: Vec<_> = TREND_QS.iter().map(|&qv| depth_area_stats(c.full(qv))).collect();
        let cdf = stats.iter().all(|s| s.below.windows(2).all(|w| w[1] >= w[0]));
        let split: Vec<f64> = stats.iter().map(|s| s.split_area_fraction()).collect();
        let trend = split.windows(2).all(|w| w[1] <= w[0]);
        pass &= cdf && trend;
        let shown: Vec<String> = split.iter().map(|v| format!("{v:.3}")).collect();
        parts.push(format!("{} split area [{}] cdf={cdf}", c.name, shown.join(" ")));
    }
    outcome(pass, parts.join("; "))
}

fn ac8(runs: &[ClipRuns]) -> Outcome {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut identity = true;
    for c in runs {
        let reference = c.full(REFERENCE_Q);
        for qv in LOCAL_QS {
            let s = depth_compare_stats(c.full(qv), reference).unwrap();
            worst = worst.max(s.remote_shallower);
        }
        let same = local_instance(&c.sequence, REFERENCE_Q, &EncodeMode::PruneAll, reference, None);
        identity &= depth_compare_stats(&same, reference).unwrap().equal == 1.0;
    }
    pass &= worst < 0.25 && identity;
    outcome(
        pass,
        format!("max d_R<d_L area fraction {worst:.3}; PruneAll at reference Q equal fraction 1.0: {identity}"),
    )
}

fn calibrated_prior(seq: &[FramePlane], spec: &SynthSpec) -> PriorModel {
    let cfg = clip_config(spec.clone());
    let qs: Vec<_> = run_calibration_grid(&cfg).into_iter().map(q).collect();
    let stats = calibration_samples(seq, &qs, cfg.schedule.special_period, &cfg.schedule, &cfg.cost_model).unwrap();
    fit_from_stats(&stats).unwrap()
}

fn ac9(runs: &[ClipRuns]) -> Outcome {
    let mut pass = true;
    let mut ordering_cases = 0;
    let mut parts = Vec::new();
    for (c, (_, spec)) in runs.iter().zip(clips::bundled()) {
        let reseeded = SynthSpec {
            seed: spec.seed + 1000,
            ..spec.clone()
        };
        let alt = generate_synthetic(&reseeded).unwrap();
        let alt_ref = full_instance(&alt, REFERENCE_Q);
        for qv in LOCAL_QS {
            let cases = [
                (c.full(qv).leaf_evaluations_total, &c.sequence, c.full(REFERENCE_Q)),
                (full_instance(&alt, qv).leaf_evaluations_total, &alt, &alt_ref),
            ];
            for (full, seq, reference) in cases {
                let improved = local_instance(seq, qv, &EncodeMode::PruneNonSpecial, reference, None).leaf_evaluations_total;
                let all = local_instance(seq, qv, &EncodeMode::PruneAll, reference, None).leaf_evaluations_total;
                ordering_cases += 1;
                if !(full >= improved && improved >= all) {
                    pass = false;
                    parts.push(format!("{} q{qv}: {full} {improved} {all}", c.name));
                }
            }
        }

        let prior = calibrated_prior(&c.sequence, &spec);
        let mut monotone = true;
        let mut means = Vec::new();
        for qv in LOCAL_QS {
            let dts: Vec<f64> = TAUS
                .iter()
                .map(|&t| {
                    let mode = EncodeMode::Bayes(BayesParams::new(t, 0.05, SEED).unwrap());
                    let b = local_instance(&c.sequence, qv, &mode, c.full(REFERENCE_Q), Some(&prior));
                    time_saving(&b, c.full(qv)).unwrap()
                })
                .collect();
            monotone &= dts.windows(2).all(|w| w[1] <= w[0]);
            means.push(dts);
        }
        pass &= monotone;
        let avg: Vec<String> = (0..TAUS.len())
            .map(|i| format!("{:+.3}", means.iter().map(|d| d[i]).sum::<f64>() / means.len() as f64))
            .collect();
        parts.push(format!("{} mean dT over tau1 {{0.1,0.2,0.4}} = [{}] monotone={monotone}", c.name, avg.join(" ")));
    }
    outcome(pass, format!("{ordering_cases} ordering cases; {}", parts.join("; ")))
}

fn ac10() -> Outcome {
    let (a, t) = fixture();
    let identity = bd_rate(&a, &a).unwrap();
    let scaled: Vec<RdPoint> = a.iter().map(|p| RdPoint { rate: p.rate * 1.05, ..*p }).collect();
    let five = bd_rate(&a, &scaled).unwrap();
    let got = bd_rate(&a, &t).unwrap();
    let want = bd_rate_oracle(&a, &t);
    outcome(
        identity.abs() < 5e-5 && (five - 5.0).abs() < 1e-6 && (got - want).abs() < 1e-6,
        format!("identity {identity:.4}%, x1.05 {five:.4}%, fixture {got:.6}% vs oracle {want:.6}%"),
    )
}

fn ac11() -> Outcome {
    let mut spec = clips::pan();
    spec.frame_count = 16;
    let cfg = clip_config(spec);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_run(&cfg, a.path()).unwrap();
    cmd_run(&RunConfig { jobs: 2, ..cfg }, b.path()).unwrap();
    let files = [
        "report.json",
        "rd_points.csv",
        "frames.csv",
        "depth_stats.csv",
        "compare_stats.csv",
        "posterior_hist.csv",
        "bound_report.json",
        "tables.csv",
    ];
    let differing: Vec<&str> = files
        .iter()
        .copied()
        .filter(|f| std::fs::read(a.path().join(f)).unwrap() != std::fs::read(b.path().join(f)).unwrap())
        .collect();
    outcome(differing.is_empty(), format!("{} report files compared, differing: {differing:?}", files.len()))
}

fn main() {
    let mut failed = 0;
    let mut report = |id: &str, name: &str, o: Outcome| {
        println!("{id} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    };
    report("AC1", "oracle equivalence", ac1());
    report("AC2", "prior telescoping", ac2());
    report("AC3", "posterior correctness", ac3());
    report("AC4", "unbiased table updates", ac4());
    report("AC5", "gate branch table", ac5());
    report("AC6", "early-termination bound", ac6());
    let runs: Vec<ClipRuns> = clips::bundled().iter().map(|(n, s)| ClipRuns::new(n, s)).collect();
    report("AC7", "depth trend in Q", ac7(&runs));
    report("AC8", "reference/local depth relation", ac8(&runs));
    report("AC9", "mode ordering and tau1 trend", ac9(&runs));
    report("AC10", "BD-rate routine", ac10());
    report("AC11", "report determinism", ac11());
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
