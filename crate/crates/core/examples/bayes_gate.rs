// The three-way gate and the count-table posterior, without an encoder.

use bayes_multirate::inference::{gate_decision, posterior, BayesParams, CountTables, GateDecision};
use bayes_multirate::rng::GateKey;
use bayes_multirate::Result;

pub fn run() -> Result<()> {
    let params = BayesParams::new(0.2, 0.05, 7)?;

    for (p, x) in [(0.5, 0.9), (0.1, 0.9), (0.1, 0.01), (0.2, 0.05)] {
        let d = gate_decision(p, &params, x);
        println!("p={p:.2} X={x:.2} -> {d:?}");
    }

    // Tables for depth 1; context (d_fL, d_fR) = (2, 2) tends to split,
    // (1, 1) tends not to.
    let mut t = CountTables::default();
    for _ in 0..30 {
        t.update(1, 2, 2, true, 1.0);
        t.update(1, 1, 1, false, 1.0);
    }
    t.update(1, 1, 1, true, 1.0 / params.tau2);
    for (l, r) in [(2, 2), (1, 1), (0, 4)] {
        let (lp, lm) = t.likelihoods(1, l, r);
        let p = posterior(0.3, lp, lm);
        let key = GateKey {
            seed: params.rng_seed,
            instance: 32,
            frame: 3,
            superblock: 0,
            x: 0,
            y: 0,
            depth: 1,
        };
        let decision = gate_decision(p, &params, key.uniform());
        let verdict = match decision {
            GateDecision::EarlyTerminate => "skip split".to_string(),
            GateDecision::FullSearch { weight } => format!("search, update weight {weight}"),
        };
        println!("context ({l},{r}): L+={lp:.3} L-={lm:.3} posterior {p:.3} -> {verdict}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
