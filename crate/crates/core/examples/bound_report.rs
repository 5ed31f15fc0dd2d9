// Measure how often early termination was wrong against a full shadow
// search and compare both sides of the bit/time bound.

use bayes_multirate::clips;
use bayes_multirate::experiment::{execute_run, RunConfig};
use bayes_multirate::Result;

pub fn run() -> Result<()> {
    let mut spec = clips::bubbles();
    spec.frame_count = 17;
    let config = RunConfig {
        q_locals: vec![32, 42],
        ..RunConfig::with_synth(spec)
    };
    let out = execute_run(&config)?;
    for (q, b) in &out.bounds {
        println!(
            "Q{q}: N={} N_t={} N_b={} (N_b/N_t {:.3}, tau1 {}), max terminated p {:.3}",
            b.n, b.n_t, b.n_b, b.nb_over_nt, b.tau1, b.max_terminated_posterior
        );
        println!(
            "      dT {:+.3}  dB {:+.5}  lhs {:.4} <= rhs {:.4}: {}",
            b.delta_t_hat, b.delta_b_hat, b.bound_lhs, b.bound_rhs, b.bound_holds
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
