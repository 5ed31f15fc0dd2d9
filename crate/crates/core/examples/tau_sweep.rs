// Run the Bayes mode at several tau1 values and write the sweep table
// into a temporary directory.

use bayes_multirate::clips;
use bayes_multirate::experiment::{cmd_sweep, RunConfig};
use bayes_multirate::Result;

pub fn run() -> Result<()> {
    let mut spec = clips::drift();
    spec.frame_count = 12;
    let config = RunConfig {
        q_locals: vec![30, 38],
        ..RunConfig::with_synth(spec)
    };
    let out = std::env::temp_dir().join(format!("mrbayes_tau_sweep_{}", std::process::id()));
    let rows = cmd_sweep(&config, &[0.1, 0.2, 0.4], &out)?;
    for r in &rows {
        println!("tau1 {:.1} Q{}: dT {:+.3} rate {:+.4}", r.tau1, r.q, r.delta_t, r.rate_delta);
    }
    println!("{}", std::fs::read_to_string(out.join("sweep.csv"))?.trim_end());
    std::fs::remove_dir_all(&out)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
