// Fit the per-depth area prior from Full encodes and print the prior
// split probability it implies at a few quantizers.

use bayes_multirate::clips;
use bayes_multirate::experiment::{calibration_samples, fit_from_stats};
use bayes_multirate::frame_io::generate_synthetic;
use bayes_multirate::multirate::Schedule;
use bayes_multirate::rdo::{CostModelParams, QualityLevel};
use bayes_multirate::Result;

pub fn run() -> Result<()> {
    let mut spec = clips::bubbles();
    spec.frame_count = 9;
    let seq = generate_synthetic(&spec)?;
    let qs = [22, 30, 38, 46]
        .into_iter()
        .map(QualityLevel::new)
        .collect::<Result<Vec<_>>>()?;
    let stats = calibration_samples(&seq, &qs, 8, &Schedule::default(), &CostModelParams::default())?;
    for s in &stats {
        println!("Q{} (q-index {}): a_d samples {:.3?}", s.q, s.q_index, s.below);
    }
    let prior = fit_from_stats(&stats)?;
    for (d, l) in prior.lines().iter().enumerate() {
        println!("a{}(q) = {:+.5} q {:+.4}", d + 1, l.slope, l.intercept);
    }
    for q in [24u8, 34, 44] {
        let qi = QualityLevel::new(q)?.q_index() as f64;
        let p: Vec<String> = (0..4u8).map(|d| format!("{:.3}", prior.prior_split_prob(d, qi))).collect();
        println!("Q{q}: P(split | depth 0..3) = [{}]", p.join(", "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
