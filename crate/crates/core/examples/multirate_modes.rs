// One reference and two local instances under each encode mode.

use bayes_multirate::clips;
use bayes_multirate::experiment::{calibration_samples, fit_from_stats};
use bayes_multirate::frame_io::generate_synthetic;
use bayes_multirate::inference::BayesParams;
use bayes_multirate::metrics::depth_compare_stats;
use bayes_multirate::multirate::{run_multirate, EncodeMode, MultiRateJob, Schedule};
use bayes_multirate::rdo::{CostModelParams, QualityLevel};
use bayes_multirate::Result;

pub fn run() -> Result<()> {
    let mut spec = clips::pan();
    spec.frame_count = 17;
    let seq = generate_synthetic(&spec)?;
    let schedule = Schedule::default();
    let params = CostModelParams::default();
    let q = |v| QualityLevel::new(v);
    let calib = calibration_samples(&seq, &[q(22)?, q(30)?, q(38)?, q(46)?], 8, &schedule, &params)?;
    let prior = fit_from_stats(&calib)?;

    let modes = [
        EncodeMode::Full,
        EncodeMode::PruneAll,
        EncodeMode::PruneNonSpecial,
        EncodeMode::Bayes(BayesParams::new(0.2, 0.05, 1)?),
    ];
    for mode in modes {
        let report = run_multirate(&MultiRateJob {
            sequence: &seq,
            reference_q: q(22)?,
            local_qs: vec![q(32)?, q(40)?],
            mode,
            schedule: schedule.clone(),
            params: params.clone(),
            prior: Some(&prior),
            jobs: 2,
        })?;
        for l in &report.locals {
            let cmp = depth_compare_stats(&l.result, &report.reference)?;
            println!(
                "{:<14} Q{}: dT {:+.3}  rate {:+.4}  psnr {:.2} dB  d_R<d_L {:.3}",
                mode.name(),
                l.result.q.q(),
                l.delta_t,
                l.rate_delta,
                l.result.mean_psnr(),
                cmp.remote_shallower
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
