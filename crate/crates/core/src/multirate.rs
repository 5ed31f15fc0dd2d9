//! Reference/local instance orchestration and the frame schedule.

use std::borrow::Cow;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame_io::FramePlane;
use crate::inference::{BayesGate, BayesParams, CountTables, GateRecord, PriorModel};
use crate::metrics::{self, frame_psnr, RdPoint};
use crate::rdo::{encode_frame, AllowAll, BlockGeom, CostModelParams, EncodedFrame, QualityLevel, SplitGate};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub special_period: usize,
    pub special_q_offset: u8,
    /// Encode special frames without the inter predictor.
    #[serde(default)]
    pub intra_special: bool,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            special_period: 8,
            special_q_offset: 8,
            intra_special: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameClass {
    Special,
    Normal,
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.special_period == 0 {
            return Err(Error::InvalidParam("special period must be at least 1".into()));
        }
        Ok(())
    }

    pub fn classify_frame(&self, frame_index: usize) -> FrameClass {
        if frame_index.is_multiple_of(self.special_period) {
            FrameClass::Special
        } else {
            FrameClass::Normal
        }
    }

    pub fn is_special(&self, frame_index: usize) -> bool {
        self.classify_frame(frame_index) == FrameClass::Special
    }

    /// Largest special index strictly before `frame_index`; 0 for frame 0.
    pub fn latest_special_before(&self, frame_index: usize) -> usize {
        if frame_index == 0 {
            0
        } else {
            (frame_index - 1) / self.special_period * self.special_period
        }
    }

    pub fn frame_quality(&self, q: QualityLevel, frame_index: usize) -> QualityLevel {
        if self.is_special(frame_index) {
            q.lowered(self.special_q_offset)
        } else {
            q
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum EncodeMode {
    /// Exhaustive search everywhere.
    Full,
    /// Split4 searched only while the block is shallower than its split
    /// degree in the remote frame, on every frame.
    PruneAll,
    /// As `PruneAll` on normal frames; special frames fully searched.
    PruneNonSpecial,
    /// Posterior-gated early termination on normal frames.
    Bayes(BayesParams),
}

impl EncodeMode {
    pub fn name(&self) -> &'static str {
        match self {
            EncodeMode::Full => "full",
            EncodeMode::PruneAll => "prune-all",
            EncodeMode::PruneNonSpecial => "prune-improved",
            EncodeMode::Bayes(_) => "bayes",
        }
    }

    fn needs_reference(&self) -> bool {
        !matches!(self, EncodeMode::Full)
    }
}

/// Reference-driven pruning: Split4 only while `depth < d_fR`.
pub struct PruneGate<'a> {
    pub reference: &'a EncodedFrame,
}

impl SplitGate for PruneGate<'_> {
    fn allow_split(&mut self, geom: &BlockGeom) -> bool {
        geom.depth() < self.reference.max_depth_in(geom)
    }
}

#[derive(Clone, Debug)]
pub struct InstanceResult {
    pub q: QualityLevel,
    pub mode: EncodeMode,
    pub frames: Vec<EncodedFrame>,
    pub leaf_evaluations_total: u64,
    pub rate_proxy_total: f64,
    pub distortion_total: f64,
    pub rd_bits_total: f64,
    pub psnr_per_frame: Vec<f64>,
    /// Clamped posteriors seen at gates (Bayes only).
    pub posterior_samples: Vec<f64>,
    pub gate_log: Vec<GateRecord>,
    pub tables: Option<CountTables>,
    pub elapsed: Duration,
}

impl InstanceResult {
    pub fn mean_psnr(&self) -> f64 {
        self.psnr_per_frame.iter().sum::<f64>() / self.psnr_per_frame.len() as f64
    }

    pub fn rd_point(&self) -> RdPoint {
        RdPoint {
            rate: self.rate_proxy_total,
            quality: self.mean_psnr(),
        }
    }

    pub fn early_terminations(&self) -> usize {
        self.gate_log
            .iter()
            .filter(|r| matches!(r.decision, crate::inference::GateDecision::EarlyTerminate))
            .count()
    }
}

pub(crate) fn padded_sequence(sequence: &[FramePlane]) -> Cow<'_, [FramePlane]> {
    if sequence.iter().all(|f| f.is_padded()) {
        Cow::Borrowed(sequence)
    } else {
        Cow::Owned(sequence.iter().map(|f| f.padded()).collect())
    }
}

/// Inter predictor available to frame `i`.
pub(crate) fn predictor_for<'a>(
    schedule: &Schedule,
    frames: &'a [EncodedFrame],
    i: usize,
) -> Option<&'a FramePlane> {
    if i == 0 || (schedule.intra_special && schedule.is_special(i)) {
        None
    } else {
        Some(&frames[i - 1].reconstruction)
    }
}

/// Encodes one instance. `reference` is the reference instance's encode,
/// aligned frame by frame; `instance` is folded into the gate RNG key.
#[allow(clippy::too_many_arguments)]
pub fn encode_instance(
    sequence: &[FramePlane],
    q: QualityLevel,
    mode: &EncodeMode,
    reference: Option<&[EncodedFrame]>,
    prior: Option<&PriorModel>,
    schedule: &Schedule,
    params: &CostModelParams,
) -> Result<InstanceResult> {
    schedule.validate()?;
    params.validate()?;
    if sequence.is_empty() {
        return Err(Error::Empty);
    }
    let sequence = padded_sequence(sequence);
    let reference = match (mode.needs_reference(), reference) {
        (true, None) => return Err(Error::MissingReference),
        (_, r) => r,
    };
    if let Some(r) = reference {
        if r.len() != sequence.len() {
            return Err(Error::LengthMismatch {
                expected: sequence.len(),
                got: r.len(),
            });
        }
        if r[0].width() != sequence[0].width() || r[0].height() != sequence[0].height() {
            return Err(Error::DimMismatch("reference frames differ in size".into()));
        }
    }
    let prior = match (mode, prior) {
        (EncodeMode::Bayes(_), None) => return Err(Error::MissingPrior),
        (_, p) => p,
    };

    let start = Instant::now();
    let mut frames: Vec<EncodedFrame> = Vec::with_capacity(sequence.len());
    let mut tables = CountTables::default();
    let mut gate_log = Vec::new();
    let mut posterior_samples = Vec::new();
    for (i, src) in sequence.iter().enumerate() {
        let src_q = schedule.frame_quality(q, i);
        let special = schedule.is_special(i);
        let prev = predictor_for(schedule, &frames, i);
        let encoded = match (mode, special) {
            (EncodeMode::Full, _)
            | (EncodeMode::PruneNonSpecial, true)
            | (EncodeMode::Bayes(_), true) => {
                encode_frame(src, prev, src_q, params, special, &mut AllowAll)?
            }
            (EncodeMode::PruneAll, _) | (EncodeMode::PruneNonSpecial, false) => {
                let mut gate = PruneGate {
                    reference: &reference.expect("checked")[i],
                };
                encode_frame(src, prev, src_q, params, special, &mut gate)?
            }
            (EncodeMode::Bayes(bp), false) => {
                let snapshot = tables.clone();
                let latest = &frames[schedule.latest_special_before(i)];
                let mut gate = BayesGate::new(
                    prior.expect("checked"),
                    &snapshot,
                    &mut tables,
                    *bp,
                    &reference.expect("checked")[i],
                    latest,
                    src_q.q_index(),
                    q.q() as u64,
                    i,
                );
                let encoded = encode_frame(src, prev, src_q, params, special, &mut gate)?;
                posterior_samples.extend(gate.records.iter().map(|r| r.posterior));
                gate_log.append(&mut gate.records);
                encoded
            }
        };
        frames.push(encoded);
    }
    let psnr_per_frame = sequence
        .iter()
        .zip(&frames)
        .map(|(s, f)| frame_psnr(s, &f.reconstruction))
        .collect::<Result<Vec<_>>>()?;
    Ok(InstanceResult {
        q,
        mode: *mode,
        leaf_evaluations_total: frames.iter().map(|f| f.leaf_evaluations).sum(),
        rate_proxy_total: frames.iter().map(|f| f.rate_proxy).sum(),
        distortion_total: frames.iter().map(|f| f.distortion).sum(),
        rd_bits_total: frames.iter().map(|f| f.rd_bits).sum(),
        frames,
        psnr_per_frame,
        posterior_samples,
        gate_log,
        tables: matches!(mode, EncodeMode::Bayes(_)).then_some(tables),
        elapsed: start.elapsed(),
    })
}

#[derive(Clone, Debug)]
pub struct LocalOutcome {
    pub result: InstanceResult,
    /// Full-mode encode at the same Q; `None` when the mode is already Full.
    pub baseline: Option<InstanceResult>,
    /// Leaf-evaluation saving versus the baseline (negative = faster).
    pub delta_t: f64,
    /// Relative rate-proxy change versus the baseline.
    pub rate_delta: f64,
}

impl LocalOutcome {
    pub fn baseline(&self) -> &InstanceResult {
        self.baseline.as_ref().unwrap_or(&self.result)
    }
}

#[derive(Clone, Debug)]
pub struct MultiRateReport {
    pub reference: InstanceResult,
    pub locals: Vec<LocalOutcome>,
    /// BD-rate of the mode against Full-mode anchors over the local Qs;
    /// present when there are at least 4 locals.
    pub bd_rate: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct MultiRateJob<'a> {
    pub sequence: &'a [FramePlane],
    pub reference_q: QualityLevel,
    pub local_qs: Vec<QualityLevel>,
    pub mode: EncodeMode,
    pub schedule: Schedule,
    pub params: CostModelParams,
    pub prior: Option<&'a PriorModel>,
    pub jobs: usize,
}

pub fn validate_qs(reference_q: QualityLevel, local_qs: &[QualityLevel]) -> Result<()> {
    if local_qs.is_empty() {
        return Err(Error::InvalidParam("at least one local Q is required".into()));
    }
    for &l in local_qs {
        if l <= reference_q {
            return Err(Error::InvalidQOrdering {
                reference: reference_q.q(),
                local: l.q(),
            });
        }
    }
    Ok(())
}

/// Full-mode reference first, then every local instance (in parallel,
/// bounded by `jobs`) against the shared reference frames.
pub fn run_multirate(job: &MultiRateJob<'_>) -> Result<MultiRateReport> {
    validate_qs(job.reference_q, &job.local_qs)?;
    if job.sequence.is_empty() {
        return Err(Error::Empty);
    }
    if matches!(job.mode, EncodeMode::Bayes(_)) && job.prior.is_none() {
        return Err(Error::MissingPrior);
    }
    let sequence = padded_sequence(job.sequence);
    let reference = encode_instance(
        &sequence,
        job.reference_q,
        &EncodeMode::Full,
        None,
        None,
        &job.schedule,
        &job.params,
    )?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(job.jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
    let locals: Vec<LocalOutcome> = pool.install(|| {
        job.local_qs
            .par_iter()
            .map(|&q| {
                let result = encode_instance(
                    &sequence,
                    q,
                    &job.mode,
                    Some(&reference.frames),
                    job.prior,
                    &job.schedule,
                    &job.params,
                )?;
                let baseline = if job.mode == EncodeMode::Full {
                    None
                } else {
                    Some(encode_instance(
                        &sequence,
                        q,
                        &EncodeMode::Full,
                        None,
                        None,
                        &job.schedule,
                        &job.params,
                    )?)
                };
                let base = baseline.as_ref().unwrap_or(&result);
                let delta_t = metrics::time_saving(&result, base)?;
                let rate_delta =
                    (result.rate_proxy_total - base.rate_proxy_total) / base.rate_proxy_total;
                Ok(LocalOutcome {
                    result,
                    baseline,
                    delta_t,
                    rate_delta,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let bd_rate = if locals.len() >= 4 {
        let anchor: Vec<RdPoint> = locals.iter().map(|l| l.baseline().rd_point()).collect();
        let test: Vec<RdPoint> = locals.iter().map(|l| l.result.rd_point()).collect();
        Some(metrics::bd_rate(&anchor, &test)?)
    } else {
        None
    };
    Ok(MultiRateReport {
        reference,
        locals,
        bd_rate,
    })
}
