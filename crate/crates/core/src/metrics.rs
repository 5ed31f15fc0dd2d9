//! Quality, BD-rate, speed accounting and the descriptive statistics of
//! block structures.
//!
//! All "bitrate" quantities are rate-proxy bits from the surrogate cost
//! model, and "time" is counted in leaf evaluations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame_io::FramePlane;
use crate::inference::GateDecision;
use crate::multirate::{padded_sequence, predictor_for, EncodeMode, InstanceResult, Schedule};
use crate::rdo::{encode_frame, AllowAll, CostModelParams, EncodedFrame, RecordingGate};

pub const PSNR_CAP: f64 = 100.0;

/// PSNR over the visible window of `original`, capped at 100 dB.
pub fn frame_psnr(original: &FramePlane, reconstruction: &FramePlane) -> Result<f64> {
    if original.width() != reconstruction.width() || original.height() != reconstruction.height() {
        return Err(Error::DimMismatch(format!(
            "{}x{} vs {}x{}",
            original.width(),
            original.height(),
            reconstruction.width(),
            reconstruction.height()
        )));
    }
    let (w, h) = (original.visible_width(), original.visible_height());
    let mut sse: u64 = 0;
    for y in 0..h {
        for (a, b) in original.row(y)[..w].iter().zip(&reconstruction.row(y)[..w]) {
            let d = *a as i64 - *b as i64;
            sse += (d * d) as u64;
        }
    }
    if sse == 0 {
        return Ok(PSNR_CAP);
    }
    let mse = sse as f64 / (w * h) as f64;
    Ok((10.0 * (255.0f64 * 255.0 / mse).log10()).min(PSNR_CAP))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RdPoint {
    pub rate: f64,
    pub quality: f64,
}

fn prepare_curve(points: &[RdPoint]) -> Result<Vec<RdPoint>> {
    if points.len() < 4 {
        return Err(Error::InsufficientPoints(points.len()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.quality.total_cmp(&b.quality));
    let increasing = pts.windows(2).all(|w| w[1].quality > w[0].quality);
    if !increasing || pts.iter().any(|p| !(p.rate > 0.0) || !p.quality.is_finite()) {
        return Err(Error::InvalidCurve);
    }
    Ok(pts)
}

/// Solves the least-squares cubic through `(t, y)` via normal equations.
fn fit_cubic(t: &[f64], y: &[f64]) -> Result<[f64; 4]> {
    let mut a = [[0.0f64; 5]; 4];
    for (&ti, &yi) in t.iter().zip(y) {
        let pw = [1.0, ti, ti * ti, ti * ti * ti];
        for r in 0..4 {
            for c in 0..4 {
                a[r][c] += pw[r] * pw[c];
            }
            a[r][4] += pw[r] * yi;
        }
    }
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() < 1e-14 {
            return Err(Error::InvalidCurve);
        }
        a.swap(col, pivot);
        for r in 0..4 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..5 {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    Ok([0, 1, 2, 3].map(|i| a[i][4] / a[i][i]))
}

fn cubic_antiderivative(c: &[f64; 4], t: f64) -> f64 {
    t * (c[0] + t * (c[1] / 2.0 + t * (c[2] / 3.0 + t * c[3] / 4.0)))
}

/// Bjøntegaard delta rate in percent: average log-rate difference of `test`
/// over `anchor` across their overlapping quality interval, each curve fit
/// by a cubic in quality.
pub fn bd_rate(anchor: &[RdPoint], test: &[RdPoint]) -> Result<f64> {
    let a = prepare_curve(anchor)?;
    let b = prepare_curve(test)?;
    let lo = a[0].quality.max(b[0].quality);
    let hi = a[a.len() - 1].quality.min(b[b.len() - 1].quality);
    if !(hi > lo) {
        return Err(Error::NoOverlap);
    }
    let qmin = a[0].quality.min(b[0].quality);
    let qmax = a[a.len() - 1].quality.max(b[b.len() - 1].quality);
    let center = 0.5 * (qmin + qmax);
    let scale = 0.5 * (qmax - qmin);
    let integral = |pts: &[RdPoint]| -> Result<f64> {
        let t: Vec<f64> = pts.iter().map(|p| (p.quality - center) / scale).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.rate.ln()).collect();
        let c = fit_cubic(&t, &y)?;
        let (tl, th) = ((lo - center) / scale, (hi - center) / scale);
        Ok(scale * (cubic_antiderivative(&c, th) - cubic_antiderivative(&c, tl)))
    };
    if a == b {
        return Ok(0.0);
    }
    let avg = (integral(&b)? - integral(&a)?) / (hi - lo);
    Ok(100.0 * avg.exp_m1())
}

fn check_comparable(a: &InstanceResult, b: &InstanceResult) -> Result<()> {
    if a.q != b.q {
        return Err(Error::Mismatch(format!("Q {} vs {}", a.q.q(), b.q.q())));
    }
    if a.frames.len() != b.frames.len() {
        return Err(Error::Mismatch(format!(
            "{} vs {} frames",
            a.frames.len(),
            b.frames.len()
        )));
    }
    Ok(())
}

/// Relative change in leaf evaluations against a Full-mode baseline.
pub fn time_saving(local: &InstanceResult, baseline_full: &InstanceResult) -> Result<f64> {
    check_comparable(local, baseline_full)?;
    if baseline_full.mode != EncodeMode::Full {
        return Err(Error::Mismatch("baseline must be a Full-mode encode".into()));
    }
    let base = baseline_full.leaf_evaluations_total as f64;
    Ok((local.leaf_evaluations_total as f64 - base) / base)
}

/// Wall-clock counterpart of [`time_saving`]; informational only.
pub fn wall_clock_saving(local: &InstanceResult, baseline_full: &InstanceResult) -> f64 {
    let base = baseline_full.elapsed.as_secs_f64();
    if base == 0.0 {
        0.0
    } else {
        (local.elapsed.as_secs_f64() - base) / base
    }
}

fn normal_frames(instance: &InstanceResult) -> Vec<&EncodedFrame> {
    let normal: Vec<&EncodedFrame> = instance.frames.iter().filter(|f| !f.special).collect();
    if normal.is_empty() {
        instance.frames.iter().collect()
    } else {
        normal
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthAreaStats {
    pub q: u8,
    pub q_index: u32,
    pub frames: usize,
    /// Area fraction of prime blocks at each depth 0..=4.
    pub area_fraction: [f64; 5],
    /// Cumulative fraction strictly below depth d = 1..=4 (the `a_d` samples).
    pub below: [f64; 4],
}

impl DepthAreaStats {
    /// Area fraction covered by prime blocks of depth >= 1.
    pub fn split_area_fraction(&self) -> f64 {
        1.0 - self.area_fraction[0]
    }
}

/// Prime-block area by depth over non-special frames (all frames when the
/// instance has no normal frame).
pub fn depth_area_stats(instance: &InstanceResult) -> DepthAreaStats {
    let frames = normal_frames(instance);
    let mut area = [0.0f64; 5];
    let mut total = 0.0;
    for f in &frames {
        for leaf in f.prime_blocks() {
            area[leaf.geom.depth() as usize] += leaf.geom.area() as f64;
        }
        total += (f.width() * f.height()) as f64;
    }
    let area_fraction = area.map(|a| a / total);
    let mut below = [0.0; 4];
    let mut acc = 0.0;
    for d in 0..4 {
        acc += area_fraction[d];
        below[d] = acc.min(1.0);
    }
    DepthAreaStats {
        q: instance.q.q(),
        q_index: instance.q.q_index(),
        frames: frames.len(),
        area_fraction,
        below,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareStats {
    /// Area fraction with d_R < d_L.
    pub remote_shallower: f64,
    pub equal: f64,
    /// Area fraction with d_R > d_L.
    pub remote_deeper: f64,
}

/// Compares each local prime block's depth with its split degree in the
/// remote (reference) frame, area weighted, over non-special frames.
pub fn depth_compare_stats(local: &InstanceResult, reference: &InstanceResult) -> Result<CompareStats> {
    if local.frames.len() != reference.frames.len() {
        return Err(Error::Mismatch(format!(
            "{} local vs {} reference frames",
            local.frames.len(),
            reference.frames.len()
        )));
    }
    let mut acc = [0.0f64; 3];
    for f in normal_frames(local) {
        let remote = &reference.frames[f.frame_index];
        if remote.width() != f.width() || remote.height() != f.height() {
            return Err(Error::Mismatch("frame sizes differ".into()));
        }
        for leaf in f.prime_blocks() {
            let d_l = leaf.geom.depth();
            let d_r = remote.max_depth_in(&leaf.geom);
            let slot = match d_r.cmp(&d_l) {
                std::cmp::Ordering::Less => 0,
                std::cmp::Ordering::Equal => 1,
                std::cmp::Ordering::Greater => 2,
            };
            acc[slot] += leaf.geom.area() as f64;
        }
    }
    let total: f64 = acc.iter().sum();
    Ok(CompareStats {
        remote_shallower: acc[0] / total,
        equal: acc[1] / total,
        remote_deeper: acc[2] / total,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
}

impl PosteriorHistogram {
    pub fn integral(&self) -> f64 {
        self.density
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }
}

pub const DEFAULT_BINS: usize = 50;

/// Uniform-bin density estimate of the posterior over `[0, 1]`.
pub fn posterior_histogram(samples: &[f64], bins: usize) -> Result<PosteriorHistogram> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    if bins == 0 {
        return Err(Error::InvalidParam("histogram needs at least one bin".into()));
    }
    let edges: Vec<f64> = (0..=bins).map(|i| i as f64 / bins as f64).collect();
    let mut counts = vec![0u64; bins];
    for &p in samples {
        let i = ((p.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let n = samples.len() as f64;
    let width = 1.0 / bins as f64;
    let density = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    Ok(PosteriorHistogram { edges, counts, density })
}

/// Empirical counterparts of the early-termination time/bit analysis,
/// measured against a per-frame Full shadow search on identical inputs.
/// Bit quantities are RD cost in bit-equivalent units (`J / lambda`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruningBoundReport {
    pub tau1: f64,
    /// Gated blocks.
    pub n: usize,
    /// Early-terminated blocks.
    pub n_t: usize,
    /// Early-terminated blocks whose shadow decision was Split4.
    pub n_b: usize,
    pub nb_over_nt: f64,
    pub max_terminated_posterior: f64,
    pub all_terminated_below_tau1: bool,
    pub delta_t_hat: f64,
    pub delta_b_hat: f64,
    /// Mean change per affected block, relative to the mean per gated
    /// block of the shadow run (`T0 / N`, `B0 / N`).
    pub block_delta_t_hat: f64,
    pub block_delta_b_hat: f64,
    /// Change on affected blocks relative to their own shadow values.
    pub affected_delta_t: f64,
    pub affected_delta_b: f64,
    pub bound_lhs: f64,
    pub bound_rhs: f64,
    pub bound_holds: bool,
    /// Relative rate-proxy change, for reference only.
    pub rate_proxy_delta: f64,
    pub shadow_leaf_evaluations: u64,
    pub shadow_rd_bits: f64,
}

/// Re-searches every frame of a Bayes run in Full mode from the same
/// previous reconstruction and compares node by node.
pub fn pruning_bound_report(
    sequence: &[FramePlane],
    bayes: &InstanceResult,
    schedule: &Schedule,
    params: &CostModelParams,
    tau1: f64,
) -> Result<PruningBoundReport> {
    if !matches!(bayes.mode, EncodeMode::Bayes(_)) {
        return Err(Error::Mismatch("bound report needs a Bayes-mode run".into()));
    }
    if sequence.len() != bayes.frames.len() {
        return Err(Error::LengthMismatch {
            expected: bayes.frames.len(),
            got: sequence.len(),
        });
    }
    let sequence = padded_sequence(sequence);
    let mut shadow_evals = 0u64;
    let mut shadow_bits = 0.0;
    let mut shadow_rate = 0.0;
    let mut shadows = Vec::with_capacity(sequence.len());
    for (i, src) in sequence.iter().enumerate() {
        let enc = &bayes.frames[i];
        let prev = predictor_for(schedule, &bayes.frames, i);
        let mut gate = RecordingGate::default();
        let shadow = if enc.special {
            encode_frame(src, prev, enc.q, params, true, &mut AllowAll)?
        } else {
            encode_frame(src, prev, enc.q, params, false, &mut gate)?
        };
        shadow_evals += shadow.leaf_evaluations;
        shadow_bits += shadow.rd_bits;
        shadow_rate += shadow.rate_proxy;
        shadows.push((gate, params.lambda(enc.q)));
    }

    let (mut n_t, mut n_b) = (0usize, 0usize);
    let (mut et_t, mut et_t0) = (0.0f64, 0.0f64);
    let (mut miss_b, mut miss_b0) = (0.0f64, 0.0f64);
    let mut max_p: f64 = 0.0;
    for rec in &bayes.gate_log {
        if rec.decision != GateDecision::EarlyTerminate {
            continue;
        }
        let (gate, lambda) = &shadows[rec.frame_index];
        let oracle = gate.outcomes.get(&rec.geom).ok_or_else(|| {
            Error::Invariant(format!("shadow search never visited {:?}", rec.geom))
        })?;
        n_t += 1;
        max_p = max_p.max(rec.posterior);
        et_t += rec.nonsplit_evaluations as f64;
        et_t0 += oracle.subtree_evaluations as f64;
        if oracle.split_chosen {
            n_b += 1;
            miss_b += oracle.nonsplit_cost / lambda;
            miss_b0 += oracle.split_cost.expect("chosen split was evaluated") / lambda;
        }
    }
    let delta_t_hat = (bayes.leaf_evaluations_total as f64 - shadow_evals as f64) / shadow_evals as f64;
    let delta_b_hat = (bayes.rd_bits_total - shadow_bits) / shadow_bits;
    let n = bayes.gate_log.len();
    let t0_bar = shadow_evals as f64 / n.max(1) as f64;
    let b0_bar = shadow_bits / n.max(1) as f64;
    let block_delta_t_hat = if n_t > 0 { (et_t - et_t0) / n_t as f64 / t0_bar } else { 0.0 };
    let block_delta_b_hat = if n_b > 0 { (miss_b - miss_b0) / n_b as f64 / b0_bar } else { 0.0 };
    let bound_lhs = if n_b > 0 { delta_b_hat / block_delta_b_hat } else { 0.0 };
    let bound_rhs = if n_t > 0 { tau1 * delta_t_hat / block_delta_t_hat } else { 0.0 };
    Ok(PruningBoundReport {
        tau1,
        n,
        n_t,
        n_b,
        nb_over_nt: if n_t > 0 { n_b as f64 / n_t as f64 } else { 0.0 },
        max_terminated_posterior: max_p,
        all_terminated_below_tau1: max_p <= tau1,
        delta_t_hat,
        delta_b_hat,
        block_delta_t_hat,
        block_delta_b_hat,
        affected_delta_t: if n_t > 0 { (et_t - et_t0) / et_t0 } else { 0.0 },
        affected_delta_b: if n_b > 0 { (miss_b - miss_b0) / miss_b0 } else { 0.0 },
        bound_lhs,
        bound_rhs,
        bound_holds: bound_lhs <= bound_rhs,
        rate_proxy_delta: (bayes.rate_proxy_total - shadow_rate) / shadow_rate,
        shadow_leaf_evaluations: shadow_evals,
        shadow_rd_bits: shadow_bits,
    })
}

/// Checks that every early-terminated record respects the threshold.
pub fn terminated_posteriors_within(instance: &InstanceResult, tau1: f64) -> bool {
    instance
        .gate_log
        .iter()
        .filter(|r| r.decision == GateDecision::EarlyTerminate)
        .all(|r| r.posterior <= tau1)
}
