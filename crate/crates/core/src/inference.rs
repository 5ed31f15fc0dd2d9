//! Bayesian split inference.
//!
//! A block of depth `d` in a non-special frame is 4-split with prior
//! probability `p0` derived from per-depth linear area maps `a_d(q)`
//! (`a_d(q)` estimates the fraction of area covered by prime blocks shallower
//! than `d`). The evidence is the pair of split degrees `(d_fL, d_fR)` of the
//! block in the latest special frame of the same instance and in the
//! reference instance's encode of the same frame. Occurrence tables per depth
//! turn that evidence into likelihoods, and the resulting posterior drives an
//! early-termination gate with occasional importance-weighted full searches.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rdo::{BlockGeom, EncodedFrame, NodeOutcome, SplitGate};
use crate::rng::GateKey;

pub const PRIOR_EPSILON: f64 = 1e-3;
/// Split degrees 0..=4.
pub const DEGREES: usize = 5;
/// Depths that can 4-split (0..=3).
pub const GATED_DEPTHS: usize = 4;
pub const LAPLACE_INIT: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    pub fn at(&self, q: f64) -> f64 {
        self.slope * q + self.intercept
    }
}

/// Linear maps `a_1..a_4` from q-index to cumulative area fraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorModel {
    lines: [Line; 4],
    epsilon: f64,
}

/// One calibration measurement: cumulative area fraction below depth
/// `d = 1..=4` at a q-index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorSample {
    pub q_index: u32,
    pub below: [f64; 4],
}

impl PriorModel {
    pub fn from_lines(lines: [Line; 4]) -> Self {
        Self {
            lines,
            epsilon: PRIOR_EPSILON,
        }
    }

    pub fn lines(&self) -> &[Line; 4] {
        &self.lines
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `a_d(q)` for `d = 1..=4`, clamped to `[eps, 1 - eps]` and projected
    /// upward so that it is non-decreasing in `d`.
    pub fn area_below(&self, d: usize, q_index: f64) -> f64 {
        assert!((1..=4).contains(&d), "a_d is defined for d = 1..=4");
        let eps = self.epsilon;
        self.lines[..d]
            .iter()
            .map(|l| l.at(q_index).clamp(eps, 1.0 - eps))
            .fold(0.0, f64::max)
    }

    /// Prior probability that a depth-`d` block 4-splits.
    pub fn prior_split_prob(&self, d: u8, q_index: f64) -> f64 {
        let d = d as usize;
        assert!(d < GATED_DEPTHS, "only depths 0..=3 can 4-split");
        let p = if d == 0 {
            1.0 - self.area_below(1, q_index)
        } else {
            (1.0 - self.area_below(d + 1, q_index)) / (1.0 - self.area_below(d, q_index))
        };
        p.clamp(self.epsilon, 1.0 - self.epsilon)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["d", "slope", "intercept"])?;
        for (i, l) in self.lines.iter().enumerate() {
            w.serialize((i + 1, l.slope, l.intercept))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut lines: [Option<Line>; 4] = [None; 4];
        for row in r.deserialize() {
            let (d, slope, intercept): (usize, f64, f64) = row?;
            if !(1..=4).contains(&d) || !slope.is_finite() || !intercept.is_finite() {
                return Err(Error::InvalidParam(format!("bad prior row d={d}")));
            }
            lines[d - 1] = Some(Line { slope, intercept });
        }
        let mut out = [Line { slope: 0.0, intercept: 0.0 }; 4];
        for (i, l) in lines.into_iter().enumerate() {
            out[i] = l.ok_or_else(|| Error::InsufficientData(format!("prior row d={} missing", i + 1)))?;
        }
        Ok(Self::from_lines(out))
    }
}

/// Per-depth least-squares lines through the calibration samples.
pub fn fit_prior(samples: &[PriorSample]) -> Result<PriorModel> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 calibration samples, got {}",
            samples.len()
        )));
    }
    for s in samples {
        if s.below.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParam(format!(
                "area fractions at q-index {} outside [0,1]",
                s.q_index
            )));
        }
    }
    let first = samples[0].q_index;
    if samples.iter().all(|s| s.q_index == first) {
        return Err(Error::DegenerateFit(first));
    }
    let n = samples.len() as f64;
    let mean_q = samples.iter().map(|s| s.q_index as f64).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.q_index as f64 - mean_q).powi(2)).sum();
    let mut lines = [Line { slope: 0.0, intercept: 0.0 }; 4];
    for (d, line) in lines.iter_mut().enumerate() {
        let mean_a = samples.iter().map(|s| s.below[d]).sum::<f64>() / n;
        let sxy: f64 = samples
            .iter()
            .map(|s| (s.q_index as f64 - mean_q) * (s.below[d] - mean_a))
            .sum();
        let slope = sxy / sxx;
        *line = Line {
            slope,
            intercept: mean_a - slope * mean_q,
        };
    }
    Ok(PriorModel::from_lines(lines))
}

/// The `T_d^+` / `T_d^-` occurrence tables for one local instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountTables {
    plus: [[[f64; DEGREES]; DEGREES]; GATED_DEPTHS],
    minus: [[[f64; DEGREES]; DEGREES]; GATED_DEPTHS],
}

impl Default for CountTables {
    fn default() -> Self {
        Self::with_init(LAPLACE_INIT)
    }
}

impl CountTables {
    pub fn with_init(value: f64) -> Self {
        Self {
            plus: [[[value; DEGREES]; DEGREES]; GATED_DEPTHS],
            minus: [[[value; DEGREES]; DEGREES]; GATED_DEPTHS],
        }
    }

    pub fn plus(&self, d: usize, l: usize, r: usize) -> f64 {
        self.plus[d][l][r]
    }

    pub fn minus(&self, d: usize, l: usize, r: usize) -> f64 {
        self.minus[d][l][r]
    }

    pub fn plus_total(&self, d: usize) -> f64 {
        self.plus[d].iter().flatten().sum()
    }

    pub fn minus_total(&self, d: usize) -> f64 {
        self.minus[d].iter().flatten().sum()
    }

    /// `(P(d_fL, d_fR | split), P(d_fL, d_fR | no split))` at depth `d`.
    pub fn likelihoods(&self, d: usize, l: usize, r: usize) -> (f64, f64) {
        (
            self.plus[d][l][r] / self.plus_total(d),
            self.minus[d][l][r] / self.minus_total(d),
        )
    }

    /// Adds `weight` to `T_d^+` if the block split, else to `T_d^-`.
    pub fn update(&mut self, d: usize, l: usize, r: usize, was_split: bool, weight: f64) {
        let t = if was_split { &mut self.plus } else { &mut self.minus };
        t[d][l][r] += weight;
    }

    /// Fraction of `T_d^+` mass in each cell.
    pub fn normalized_plus(&self, d: usize) -> [[f64; DEGREES]; DEGREES] {
        let total = self.plus_total(d);
        self.plus[d].map(|row| row.map(|v| v / total))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["d", "d_fl", "d_fr", "t_plus", "t_minus"])?;
        for d in 0..GATED_DEPTHS {
            for l in 0..DEGREES {
                for r in 0..DEGREES {
                    w.serialize((d, l, r, self.plus[d][l][r], self.minus[d][l][r]))?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Bayes' rule for the split hypothesis.
pub fn posterior(p0: f64, l_plus: f64, l_minus: f64) -> f64 {
    let num = l_plus * p0;
    num / (num + l_minus * (1.0 - p0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BayesParams {
    pub tau1: f64,
    pub tau2: f64,
    pub rng_seed: u64,
}

impl BayesParams {
    pub fn new(tau1: f64, tau2: f64, rng_seed: u64) -> Result<Self> {
        for (name, v) in [("tau1", tau1), ("tau2", tau2)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParam(format!("{name} must lie in (0,1), got {v}")));
            }
        }
        Ok(Self { tau1, tau2, rng_seed })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateContext {
    pub depth: u8,
    pub d_fl: u8,
    pub d_fr: u8,
    pub q_index: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateDecision {
    EarlyTerminate,
    FullSearch { weight: f64 },
}

/// The three-way branch: terminate when the posterior is small unless the
/// exploration draw fires, in which case the outcome is counted `1/tau2` times.
pub fn gate_decision(p: f64, params: &BayesParams, x: f64) -> GateDecision {
    if p <= params.tau1 && x >= params.tau2 {
        GateDecision::EarlyTerminate
    } else if p > params.tau1 {
        GateDecision::FullSearch { weight: 1.0 }
    } else {
        GateDecision::FullSearch {
            weight: 1.0 / params.tau2,
        }
    }
}

/// One consulted gate, kept for post-run analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    pub frame_index: usize,
    pub geom: BlockGeom,
    pub context: GateContext,
    pub posterior: f64,
    pub decision: GateDecision,
    pub split_chosen: bool,
    pub nonsplit_evaluations: u64,
}

/// Split gate for a non-special frame of a local instance.
///
/// Reads likelihoods from `snapshot` (the tables at frame start) and
/// accumulates its weighted updates into `pending`.
pub struct BayesGate<'a> {
    pub prior: &'a PriorModel,
    pub snapshot: &'a CountTables,
    pub pending: &'a mut CountTables,
    pub params: BayesParams,
    pub reference: &'a EncodedFrame,
    pub latest_special: &'a EncodedFrame,
    pub q_index: u32,
    pub instance: u64,
    pub frame_index: usize,
    pub frame_width: usize,
    pub records: Vec<GateRecord>,
    stack: Vec<(GateContext, f64, GateDecision)>,
}

impl<'a> BayesGate<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        prior: &'a PriorModel,
        snapshot: &'a CountTables,
        pending: &'a mut CountTables,
        params: BayesParams,
        reference: &'a EncodedFrame,
        latest_special: &'a EncodedFrame,
        q_index: u32,
        instance: u64,
        frame_index: usize,
    ) -> Self {
        Self {
            prior,
            snapshot,
            pending,
            params,
            frame_width: reference.width(),
            reference,
            latest_special,
            q_index,
            instance,
            frame_index,
            records: Vec::new(),
            stack: Vec::new(),
        }
    }

    pub fn context(&self, geom: &BlockGeom) -> GateContext {
        GateContext {
            depth: geom.depth(),
            d_fl: self.latest_special.max_depth_in(geom),
            d_fr: self.reference.max_depth_in(geom),
            q_index: self.q_index,
        }
    }

    /// Posterior for the block, clamped to `[eps, 1 - eps]`.
    pub fn posterior_for(&self, ctx: &GateContext) -> f64 {
        let p0 = self.prior.prior_split_prob(ctx.depth, ctx.q_index as f64);
        let (lp, lm) = self
            .snapshot
            .likelihoods(ctx.depth as usize, ctx.d_fl as usize, ctx.d_fr as usize);
        let eps = self.prior.epsilon();
        posterior(p0, lp, lm).clamp(eps, 1.0 - eps)
    }

    fn draw(&self, geom: &BlockGeom) -> f64 {
        let sb_cols = self.frame_width.div_ceil(crate::rdo::SUPERBLOCK_SIZE);
        let sb = (geom.y / crate::rdo::SUPERBLOCK_SIZE) * sb_cols + geom.x / crate::rdo::SUPERBLOCK_SIZE;
        GateKey {
            seed: self.params.rng_seed,
            instance: self.instance,
            frame: self.frame_index as u64,
            superblock: sb as u64,
            x: geom.x as u64,
            y: geom.y as u64,
            depth: geom.depth() as u64,
        }
        .uniform()
    }
}

impl SplitGate for BayesGate<'_> {
    fn allow_split(&mut self, geom: &BlockGeom) -> bool {
        let ctx = self.context(geom);
        let p = self.posterior_for(&ctx);
        let decision = gate_decision(p, &self.params, self.draw(geom));
        self.stack.push((ctx, p, decision));
        matches!(decision, GateDecision::FullSearch { .. })
    }

    fn observe(&mut self, geom: &BlockGeom, outcome: &NodeOutcome) {
        let (ctx, p, decision) = self.stack.pop().expect("observe without allow_split");
        if let GateDecision::FullSearch { weight } = decision {
            debug_assert!(outcome.split_evaluated);
            self.pending.update(
                ctx.depth as usize,
                ctx.d_fl as usize,
                ctx.d_fr as usize,
                outcome.split_chosen,
                weight,
            );
        }
        self.records.push(GateRecord {
            frame_index: self.frame_index,
            geom: *geom,
            context: ctx,
            posterior: p,
            decision,
            split_chosen: outcome.split_chosen,
            nonsplit_evaluations: outcome.nonsplit_evaluations,
        });
    }
}
