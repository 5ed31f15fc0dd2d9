//! Run configuration, prior calibration, experiment runs and sweeps, and the
//! files they write.
//!
//! `report.json` never contains wall-clock data (that goes to
//! `timing.json`), so identical configurations produce byte-identical
//! reports.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame_io::{generate_synthetic, FramePlane, RawReader, SynthSpec, Y4mReader};
use crate::inference::{fit_prior, BayesParams, PriorModel, PriorSample};
use crate::metrics::{
    depth_area_stats, depth_compare_stats, posterior_histogram, pruning_bound_report, wall_clock_saving,
    CompareStats, DepthAreaStats, PruningBoundReport, DEFAULT_BINS,
};
use crate::multirate::{encode_instance, run_multirate, EncodeMode, InstanceResult, MultiRateJob, MultiRateReport, Schedule};
use crate::rdo::{CostModelParams, QualityLevel};

pub const DEFAULT_TAU1: f64 = 0.2;
pub const DEFAULT_TAU2: f64 = 0.05;
pub const TAU1_SWEEP: [f64; 3] = [0.1, 0.2, 0.4];
/// Q distance of the two extra calibration points around the local Q range.
pub const CALIBRATION_BRACKET: u8 = 5;

pub const PROXY_NOTE: &str = "rates are rate-proxy bits of the surrogate cost model; \
time is counted in leaf-cost evaluations; bound quantities use RD cost in bit-equivalent units";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InputSource {
    Synth { spec: SynthSpec },
    Y4m { path: PathBuf },
    Raw { path: PathBuf, width: usize, height: usize, gray: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    Full,
    PruneAll,
    PruneImproved,
    Bayes,
}

fn default_tau1() -> f64 {
    DEFAULT_TAU1
}

fn default_tau2() -> f64 {
    DEFAULT_TAU2
}

fn default_jobs() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: InputSource,
    #[serde(default)]
    pub frame_limit: Option<usize>,
    pub q_reference: u8,
    pub q_locals: Vec<u8>,
    pub mode: ModeName,
    #[serde(default = "default_tau1")]
    pub tau1: f64,
    #[serde(default = "default_tau2")]
    pub tau2: f64,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub cost_model: CostModelParams,
    #[serde(default)]
    pub seed: u64,
    /// Prior CSV; calibrated from the input when absent.
    #[serde(default)]
    pub prior: Option<PathBuf>,
    /// Worker threads for local instances; does not affect results.
    #[serde(skip, default = "default_jobs")]
    pub jobs: usize,
}

impl RunConfig {
    pub fn with_synth(spec: SynthSpec) -> Self {
        Self {
            input: InputSource::Synth { spec },
            frame_limit: None,
            q_reference: 22,
            q_locals: vec![27, 32, 37, 42],
            mode: ModeName::Bayes,
            tau1: DEFAULT_TAU1,
            tau2: DEFAULT_TAU2,
            schedule: Schedule::default(),
            cost_model: CostModelParams::default(),
            seed: 1,
            prior: None,
            jobs: 1,
        }
    }

    pub fn reference_quality(&self) -> Result<QualityLevel> {
        QualityLevel::new(self.q_reference)
    }

    pub fn local_qualities(&self) -> Result<Vec<QualityLevel>> {
        self.q_locals.iter().map(|&q| QualityLevel::new(q)).collect()
    }

    pub fn encode_mode(&self) -> Result<EncodeMode> {
        Ok(match self.mode {
            ModeName::Full => EncodeMode::Full,
            ModeName::PruneAll => EncodeMode::PruneAll,
            ModeName::PruneImproved => EncodeMode::PruneNonSpecial,
            ModeName::Bayes => EncodeMode::Bayes(BayesParams::new(self.tau1, self.tau2, self.seed)?),
        })
    }

    /// Checks everything that can be checked before encoding starts.
    pub fn validate(&self) -> Result<()> {
        crate::multirate::validate_qs(self.reference_quality()?, &self.local_qualities()?)?;
        self.encode_mode()?;
        self.schedule.validate()?;
        self.cost_model.validate()?;
        if self.frame_limit == Some(0) {
            return Err(Error::InvalidParam("frame limit must be positive".into()));
        }
        Ok(())
    }

    pub fn load_sequence(&self) -> Result<Vec<FramePlane>> {
        let frames = match &self.input {
            InputSource::Synth { spec } => {
                let mut spec = spec.clone();
                if let Some(l) = self.frame_limit {
                    spec.frame_count = spec.frame_count.min(l);
                }
                generate_synthetic(&spec)?
            }
            InputSource::Y4m { path } => {
                Y4mReader::new(BufReader::new(File::open(path)?))?.read_all(self.frame_limit)?
            }
            InputSource::Raw {
                path,
                width,
                height,
                gray,
            } => RawReader::new(BufReader::new(File::open(path)?), *width, *height, *gray)?
                .read_all(self.frame_limit)?,
        };
        if frames.is_empty() {
            return Err(Error::InsufficientData("input has no frames".into()));
        }
        Ok(frames)
    }
}

/// Full-encodes the first `frames` frames at each Q and returns one prior
/// sample per Q.
pub fn calibration_samples(
    sequence: &[FramePlane],
    qs: &[QualityLevel],
    frames: usize,
    schedule: &Schedule,
    params: &CostModelParams,
) -> Result<Vec<DepthAreaStats>> {
    let head = &sequence[..frames.clamp(1, sequence.len())];
    qs.iter()
        .map(|&q| {
            let r = encode_instance(head, q, &EncodeMode::Full, None, None, schedule, params)?;
            Ok(depth_area_stats(&r))
        })
        .collect()
}

pub fn fit_from_stats(stats: &[DepthAreaStats]) -> Result<PriorModel> {
    let samples: Vec<PriorSample> = stats
        .iter()
        .map(|s| PriorSample {
            q_index: s.q_index,
            below: s.below,
        })
        .collect();
    fit_prior(&samples)
}

fn dedup_sorted(mut qs: Vec<u8>) -> Vec<u8> {
    qs.sort_unstable();
    qs.dedup();
    qs
}

/// Calibration grid for runs without a prior file: the local Qs plus one
/// point below and one above their range.
pub fn run_calibration_grid(config: &RunConfig) -> Vec<u8> {
    let lo = config.q_locals.iter().copied().min().unwrap_or(config.q_reference);
    let hi = config.q_locals.iter().copied().max().unwrap_or(config.q_reference);
    let mut qs = config.q_locals.clone();
    qs.push(lo.saturating_sub(CALIBRATION_BRACKET));
    qs.push((hi + CALIBRATION_BRACKET).min(QualityLevel::MAX));
    dedup_sorted(qs)
}

fn calibrate(config: &RunConfig, sequence: &[FramePlane], grid: &[u8]) -> Result<(PriorModel, Vec<DepthAreaStats>)> {
    let qs: Vec<QualityLevel> = grid.iter().map(|&q| QualityLevel::new(q)).collect::<Result<_>>()?;
    let stats = calibration_samples(
        sequence,
        &qs,
        config.schedule.special_period,
        &config.schedule,
        &config.cost_model,
    )?;
    Ok((fit_from_stats(&stats)?, stats))
}

/// Calibrates a prior on the reference and local Qs and writes it as CSV.
pub fn cmd_calibrate(config: &RunConfig, out: &Path) -> Result<PriorModel> {
    config.schedule.validate()?;
    config.cost_model.validate()?;
    let sequence = config.load_sequence()?;
    let mut grid = config.q_locals.clone();
    grid.push(config.q_reference);
    let grid = dedup_sorted(grid);
    let (prior, stats) = calibrate(config, &sequence, &grid)?;
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    prior.write_csv(BufWriter::new(File::create(out)?))?;
    let stats_path = out.with_extension("stats.csv");
    write_depth_stats(&stats_path, &stats.iter().map(|s| ("calibration", s.clone())).collect::<Vec<_>>())?;
    Ok(prior)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InstanceSummary {
    pub q: u8,
    pub mode: String,
    pub frames: usize,
    pub leaf_evaluations: u64,
    pub rate_proxy: f64,
    pub distortion: f64,
    pub rd_bits: f64,
    pub mean_psnr: f64,
    pub gated_blocks: usize,
    pub early_terminations: usize,
}

impl InstanceSummary {
    pub fn of(r: &InstanceResult) -> Self {
        Self {
            q: r.q.q(),
            mode: r.mode.name().to_string(),
            frames: r.frames.len(),
            leaf_evaluations: r.leaf_evaluations_total,
            rate_proxy: r.rate_proxy_total,
            distortion: r.distortion_total,
            rd_bits: r.rd_bits_total,
            mean_psnr: r.mean_psnr(),
            gated_blocks: r.gate_log.len(),
            early_terminations: r.early_terminations(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LocalSummary {
    pub q: u8,
    pub result: InstanceSummary,
    pub baseline: InstanceSummary,
    pub delta_t: f64,
    pub rate_delta: f64,
    pub psnr_delta: f64,
    pub compare: CompareStats,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReportSummary {
    pub config: RunConfig,
    pub note: String,
    pub prior: Option<PriorModel>,
    pub reference: InstanceSummary,
    pub locals: Vec<LocalSummary>,
    pub bd_rate_percent: Option<f64>,
}

pub struct RunOutput {
    pub summary: ReportSummary,
    pub report: MultiRateReport,
    pub prior: Option<PriorModel>,
    pub bounds: Vec<(u8, PruningBoundReport)>,
}

/// Executes a run in memory.
pub fn execute_run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let sequence = config.load_sequence()?;
    let mode = config.encode_mode()?;
    let prior = match (&mode, &config.prior) {
        (EncodeMode::Bayes(_), Some(path)) => Some(PriorModel::read_csv(BufReader::new(File::open(path)?))?),
        (EncodeMode::Bayes(_), None) => Some(calibrate(config, &sequence, &run_calibration_grid(config))?.0),
        _ => None,
    };
    let report = run_multirate(&MultiRateJob {
        sequence: &sequence,
        reference_q: config.reference_quality()?,
        local_qs: config.local_qualities()?,
        mode,
        schedule: config.schedule.clone(),
        params: config.cost_model.clone(),
        prior: prior.as_ref(),
        jobs: config.jobs,
    })?;
    let mut bounds = Vec::new();
    let mut locals = Vec::new();
    for l in &report.locals {
        let base = l.baseline();
        locals.push(LocalSummary {
            q: l.result.q.q(),
            result: InstanceSummary::of(&l.result),
            baseline: InstanceSummary::of(base),
            delta_t: l.delta_t,
            rate_delta: l.rate_delta,
            psnr_delta: l.result.mean_psnr() - base.mean_psnr(),
            compare: depth_compare_stats(&l.result, &report.reference)?,
        });
        if let EncodeMode::Bayes(bp) = mode {
            let b = pruning_bound_report(&sequence, &l.result, &config.schedule, &config.cost_model, bp.tau1)?;
            bounds.push((l.result.q.q(), b));
        }
    }
    let summary = ReportSummary {
        config: config.clone(),
        note: PROXY_NOTE.to_string(),
        prior: prior.clone(),
        reference: InstanceSummary::of(&report.reference),
        locals,
        bd_rate_percent: report.bd_rate,
    };
    Ok(RunOutput {
        summary,
        report,
        prior,
        bounds,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

fn write_depth_stats(path: &Path, rows: &[(&str, DepthAreaStats)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "instance", "q", "q_index", "frames", "area_d0", "area_d1", "area_d2", "area_d3", "area_d4", "a1", "a2",
        "a3", "a4",
    ])?;
    for (name, s) in rows {
        let mut rec = vec![name.to_string(), s.q.to_string(), s.q_index.to_string(), s.frames.to_string()];
        rec.extend(s.area_fraction.iter().map(|v| v.to_string()));
        rec.extend(s.below.iter().map(|v| v.to_string()));
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// Writes the report files of a finished run into `out`.
pub fn write_run_outputs(out: &Path, run: &RunOutput) -> Result<()> {
    fs::create_dir_all(out)?;
    write_json(&out.join("report.json"), &run.summary)?;

    let mut rd = csv_writer(&out.join("rd_points.csv"))?;
    rd.write_record(["instance", "q", "mode", "rate_proxy", "psnr"])?;
    let mut instances: Vec<(&str, &InstanceResult)> = vec![("reference", &run.report.reference)];
    for l in &run.report.locals {
        instances.push(("local", &l.result));
        if let Some(b) = &l.baseline {
            instances.push(("baseline", b));
        }
    }
    for (name, r) in &instances {
        rd.serialize((name, r.q.q(), r.mode.name(), r.rate_proxy_total, r.mean_psnr()))?;
    }
    rd.flush()?;

    let mut fr = csv_writer(&out.join("frames.csv"))?;
    fr.write_record([
        "instance", "q", "mode", "frame", "special", "frame_q", "leaf_evaluations", "rate_proxy", "distortion", "psnr",
    ])?;
    for (name, r) in &instances {
        for (f, psnr) in r.frames.iter().zip(&r.psnr_per_frame) {
            fr.serialize((
                name,
                r.q.q(),
                r.mode.name(),
                f.frame_index,
                f.special,
                f.q.q(),
                f.leaf_evaluations,
                f.rate_proxy,
                f.distortion,
                psnr,
            ))?;
        }
    }
    fr.flush()?;

    let depth_rows: Vec<(&str, DepthAreaStats)> =
        instances.iter().map(|(n, r)| (*n, depth_area_stats(r))).collect();
    write_depth_stats(&out.join("depth_stats.csv"), &depth_rows)?;

    let mut cmp = csv_writer(&out.join("compare_stats.csv"))?;
    cmp.write_record(["q", "remote_shallower", "equal", "remote_deeper"])?;
    for l in &run.summary.locals {
        cmp.serialize((l.q, l.compare.remote_shallower, l.compare.equal, l.compare.remote_deeper))?;
    }
    cmp.flush()?;

    let bayes_locals: Vec<&InstanceResult> = run
        .report
        .locals
        .iter()
        .map(|l| &l.result)
        .filter(|r| matches!(r.mode, EncodeMode::Bayes(_)))
        .collect();
    if !bayes_locals.is_empty() {
        let mut h = csv_writer(&out.join("posterior_hist.csv"))?;
        h.write_record(["q", "bin_lo", "bin_hi", "count", "density"])?;
        for r in &bayes_locals {
            if r.posterior_samples.is_empty() {
                continue;
            }
            let hist = posterior_histogram(&r.posterior_samples, DEFAULT_BINS)?;
            for (i, (&c, &d)) in hist.counts.iter().zip(&hist.density).enumerate() {
                h.serialize((r.q.q(), hist.edges[i], hist.edges[i + 1], c, d))?;
            }
        }
        h.flush()?;

        let mut t = BufWriter::new(File::create(out.join("tables.csv"))?);
        for r in &bayes_locals {
            if let Some(tables) = &r.tables {
                writeln!(t, "# q={}", r.q.q())?;
                tables.write_csv(&mut t)?;
            }
        }
        t.flush()?;

        let bounds: Vec<serde_json::Value> = run
            .bounds
            .iter()
            .map(|(q, b)| serde_json::json!({ "q": q, "note": PROXY_NOTE, "report": b }))
            .collect();
        write_json(&out.join("bound_report.json"), &bounds)?;
    }
    if let Some(p) = &run.prior {
        p.write_csv(BufWriter::new(File::create(out.join("prior.csv"))?))?;
    }

    let timing: Vec<serde_json::Value> = run
        .report
        .locals
        .iter()
        .map(|l| {
            serde_json::json!({
                "q": l.result.q.q(),
                "seconds": l.result.elapsed.as_secs_f64(),
                "baseline_seconds": l.baseline().elapsed.as_secs_f64(),
                "wall_clock_saving": wall_clock_saving(&l.result, l.baseline()),
            })
        })
        .collect();
    write_json(
        &out.join("timing.json"),
        &serde_json::json!({
            "reference_seconds": run.report.reference.elapsed.as_secs_f64(),
            "locals": timing,
        }),
    )?;
    Ok(())
}

pub fn cmd_run(config: &RunConfig, out: &Path) -> Result<RunOutput> {
    let run = execute_run(config)?;
    write_run_outputs(out, &run)?;
    Ok(run)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SweepRow {
    pub tau1: f64,
    pub q: u8,
    pub delta_t: f64,
    pub rate_delta: f64,
    pub psnr_delta: f64,
    pub bd_rate_percent: Option<f64>,
}

/// One Bayes run per threshold (each written to `out/tau1_<v>/`) plus a
/// combined `sweep.csv`.
pub fn cmd_sweep(config: &RunConfig, tau1s: &[f64], out: &Path) -> Result<Vec<SweepRow>> {
    if tau1s.is_empty() {
        return Err(Error::InvalidParam("sweep needs at least one tau1 value".into()));
    }
    let mut rows = Vec::new();
    for &tau1 in tau1s {
        let cfg = RunConfig {
            tau1,
            mode: ModeName::Bayes,
            ..config.clone()
        };
        let run = cmd_run(&cfg, &out.join(format!("tau1_{tau1}")))?;
        for l in &run.summary.locals {
            rows.push(SweepRow {
                tau1,
                q: l.q,
                delta_t: l.delta_t,
                rate_delta: l.rate_delta,
                psnr_delta: l.psnr_delta,
                bd_rate_percent: run.summary.bd_rate_percent,
            });
        }
    }
    fs::create_dir_all(out)?;
    let mut w = csv_writer(&out.join("sweep.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}

/// Reads `report.json` back and returns the configuration it embeds.
pub fn config_from_report(path: &Path) -> Result<RunConfig> {
    let summary: ReportSummary = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    Ok(summary.config)
}
