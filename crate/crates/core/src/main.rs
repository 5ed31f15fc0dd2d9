use std::path::PathBuf;
use std::process::ExitCode;

use bayes_multirate::clips;
use bayes_multirate::experiment::{
    cmd_calibrate, cmd_run, cmd_sweep, config_from_report, InputSource, ModeName, RunConfig, DEFAULT_TAU1,
    DEFAULT_TAU2, TAU1_SWEEP,
};
use bayes_multirate::{Error, Pattern, Result, Schedule, SynthSpec};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "mrbayes", version, about = "Multi-rate partition search with Bayesian split pruning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a depth prior on Full encodes and write it as CSV.
    Calibrate(Common),
    /// Encode the reference and local instances and write reports.
    Run(Common),
    /// Repeat a Bayes run for several tau1 values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma separated tau1 values.
        #[arg(long, value_delimiter = ',', num_args = 0.., default_values_t = TAU1_SWEEP.to_vec())]
        taus: Vec<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Y4M file, or raw I420/luma file when --width and --height are given.
    #[arg(long, conflicts_with = "synth")]
    input: Option<PathBuf>,
    /// `clip:drift|pan|bubbles` or a pattern such as `moving_texture:1:0`.
    #[arg(long)]
    synth: Option<String>,
    #[arg(long, default_value_t = 1)]
    synth_seed: u64,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Raw input holds luma only.
    #[arg(long)]
    gray: bool,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long, default_value_t = 22)]
    qref: u8,
    #[arg(long, value_delimiter = ',', default_values_t = vec![27u8, 32, 37, 42])]
    qlocals: Vec<u8>,
    #[arg(long, value_enum, default_value_t = ModeName::Bayes)]
    mode: ModeName,
    #[arg(long, default_value_t = DEFAULT_TAU1)]
    tau1: f64,
    #[arg(long, default_value_t = DEFAULT_TAU2)]
    tau2: f64,
    #[arg(long, default_value_t = Schedule::default().special_period)]
    period: usize,
    #[arg(long, default_value_t = Schedule::default().special_q_offset)]
    qoffset: u8,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory (run, sweep) or prior CSV path (calibrate).
    #[arg(long)]
    out: PathBuf,
    /// Prior CSV to use instead of calibrating.
    #[arg(long)]
    prior: Option<PathBuf>,
    /// Take the configuration from a previous report.json; other
    /// configuration flags are ignored.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

fn synth_input(c: &Common, s: &str) -> Result<InputSource> {
    let mut spec = match s.strip_prefix("clip:") {
        Some(name) => clips::by_name(name).ok_or_else(|| Error::InvalidSpec(format!("unknown clip {name:?}")))?,
        None => {
            let pattern: Pattern = s.parse()?;
            SynthSpec {
                width: c.width.unwrap_or(192),
                height: c.height.unwrap_or(128),
                frame_count: c.frames.unwrap_or(clips::BUNDLED_FRAMES),
                pattern,
                seed: c.synth_seed,
            }
        }
    };
    if s.starts_with("clip:") {
        if let Some(f) = c.frames {
            spec.frame_count = f;
        }
    }
    Ok(InputSource::Synth { spec })
}

fn build_config(c: &Common) -> Result<RunConfig> {
    if let Some(path) = &c.manifest {
        let mut cfg = config_from_report(path)?;
        cfg.jobs = c.jobs;
        return Ok(cfg);
    }
    let input = match (&c.input, &c.synth) {
        (Some(path), _) => match (c.width, c.height) {
            (Some(width), Some(height)) => InputSource::Raw {
                path: path.clone(),
                width,
                height,
                gray: c.gray,
            },
            (None, None) => InputSource::Y4m { path: path.clone() },
            _ => return Err(Error::InvalidParam("raw input needs both --width and --height".into())),
        },
        (None, Some(s)) => synth_input(c, s)?,
        (None, None) => return Err(Error::InvalidParam("one of --input or --synth is required".into())),
    };
    Ok(RunConfig {
        input,
        frame_limit: c.frames,
        q_reference: c.qref,
        q_locals: c.qlocals.clone(),
        mode: c.mode,
        tau1: c.tau1,
        tau2: c.tau2,
        schedule: Schedule {
            special_period: c.period,
            special_q_offset: c.qoffset,
            ..Schedule::default()
        },
        cost_model: Default::default(),
        seed: c.seed,
        prior: c.prior.clone(),
        jobs: c.jobs.max(1),
    })
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Calibrate(c) => {
            let cfg = build_config(&c)?;
            let prior = cmd_calibrate(&cfg, &c.out)?;
            for (d, l) in prior.lines().iter().enumerate() {
                println!("a{}(q) = {:.6} * q + {:.6}", d + 1, l.slope, l.intercept);
            }
        }
        Command::Run(c) => {
            let cfg = build_config(&c)?;
            let run = cmd_run(&cfg, &c.out)?;
            for l in &run.summary.locals {
                println!(
                    "q={} dT={:+.4} dRate={:+.4} dPSNR={:+.4}",
                    l.q, l.delta_t, l.rate_delta, l.psnr_delta
                );
            }
            if let Some(bd) = run.summary.bd_rate_percent {
                println!("bd_rate={bd:+.4}%");
            }
            println!("wrote {}", c.out.display());
        }
        Command::Sweep { common, taus } => {
            let cfg = build_config(&common)?;
            for r in cmd_sweep(&cfg, &taus, &common.out)? {
                println!("tau1={} q={} dT={:+.4} dRate={:+.4}", r.tau1, r.q, r.delta_t, r.rate_delta);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let cat = e.category();
            eprintln!("error[{}]: {e}", cat.as_str());
            ExitCode::from(cat.exit_code() as u8)
        }
    }
}
