//! Multi-rate encoding simulator with Bayesian early termination of
//! quadtree 4-split searches.
//!
//! A reference instance (lowest Q) is encoded with exhaustive partition
//! search. Local instances at higher Q reuse its block structures, either by
//! deterministic pruning or by estimating the posterior probability that a
//! block splits from the split degrees observed in the reference frame and
//! in the latest fully searched special frame of the same instance.
//!
//! Modules, bottom up:
//! - [`frame_io`]: Y4M / raw I420 ingestion and synthetic sequences.
//! - [`rdo`]: partition geometry, surrogate RD cost, gated and exhaustive search.
//! - [`inference`]: prior, occurrence tables, posterior and the split gate.
//! - [`multirate`]: frame schedule and reference/local orchestration.
//! - [`metrics`]: PSNR, BD-rate, time saving and block-structure statistics.
//! - [`experiment`]: run configuration, calibration, runs and sweeps with
//!   their on-disk reports (the `mrbayes` binary is a thin wrapper).

pub mod clips;
pub mod error;
pub mod experiment;
pub mod frame_io;
pub mod inference;
pub mod metrics;
pub mod multirate;
pub mod rdo;
pub mod rng;

pub use error::{Error, ErrorCategory, Result};
pub use frame_io::{FramePlane, Pattern, SynthSpec};
pub use inference::{BayesParams, CountTables, GateDecision, PriorModel};
pub use multirate::{encode_instance, run_multirate, EncodeMode, InstanceResult, MultiRateJob, MultiRateReport, Schedule};
pub use rdo::{BlockGeom, CostModelParams, EncodedFrame, PartitionChoice, PartitionTree, QualityLevel};
