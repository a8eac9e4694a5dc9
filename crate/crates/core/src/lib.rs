//! Analysis and simulation of mmWave heterogeneous networks with integrated
//! access and backhaul (IAB).
//!
//! A macro base station (ABS) at the center of a disk-shaped cell serves
//! users directly and backhauls `n` small cells (SBSs) over the same mmWave
//! band. Each SBS sits at the center of a user hotspot. The crate evaluates
//! the downlink SNR coverage and rate coverage of the typical user in closed
//! form by quadrature ([`analytics`]) and checks them by Monte-Carlo
//! simulation of the full network ([`simulator`]), for equal and load-based
//! partitions of the backhaul bandwidth.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod geometry;
pub mod load_dist;
pub mod params;
pub mod quadrature;
pub mod simulator;

pub use analytics::{Analysis, CoverageThresholds, PartitionStrategy, RateCoverage};
pub use error::{Error, Result};
pub use exec::Execution;
pub use experiment::{load_config, ExperimentConfig};
pub use params::{QuadratureSpec, SystemConfig, SystemParams};
