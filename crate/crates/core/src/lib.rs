//! Inference for one-parameter Ising models on weighted graphs.
//!
//! The model places mass `2^{-n} exp(beta/2 * s'Js - F(beta))` on spin
//! vectors `s` in `{-1, +1}^n`, where `J` is a symmetric coupling matrix
//! with zero diagonal. This crate covers the full desk workflow around that
//! family:
//!
//! - [`coupling`]: matrix ensembles (complete graph, scaled regular and
//!   Erdős–Rényi graphs, a two-block example, file-loaded networks) and
//!   their spectra;
//! - [`gibbs`]: exact sampling by enumeration and Glauber dynamics;
//! - [`mod@mple`]: the maximum pseudolikelihood estimate of the inverse
//!   temperature by monotone root finding;
//! - [`partition`]: the exact log-partition function and Gaussian,
//!   Rademacher, and mean-field bounds;
//! - [`mptest`]: the weighted chi-square limit law of the sufficient
//!   statistic and the power of the most powerful test in the
//!   high-temperature regime;
//! - [`bootstrap`]: parametric-bootstrap standard errors and simulation
//!   p-values for network data.
//!
//! Everything is deterministic given the seeds carried in configuration
//! values; parallel code paths produce identical output under any thread
//! schedule.

pub mod bootstrap;
pub mod coupling;
pub mod gibbs;
pub mod mple;
pub mod mptest;
pub mod partition;
pub mod seed;

pub use bootstrap::{analyze_network, FitReport, NullStatistic, StatusTally};
pub use coupling::{CouplingError, CouplingMatrix, LabeledGraph, MatrixKind, Spectrum};
pub use gibbs::{ChainConfig, GlauberChain, Init, Scan, SpinConfig};
pub use mple::{mple, mple_default, MpleOptions, MpleResult, MpleStatus};
pub use mptest::{EmpiricalPowerConfig, LimitLaw, PowerCurve, SamplerKind};
pub use partition::{partition_report, MeanFieldMode, PartitionReport};
