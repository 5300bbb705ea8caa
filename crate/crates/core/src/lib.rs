//! Quantal response statistical equilibrium (QRSE) modelling of district-level
//! educational returns.
//!
//! The crate covers the whole estimation pipeline:
//!
//! - [`model`]: the four-parameter density `Γ = [T, S, μ, α]`, its partition function,
//!   log-likelihood and bin probabilities.
//! - [`synthetic`]: seeded inverse-CDF sampling from a fitted or hypothetical density.
//! - [`ingest`]: district fiscal CSV parsing, the educational-returns variable, cleaning
//!   and histograms.
//! - [`fit`]: KL-divergence MAP estimation with a transformed Nelder–Mead simplex.
//! - [`mcmc`]: random-walk Metropolis–Hastings over the posterior of `Γ`.
//! - [`diagnostics`]: split R̂, highest-density intervals, modes and the summary report.
//! - [`export`]: trace files and plot-ready CSV tables.
//! - [`cli`]: the `qrse` command-line pipeline.

#![forbid(unsafe_code)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod export;
pub mod fit;
pub mod ingest;
pub mod mcmc;
pub mod model;
mod simplex;
pub mod synthetic;

pub use diagnostics::{FitReport, ParameterSummary};
pub use error::{Error, Result};
pub use fit::{FitOptions, MapResult};
pub use ingest::{Binning, CleanedSample, DistrictRecord, HistogramSpec};
pub use mcmc::{ChainConfig, PosteriorDraws, PriorSpec};
pub use model::{DensityTable, EvalGrid, QrseParams};
