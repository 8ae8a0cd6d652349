//! Black-box benchmark problems, exploratory landscape analysis and
//! optimizer benchmarking statistics.
//!
//! The crate is organised bottom-up:
//!
//! * [`problem`] defines box domains and the [`Problem`] trait shared by all
//!   objective functions.
//! * [`bbob`] and [`hpo`] provide the two problem families.
//! * [`design`] builds initial designs and normalizes samples.
//! * [`ela`] computes landscape features on a sample.
//! * [`optimizers`] runs budgeted black-box minimizers and records traces.
//! * [`metrics`] and [`analysis`] aggregate runs and feature matrices.
//!
//! Batch work (feature extraction over many problems, optimizer campaigns,
//! cross-validation) goes through [`parallel`], which uses rayon when the
//! `parallel` feature is enabled and falls back to plain iteration otherwise.

pub mod analysis;
pub mod bbob;
pub mod design;
pub mod ela;
pub mod hpo;
pub mod metrics;
pub mod optimizers;
pub mod parallel;
pub mod problem;
pub mod stats;

pub use problem::{BoxDomain, DomainError, EvalError, Problem};
