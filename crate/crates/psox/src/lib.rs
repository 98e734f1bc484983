//! Experiment runner, file formats and command-line front end for
//! explainable PSO benchmarking.
//!
//! The algorithms live in `psox_core`; this crate adds the plan/checkpoint
//! machinery, CSV/JSON/SVG output and the `psox` binary.

pub mod cli;
pub mod commands;
pub mod error;
pub mod formats;
pub mod model;
pub mod plan;
pub mod runner;
pub mod svg;

pub use error::{Error, Result};
