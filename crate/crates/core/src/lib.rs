//! Core algorithms for explainable benchmarking of particle swarm optimization.
//!
//! Everything in this crate is pure computation over `alloc` collections:
//! the BBOB-style function suite, the PSO configuration grid, swarm
//! topologies, the swarm itself, anytime performance scoring, landscape
//! features, tree surrogates with exact TreeSHAP, and the configuration
//! learner. File formats, the experiment runner and the CLI live in the
//! `psox` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bbob;
pub mod config;
pub mod ela;
mod error;
pub mod explain;
pub mod learner;
pub mod linalg;
pub mod metrics;
pub mod seed;
pub mod stats;
pub mod swarm;
pub mod topology;

pub use error::{Error, Result};
