//! Simulation of flux-feedback microwave quantum memristors.

pub mod circuit;
pub mod config;
pub mod correlations;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod fock;
pub mod hysteresis;
pub mod output;
pub mod runner;
pub mod sparse;

pub use error::{Error, Result};
