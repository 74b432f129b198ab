//! Experiment harness: statistical checks, exact oracles, experiment
//! configuration and execution, traffic audits, and report rendering.

pub mod audit;
pub mod config;
pub mod experiment;
pub mod oracles;
pub mod report;
pub mod stats;
