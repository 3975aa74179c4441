//! Experiment runner around the hard-rod toolkit: config parsing, CSV and
//! plot-script emission, and deterministic run manifests.

pub mod config;
pub mod manifest;
pub mod plot;
pub mod runner;
