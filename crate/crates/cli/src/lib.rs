//! Experiment driver library: configuration, preset catalogs, pipelines,
//! and artifact serialization for the numerical laboratory.

pub mod catalog;
pub mod config;
pub mod dump;
pub mod pipeline;
pub mod report;
