//! Command-line front end for changepoint inference: data ingestion, run
//! configuration, execution and machine-readable outputs.

pub mod config;
pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod output;
pub mod run;
