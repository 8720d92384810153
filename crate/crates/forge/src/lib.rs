//! Batch front-end for `anomaly-core`.
//!
//! A job is a JSON document naming a model and tolerances; [`run::run`]
//! executes one command on it and returns a [`report::Report`] plus
//! optional CSV traces, which [`output`] writes atomically.

pub mod job;
pub mod output;
pub mod report;
pub mod run;
pub mod suite;

pub use job::{parse_job, Command, JobSpec, UsageError};
pub use report::{Report, SCHEMA_VERSION};
pub use run::{run, Outcome};
