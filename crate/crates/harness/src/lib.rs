//! Experiment harness: configuration, runs over seeds, baselines,
//! reference-front caching, record export and summaries.

pub mod config;
mod error;
pub mod record;
pub mod reference;
pub mod run;
pub mod summary;

pub use config::{Algorithm, Format, RunConfig};
pub use error::{HarnessError, Result};
pub use record::RunRecord;
pub use run::{run, run_to_dir};
