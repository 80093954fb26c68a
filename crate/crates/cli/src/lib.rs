//! Library side of the `classify` command: configuration, data ingest,
//! execution and report rendering.

pub mod config;
pub mod error;
pub mod ingest;
pub mod plot;
pub mod report;
pub mod run;

pub use config::{Format, McmcSettings, Method, RunConfig};
pub use error::{CliError, Result};
pub use report::Report;
pub use run::run;
