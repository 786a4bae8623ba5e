//! Front end for `klfield`: one JSON config in, CSV and JSON datasets out.
//!
//! Exit codes: 0 success, 1 a statistical check tripped, 2 bad config, usage
//! or I/O, 3 numeric failure.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{RunConfig, REFERENCE_SEED};
pub use error::{CliError, EXIT_CONFIG, EXIT_FLAGGED, EXIT_NUMERIC, EXIT_OK};
pub use run::{run, Outcome, Task};
