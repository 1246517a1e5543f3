//! Configuration, experiment drivers and file output for the `hn` CLI.

pub mod config;
pub mod drivers;
mod error;
pub mod manufactured;
pub mod record;

pub use config::{Experiment, Mode, RunConfig};
pub use error::{HarnessError, Result};
pub use record::{Check, ResultRecord, Table};
