//! Command-line workbench around `cosetlab-core`: argument parsing, config
//! files, key files, a parallel trial runner and result formatting.

pub mod cli;
pub mod config;
pub mod files;
pub mod output;
pub mod runner;

use std::fmt;

/// A problem with the user's input that the core library does not see,
/// such as a bad config file. Maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
