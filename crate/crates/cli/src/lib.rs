//! Command-line harness for `mico-core`: instance files, solver commands and
//! the seeded experiment suites behind `mico bench`.

pub mod brute;
pub mod commands;
pub mod instance;
pub mod suites;

pub use commands::{run, Cli, CliError, Command};
pub use instance::{generate, load_instance, parse_instance, print_instance, Instance};
pub use suites::{Suite, SuiteConfig, SuiteOutput};
