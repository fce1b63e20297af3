//! Batch front end for `sscover`: generate instances, run the one-pass
//! summary, extract and validate certificates, and report against an
//! offline oracle.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{cmd_generate, cmd_run, cmd_sweep, cmd_verify, RunOutcome, VerifyOutcome};
pub use config::{parse_epsilons, OracleConfig, RunConfig, Source};
pub use error::CliError;
pub use report::{Report, Verdict};
