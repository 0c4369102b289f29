//! CLI plumbing for the `splitci` binary: scenario files, command
//! implementations, deterministic serialization, and the verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error, 3 numerical
//! error.

pub mod app;
pub mod commands;
pub mod jsonfmt;
pub mod scenario;
pub mod verify;

pub use app::run;

/// Process exit codes shared by all subcommands.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const INPUT_ERROR: i32 = 2;
    pub const NUMERICAL_ERROR: i32 = 3;
}
