//! Library half of the `gfib` binary: subcommand implementations and the
//! machine-readable record formats, exposed so integration tests can parse
//! what the binary prints.

pub mod commands;
pub mod record;
