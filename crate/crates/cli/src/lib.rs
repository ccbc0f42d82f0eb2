//! Shared pieces of the `catecon` command-line tool: the report model
//! every verb emits and the serde schemas of the CLI's own input
//! files.  Kept in a library so integration tests can parse the
//! binary's structured output back into the same types.

pub mod inputs;
pub mod report;
