//! Library surface of the `satrep` binary: problem-file schema, report
//! rendering, and the command implementations.

pub mod commands;
pub mod problem;
pub mod report;
