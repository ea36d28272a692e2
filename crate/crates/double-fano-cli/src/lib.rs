//! Library surface of the command-line front end: configuration schema,
//! bit-stable file formats, and run orchestration. The `double-fano`
//! binary is a thin argument-parsing shell over these modules.

pub mod config;
pub mod output;
pub mod runner;
