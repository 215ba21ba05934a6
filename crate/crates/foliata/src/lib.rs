//! Command-line driver for `foliata-core`: subcommands, JSON and CSV
//! reports, the field file format and OBJ mesh export.

pub mod cli;
pub mod io;
