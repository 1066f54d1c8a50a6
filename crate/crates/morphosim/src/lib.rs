//! Driver for `morphosim-core`: configuration files, experiment commands,
//! CSV/OBJ output and the verification suite.

pub mod commands;
pub mod config;
pub mod io;
pub mod manifest;
pub mod presets;
pub mod verify;

pub use commands::CliError;
