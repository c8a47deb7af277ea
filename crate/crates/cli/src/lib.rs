//! Standard-library companion to `dbu-core`: the JSON instance format,
//! seeded QBF generators, harness reports and the `dbu` command line.

pub mod commands;
pub mod format;
pub mod random;
pub mod report;

pub use format::{load_path, load_str, save_string, LoadError, Loaded};
