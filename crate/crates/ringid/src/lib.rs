//! File formats, parallel benchmarking and the `ringid` command line on
//! top of [`ringid_core`].

pub mod bench;
pub mod cli;
mod error;
pub mod format;
pub mod report;

pub use error::{Error, Result};
