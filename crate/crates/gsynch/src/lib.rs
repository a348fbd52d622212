//! File formats, experiment configuration, suites and the parallel drivers
//! behind the `gsynch` command line tool.

pub mod config;
pub mod error;
pub mod io;
pub mod phase;
pub mod pool;
pub mod report;
pub mod suites;

pub use error::{Error, Result};
