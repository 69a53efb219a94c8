//! File formats, experiment harness and command line on top of `msb-core`.

pub mod bench;
pub mod checkpoint;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod io;

pub use error::{MsbError, Result};
