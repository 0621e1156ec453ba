//! File formats, the Monte Carlo harness and the `mif` command line on top
//! of `mif-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod graph_io;
pub mod harness;
pub mod plot;

pub use error::{Error, Result};
