//! File formats, batch pipeline and command line around `garmfit-core`.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod formats;
pub mod image_io;
pub mod model_io;
pub mod pipeline;
pub mod suite;

pub use error::{Error, Result};
