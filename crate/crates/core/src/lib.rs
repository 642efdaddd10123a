//! Registration of parametric garment templates to single garment photographs.
//!
//! The crate is `no_std` and needs only `alloc`. It contains the skinned
//! garment model, image-space machinery (segmentation, exact distance
//! transforms, pyramids), a small software rasterizer, the two-stage
//! silhouette fitting, UV texture transfer, the shape-context + TPS baseline
//! and a deterministic synthetic scene generator used to verify all of it.
//!
//! File formats, PNG IO and the command line live in the `garmfit` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baseline;
mod error;
pub mod fitting;
pub mod geom;
pub mod imagery;
pub mod linalg;
pub mod model;
pub mod render;
pub mod surfmap;
pub mod synth;

pub use error::{Error, Result};
