//! Quantitative analysis of retinal segmentation masks and saliency fields.

pub mod caliber;
pub mod camscore;
pub mod error;
pub mod learn;
pub mod morphometry;
pub mod raster;
pub mod stats;
pub mod util;
pub mod vessel;

pub use error::{Error, Result};
