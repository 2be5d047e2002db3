//! Raster-image channel: spread-spectrum embedding on real pixels.

mod attack;
mod carriers;
mod raster;
mod spread;
mod synthetic;

pub use attack::{attack, quant_table, Transform, TRANSFORM_NAMES};
pub use carriers::CarrierSet;
pub use raster::{psnr, RasterImage};
pub use spread::{embed, extract, extract_with, high_pass, MAX_PSNR_DB, MIN_PSNR_DB, MIN_SIDE};
pub use synthetic::synthetic_image;
