//! Latent-vector watermarking toolkit.
//!
//! Messages are mapped to unit vectors on `S^{d-1}`, hidden behind a
//! secret-key rotation, carried through a (simulated or raster-image)
//! channel, and scored on arrival with a spherical p-value.

pub mod error;
pub mod stream;
pub mod sphere;
mod linalg;
pub mod rotation;
pub mod codec;
pub mod special;
pub mod confidence;
pub mod channel;
pub mod image;
pub mod analysis;

pub use error::{Error, Result};
