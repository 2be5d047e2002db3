use rand::Rng;
use rand_distr::StandardNormal;

use super::raster::RasterImage;
use crate::stream;

/// Deterministic natural-looking test image: a gradient plus a few
/// low-frequency waves and mild grain, kept away from the clipping range.
pub fn synthetic_image(width: usize, height: usize, channels: usize, seed: u64) -> RasterImage {
    let mut rng = stream::substream(seed, "synthetic-image", (width as u64) << 32 | height as u64);
    let waves: Vec<[f64; 4]> = (0..4)
        .map(|_| {
            [
                rng.random_range(0.5..3.0),
                rng.random_range(0.5..3.0),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(5.0..15.0),
            ]
        })
        .collect();
    let (gx, gy) = (rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0));
    let tints: Vec<f64> = (0..channels).map(|_| rng.random_range(-20.0..20.0)).collect();
    let mut pixels = Vec::with_capacity(width * height * channels);
    for y in 0..height {
        let fy = y as f64 / height as f64;
        for x in 0..width {
            let fx = x as f64 / width as f64;
            let mut base = 128.0 + gx * (fx - 0.5) + gy * (fy - 0.5);
            for w in &waves {
                base += w[3] * (std::f64::consts::TAU * (w[0] * fx + w[1] * fy) + w[2]).cos();
            }
            for tint in &tints {
                let grain: f64 = rng.sample(StandardNormal);
                pixels.push((base + tint + 2.0 * grain).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RasterImage::new(width, height, channels, pixels).expect("shape is consistent by construction")
}
