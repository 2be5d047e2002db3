//! Spread-spectrum embedding of a unit vector into the luma plane.

use super::carriers::CarrierSet;
use super::raster::{mse, RasterImage};
use crate::error::{Error, Result};
use crate::rotation::SecretKey;
use crate::sphere::UnitVector;

/// Smallest accepted image side.
pub const MIN_SIDE: usize = 32;
pub const MIN_PSNR_DB: f64 = 30.0;
pub const MAX_PSNR_DB: f64 = 60.0;

const BISECTION_STEPS: usize = 60;

fn check_size(img: &RasterImage) -> Result<()> {
    if img.width() < MIN_SIDE || img.height() < MIN_SIDE {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min: MIN_SIDE,
        });
    }
    Ok(())
}

/// Adds `alpha * field` to the luma of `img` (every channel for RGB),
/// rounding and clipping each sample.
fn apply(img: &RasterImage, field: &[f64], alpha: f64) -> RasterImage {
    let ch = img.channels();
    let mut out = img.clone();
    for (px, &w) in out.pixels_mut().chunks_exact_mut(ch).zip(field) {
        let delta = alpha * w;
        for s in px {
            *s = (*s as f64 + delta).round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}

/// Embeds `v` with amplitude set for `target_psnr_db`.
///
/// The watermark is `W = alpha * sum_i v_i P_i`. With unit-norm carriers the
/// analytic amplitude is `alpha = sqrt(H W MSE)`, `MSE = 255^2 10^(-psnr/10)`;
/// starting from there, `alpha` is refined by bisection on the achieved MSE
/// (which is non-decreasing in `alpha`) so that rounding and clipping are
/// absorbed.
pub fn embed(img: &RasterImage, v: &UnitVector, key: &SecretKey, target_psnr_db: f64) -> Result<RasterImage> {
    check_size(img)?;
    if !(MIN_PSNR_DB..=MAX_PSNR_DB).contains(&target_psnr_db) {
        return Err(Error::Domain(format!(
            "target PSNR {target_psnr_db} dB outside [{MIN_PSNR_DB}, {MAX_PSNR_DB}]"
        )));
    }
    let carriers = CarrierSet::new(key, v.dim(), img.width(), img.height())?;
    let field = carriers.synthesize(v.components())?;
    let target_mse = 255.0 * 255.0 * 10f64.powf(-target_psnr_db / 10.0);
    let achieved = |alpha: f64| mse(img.pixels(), apply(img, &field, alpha).pixels());

    let alpha0 = ((img.width() * img.height()) as f64 * target_mse).sqrt();
    let mut lo = 0.0;
    let mut hi = alpha0;
    let mut hi_mse = achieved(hi);
    let mut doublings = 0;
    while hi_mse < target_mse && doublings < 16 {
        lo = hi;
        hi *= 2.0;
        hi_mse = achieved(hi);
        doublings += 1;
    }
    if hi_mse < target_mse {
        // saturated image; cannot reach the target distortion
        return Ok(apply(img, &field, hi));
    }
    let mut lo_mse = achieved(lo);
    for _ in 0..BISECTION_STEPS {
        if (hi_mse - target_mse) / target_mse < 1e-4 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let m = achieved(mid);
        if m < target_mse {
            lo = mid;
            lo_mse = m;
        } else {
            hi = mid;
            hi_mse = m;
        }
    }
    let alpha = if (target_mse - lo_mse) < (hi_mse - target_mse) { lo } else { hi };
    Ok(apply(img, &field, alpha))
}

/// `L - box3(L)` with edge clamping.
pub fn high_pass(plane: &[f64], width: usize, height: usize) -> Vec<f64> {
    let idx = |x: usize, y: usize| y * width + x;
    let mut rows = vec![0.0; plane.len()];
    for y in 0..height {
        for x in 0..width {
            let l = x.saturating_sub(1);
            let r = (x + 1).min(width - 1);
            rows[idx(x, y)] = plane[idx(l, y)] + plane[idx(x, y)] + plane[idx(r, y)];
        }
    }
    let mut out = vec![0.0; plane.len()];
    for y in 0..height {
        let u = y.saturating_sub(1);
        let d = (y + 1).min(height - 1);
        for x in 0..width {
            let blur = (rows[idx(x, u)] + rows[idx(x, y)] + rows[idx(x, d)]) / 9.0;
            out[idx(x, y)] = plane[idx(x, y)] - blur;
        }
    }
    out
}

/// Correlates the high-passed luma with the keyed carriers and normalizes.
/// An image with no high-frequency content at all (e.g. a flat fill)
/// correlates to zero; the first basis vector is returned in that case.
pub fn extract(img: &RasterImage, key: &SecretKey, dim: usize) -> Result<UnitVector> {
    check_size(img)?;
    let carriers = CarrierSet::new(key, dim, img.width(), img.height())?;
    extract_with(img, &carriers)
}

/// [`extract`] with carriers built once and reused.
pub fn extract_with(img: &RasterImage, carriers: &CarrierSet) -> Result<UnitVector> {
    check_size(img)?;
    if (img.width(), img.height()) != (carriers.width(), carriers.height()) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} image for {}x{} carriers",
            img.width(),
            img.height(),
            carriers.width(),
            carriers.height()
        )));
    }
    let hp = high_pass(&img.luma(), img.width(), img.height());
    let raw = carriers.correlate(&hp)?;
    UnitVector::normalize(raw).or_else(|_| UnitVector::basis(carriers.dim(), 0))
}
