//! Pixel-domain attacks.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use super::raster::RasterImage;
use crate::error::{Error, Result};
use crate::stream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    Identity,
    Hflip,
    /// Multiplies every sample by the factor.
    Brightness(f64),
    /// Scales around the mean luma.
    Contrast(f64),
    /// Interpolates each channel against the pixel's luma; grayscale is unchanged.
    Saturation(f64),
    /// Adds i.i.d. Gaussian noise with this standard deviation in pixel levels.
    GaussianNoise(f64),
    /// Keeps the central `ratio` of each side, then rescales back bilinearly.
    Crop(f64),
    /// Counter-clockwise rotation about the centre, bilinear, reflect padding.
    Rotate(f64),
    /// 8x8 block DCT of luma quantized with the scaled standard luminance table.
    JpegLike(u8),
    /// Adds a constant to every sample.
    Offset(f64),
}

pub const TRANSFORM_NAMES: &[&str] = &[
    "identity",
    "hflip",
    "brightness",
    "contrast",
    "saturation",
    "gaussian_noise",
    "crop",
    "rotate",
    "jpeg_like",
    "offset",
];

impl Transform {
    pub fn name(&self) -> &'static str {
        match self {
            Transform::Identity => "identity",
            Transform::Hflip => "hflip",
            Transform::Brightness(_) => "brightness",
            Transform::Contrast(_) => "contrast",
            Transform::Saturation(_) => "saturation",
            Transform::GaussianNoise(_) => "gaussian_noise",
            Transform::Crop(_) => "crop",
            Transform::Rotate(_) => "rotate",
            Transform::JpegLike(_) => "jpeg_like",
            Transform::Offset(_) => "offset",
        }
    }

    fn validate(self) -> Result<Self> {
        let bad = |what: &str| Err(Error::TransformParameter(format!("{}: {what}", self)));
        match self {
            Transform::Brightness(f) | Transform::Contrast(f) | Transform::Saturation(f)
                if !(0.5..=2.0).contains(&f) =>
            {
                bad("factor must be in [0.5, 2.0]")
            }
            Transform::GaussianNoise(s) if !(0.0..=64.0).contains(&s) => bad("sigma must be in [0, 64]"),
            Transform::Crop(r) if !(0.5..=1.0).contains(&r) => bad("ratio must be in [0.5, 1.0]"),
            Transform::Rotate(d) if !(-10.0..=10.0).contains(&d) => bad("degrees must be in [-10, 10]"),
            Transform::JpegLike(q) if !(1..=100).contains(&q) => bad("quality must be in [1, 100]"),
            Transform::Offset(d) if !(-255.0..=255.0).contains(&d) => bad("offset must be in [-255, 255]"),
            t => Ok(t),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Identity | Transform::Hflip => write!(f, "{}", self.name()),
            Transform::Brightness(x)
            | Transform::Contrast(x)
            | Transform::Saturation(x)
            | Transform::GaussianNoise(x)
            | Transform::Crop(x)
            | Transform::Rotate(x)
            | Transform::Offset(x) => write!(f, "{}:{}", self.name(), x),
            Transform::JpegLike(q) => write!(f, "{}:{}", self.name(), q),
        }
    }
}

/// Parses `name` or `name:param`.
impl FromStr for Transform {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (name, param) = match text.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (text.trim(), None),
        };
        let number = || -> Result<f64> {
            let p = param.ok_or_else(|| Error::TransformParameter(format!("{name} needs a parameter, e.g. {name}:1.5")))?;
            p.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::TransformParameter(format!("{name}: `{p}` is not a number")))
        };
        let no_param = |t: Transform| match param {
            None => Ok(t),
            Some(p) => Err(Error::TransformParameter(format!("{name} takes no parameter (got `{p}`)"))),
        };
        let t = match name {
            "identity" => no_param(Transform::Identity)?,
            "hflip" => no_param(Transform::Hflip)?,
            "brightness" => Transform::Brightness(number()?),
            "contrast" => Transform::Contrast(number()?),
            "saturation" => Transform::Saturation(number()?),
            "gaussian_noise" => Transform::GaussianNoise(number()?),
            "crop" => Transform::Crop(number()?),
            "rotate" => Transform::Rotate(number()?),
            "jpeg_like" => {
                let q = number()?;
                if q.fract() != 0.0 || !(1.0..=100.0).contains(&q) {
                    return Err(Error::TransformParameter(format!("jpeg_like: quality must be an integer in [1, 100], got {q}")));
                }
                Transform::JpegLike(q as u8)
            }
            "offset" => Transform::Offset(number()?),
            other => {
                return Err(Error::UnknownTransform {
                    name: other.to_string(),
                    valid: TRANSFORM_NAMES.join(", "),
                })
            }
        };
        t.validate()
    }
}

fn to_u8(x: f64) -> u8 {
    x.round().clamp(0.0, 255.0) as u8
}

/// Applies `transform`. `seed` drives the noise of `gaussian_noise` and is
/// ignored by the other transforms.
pub fn attack(img: &RasterImage, transform: &Transform, seed: u64) -> Result<RasterImage> {
    let t = transform.validate()?;
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let px = img.pixels();
    let out: Vec<u8> = match t {
        Transform::Identity => px.to_vec(),
        Transform::Hflip => {
            let mut out = Vec::with_capacity(px.len());
            for row in px.chunks_exact(w * ch) {
                for x in (0..w).rev() {
                    out.extend_from_slice(&row[x * ch..(x + 1) * ch]);
                }
            }
            out
        }
        Transform::Brightness(f) => px.iter().map(|&p| to_u8(p as f64 * f)).collect(),
        Transform::Contrast(f) => {
            let luma = img.luma();
            let mean = luma.iter().sum::<f64>() / luma.len() as f64;
            px.iter().map(|&p| to_u8(mean + f * (p as f64 - mean))).collect()
        }
        Transform::Saturation(f) => {
            if ch == 1 {
                px.to_vec()
            } else {
                let luma = img.luma();
                px.chunks_exact(3)
                    .zip(&luma)
                    .flat_map(|(c, &y)| c.iter().map(move |&p| to_u8(y + f * (p as f64 - y))).collect::<Vec<_>>())
                    .collect()
            }
        }
        Transform::GaussianNoise(sigma) => {
            let mut rng = stream::substream(seed, "attack/gaussian_noise", 0);
            px.iter()
                .map(|&p| to_u8(p as f64 + sigma * rng.sample::<f64, _>(StandardNormal)))
                .collect()
        }
        Transform::Offset(d) => px.iter().map(|&p| to_u8(p as f64 + d)).collect(),
        Transform::Crop(ratio) => crop_rescale(img, ratio),
        Transform::Rotate(deg) => rotate(img, deg),
        Transform::JpegLike(q) => jpeg_like(img, q),
    };
    RasterImage::new(w, h, ch, out)
}

fn sample(img: &RasterImage, x: usize, y: usize, c: usize) -> f64 {
    img.pixels()[(y * img.width() + x) * img.channels() + c] as f64
}

/// Bilinear sample at continuous `(x, y)` already inside `[0, w-1] x [0, h-1]`.
fn bilinear(img: &RasterImage, x: f64, y: f64, c: usize) -> f64 {
    let (w, h) = (img.width(), img.height());
    let x0 = (x.floor() as usize).min(w - 1);
    let y0 = (y.floor() as usize).min(h - 1);
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let (tx, ty) = (x - x0 as f64, y - y0 as f64);
    let top = sample(img, x0, y0, c) * (1.0 - tx) + sample(img, x1, y0, c) * tx;
    let bottom = sample(img, x0, y1, c) * (1.0 - tx) + sample(img, x1, y1, c) * tx;
    top * (1.0 - ty) + bottom * ty
}

fn crop_rescale(img: &RasterImage, ratio: f64) -> Vec<u8> {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let cw = ((w as f64 * ratio).round() as usize).clamp(1, w);
    let chh = ((h as f64 * ratio).round() as usize).clamp(1, h);
    let (x_off, y_off) = ((w - cw) / 2, (h - chh) / 2);
    let (sx, sy) = (cw as f64 / w as f64, chh as f64 / h as f64);
    let mut out = Vec::with_capacity(w * h * ch);
    for y in 0..h {
        let src_y = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (chh - 1) as f64) + y_off as f64;
        for x in 0..w {
            let src_x = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (cw - 1) as f64) + x_off as f64;
            for c in 0..ch {
                out.push(to_u8(bilinear(img, src_x, src_y, c)));
            }
        }
    }
    out
}

/// Mirrors `x` into `[0, n-1]` without repeating the edge sample.
fn reflect(x: f64, n: usize) -> f64 {
    if n == 1 {
        return 0.0;
    }
    let period = 2.0 * (n - 1) as f64;
    let m = x.rem_euclid(period);
    if m > (n - 1) as f64 {
        period - m
    } else {
        m
    }
}

fn rotate(img: &RasterImage, degrees: f64) -> Vec<u8> {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let (sin, cos) = degrees.to_radians().sin_cos();
    let mut out = Vec::with_capacity(w * h * ch);
    for y in 0..h {
        for x in 0..w {
            // inverse map; image y axis points down, so counter-clockwise on
            // screen is clockwise in these coordinates
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            let src_x = reflect(cx + cos * dx - sin * dy, w);
            let src_y = reflect(cy + sin * dx + cos * dy, h);
            for c in 0..ch {
                out.push(to_u8(bilinear(img, src_x, src_y, c)));
            }
        }
    }
    out
}

const LUMA_TABLE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Standard luminance table scaled for `quality` the way libjpeg does it.
pub fn quant_table(quality: u8) -> [f64; 64] {
    let q = quality.clamp(1, 100) as u32;
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut out = [0.0; 64];
    for (o, &t) in out.iter_mut().zip(&LUMA_TABLE) {
        *o = ((t as u32 * scale + 50) / 100).clamp(1, 255) as f64;
    }
    out
}

fn dct_basis() -> [[f64; 8]; 8] {
    let mut m = [[0.0; 8]; 8];
    for (k, row) in m.iter_mut().enumerate() {
        let norm = if k == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
        for (n, v) in row.iter_mut().enumerate() {
            *v = norm * (std::f64::consts::PI * (2 * n + 1) as f64 * k as f64 / 16.0).cos();
        }
    }
    m
}

fn jpeg_like(img: &RasterImage, quality: u8) -> Vec<u8> {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let luma = img.luma();
    let table = quant_table(quality);
    let basis = dct_basis();
    let mut coded = luma.clone();
    let mut block = [[0.0f64; 8]; 8];
    let mut tmp = [[0.0f64; 8]; 8];
    for by in (0..h).step_by(8) {
        for bx in (0..w).step_by(8) {
            for (i, row) in block.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    // edge replication for partial blocks
                    let (y, x) = ((by + i).min(h - 1), (bx + j).min(w - 1));
                    *v = luma[y * w + x] - 128.0;
                }
            }
            // forward: C = B X B^T
            for k in 0..8 {
                for j in 0..8 {
                    tmp[k][j] = (0..8).map(|n| basis[k][n] * block[n][j]).sum();
                }
            }
            for k in 0..8 {
                for l in 0..8 {
                    let c: f64 = (0..8).map(|n| tmp[k][n] * basis[l][n]).sum();
                    let q = table[k * 8 + l];
                    block[k][l] = (c / q).round() * q;
                }
            }
            // inverse: X = B^T C B
            for n in 0..8 {
                for l in 0..8 {
                    tmp[n][l] = (0..8).map(|k| basis[k][n] * block[k][l]).sum();
                }
            }
            for i in 0..8 {
                for j in 0..8 {
                    let (y, x) = (by + i, bx + j);
                    if y < h && x < w {
                        coded[y * w + x] = 128.0 + (0..8).map(|l| tmp[i][l] * basis[l][j]).sum::<f64>();
                    }
                }
            }
        }
    }
    let px = img.pixels();
    let mut out = Vec::with_capacity(px.len());
    for (i, (&orig_y, &new_y)) in luma.iter().zip(&coded).enumerate() {
        let delta = new_y - orig_y;
        for c in 0..ch {
            out.push(to_u8(px[i * ch + c] as f64 + delta));
        }
    }
    out
}
