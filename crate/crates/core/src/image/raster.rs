use std::io::{Read, Write};

use crate::error::{Error, Result};

/// 8-bit raster, row-major, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ShapeMismatch(format!("empty image {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::ShapeMismatch(format!("{channels} channels; expected 1 or 3")));
        }
        if pixels.len() != width * height * channels {
            return Err(Error::ShapeMismatch(format!(
                "{} samples for {width}x{height}x{channels}",
                pixels.len()
            )));
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn same_shape(&self, other: &RasterImage) -> bool {
        (self.width, self.height, self.channels) == (other.width, other.height, other.channels)
    }

    /// Luma plane. RGB uses `Y = (R + 2G + B) / 4`, the luma of the
    /// reversible integer colour transform: adding `D` to `Y` and inverting
    /// adds `D` to every channel.
    pub fn luma(&self) -> Vec<f64> {
        match self.channels {
            1 => self.pixels.iter().map(|&p| p as f64).collect(),
            _ => self
                .pixels
                .chunks_exact(3)
                .map(|c| (c[0] as f64 + 2.0 * c[1] as f64 + c[2] as f64) / 4.0)
                .collect(),
        }
    }

    /// Reads binary PGM (P5) or PPM (P6) with maxval 255; `#` comments are
    /// allowed anywhere in the header.
    pub fn read_pnm<R: Read>(mut reader: R) -> Result<Self> {
        let mut data = Vec::new();
        reader.read_to_end(&mut data)?;
        Self::from_pnm_bytes(&data)
    }

    pub fn from_pnm_bytes(data: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let magic = header_token(data, &mut pos)?;
        let channels = match magic.as_str() {
            "P5" => 1,
            "P6" => 3,
            other => return Err(Error::Pnm(format!("unsupported magic `{other}` (need P5 or P6)"))),
        };
        let width = header_number(data, &mut pos, "width")?;
        let height = header_number(data, &mut pos, "height")?;
        let maxval = header_number(data, &mut pos, "maxval")?;
        if maxval != 255 {
            return Err(Error::Pnm(format!("maxval {maxval} unsupported (need 255)")));
        }
        // exactly one whitespace byte separates the header from the raster
        match data.get(pos) {
            Some(b) if b.is_ascii_whitespace() => pos += 1,
            _ => return Err(Error::Pnm("missing whitespace after maxval".into())),
        }
        let need = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| Error::Pnm("image dimensions overflow".into()))?;
        let raster = &data[pos..];
        if raster.len() < need {
            return Err(Error::Pnm(format!("truncated raster: {} of {need} bytes", raster.len())));
        }
        Self::new(width, height, channels, raster[..need].to_vec()).map_err(|e| Error::Pnm(e.to_string()))
    }

    pub fn write_pnm<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(&self.to_pnm_bytes())?;
        Ok(())
    }

    pub fn to_pnm_bytes(&self) -> Vec<u8> {
        let magic = if self.channels == 1 { "P5" } else { "P6" };
        let mut out = format!("{magic}\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

fn skip_space_and_comments(data: &[u8], pos: &mut usize) {
    while let Some(&b) = data.get(*pos) {
        if b == b'#' {
            while let Some(&c) = data.get(*pos) {
                *pos += 1;
                if c == b'\n' || c == b'\r' {
                    break;
                }
            }
        } else if b.is_ascii_whitespace() {
            *pos += 1;
        } else {
            break;
        }
    }
}

fn header_token(data: &[u8], pos: &mut usize) -> Result<String> {
    skip_space_and_comments(data, pos);
    let start = *pos;
    while let Some(&b) = data.get(*pos) {
        if b.is_ascii_whitespace() || b == b'#' {
            break;
        }
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Pnm("unexpected end of header".into()));
    }
    Ok(String::from_utf8_lossy(&data[start..*pos]).into_owned())
}

fn header_number(data: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let token = header_token(data, pos)?;
    token
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Pnm(format!("bad {what} `{token}`")))
}

/// `10 log10(255^2 / MSE)` over every sample of every channel.
/// Identical images give `+inf`.
pub fn psnr(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width, a.height, a.channels, b.width, b.height, b.channels
        )));
    }
    let mse = mse(a.pixels(), b.pixels());
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0f64 * 255.0 / mse).log10())
}

pub(crate) fn mse(a: &[u8], b: &[u8]) -> f64 {
    let sum: u64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    sum as f64 / a.len() as f64
}
