use rand::Rng;

use crate::error::{Error, Result};
use crate::rotation::SecretKey;
use crate::stream;

/// `dim` keyed pseudorandom patterns over a `width x height` luma plane.
///
/// Pattern `i` is a ±1 field drawn from its own substream, mean-subtracted
/// and scaled to unit Frobenius norm. Only the sign bits are stored; the
/// patterns are expanded on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct CarrierSet {
    dim: usize,
    width: usize,
    height: usize,
    words: usize,
    signs: Vec<u64>,
    means: Vec<f64>,
    inv_norms: Vec<f64>,
}

impl CarrierSet {
    pub fn new(key: &SecretKey, dim: usize, width: usize, height: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension {
                dim,
                reason: "carrier set needs dim >= 2",
            });
        }
        let n = width * height;
        if n < 2 {
            return Err(Error::ShapeMismatch(format!("{width}x{height} plane too small for carriers")));
        }
        let words = n.div_ceil(64);
        let mut signs = vec![0u64; dim * words];
        let mut means = Vec::with_capacity(dim);
        let mut inv_norms = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut rng = stream::substream(key.seed, "carriers", i as u64);
            let row = &mut signs[i * words..(i + 1) * words];
            rng.fill(row);
            if n % 64 != 0 {
                row[words - 1] &= (1u64 << (n % 64)) - 1;
            }
            let ones: u64 = row.iter().map(|w| w.count_ones() as u64).sum();
            let mean = (2.0 * ones as f64 - n as f64) / n as f64;
            // sum of (s - mean)^2 over n entries of +-1
            let norm_sq = n as f64 * (1.0 - mean * mean);
            if norm_sq <= 0.0 {
                return Err(Error::Domain(format!("carrier {i} is constant")));
            }
            means.push(mean);
            inv_norms.push(1.0 / norm_sq.sqrt());
        }
        Ok(CarrierSet {
            dim,
            width,
            height,
            words,
            signs,
            means,
            inv_norms,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn bits(&self, i: usize) -> &[u64] {
        &self.signs[i * self.words..(i + 1) * self.words]
    }

    fn plane_len(&self) -> usize {
        self.width * self.height
    }

    /// Pattern `i`, row-major.
    pub fn pattern(&self, i: usize) -> Vec<f64> {
        let bits = self.bits(i);
        let (m, s) = (self.means[i], self.inv_norms[i]);
        (0..self.plane_len())
            .map(|j| {
                let sign = if bits[j / 64] >> (j % 64) & 1 == 1 { 1.0 } else { -1.0 };
                (sign - m) * s
            })
            .collect()
    }

    /// `<plane, P_i>` for every pattern.
    pub fn correlate(&self, plane: &[f64]) -> Result<Vec<f64>> {
        self.check_plane(plane.len())?;
        let total: f64 = plane.iter().sum();
        Ok((0..self.dim)
            .map(|i| {
                // sum s_j x_j = 2 * sum_{s_j = +1} x_j - sum x_j
                let positive = sum_selected(self.bits(i), plane);
                ((2.0 * positive - total) - self.means[i] * total) * self.inv_norms[i]
            })
            .collect())
    }

    /// `sum_i weights_i * P_i`.
    pub fn synthesize(&self, weights: &[f64]) -> Result<Vec<f64>> {
        if weights.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: weights.len(),
            });
        }
        let n = self.plane_len();
        let mut acc = vec![0.0; n];
        let mut offset = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            let c = w * self.inv_norms[i];
            // c * (s - m) with s = 2b - 1
            offset += c * (1.0 + self.means[i]);
            let c2 = 2.0 * c;
            for (word_idx, &word) in self.bits(i).iter().enumerate() {
                let mut word = word;
                while word != 0 {
                    let bit = word.trailing_zeros() as usize;
                    acc[word_idx * 64 + bit] += c2;
                    word &= word - 1;
                }
            }
        }
        for x in &mut acc {
            *x -= offset;
        }
        Ok(acc)
    }

    fn check_plane(&self, len: usize) -> Result<()> {
        if len != self.plane_len() {
            return Err(Error::ShapeMismatch(format!(
                "plane of {len} samples for {}x{} carriers",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

fn sum_selected(bits: &[u64], plane: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (word_idx, &word) in bits.iter().enumerate() {
        let mut word = word;
        while word != 0 {
            let bit = word.trailing_zeros() as usize;
            sum += plane[word_idx * 64 + bit];
            word &= word - 1;
        }
    }
    sum
}
