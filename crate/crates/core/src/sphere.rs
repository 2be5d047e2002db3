//! Unit-hypersphere vectors: the watermark payload type.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default payload dimension.
pub const DEFAULT_DIM: usize = 256;

/// Allowed deviation of `‖v‖` from 1.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// A point on the unit sphere `S^{d-1}`, `d >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector {
    components: Vec<f64>,
}

impl UnitVector {
    /// Wraps components that are already unit norm.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        check_dim(components.len())?;
        let norm = l2_norm(&components);
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotUnitNorm { norm });
        }
        Ok(UnitVector { components })
    }

    /// Scales `raw` onto the sphere. Fails on a zero or non-finite vector.
    pub fn normalize(mut raw: Vec<f64>) -> Result<Self> {
        check_dim(raw.len())?;
        let norm = l2_norm(&raw);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotUnitNorm { norm });
        }
        raw.iter_mut().for_each(|x| *x /= norm);
        Ok(UnitVector { components: raw })
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        check_dim(dim)?;
        if i >= dim {
            return Err(Error::Domain(format!("basis index {i} out of range for dim {dim}")));
        }
        let mut components = vec![0.0; dim];
        components[i] = 1.0;
        Ok(UnitVector { components })
    }

    /// Caller guarantees unit norm up to rounding.
    pub(crate) fn from_unit_unchecked(components: Vec<f64>) -> Self {
        debug_assert!((l2_norm(&components) - 1.0).abs() <= NORM_TOLERANCE);
        UnitVector { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn into_components(self) -> Vec<f64> {
        self.components
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.components)
    }

    /// Antipodal point.
    pub fn negated(&self) -> Self {
        UnitVector {
            components: self.components.iter().map(|x| -x).collect(),
        }
    }

    /// Binary form: `u64` little-endian length, then each component as a
    /// little-endian `f64`.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * self.dim());
        out.extend_from_slice(&(self.dim() as u64).to_le_bytes());
        for x in &self.components {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_le_bytes(bytes: &[u8]) -> Result<Self> {
        let (len, body) = bytes
            .split_first_chunk::<8>()
            .ok_or_else(|| Error::VectorFormat("missing length prefix".into()))?;
        let len = u64::from_le_bytes(*len) as usize;
        if body.len() != len.saturating_mul(8) {
            return Err(Error::VectorFormat(format!(
                "length prefix says {len} components but {} payload bytes follow",
                body.len()
            )));
        }
        let components = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Self::new(components)
    }

    /// Text form: one component per line, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(24 * self.dim());
        for x in &self.components {
            out.push_str(&format!("{x:.16e}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let components = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|e| Error::VectorFormat(format!("bad component `{l}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;
    fn try_from(components: Vec<f64>) -> Result<Self> {
        Self::new(components)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(v: UnitVector) -> Self {
        v.components
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "unit vectors need at least 2 components",
        });
    }
    Ok(())
}

pub(crate) fn l2_norm(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Draws a point uniformly from `S^{dim-1}` by normalizing `dim` standard
/// Gaussians.
pub fn sample_uniform<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitVector> {
    check_dim(dim)?;
    loop {
        let raw: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(v) = UnitVector::normalize(raw) {
            return Ok(v);
        }
    }
}

/// Cosine similarity of two unit vectors, clamped to `[-1, 1]`.
pub fn cosine(a: &UnitVector, b: &UnitVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(dot(&a.components, &b.components).clamp(-1.0, 1.0))
}

/// `1 - cosine(a, b)`, in `[0, 2]`.
pub fn cosine_loss(a: &UnitVector, b: &UnitVector) -> Result<f64> {
    Ok(1.0 - cosine(a, b)?)
}
