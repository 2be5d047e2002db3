//! Secret-key rotations of the payload sphere.
//!
//! A key deterministically seeds a Ginibre matrix whose sign-corrected QR
//! factor is a Haar-distributed element of SO(d). Rotating the payload with it
//! before embedding, and rotating back after extraction, makes the channel
//! unreadable without the key while leaving cosine geometry untouched.

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lu_determinant, HouseholderQr};
use crate::sphere::{dot, UnitVector};
use crate::stream;

/// Secret key. Only `seed` carries entropy; `label` is a free-form tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretKey {
    pub seed: u64,
    #[serde(default)]
    pub label: String,
}

impl SecretKey {
    pub fn new(seed: u64) -> Self {
        SecretKey {
            seed,
            label: String::new(),
        }
    }

    pub fn with_label(seed: u64, label: impl Into<String>) -> Self {
        SecretKey {
            seed,
            label: label.into(),
        }
    }

    /// Parses a key file; a missing `seed` field is an error.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Key(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("key serializes")
    }
}

/// Which steps of the Haar construction to run.
///
/// `SkipSignFix` omits the `Q <- Q diag(sign(R_ii))` correction. The result is
/// still in SO(d) but is *not* Haar distributed; it exists so tests can show
/// the correction matters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Correction {
    #[default]
    Haar,
    SkipSignFix,
}

/// A dense `d x d` special-orthogonal matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl RotationMatrix {
    /// Tolerance on `max |O^T O - I|` accepted by [`RotationMatrix::from_row_major`].
    pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

    /// Validates an explicit matrix: orthogonal and determinant `+1`.
    pub fn from_row_major(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension {
                dim,
                reason: "rotation dimension must be at least 1",
            });
        }
        if entries.len() != dim * dim {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        let m = RotationMatrix { dim, entries };
        let err = m.orthogonality_error();
        if !(err <= Self::ORTHOGONALITY_TOLERANCE) {
            return Err(Error::Domain(format!("matrix is not orthogonal (max |O^T O - I| = {err:e})")));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > 1e-8 {
            return Err(Error::Domain(format!("determinant {det} is not +1")));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    /// `max |O^T O - I|` over all entries.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n).map(|k| self.get(k, i) * self.get(k, j)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    /// Determinant via LU with partial pivoting, independent of how the
    /// matrix was produced.
    pub fn determinant(&self) -> f64 {
        lu_determinant(&self.entries, self.dim)
    }

    fn apply(&self, v: &UnitVector, transpose: bool) -> Result<UnitVector> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: v.dim(),
            });
        }
        let n = self.dim;
        let x = v.components();
        let out = if transpose {
            let mut acc = vec![0.0; n];
            for (row, &xi) in self.entries.chunks_exact(n).zip(x) {
                acc.iter_mut().zip(row).for_each(|(a, r)| *a += xi * r);
            }
            acc
        } else {
            self.entries.chunks_exact(n).map(|row| dot(row, x)).collect()
        };
        UnitVector::normalize(out)
    }
}

/// Samples the key's rotation of SO(`dim`).
pub fn sample_rotation(key: &SecretKey, dim: usize) -> Result<RotationMatrix> {
    sample_rotation_with(key, dim, Correction::Haar)
}

/// [`sample_rotation`] with an explicit choice of correction steps.
///
/// Steps: Ginibre matrix `A` from the key stream; Householder `A = QR`;
/// `Q' = Q D` with `D_ii = sign(R_ii)` and `sign(0) = +1`; negate the first
/// column if `det Q' = -1`.
pub fn sample_rotation_with(
    key: &SecretKey,
    dim: usize,
    correction: Correction,
) -> Result<RotationMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "rotation dimension must be at least 1",
        });
    }
    // Attempt 0 is the key's canonical stream; later attempts only happen
    // after a rank-deficient draw.
    for attempt in 0u64.. {
        let index = (dim as u64) | (attempt << 32);
        let mut rng = stream::substream(key.seed, "rotation", index);
        let mut a: Vec<f64> = (0..dim * dim).map(|_| rng.sample(StandardNormal)).collect();
        let Some(qr) = HouseholderQr::factor(&mut a, dim) else {
            continue;
        };
        let mut q = qr.q();
        let mut det = qr.q_determinant();
        if correction == Correction::Haar {
            for (col, &r) in q.chunks_exact_mut(dim).zip(qr.r_diag()) {
                if r < 0.0 {
                    col.iter_mut().for_each(|x| *x = -*x);
                    det = -det;
                }
            }
        }
        if det < 0.0 {
            q[..dim].iter_mut().for_each(|x| *x = -*x);
        }
        return Ok(RotationMatrix {
            dim,
            entries: transpose(&q, dim),
        });
    }
    unreachable!("attempt counter is unbounded")
}

fn transpose(m: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = m[i * n + j];
        }
    }
    out
}

/// `O v`, renormalized.
pub fn rotate(m: &RotationMatrix, v: &UnitVector) -> Result<UnitVector> {
    m.apply(v, false)
}

/// `O^T v`, renormalized.
pub fn unrotate(m: &RotationMatrix, v: &UnitVector) -> Result<UnitVector> {
    m.apply(v, true)
}

/// One row of the generation benchmark.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub dim: usize,
    pub batch: usize,
    pub repeats: usize,
    /// Median over repeats of (run wall time / batch).
    pub median_ms: f64,
    pub max_ms: f64,
}

/// Times [`sample_rotation`]: one warm-up matrix, then `repeats` runs of
/// `batch` matrices with distinct keys.
pub fn benchmark_generation(dim: usize, batch: usize, repeats: usize) -> Result<BenchRow> {
    if dim == 0 || batch == 0 || repeats == 0 {
        return Err(Error::Domain(format!(
            "benchmark arguments must be positive (dim={dim}, batch={batch}, repeats={repeats})"
        )));
    }
    std::hint::black_box(sample_rotation(&SecretKey::new(u64::MAX), dim)?);
    let mut per_matrix = Vec::with_capacity(repeats);
    for run in 0..repeats {
        let start = Instant::now();
        for b in 0..batch {
            let key = SecretKey::new((run * batch + b) as u64);
            std::hint::black_box(sample_rotation(&key, dim)?);
        }
        per_matrix.push(start.elapsed().as_secs_f64() * 1e3 / batch as f64);
    }
    per_matrix.sort_by(f64::total_cmp);
    let median_ms = median_sorted(&per_matrix);
    let max_ms = *per_matrix.last().expect("repeats >= 1");
    Ok(BenchRow {
        dim,
        batch,
        repeats,
        median_ms,
        max_ms,
    })
}

fn median_sorted(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{cosine, sample_uniform};

    #[test]
    fn dim_one_is_plus_one() {
        for seed in 0..20 {
            let m = sample_rotation(&SecretKey::new(seed), 1).unwrap();
            assert_eq!(m.entries(), &[1.0]);
        }
    }

    #[test]
    fn dim_zero_is_rejected() {
        assert!(matches!(
            sample_rotation(&SecretKey::new(1), 0),
            Err(Error::InvalidDimension { dim: 0, .. })
        ));
    }

    #[test]
    fn same_key_same_matrix() {
        let key = SecretKey::with_label(77, "alice");
        let a = sample_rotation(&key, 16).unwrap();
        let b = sample_rotation(&SecretKey::new(77), 16).unwrap();
        assert_eq!(a, b, "label carries no entropy");
        let c = sample_rotation(&SecretKey::new(78), 16).unwrap();
        assert_ne!(a, c);
        // same key, different dimension: independent draw
        let d8 = sample_rotation(&key, 8).unwrap();
        assert_ne!(&a.entries()[..8], &d8.entries()[..8]);
    }

    #[test]
    fn orthogonal_with_unit_determinant() {
        for &dim in &[1, 2, 3, 8, 64] {
            for seed in 0..10 {
                let m = sample_rotation(&SecretKey::new(seed), dim).unwrap();
                assert!(m.orthogonality_error() <= 1e-10, "dim {dim}");
                assert!((m.determinant() - 1.0).abs() <= 1e-8, "dim {dim}");
            }
        }
        let m = sample_rotation(&SecretKey::new(5), 256).unwrap();
        assert!(m.orthogonality_error() <= 1e-10);
        assert!((m.determinant() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn skipping_the_sign_fix_stays_in_so_d() {
        let m = sample_rotation_with(&SecretKey::new(3), 8, Correction::SkipSignFix).unwrap();
        assert!(m.orthogonality_error() <= 1e-10);
        assert!((m.determinant() - 1.0).abs() <= 1e-8);
    }

    fn angle_chi_square(correction: Correction) -> f64 {
        let mut bins = [0usize; 16];
        for k in 0..10_000u64 {
            let m = sample_rotation_with(&SecretKey::new(k), 2, correction).unwrap();
            let theta = m.get(1, 0).atan2(m.get(0, 0)).rem_euclid(std::f64::consts::TAU);
            bins[((theta / std::f64::consts::TAU * 16.0) as usize).min(15)] += 1;
        }
        bins.iter().map(|&o| (o as f64 - 625.0).powi(2) / 625.0).sum()
    }

    #[test]
    fn plane_rotation_angle_is_uniform_only_with_sign_fix() {
        // chi-square, 15 dof, upper 1% point
        const CRIT: f64 = 30.577_914;
        assert!(angle_chi_square(Correction::Haar) < CRIT);
        assert!(angle_chi_square(Correction::SkipSignFix) > CRIT);
    }

    #[test]
    fn quarter_turn_inverse() {
        let m = RotationMatrix::from_row_major(2, vec![0.0, -1.0, 1.0, 0.0]).unwrap();
        let v = UnitVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(unrotate(&m, &v).unwrap().components(), &[0.0, -1.0]);
        assert_eq!(rotate(&m, &v).unwrap().components(), &[0.0, 1.0]);
    }

    #[test]
    fn from_row_major_rejects_reflections() {
        assert!(RotationMatrix::from_row_major(2, vec![1.0, 0.0, 0.0, -1.0]).is_err());
        assert!(RotationMatrix::from_row_major(2, vec![1.0, 0.1, 0.0, 1.0]).is_err());
        assert!(RotationMatrix::from_row_major(2, vec![1.0]).is_err());
    }

    #[test]
    fn roundtrip_and_norm_at_256() {
        let mut rng = stream::root(21);
        for seed in 0..10 {
            let m = sample_rotation(&SecretKey::new(seed), 256).unwrap();
            for _ in 0..100 {
                let v = sample_uniform(256, &mut rng).unwrap();
                let r = rotate(&m, &v).unwrap();
                assert!((r.norm() - 1.0).abs() <= 1e-9);
                let back = unrotate(&m, &r).unwrap();
                for (a, b) in back.components().iter().zip(v.components()) {
                    assert!((a - b).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let m = sample_rotation(&SecretKey::new(1), 3).unwrap();
        let v = UnitVector::basis(4, 0).unwrap();
        assert!(matches!(rotate(&m, &v), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(unrotate(&m, &v), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rotated_fixed_vector_has_zero_mean_components() {
        // Haar rotation of a fixed vector is uniform on the sphere.
        let v = UnitVector::basis(3, 0).unwrap();
        let n = 100_000;
        let mut sums = [0.0; 3];
        for seed in 0..n {
            let m = sample_rotation(&SecretKey::new(seed), 3).unwrap();
            let r = rotate(&m, &v).unwrap();
            sums.iter_mut().zip(r.components()).for_each(|(s, x)| *s += x);
        }
        for s in sums {
            assert!((s / n as f64).abs() <= 0.01, "mean {}", s / n as f64);
        }
    }

    #[test]
    fn wrong_key_scrambles() {
        // Compositions of independent Haar rotations are Haar, so the cosine
        // between v and the wrong-key output has sd 1/sqrt(d). All ordered
        // pairs of 101 keys give 10,100 trials.
        let keys: Vec<RotationMatrix> = (0..101)
            .map(|s| sample_rotation(&SecretKey::new(1000 + s), 256).unwrap())
            .collect();
        let mut rng = stream::root(99);
        let (mut trials, mut inside) = (0usize, 0usize);
        for (i, mk) in keys.iter().enumerate() {
            for (j, mk2) in keys.iter().enumerate() {
                if i == j {
                    continue;
                }
                let v = sample_uniform(256, &mut rng).unwrap();
                let c = cosine(&v, &unrotate(mk2, &rotate(mk, &v).unwrap()).unwrap()).unwrap();
                trials += 1;
                inside += usize::from(c.abs() <= 5.0 / 16.0);
            }
        }
        assert!(trials >= 10_000);
        assert!(inside as f64 / trials as f64 >= 0.9999, "{inside}/{trials}");
    }

    #[test]
    fn key_json() {
        let key = SecretKey::from_json(r#"{"seed": 18446744073709551615, "label": "x"}"#).unwrap();
        assert_eq!(key, SecretKey::with_label(u64::MAX, "x"));
        assert_eq!(SecretKey::from_json(r#"{"seed": 4}"#).unwrap(), SecretKey::new(4));
        assert!(matches!(SecretKey::from_json(r#"{"label": "x"}"#), Err(Error::Key(_))));
        assert_eq!(SecretKey::from_json(&key.to_json()).unwrap(), key);
    }

    #[test]
    fn benchmark_row() {
        let row = benchmark_generation(1, 1, 3).unwrap();
        assert!(row.median_ms > 0.0);
        assert!(row.median_ms <= row.max_ms);
        let row = benchmark_generation(32, 4, 5).unwrap();
        assert!(row.median_ms <= row.max_ms);
        assert!(benchmark_generation(0, 1, 1).is_err());
        assert!(benchmark_generation(4, 0, 1).is_err());
        assert!(benchmark_generation(4, 1, 0).is_err());
    }
}
