//! Dense Householder QR and LU determinant for square matrices.
//!
//! Matrices here are column-major `n * n` slices so that reflector updates
//! run over contiguous memory.

/// Result of factoring `A = Q R`.
pub(crate) struct HouseholderQr {
    n: usize,
    /// `(k, v, beta)` with `H_k = I - beta * v v^T` acting on rows `k..n`.
    reflectors: Vec<(usize, Vec<f64>, f64)>,
    r_diag: Vec<f64>,
}

impl HouseholderQr {
    /// Factors the column-major matrix `a` in place. Returns `None` when a
    /// column is numerically dependent on the previous ones.
    pub(crate) fn factor(a: &mut [f64], n: usize) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let mut reflectors = Vec::with_capacity(n.saturating_sub(1));
        for k in 0..n.saturating_sub(1) {
            let (head, tail) = a.split_at_mut((k + 1) * n);
            let col_k = &mut head[k * n..];
            let x = &col_k[k..];
            let alpha = x.iter().map(|t| t * t).sum::<f64>().sqrt();
            if alpha == 0.0 || !alpha.is_finite() {
                return None;
            }
            let sign = if x[0] >= 0.0 { 1.0 } else { -1.0 };
            let mut v = x.to_vec();
            v[0] += sign * alpha;
            let beta = 2.0 / v.iter().map(|t| t * t).sum::<f64>();

            // H x = -sign * alpha * e1 exactly.
            col_k[k] = -sign * alpha;
            col_k[k + 1..].iter_mut().for_each(|t| *t = 0.0);

            for col_j in tail.chunks_exact_mut(n) {
                apply_reflector(&mut col_j[k..], &v, beta);
            }
            reflectors.push((k, v, beta));
        }

        let r_diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        let scale = r_diag.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let floor = scale * f64::EPSILON * n as f64;
        if !scale.is_finite() || r_diag.iter().any(|r| r.abs() <= floor) {
            return None;
        }
        Some(HouseholderQr {
            n,
            reflectors,
            r_diag,
        })
    }

    pub(crate) fn r_diag(&self) -> &[f64] {
        &self.r_diag
    }

    /// `det(Q)`: every stored reflector has determinant -1.
    pub(crate) fn q_determinant(&self) -> f64 {
        if self.reflectors.len() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Forms `Q = H_0 H_1 ... H_{n-2}` as a column-major matrix.
    pub(crate) fn q(&self) -> Vec<f64> {
        let n = self.n;
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            q[i * n + i] = 1.0;
        }
        // Backward accumulation: columns left of k are still unit vectors
        // with no support on rows k.., so H_k leaves them alone.
        for (k, v, beta) in self.reflectors.iter().rev() {
            for col_j in q.chunks_exact_mut(n).skip(*k) {
                apply_reflector(&mut col_j[*k..], v, *beta);
            }
        }
        q
    }
}

#[inline]
fn apply_reflector(x: &mut [f64], v: &[f64], beta: f64) {
    let s = beta * x.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    if s != 0.0 {
        x.iter_mut().zip(v).for_each(|(a, b)| *a -= s * b);
    }
}

/// Determinant by LU with partial pivoting; `rows` is row-major.
pub(crate) fn lu_determinant(rows: &[f64], n: usize) -> f64 {
    assert_eq!(rows.len(), n * n);
    let mut m = rows.to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs()))
            .expect("non-empty range");
        if m[pivot * n + k] == 0.0 {
            return 0.0;
        }
        if pivot != k {
            for c in 0..n {
                m.swap(k * n + c, pivot * n + c);
            }
            det = -det;
        }
        let p = m[k * n + k];
        det *= p;
        for i in k + 1..n {
            let f = m[i * n + k] / p;
            if f != 0.0 {
                for c in k..n {
                    m[i * n + c] -= f * m[k * n + c];
                }
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn col_major_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                let bkj = b[j * n + k];
                for i in 0..n {
                    out[j * n + i] += a[k * n + i] * bkj;
                }
            }
        }
        out
    }

    #[test]
    fn reconstructs_input() {
        let n = 5;
        let mut rng = crate::stream::root(4);
        let a: Vec<f64> = (0..n * n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut work = a.clone();
        let qr = HouseholderQr::factor(&mut work, n).unwrap();
        // upper triangle of `work` is R
        let mut r = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..=j {
                r[j * n + i] = work[j * n + i];
            }
        }
        let qr_prod = col_major_mul(&qr.q(), &r, n);
        for (x, y) in qr_prod.iter().zip(&a) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        assert_eq!(qr.q_determinant(), 1.0); // 4 reflectors
    }

    #[test]
    fn rank_deficient_is_rejected() {
        let n = 3;
        // second column is twice the first
        let mut a = vec![1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.5, -1.0, 2.0];
        assert!(HouseholderQr::factor(&mut a, n).is_none());
        let mut zero = vec![0.0; 4];
        assert!(HouseholderQr::factor(&mut zero, 2).is_none());
    }

    #[test]
    fn lu_determinant_fixtures() {
        assert_eq!(lu_determinant(&[3.0], 1), 3.0);
        assert_eq!(lu_determinant(&[0.0, -1.0, 1.0, 0.0], 2), 1.0);
        let d = lu_determinant(&[2.0, 0.0, 1.0, 1.0, 3.0, 2.0, 1.0, 1.0, 2.0], 3);
        assert!((d - 6.0).abs() < 1e-12);
    }
}
