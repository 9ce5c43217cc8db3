//! Symmetric banded Cholesky factorization.

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    acc.iter().sum::<f64>() + tail
}

/// Lower factor of a symmetric positive-definite matrix with half-bandwidth
/// `b`, stored row by row as `(b + 1)` entries ending at the diagonal.
pub(crate) struct BandCholesky {
    n: usize,
    b: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    /// `a(i, k)` returns the entry at row `i`, column `i - k`, for `k <= b`.
    /// Returns `None` when the matrix is not positive definite.
    pub(crate) fn factor(n: usize, b: usize, a: impl Fn(usize, usize) -> f64) -> Option<Self> {
        let w = b + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let i0 = i.saturating_sub(b);
            for j in i0..=i {
                let mut s = a(i, i - j);
                // row i stored from column i - b; row j from column j - b
                let p0 = i0.max(j.saturating_sub(b));
                let ri = i * w + b - i;
                let rj = j * w + b - j;
                s -= dot(&l[ri + p0..ri + j], &l[rj + p0..rj + j]);
                if i == j {
                    if !(s > 0.0) {
                        return None;
                    }
                    l[ri + i] = s.sqrt();
                } else {
                    l[ri + j] = s / l[rj + j];
                }
            }
        }
        Some(Self { n, b, l })
    }

    pub(crate) fn solve(&self, x: &mut [f64]) {
        let (n, b, w) = (self.n, self.b, self.b + 1);
        for i in 0..n {
            let ri = i * w + b - i;
            let mut s = x[i];
            for p in i.saturating_sub(b)..i {
                s -= self.l[ri + p] * x[p];
            }
            x[i] = s / self.l[ri + i];
        }
        for i in (0..n).rev() {
            x[i] /= self.l[i * w + b];
            let xi = x[i];
            let ri = i * w + b - i;
            for p in i.saturating_sub(b)..i {
                x[p] -= self.l[ri + p] * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal_and_pentadiagonal() {
        for b in [1usize, 2, 3] {
            let n = 12;
            let a = |i: usize, k: usize| -> f64 {
                if k == 0 {
                    4.0 + i as f64 * 0.1
                } else {
                    -1.0 / (k as f64 + i as f64 * 0.01 + 1.0)
                }
            };
            let full = |i: usize, j: usize| -> f64 {
                let (r, c) = if i >= j { (i, j) } else { (j, i) };
                if r - c <= b {
                    a(r, r - c)
                } else {
                    0.0
                }
            };
            let ch = BandCholesky::factor(n, b, a).unwrap();
            let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.5).collect();
            let mut rhs: Vec<f64> = (0..n).map(|i| (0..n).map(|j| full(i, j) * x_true[j]).sum()).collect();
            ch.solve(&mut rhs);
            for (x, t) in rhs.iter().zip(&x_true) {
                assert!((x - t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_indefinite() {
        assert!(BandCholesky::factor(3, 1, |_, k| if k == 0 { 1.0 } else { 2.0 }).is_none());
    }
}
