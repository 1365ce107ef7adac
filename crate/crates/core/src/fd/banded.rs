//! Banded LDL^T factorization and Takahashi selected inversion.
//!
//! Row i of L keeps columns i-b..i (zero-padded before the first row), so
//! every inner product runs over contiguous memory. The selected inverse
//! stores all Z_ij with |i - j| <= b in full symmetric form, 2b+1 per row.

use crate::error::{CasimirError, Result};
use crate::fd::operator::SpdOperator;

/// Pivots below this fraction of the largest diagonal entry mean the
/// matrix is not (numerically) positive definite.
const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct BandedLdl {
    pub n: usize,
    pub b: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl BandedLdl {
    pub fn factor(op: &SpdOperator, b: usize) -> Result<Self> {
        let n = op.n;
        if op.bandwidth > b {
            return Err(CasimirError::Consistency(format!(
                "band {b} narrower than operator bandwidth {}",
                op.bandwidth
            )));
        }
        let mut l = vec![0.0; n * b];
        let mut d = vec![0.0; n];
        let scale = op.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut row = vec![0.0; b + 1];
        // ld[k] = L_ik d_k for the current row
        let mut ld = vec![0.0; b];
        for i in 0..n {
            row.iter_mut().for_each(|v| *v = 0.0);
            for (j, v) in op.row(i) {
                if j <= i {
                    row[b + j - i] = v;
                }
            }
            let first = i.saturating_sub(b);
            let off = b + first - i; // slot of column `first` in row storage
            for j in first..i {
                let sj = b + j - i; // slot of column j in row i
                // columns k in max(first, j - b)..j shared with row j
                let kmin = first.max(j.saturating_sub(b));
                let a = b + kmin - i;
                let len = j - kmin;
                let lj = &l[j * b + (b + kmin - j)..j * b + (b + kmin - j) + len];
                let s: f64 = ld[a..a + len].iter().zip(lj).map(|(x, y)| x * y).sum();
                let v = (row[sj] - s) / d[j];
                l[i * b + sj] = v;
                ld[sj] = v * d[j];
            }
            let li = &l[i * b + off..i * b + b];
            let s: f64 = li.iter().zip(&ld[off..b]).map(|(x, y)| x * y).sum();
            let di = row[b] - s;
            if !(di > PIVOT_TOL * scale) {
                return Err(CasimirError::Consistency(format!(
                    "operator not positive definite: pivot {di:e} at row {i} (xi = {})",
                    op.xi
                )));
            }
            d[i] = di;
            ld[off..b].iter_mut().for_each(|v| *v = 0.0);
        }
        Ok(BandedLdl { n, b, l, d })
    }

    fn lij(&self, i: usize, j: usize) -> f64 {
        if j >= i || i - j > self.b {
            return 0.0;
        }
        self.l[i * self.b + self.b + j - i]
    }

    /// Solve A x = rhs in place.
    pub fn solve(&self, x: &mut [f64]) {
        let (n, b) = (self.n, self.b);
        for i in 0..n {
            let first = i.saturating_sub(b);
            let off = b + first - i;
            let s: f64 = self.l[i * b + off..i * b + b].iter().zip(&x[first..i]).map(|(a, c)| a * c).sum();
            x[i] -= s;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let xi = x[i];
            let first = i.saturating_sub(b);
            let off = b + first - i;
            for (k, lv) in (first..i).zip(&self.l[i * b + off..i * b + b]) {
                x[k] -= lv * xi;
            }
        }
    }

    /// Entries of A^{-1} within the band.
    pub fn selected_inverse(&self) -> BandInverse {
        let (n, b) = (self.n, self.b);
        let w = 2 * b + 1;
        let mut z = vec![0.0; n * w];
        let mut tmp = vec![0.0; b];
        for i in (0..n).rev() {
            let kmax = (i + b).min(n - 1);
            let m = kmax - i;
            tmp[..m].iter_mut().for_each(|v| *v = 0.0);
            // Z_ij = -sum_k L_ki Z_kj, j, k in i+1..=kmax
            for k in i + 1..=kmax {
                let c = self.lij(k, i);
                if c == 0.0 {
                    continue;
                }
                let zk = &z[k * w + (b + i + 1 - k)..k * w + (b + kmax + 1 - k)];
                for (t, zv) in tmp[..m].iter_mut().zip(zk) {
                    *t -= c * zv;
                }
            }
            let mut diag = 1.0 / self.d[i];
            for k in i + 1..=kmax {
                diag -= self.lij(k, i) * tmp[k - i - 1];
            }
            z[i * w + b] = diag;
            for j in i + 1..=kmax {
                let v = tmp[j - i - 1];
                z[i * w + b + j - i] = v;
                z[j * w + b + i - j] = v;
            }
        }
        BandInverse { n, b, z }
    }
}

/// Band of a symmetric inverse, |i - j| <= b.
#[derive(Debug, Clone)]
pub struct BandInverse {
    pub n: usize,
    pub b: usize,
    z: Vec<f64>,
}

impl BandInverse {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i.abs_diff(j) <= self.b, "({i}, {j}) outside the selected band {}", self.b);
        self.z[i * (2 * self.b + 1) + self.b + j - i]
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.z[i * (2 * self.b + 1) + self.b]
    }
}
