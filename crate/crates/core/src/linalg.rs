//! Dense row-major matrices and the Cholesky machinery the Kriging code needs.
//!
//! Only what is required for symmetric positive definite systems is here:
//! factorization, forward/backward substitution and the log-determinant.
//! No explicit inverse is ever formed.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // unused when a dependency links std
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Wraps a row-major buffer.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(alloc::format!(
                "buffer of length {} cannot hold a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::shape(alloc::format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Copies the selected rows, in the given order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix { rows: indices.len(), cols: self.cols, data }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::shape(alloc::format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                for (o, b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.cols != v.len() {
            return Err(Error::shape(alloc::format!(
                "cannot multiply {}x{} by a vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok(self.row_iter().map(|r| dot(r, v)).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..n {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn lj_diag(head: &[f64], n: usize, j: usize) -> f64 {
    head[j * n + j]
}

/// All sixteen products `aᵣ · bₜ`, each input read once.
#[inline]
fn dot4x4(a: [&[f64]; 4], b: [&[f64]; 4]) -> [[f64; 4]; 4] {
    let n = a[0].len();
    let a = a.map(|v| &v[..n]);
    let b = b.map(|v| &v[..n]);
    // even and odd k in separate lanes so pairs of loads vectorize
    let mut acc = [[[0.0f64; 2]; 4]; 4];
    let m = n - n % 2;
    let mut k = 0;
    while k < m {
        let x: [[f64; 2]; 4] = core::array::from_fn(|r| [a[r][k], a[r][k + 1]]);
        let y: [[f64; 2]; 4] = core::array::from_fn(|t| [b[t][k], b[t][k + 1]]);
        for r in 0..4 {
            for t in 0..4 {
                acc[r][t][0] += x[r][0] * y[t][0];
                acc[r][t][1] += x[r][1] * y[t][1];
            }
        }
        k += 2;
    }
    let mut out = [[0.0f64; 4]; 4];
    for r in 0..4 {
        for t in 0..4 {
            out[r][t] = acc[r][t][0] + acc[r][t][1];
            if m < n {
                out[r][t] += a[r][m] * b[t][m];
            }
        }
    }
    out
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lower-triangular factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    n: usize,
    // row-major, only the lower triangle is meaningful
    l: Vec<f64>,
}

/// Returned when a pivot is not safely positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite {
    pub pivot: usize,
}

impl Cholesky {
    /// Factorizes a symmetric matrix, reading only its lower triangle.
    ///
    /// A pivot counts as failed when it is not finite or not larger than
    /// `n * eps * max_diag`; at that level the factor no longer carries
    /// information and exactly singular inputs (duplicate rows) would
    /// otherwise slip through on round-off.
    pub fn factor(a: &Matrix) -> core::result::Result<Self, NotPositiveDefinite> {
        assert_eq!(a.rows(), a.cols(), "Cholesky needs a square matrix");
        let n = a.rows();
        let max_diag = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
        let tol = (n as f64) * f64::EPSILON * max_diag;
        let mut l = vec![0.0; n * n];
        let mut i0 = 0;
        while i0 < n {
            let rows = (n - i0).min(4);
            // Tiles of four rows by four columns share every load. Entries
            // left of the tiles, and the block on the diagonal, are finished
            // one row at a time below.
            let mut j0 = 0;
            if rows == 4 {
                let (head, tail) = l.split_at_mut(i0 * n);
                while j0 + 4 <= i0 {
                    let s = {
                        let a: [&[f64]; 4] = core::array::from_fn(|r| &tail[r * n..r * n + j0]);
                        let b: [&[f64]; 4] = core::array::from_fn(|t| &head[(j0 + t) * n..(j0 + t) * n + j0]);
                        dot4x4(a, b)
                    };
                    for (r, sr) in s.iter().enumerate() {
                        let row = &mut tail[r * n..(r + 1) * n];
                        for (t, st) in sr.iter().enumerate() {
                            let jj = j0 + t;
                            let lj = &head[jj * n..jj * n + jj];
                            let inner: f64 = (j0..jj).map(|k| row[k] * lj[k]).sum();
                            row[jj] = (a[(i0 + r, jj)] - st - inner) / lj_diag(head, n, jj);
                        }
                    }
                    j0 += 4;
                }
            }
            for i in i0..i0 + rows {
                let (head, tail) = l.split_at_mut(i * n);
                let row_i = &mut tail[..n];
                for jj in j0..i {
                    let lj = &head[jj * n..jj * n + jj];
                    row_i[jj] = (a[(i, jj)] - dot(&row_i[..jj], lj)) / head[jj * n + jj];
                }
                let s = a[(i, i)] - dot(&row_i[..i], &row_i[..i]);
                if !(s.is_finite() && s > tol) {
                    return Err(NotPositiveDefinite { pivot: i });
                }
                row_i[i] = s.sqrt();
            }
            i0 += rows;
        }
        Ok(Cholesky { n, l })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.l[i * self.n..i * self.n + i + 1]
    }

    /// Diagonal entries of `L`, all strictly positive.
    pub fn diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.l[i * self.n + i])
    }

    /// Copy of the factor as a dense lower-triangular matrix.
    pub fn lower(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            m.row_mut(i)[..=i].copy_from_slice(self.row(i));
        }
        m
    }

    /// Solves `L z = b` in place.
    pub fn forward_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        for i in 0..self.n {
            let r = self.row(i);
            let s = b[i] - dot(&r[..i], &b[..i]);
            b[i] = s / r[i];
        }
    }

    /// Solves `Lᵀ z = b` in place.
    pub fn backward_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        for i in (0..self.n).rev() {
            b[i] /= self.l[i * self.n + i];
            let bi = b[i];
            // column i of Lᵀ is row i of L
            for (bj, lij) in b[..i].iter_mut().zip(&self.l[i * self.n..i * self.n + i]) {
                *bj -= lij * bi;
            }
        }
    }

    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let mut z = b.to_vec();
        self.forward_in_place(&mut z);
        z
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut z = b.to_vec();
        self.forward_in_place(&mut z);
        self.backward_in_place(&mut z);
        z
    }

    /// `log det A = 2 Σ log Lᵢᵢ`.
    pub fn log_det(&self) -> f64 {
        2.0 * self.diagonal().map(|d| d.ln()).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> Matrix {
        // A = B Bᵀ + n I for a fixed, non-symmetric B
        let mut b = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] = ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.4;
            }
        }
        let mut a = b.matmul(&b.transpose()).unwrap();
        for i in 0..n {
            a[(i, i)] += n as f64;
        }
        a
    }

    #[test]
    fn factor_reconstructs() {
        let a = spd(9);
        let c = Cholesky::factor(&a).unwrap();
        let l = c.lower();
        let back = l.matmul(&l.transpose()).unwrap();
        for i in 0..9 {
            assert!(c.lower()[(i, i)] > 0.0);
            for j in 0..9 {
                assert!((back[(i, j)] - a[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn blocked_factor_reconstructs_at_ragged_sizes() {
        // sizes around multiples of the 4x4 tile, odd prefixes included
        for n in [4, 5, 8, 11, 16, 17, 30, 37] {
            let a = spd(n);
            let l = Cholesky::factor(&a).unwrap().lower();
            let back = l.matmul(&l.transpose()).unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert!((back[(i, j)] - a[(i, j)]).abs() < 1e-10 * n as f64, "n={n} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn solve_matches_product() {
        let a = spd(13);
        let c = Cholesky::factor(&a).unwrap();
        let x: Vec<f64> = (0..13).map(|i| (i as f64).sin()).collect();
        let b = a.mat_vec(&x).unwrap();
        let got = c.solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn log_det_of_diagonal() {
        let mut a = Matrix::identity(3);
        a[(0, 0)] = 2.0;
        a[(1, 1)] = 3.0;
        a[(2, 2)] = 5.0;
        let c = Cholesky::factor(&a).unwrap();
        assert!((c.log_det() - 30.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn singular_is_rejected() {
        let a = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(Cholesky::factor(&a), Err(NotPositiveDefinite { pivot: 1 }));
        let neg = Matrix::from_rows(&[[-1.0]]).unwrap();
        assert!(Cholesky::factor(&neg).is_err());
    }

    #[test]
    fn dot_handles_tails() {
        for n in 0..11 {
            let a: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let expect: f64 = a.iter().map(|v| v * v).sum();
            assert_eq!(dot(&a, &a), expect);
        }
    }
}
