//! Small dense linear-algebra kernels: dot products, Gram–Schmidt and a
//! one-sided Jacobi singular value decomposition.
//!
//! Matrices are row-major `Vec<f64>` with explicit shape. Sizes in this crate
//! are modest (embedding dimension up to a few hundred, tens of defining
//! pairs), so accuracy is preferred over blocking or vectorization.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(a: &mut [f64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a != 0.0 {
                    axpy(a, other.row(k), out_row);
                }
            }
        }
        Ok(out)
    }

    /// `self * x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows).map(|r| dot(self.row(r), x)).collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    /// Frobenius distance of `selfᵀ·self` from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        let gram = self.transpose().matmul(self).expect("square gram");
        let mut acc = 0.0;
        for i in 0..gram.rows {
            for j in 0..gram.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                let d = gram.get(i, j) - target;
                acc += d * d;
            }
        }
        libm::sqrt(acc)
    }
}

/// Thin singular value decomposition `A = U · diag(s) · Vᵀ`.
///
/// `u` holds the left singular vectors as columns (`m × r`), `v` the right
/// singular vectors as columns (`n × r`), with `r = min(m, n)` and `s`
/// non-increasing. Columns of `u` belonging to zero singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    /// Number of singular values at or above `rel_tol * s_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let max = self.s.first().copied().unwrap_or(0.0);
        if max <= 0.0 {
            return 0;
        }
        self.s.iter().filter(|&&x| x >= rel_tol * max).count()
    }
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD.
///
/// Column rotations are applied to `A` until all column pairs are
/// numerically orthogonal; the accumulated rotations form `V`. For wide
/// matrices the transpose is decomposed instead so that the rotated side is
/// always the smaller one.
pub fn svd(a: &Matrix) -> Svd {
    if a.rows < a.cols {
        let t = svd(&a.transpose());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    let (m, n) = (a.rows, a.cols);
    // column-major working copies
    let mut cols: Vec<Vec<f64>> = (0..n).map(|c| a.column(c)).collect();
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|c| {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            e
        })
        .collect();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || libm::fabs(gamma) <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (libm::fabs(zeta) + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut vcols, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(usize, f64)> = cols.iter().map(|c| norm(c)).enumerate().collect();
    // stable sort keeps index order among equal singular values
    order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(core::cmp::Ordering::Equal));

    let mut u = Matrix::zeros(m, n);
    let mut v = Matrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (j, &(idx, sigma)) in order.iter().enumerate() {
        s.push(sigma);
        if sigma > 0.0 {
            for r in 0..m {
                u.set(r, j, cols[idx][r] / sigma);
            }
        }
        for r in 0..n {
            v.set(r, j, vcols[idx][r]);
        }
    }
    Svd { u, s, v }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let xq = *y;
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Modified Gram–Schmidt with one reorthogonalization pass.
///
/// Fails if a vector is (numerically) dependent on its predecessors.
pub fn orthonormalize(vectors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let original = norm(v);
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &out {
                let c = dot(&w, b);
                axpy(-c, b, &mut w);
            }
        }
        let n = norm(&w);
        if original == 0.0 || n <= 1e-12 * original {
            return Err(Error::RankDeficient {
                requested: vectors.len(),
                max: out.len(),
            });
        }
        scale(&mut w, 1.0 / n);
        out.push(w);
    }
    Ok(out)
}

/// Extends an orthonormal set to a full basis of `R^dim` using standard basis
/// vectors, picking at each step the axis with the largest residual.
pub fn complete_basis(mut basis: Vec<Vec<f64>>, dim: usize) -> Vec<Vec<f64>> {
    while basis.len() < dim {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for axis in 0..dim {
            let mut w = vec![0.0; dim];
            w[axis] = 1.0;
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&w, b);
                    axpy(-c, b, &mut w);
                }
            }
            let n = norm(&w);
            if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
                best = Some((n, w));
            }
        }
        let (n, mut w) = best.expect("dim > 0");
        scale(&mut w, 1.0 / n);
        basis.push(w);
    }
    basis
}

/// Largest absolute deviation of the Gram matrix of `vectors` from the identity.
pub fn max_orthonormality_deviation(vectors: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max(libm::fabs(dot(a, b) - target));
        }
    }
    worst
}

/// Flips `v` so its first entry with magnitude above `1e-10 · max|v|` is positive.
pub fn canonical_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(libm::fabs(*x)));
    if max == 0.0 {
        return;
    }
    if let Some(first) = v.iter().find(|x| libm::fabs(**x) > 1e-10 * max) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(svd: &Svd) -> Matrix {
        let r = svd.s.len();
        let mut us = svd.u.clone();
        for c in 0..r {
            for row in 0..us.rows() {
                us.set(row, c, us.get(row, c) * svd.s[c]);
            }
        }
        us.matmul(&svd.v.transpose()).unwrap()
    }

    #[test]
    fn svd_reconstructs_tall_and_wide() {
        let a = Matrix::from_rows(&[
            [1.0, 2.0, 0.5],
            [0.0, -1.0, 3.0],
            [4.0, 0.0, 1.0],
            [2.0, 2.0, 2.0],
        ])
        .unwrap();
        for m in [a.clone(), a.transpose()] {
            let d = svd(&m);
            let back = reconstruct(&d);
            for (x, y) in back.as_slice().iter().zip(m.as_slice()) {
                assert!((x - y).abs() < 1e-12);
            }
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
            assert!(d.v.orthogonality_defect() < 1e-12);
        }
    }

    #[test]
    fn svd_rank_of_rank_one() {
        let a = Matrix::from_rows(&[[2.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).unwrap();
        let d = svd(&a);
        assert_eq!(d.rank(1e-10), 1);
        assert!((d.s[0] - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gram_schmidt_rejects_dependent() {
        let v = [alloc::vec![1.0, 0.0], alloc::vec![2.0, 0.0]];
        assert!(orthonormalize(&v).is_err());
        let ok = orthonormalize(&[alloc::vec![1.0, 1.0], alloc::vec![1.0, 0.0]]).unwrap();
        assert!(max_orthonormality_deviation(&ok) < 1e-15);
    }

    #[test]
    fn completion_gives_full_basis() {
        let b = complete_basis(alloc::vec![alloc::vec![0.6, 0.8, 0.0]], 3);
        assert_eq!(b.len(), 3);
        assert!(max_orthonormality_deviation(&b) < 1e-14);
    }

    #[test]
    fn sign_canonicalization() {
        let mut v = [0.0, -0.5, 0.2];
        canonical_sign(&mut v);
        assert_eq!(v, [0.0, 0.5, -0.2]);
    }
}
