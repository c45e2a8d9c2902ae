//! Small dense linear-algebra kernels used by the Gaussian engine.
//!
//! Only what the covariance-matrix formalism needs lives here: a row-major
//! matrix, the implicit QL eigensolver for symmetric tridiagonal matrices and
//! an orthogonal (Householder) reduction of antisymmetric matrices to
//! tridiagonal form.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
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
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Matrix product `self * rhs` (i-k-j loop order).
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in a_row.iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Principal submatrix on the given (sorted or unsorted) index list.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |i, j| self[(idx[i], idx[j])])
    }

    /// Contiguous block `rows_range x cols_range`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// `max |A + Aᵀ|`.
    pub fn antisymmetry_error(&self) -> T {
        assert!(self.is_square());
        let n = self.rows;
        let mut err = T::zero();
        for i in 0..n {
            for j in i..n {
                err = err.max((self[(i, j)] + self[(j, i)]).abs());
            }
        }
        err
    }

    /// Replaces `A` by `(A - Aᵀ)/2`.
    pub fn antisymmetrize(&mut self) {
        assert!(self.is_square());
        let n = self.rows;
        let half = T::lit(0.5);
        for i in 0..n {
            self[(i, i)] = T::zero();
            for j in i + 1..n {
                let v = (self[(i, j)] - self[(j, i)]) * half;
                self[(i, j)] = v;
                self[(j, i)] = -v;
            }
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn cast<U: Real>(&self) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| U::lit(x.as_f64())).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix.
///
/// `vectors`, when present, holds one eigenvector per row, in the same order
/// as `values` (ascending).
#[derive(Debug, Clone)]
pub struct TridiagonalEigen<T> {
    pub values: Vec<T>,
    pub vectors: Option<DenseMatrix<T>>,
}

/// Implicit QL with Wilkinson-type shifts on the symmetric tridiagonal matrix
/// with diagonal `diag` and off-diagonal `off` (`off[i]` couples `i`, `i+1`).
pub fn tridiagonal_eigen<T: Real>(
    diag: &[T],
    off: &[T],
    want_vectors: bool,
) -> Result<TridiagonalEigen<T>> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagonalEigen {
            values: Vec::new(),
            vectors: want_vectors.then(|| DenseMatrix::zeros(0, 0)),
        });
    }
    if off.len() + 1 != n {
        return Err(Error::invalid(format!(
            "tridiagonal matrix of order {n} needs {} off-diagonal entries, got {}",
            n - 1,
            off.len()
        )));
    }

    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(T::zero());
    // Row k of `vt` is the k-th column of the accumulated rotation.
    let mut vt = want_vectors.then(|| DenseMatrix::<T>::identity(n));

    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut shift_total = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NumericalFailure(
                        "tridiagonal QL iteration did not converge".into(),
                    ));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                shift_total += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(vt) = vt.as_mut() {
                        rotate_rows(vt, i, c, s);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += shift_total;
        e[l] = T::zero();
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = vt.map(|vt| {
        let mut sorted = DenseMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            sorted.row_mut(dst).copy_from_slice(vt.row(src));
        }
        sorted
    });
    Ok(TridiagonalEigen { values, vectors })
}

/// Applies the plane rotation acting on rows `i` and `i+1`.
#[inline]
fn rotate_rows<T: Real>(vt: &mut DenseMatrix<T>, i: usize, c: T, s: T) {
    let n = vt.cols();
    let (head, tail) = vt.data.split_at_mut((i + 1) * n);
    let row_i = &mut head[i * n..];
    let row_next = &mut tail[..n];
    for (a, b) in row_i.iter_mut().zip(row_next.iter_mut()) {
        let h = *b;
        *b = s * *a + c * h;
        *a = c * *a - s * h;
    }
}

/// Orthogonal reduction `Qᵀ A Q = T` of a real antisymmetric matrix to
/// tridiagonal form. Returns the superdiagonal `T[k][k+1]`.
///
/// The input is consumed as workspace.
pub fn skew_tridiagonalize<T: Real>(mut a: DenseMatrix<T>) -> Vec<T> {
    assert!(a.is_square(), "skew_tridiagonalize needs a square matrix");
    let n = a.rows();
    if n < 2 {
        return Vec::new();
    }
    let two = T::lit(2.0);
    let mut v = vec![T::zero(); n];
    let mut u = vec![T::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let m = n - lo;
        let mut norm2 = T::zero();
        for i in 0..m {
            let x = a[(lo + i, k)];
            v[i] = x;
            norm2 += x * x;
        }
        if norm2 == T::zero() {
            continue;
        }
        let norm = norm2.sqrt();
        let x0 = v[0];
        let alpha = if x0 > T::zero() { -norm } else { norm };
        v[0] = x0 - alpha;
        let vtv = norm2 - x0 * x0 + v[0] * v[0];
        if vtv == T::zero() {
            continue;
        }
        let beta = two / vtv;

        // u = B v on the trailing block.
        for i in 0..m {
            let row = &a.row(lo + i)[lo..];
            let mut acc = T::zero();
            for (&bij, &vj) in row.iter().zip(&v[..m]) {
                acc += bij * vj;
            }
            u[i] = acc;
        }
        // B <- B + beta (v uᵀ - u vᵀ)
        for i in 0..m {
            let bv = beta * v[i];
            let bu = beta * u[i];
            let row = &mut a.row_mut(lo + i)[lo..];
            for ((bij, &uj), &vj) in row.iter_mut().zip(&u[..m]).zip(&v[..m]) {
                *bij += bv * uj - bu * vj;
            }
        }
        a[(lo, k)] = alpha;
        a[(k, lo)] = -alpha;
        for i in 1..m {
            a[(lo + i, k)] = T::zero();
            a[(k, lo + i)] = T::zero();
        }
    }
    (0..n - 1).map(|k| a[(k, k + 1)]).collect()
}

/// Eigenvalues (ascending) of the Hermitian matrix `i·A` for real
/// antisymmetric `A`. They come in pairs `±ν`.
pub fn skew_spectrum<T: Real>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let off: Vec<T> = skew_tridiagonalize(a.clone())
        .into_iter()
        .map(|x| x.abs())
        .collect();
    // A diagonal phase rotation maps i·T onto the real symmetric tridiagonal
    // matrix with off-diagonal |T[k][k+1]|.
    let diag = vec![T::zero(); n];
    Ok(tridiagonal_eigen(&diag, &off, false)?.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_antisymmetric(n: usize, rng: &mut impl Rng) -> DenseMatrix<f64> {
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let x: f64 = rng.gen_range(-1.0..1.0);
                a[(i, j)] = x;
                a[(j, i)] = -x;
            }
        }
        a
    }

    #[test]
    fn tridiagonal_eigen_matches_closed_form_chain() {
        // Path graph: eigenvalues 2 cos(pi k / (n + 1)).
        let n = 17;
        let eig = tridiagonal_eigen(&vec![0.0; n], &vec![1.0; n - 1], true).unwrap();
        let mut expected: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (std::f64::consts::PI * k as f64 / (n as f64 + 1.0)).cos())
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in eig.values.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
        // Eigenvectors satisfy T v = e v.
        let vt = eig.vectors.unwrap();
        for k in 0..n {
            let v = vt.row(k);
            for i in 0..n {
                let mut tv = 0.0;
                if i > 0 {
                    tv += v[i - 1];
                }
                if i + 1 < n {
                    tv += v[i + 1];
                }
                assert!((tv - eig.values[k] * v[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tridiagonal_eigen_vectors_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 40;
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let e: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let eig = tridiagonal_eigen(&d, &e, true).unwrap();
        let vt = eig.vectors.unwrap();
        let gram = vt.matmul(&vt.transpose());
        assert!(gram.max_abs_diff(&DenseMatrix::identity(n)) < 1e-13);
        // Compare with nalgebra on the dense matrix.
        let dense = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                d[i]
            } else if i + 1 == j {
                e[i]
            } else if j + 1 == i {
                e[j]
            } else {
                0.0
            }
        });
        let mut reference: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
        reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in eig.values.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn skew_spectrum_matches_dense_hermitian_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 3, 6, 9, 24] {
            let a = random_antisymmetric(n, &mut rng);
            let ours = skew_spectrum(&a).unwrap();
            // i·A has the same spectrum as the real symmetric embedding
            // [[0, -A], [A, 0]], each eigenvalue doubled.
            let emb = DMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
                (true, false) => -a[(i, j - n)],
                (false, true) => a[(i - n, j)],
                _ => 0.0,
            });
            let mut reference: Vec<f64> = emb.symmetric_eigenvalues().iter().copied().collect();
            reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (k, val) in ours.iter().enumerate() {
                assert!((val - reference[2 * k]).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn skew_spectrum_f32_instantiation() {
        let a = DenseMatrix::<f32>::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => 0.75,
            (1, 0) => -0.75,
            _ => 0.0,
        });
        let s = skew_spectrum(&a).unwrap();
        assert!((s[0] + 0.75).abs() < 1e-6 && (s[1] - 0.75).abs() < 1e-6);
    }

    #[test]
    fn antisymmetrize_removes_symmetric_part() {
        let mut m = DenseMatrix::from_fn(3, 3, |i, j| (i * 3 + j) as f64);
        m.antisymmetrize();
        assert_eq!(m.antisymmetry_error(), 0.0);
        assert_eq!(m[(0, 1)], (1.0 - 3.0) / 2.0);
    }
}
