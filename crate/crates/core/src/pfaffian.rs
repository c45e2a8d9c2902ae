//! Pfaffians of real antisymmetric matrices in sign/log-magnitude form.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;

/// `Pf(A) = sign · exp(log_abs)`. A vanishing Pfaffian has `sign == 0` and
/// `log_abs == -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPfaffian<T> {
    pub sign: i8,
    pub log_abs: T,
}

impl<T: Real> LogPfaffian<T> {
    pub fn zero() -> Self {
        Self {
            sign: 0,
            log_abs: T::neg_infinity(),
        }
    }

    /// The Pfaffian as a plain number (may under/overflow).
    pub fn value(&self) -> T {
        if self.sign == 0 {
            T::zero()
        } else {
            T::lit(self.sign as f64) * self.log_abs.exp()
        }
    }
}

/// Pfaffian by Parlett–Reid reduction `A = L T Lᵀ` with partial pivoting.
///
/// The input is antisymmetrized before the reduction, so tiny asymmetries
/// from upstream rounding are harmless; an asymmetry above `1e-10` relative
/// to the largest entry is rejected.
pub fn pfaffian_log<T: Real>(a: &DenseMatrix<T>) -> Result<LogPfaffian<T>> {
    if !a.is_square() {
        return Err(Error::invalid("pfaffian of a non-square matrix"));
    }
    let n = a.rows();
    if n % 2 == 1 {
        return Err(Error::invalid(format!("pfaffian of odd dimension {n}")));
    }
    if n == 0 {
        return Ok(LogPfaffian {
            sign: 1,
            log_abs: T::zero(),
        });
    }
    let scale = a.max_abs().max(T::one());
    if a.antisymmetry_error() > T::tol(1e-10) * scale {
        return Err(Error::invalid("pfaffian input is not antisymmetric"));
    }
    let mut w = a.clone();
    w.antisymmetrize();
    Ok(parlett_reid_in_place(&mut w))
}

fn parlett_reid_in_place<T: Real>(w: &mut DenseMatrix<T>) -> LogPfaffian<T> {
    let n = w.rows();
    let mut sign: i8 = 1;
    let mut log_abs = T::zero();
    let mut tau = vec![T::zero(); n];
    let mut col = vec![T::zero(); n];

    let mut k = 0;
    while k + 1 < n {
        // Pivot: largest entry in column k below the diagonal.
        let mut kp = k + 1;
        let mut best = w[(k + 1, k)].abs();
        for i in k + 2..n {
            let v = w[(i, k)].abs();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            swap_rows_cols(w, k + 1, kp);
            sign = -sign;
        }
        let pivot = w[(k, k + 1)];
        if pivot == T::zero() {
            return LogPfaffian::zero();
        }
        if pivot < T::zero() {
            sign = -sign;
        }
        log_abs += pivot.abs().ln();

        if k + 2 < n {
            let lo = k + 2;
            for j in lo..n {
                tau[j] = w[(k, j)] / pivot;
                col[j] = w[(j, k + 1)];
            }
            // W[lo.., lo..] += tau colᵀ - col tauᵀ
            for i in lo..n {
                let ti = tau[i];
                let ci = col[i];
                let row = &mut w.row_mut(i)[lo..];
                for ((wij, &cj), &tj) in row.iter_mut().zip(&col[lo..n]).zip(&tau[lo..n]) {
                    *wij += ti * cj - ci * tj;
                }
            }
        }
        k += 2;
    }
    LogPfaffian { sign, log_abs }
}

fn swap_rows_cols<T: Real>(w: &mut DenseMatrix<T>, p: usize, q: usize) {
    let n = w.rows();
    for j in 0..n {
        let tmp = w[(p, j)];
        w[(p, j)] = w[(q, j)];
        w[(q, j)] = tmp;
    }
    for i in 0..n {
        let tmp = w[(i, p)];
        w[(i, p)] = w[(i, q)];
        w[(i, q)] = tmp;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn antisym_from(n: usize, upper: &[f64]) -> DenseMatrix<f64> {
        let mut a = DenseMatrix::zeros(n, n);
        let mut it = upper.iter();
        for i in 0..n {
            for j in i + 1..n {
                let x = *it.next().unwrap();
                a[(i, j)] = x;
                a[(j, i)] = -x;
            }
        }
        a
    }

    /// Pfaffian by expansion along the first row; exponential, for tiny n.
    fn pfaffian_expansion(a: &DenseMatrix<f64>) -> f64 {
        let n = a.rows();
        if n == 0 {
            return 1.0;
        }
        let mut total = 0.0;
        for j in 1..n {
            let rest: Vec<usize> = (1..n).filter(|&k| k != j).collect();
            let minor = a.principal_submatrix(&rest);
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            total += sign * a[(0, j)] * pfaffian_expansion(&minor);
        }
        total
    }

    #[test]
    fn two_by_two() {
        let a = antisym_from(2, &[3.5]);
        assert!((pfaffian_log(&a).unwrap().value() - 3.5).abs() < 1e-14);
        let b = antisym_from(2, &[-0.25]);
        let pf = pfaffian_log(&b).unwrap();
        assert_eq!(pf.sign, -1);
        assert!((pf.value() + 0.25).abs() < 1e-15);
    }

    #[test]
    fn canonical_four_by_four() {
        let (a, b) = (1.7, -0.3);
        let m = antisym_from(4, &[a, 0.0, 0.0, 0.0, 0.0, b]);
        assert!((pfaffian_log(&m).unwrap().value() - a * b).abs() < 1e-14);
    }

    #[test]
    fn odd_dimension_rejected() {
        let m = DenseMatrix::<f64>::zeros(3, 3);
        assert!(matches!(pfaffian_log(&m), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn singular_matrix_gives_zero() {
        let m = DenseMatrix::<f64>::zeros(4, 4);
        let pf = pfaffian_log(&m).unwrap();
        assert_eq!(pf.sign, 0);
        assert_eq!(pf.value(), 0.0);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let mut m = antisym_from(2, &[1.0]);
        m[(1, 0)] = 0.5;
        assert!(pfaffian_log(&m).is_err());
    }

    #[test]
    fn matches_expansion_for_small_matrices() {
        let upper: Vec<f64> = (0..15)
            .map(|k| ((k * 37 % 11) as f64 - 5.0) / 3.0)
            .collect();
        let a = antisym_from(6, &upper);
        let pf = pfaffian_log(&a).unwrap().value();
        assert!((pf - pfaffian_expansion(&a)).abs() < 1e-12);
    }

    #[test]
    fn log_domain_survives_underflow() {
        // Pf of a block-diagonal matrix with 600 blocks of 1e-3 is 1e-1800.
        let n = 1200;
        let mut a = DenseMatrix::<f64>::zeros(n, n);
        for b in 0..n / 2 {
            a[(2 * b, 2 * b + 1)] = 1e-3;
            a[(2 * b + 1, 2 * b)] = -1e-3;
        }
        let pf = pfaffian_log(&a).unwrap();
        assert_eq!(pf.sign, 1);
        assert!((pf.log_abs - 600.0 * 1e-3f64.ln()).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn square_equals_determinant(
            half in 1usize..7,
            seed in proptest::collection::vec(-1.0f64..1.0, 66),
        ) {
            let n = 2 * half;
            let a = antisym_from(n, &seed[..n * (n - 1) / 2]);
            let pf = pfaffian_log(&a).unwrap().value();
            let det = DMatrix::from_fn(n, n, |i, j| a[(i, j)]).determinant();
            let scale = det.abs().max(1e-12);
            prop_assert!((pf * pf - det).abs() / scale <= 1e-8, "pf^2={} det={}", pf * pf, det);
        }
    }
}
