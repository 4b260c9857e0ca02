//! Symmetric eigensolver (cyclic Jacobi) and one-sided Jacobi singular values.
//!
//! Both iterate whole sweeps in a fixed pivot order, so results are
//! bit-reproducible for identical inputs.

use crate::error::{Error, Result};
use crate::matrixcore::dense::{dot, DenseMatrix};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen<T> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors stored as columns, ordered like `values`.
    pub vectors: DenseMatrix<T>,
}

impl<T: Scalar> SymEigen<T> {
    /// Rebuilds `V diag(f(λ)) Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> DenseMatrix<T> {
        let n = self.values.len();
        let mapped: Vec<T> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = T::zero();
                for k in 0..n {
                    acc = acc + v[(i, k)] * mapped[k] * v[(j, k)];
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc;
            }
        }
        out
    }
}

/// Full eigen-decomposition of `(S + Sᵀ)/2`.
pub fn sym_eigen<T: Scalar>(s: &DenseMatrix<T>) -> Result<SymEigen<T>> {
    if !s.is_square() {
        return Err(Error::Dimension(format!(
            "eigenproblem needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let n = s.rows();
    let mut a = s.symmetrized();
    let mut v = DenseMatrix::identity(n);
    let eps = T::epsilon();
    let scale = a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= eps * scale || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = v.select_columns(&order);
    Ok(SymEigen { values, vectors })
}

/// Singular values in descending order, via one-sided Jacobi on the taller
/// orientation of `m`. Exactly dependent rows yield (near-)zero values with
/// high relative accuracy, which squaring-based routes cannot resolve.
pub fn singular_values<T: Scalar>(m: &DenseMatrix<T>) -> Result<Vec<T>> {
    if m.is_empty() {
        return Err(Error::Dimension("singular values of an empty matrix".into()));
    }
    let a = if m.rows() >= m.cols() { m.clone() } else { m.transpose() };
    let ncols = a.cols();
    let mut cols: Vec<Vec<T>> = (0..ncols).map(|j| a.column(j)).collect();
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..ncols {
            for q in (p + 1)..ncols {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (u, w) = (*xp, *xq);
                    *xp = c * u - s * w;
                    *xq = s * u + c * w;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<T> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    Ok(sv)
}
