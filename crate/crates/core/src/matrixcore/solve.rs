use crate::error::{Error, Result};
use crate::matrixcore::dense::DenseMatrix;
use crate::scalar::Scalar;

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve<T: Scalar>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    let n = a.rows();
    if !a.is_square() || b.len() != n {
        return Err(Error::Dimension(format!(
            "solve with a {}x{} matrix and rhs of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    let tiny = T::epsilon() * a.max_abs() * T::lit(n.max(1) as f64);

    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, m[(i, k)].abs()))
            .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= tiny {
            return Err(Error::Singular(format!("pivot {k} is {:e}", pmax.as_f64())));
        }
        if piv != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(piv, j)];
                m[(piv, j)] = tmp;
            }
            x.swap(k, piv);
        }
        let pivot = m[(k, k)];
        for i in (k + 1)..n {
            let f = m[(i, k)] / pivot;
            if f == T::zero() {
                continue;
            }
            for j in k..n {
                m[(i, j)] = m[(i, j)] - f * m[(k, j)];
            }
            x[i] = x[i] - f * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut acc = x[k];
        for j in (k + 1)..n {
            acc = acc - m[(k, j)] * x[j];
        }
        x[k] = acc / m[(k, k)];
    }
    Ok(x)
}

pub fn inverse<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let n = a.rows();
    let mut inv = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        let col = solve(a, &e)?;
        for (i, v) in col.into_iter().enumerate() {
            inv[(i, j)] = v;
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = DenseMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(solve(&a, &[2.0, 3.0]).unwrap(), vec![3.0, 2.0]);
    }

    #[test]
    fn singular_is_reported() {
        let a = DenseMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(solve(&a, &[1.0, 1.0]), Err(Error::Singular(_))));
    }

    #[test]
    fn inverse_roundtrip() {
        let a = DenseMatrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let p = a.matmul(&inverse(&a).unwrap()).unwrap();
        assert!(p.sub(&DenseMatrix::identity(2)).unwrap().max_abs() < 1e-15);
    }
}
