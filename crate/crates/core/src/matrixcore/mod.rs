//! Dense kernels shared by every other module: spectral norm, extreme
//! eigenvalues, symmetric square root and the 2-norm matrix measure.

mod dense;
mod eigen;
mod solve;

pub use dense::{axpy, dot, norm2, norm_inf, sub_vec, DenseMatrix};
pub use eigen::{singular_values, sym_eigen, SymEigen};
pub use solve::{inverse, solve};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigenvalues below this are rejected by [`sym_sqrt`]; those in
/// `[-PSD_CLAMP, 0)` are clamped to zero.
pub const PSD_CLAMP: f64 = 1e-12;

/// Largest singular value, computed as `sqrt(λ_max)` of the smaller Gram matrix.
pub fn spectral_norm<T: Scalar>(m: &DenseMatrix<T>) -> Result<T> {
    if m.is_empty() {
        return Err(Error::Dimension("spectral norm of an empty matrix".into()));
    }
    let mt = m.transpose();
    let gram = if m.rows() <= m.cols() { m.matmul(&mt)? } else { mt.matmul(m)? };
    let e = sym_eigen(&gram)?;
    let top = *e.values.last().expect("nonempty spectrum");
    Ok(top.max(T::zero()).sqrt())
}

/// `(λ_min, λ_max)` of the symmetrized matrix.
pub fn sym_eig_extremes<T: Scalar>(s: &DenseMatrix<T>) -> Result<(T, T)> {
    if s.is_empty() {
        return Err(Error::Dimension("eigenvalues of an empty matrix".into()));
    }
    let e = sym_eigen(s)?;
    Ok((e.values[0], *e.values.last().expect("nonempty spectrum")))
}

/// Principal square root of a positive semidefinite matrix.
pub fn sym_sqrt<T: Scalar>(s: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let e = sym_eigen(s)?;
    check_psd(&e)?;
    Ok(e.reconstruct_with(|l| l.max(T::zero()).sqrt()))
}

/// Inverse principal square root of a positive definite matrix.
pub fn sym_inv_sqrt<T: Scalar>(s: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let e = sym_eigen(s)?;
    let lmin = e.values.first().copied().unwrap_or(T::zero());
    if lmin <= T::zero() {
        return Err(Error::Singular(format!(
            "inverse square root needs a positive definite matrix (λ_min = {:e})",
            lmin.as_f64()
        )));
    }
    Ok(e.reconstruct_with(|l| T::one() / l.sqrt()))
}

fn check_psd<T: Scalar>(e: &SymEigen<T>) -> Result<()> {
    if let Some(&lmin) = e.values.first() {
        if lmin < -T::tolerance(PSD_CLAMP) {
            return Err(Error::NotPositiveSemidefinite { lambda_min: lmin.as_f64() });
        }
    }
    Ok(())
}

/// Matrix measure induced by the Euclidean norm: `λ_max((A + Aᵀ)/2)`.
pub fn matrix_measure_2<T: Scalar>(a: &DenseMatrix<T>) -> Result<T> {
    if !a.is_square() || a.is_empty() {
        return Err(Error::Dimension(format!(
            "matrix measure needs a nonempty square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(sym_eig_extremes(&a.symmetrized())?.1)
}

/// Smallest singular value; zero columns beyond the rank count as zero.
pub fn min_singular_value<T: Scalar>(m: &DenseMatrix<T>) -> Result<T> {
    let sv = singular_values(m)?;
    let full = m.rows().min(m.cols());
    if sv.len() < full {
        return Ok(T::zero());
    }
    Ok(sv[full - 1])
}
