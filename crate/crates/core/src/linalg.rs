//! Thin wrappers over `faer` for the Hermitian eigenproblems the measures need.
//!
//! Matrices whose imaginary parts vanish identically are decomposed with the
//! real symmetric solver, which is several times faster.

use faer::{c64, Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Eigenvalues in nondecreasing order with unit eigenvectors in the columns.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<c64>,
}

pub(crate) fn is_real(m: MatRef<'_, c64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].im == 0.0))
}

fn real_part(m: MatRef<'_, c64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re)
}

pub fn eigh(m: MatRef<'_, c64>) -> Result<HermitianEigen> {
    assert_eq!(m.nrows(), m.ncols());
    if is_real(m) {
        let evd = real_part(m)
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numeric(format!("eigendecomposition failed: {e:?}")))?;
        let values = evd.S().column_vector().iter().copied().collect();
        let u = evd.U();
        let vectors = Mat::from_fn(u.nrows(), u.ncols(), |i, j| c64::new(u[(i, j)], 0.0));
        Ok(HermitianEigen { values, vectors })
    } else {
        let evd = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numeric(format!("eigendecomposition failed: {e:?}")))?;
        let values = evd.S().column_vector().iter().map(|z| z.re).collect();
        Ok(HermitianEigen {
            values,
            vectors: evd.U().to_owned(),
        })
    }
}

pub fn eigenvalues(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    assert_eq!(m.nrows(), m.ncols());
    let map = |e| Error::Numeric(format!("eigenvalue computation failed: {e:?}"));
    if is_real(m) {
        real_part(m).self_adjoint_eigenvalues(Side::Lower).map_err(map)
    } else {
        m.self_adjoint_eigenvalues(Side::Lower).map_err(map)
    }
}

pub fn min_eigenvalue(m: MatRef<'_, c64>) -> Result<f64> {
    Ok(eigenvalues(m)?.first().copied().unwrap_or(0.0))
}

pub fn trace(m: MatRef<'_, c64>) -> c64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// max |M − M†|.
pub fn hermiticity_defect(m: MatRef<'_, c64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Σ |M_ij|², which equals Tr(M²) for Hermitian M.
pub fn hs_norm_sq(m: MatRef<'_, c64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc
}

pub fn frobenius_distance(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += (a[(i, j)] - b[(i, j)]).norm_sqr();
        }
    }
    acc.sqrt()
}

/// K M K†
pub fn conjugate(k: MatRef<'_, c64>, m: MatRef<'_, c64>) -> Mat<c64> {
    k * m * k.adjoint()
}
