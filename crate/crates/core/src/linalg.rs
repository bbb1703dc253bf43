//! Dense linear-algebra helpers shared by the bounds, estimators and sampling code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Singular values below `PINV_RTOL * s_max` are treated as zero.
pub const PINV_RTOL: f64 = 1e-10;

/// Largest condition number accepted for an information matrix that must be inverted.
pub const MAX_INFO_CONDITION: f64 = 1e10;

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix through its eigendecomposition.
pub fn pinv_symmetric(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = SymmetricEigen::new(symmetrize(a));
    let smax = eig.eigenvalues.amax();
    let mut out = DMatrix::zeros(n, n);
    if smax == 0.0 {
        return out;
    }
    for k in 0..n {
        let lam = eig.eigenvalues[k];
        if lam.abs() > PINV_RTOL * smax {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / lam;
        }
    }
    symmetrize(&out)
}

/// Moore-Penrose pseudo-inverse of a general matrix through the SVD.
pub fn pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return DMatrix::zeros(a.ncols(), a.nrows());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = if smax > 0.0 { PINV_RTOL * smax } else { 0.0 };
    // `pseudo_inverse` keeps singular values strictly above eps
    svd.pseudo_inverse(eps).expect("both factors were computed")
}

/// Max-abs residuals of the four Moore-Penrose conditions for `(a, a_pinv)`.
pub fn moore_penrose_residuals(a: &DMatrix<f64>, a_pinv: &DMatrix<f64>) -> [f64; 4] {
    let axa = a * a_pinv * a;
    let xax = a_pinv * a * a_pinv;
    let ax = a * a_pinv;
    let xa = a_pinv * a;
    [
        (axa - a).amax(),
        (xax - a_pinv).amax(),
        (&ax - ax.transpose()).amax(),
        (&xa - xa.transpose()).amax(),
    ]
}

/// Condition number of a symmetric matrix, `+inf` if it is not positive definite.
pub fn spd_condition(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return f64::INFINITY;
    }
    let eig = SymmetricEigen::new(symmetrize(a)).eigenvalues;
    let max = eig.max();
    let min = eig.min();
    if min <= 0.0 || max <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverts a symmetric positive definite information matrix, refusing anything whose
/// condition number exceeds [`MAX_INFO_CONDITION`].
pub fn invert_information(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let cond = spd_condition(a);
    if !(cond <= MAX_INFO_CONDITION) {
        return Err(Error::SingularInformation { cond });
    }
    let chol = symmetrize(a).cholesky().ok_or(Error::SingularInformation { cond })?;
    Ok(symmetrize(&chol.inverse()))
}

/// Solves `a x = b` for an SPD `a` after the same conditioning check.
pub fn solve_information(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let cond = spd_condition(a);
    if !(cond <= MAX_INFO_CONDITION) {
        return Err(Error::SingularInformation { cond });
    }
    let chol = symmetrize(a).cholesky().ok_or(Error::SingularInformation { cond })?;
    Ok(chol.solve(b))
}

/// Rows `rows` of `a`, all columns.
pub fn select_rows(a: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), a.ncols(), |r, c| a[(rows[r], c)])
}

/// Principal submatrix on `idx`.
pub fn principal_submatrix(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| a[(idx[r], idx[c])])
}

/// `diag(d) * a * diag(d)`.
pub fn scale_both(a: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| d[r] * a[(r, c)] * d[c])
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(symmetrize(a)).eigenvalues.min()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_of_rank_one() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let p = pinv_symmetric(&a);
        let expected = DMatrix::from_row_slice(2, 2, &[0.25, -0.25, -0.25, 0.25]);
        assert!((p - &expected).amax() < 1e-14);
        let p = pinv(&a);
        assert!((p - expected).amax() < 1e-14);
    }

    #[test]
    fn moore_penrose_holds_for_pinv() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 0.0, 1.0]);
        let r = moore_penrose_residuals(&a, &pinv(&a));
        assert!(r.iter().all(|&x| x < 1e-12), "{r:?}");
    }

    #[test]
    fn singular_information_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(invert_information(&a), Err(Error::SingularInformation { .. })));
        let b = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let inv = invert_information(&b).unwrap();
        assert!((inv[(0, 0)] - 0.5).abs() < 1e-15 && (inv[(1, 1)] - 2.0).abs() < 1e-15);
    }
}
