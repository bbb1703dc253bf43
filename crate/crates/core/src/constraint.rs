//! Linear constraints `G theta + a = 0` and their orthonormal null-space bases.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::symmetrize;
use crate::spectrum::Spectrum;

/// Constraint `G theta + a = 0` with `G` of full row rank, together with an
/// orthonormal basis `U` of `null(G)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub g: DMatrix<f64>,
    pub a: DVector<f64>,
    pub u: DMatrix<f64>,
}

impl ConstraintSet {
    /// No constraints: `K = 0`, `U = I`.
    pub fn unconstrained(m: usize) -> Self {
        ConstraintSet {
            g: DMatrix::zeros(0, m),
            a: DVector::zeros(0),
            u: DMatrix::identity(m, m),
        }
    }

    pub fn new(g: DMatrix<f64>, a: DVector<f64>) -> Result<Self> {
        if a.len() != g.nrows() {
            return Err(Error::DimensionMismatch {
                expected: g.nrows(),
                found: a.len(),
            });
        }
        let u = nullspace_basis(&g)?;
        Ok(ConstraintSet { g, a, u })
    }

    pub fn num_constraints(&self) -> usize {
        self.g.nrows()
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }
}

/// Orthonormal basis of `null(G)`, taken from the unit-eigenvalue eigenvectors of the
/// projector `I - G^T (G G^T)^{-1} G`.
///
/// Columns are ordered by the index of their largest-magnitude entry and each column's
/// first entry above `1e-12` is positive.
pub fn nullspace_basis(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (k, m) = g.shape();
    if k == 0 {
        return Ok(DMatrix::identity(m, m));
    }
    if k > m {
        return Err(Error::RankDeficientConstraint { ratio: 0.0 });
    }
    let sv = g.clone().svd(false, false).singular_values;
    let ratio = sv.min() / sv.max();
    if !(ratio > 1e-10) {
        return Err(Error::RankDeficientConstraint {
            ratio: if ratio.is_nan() { 0.0 } else { ratio },
        });
    }
    if k == m {
        return Ok(DMatrix::zeros(m, 0));
    }
    let ggt = g * g.transpose();
    let inv = ggt
        .cholesky()
        .ok_or(Error::RankDeficientConstraint { ratio })?
        .inverse();
    let proj = DMatrix::identity(m, m) - g.transpose() * inv * g;
    let eig = SymmetricEigen::new(symmetrize(&proj));

    let mut cols: Vec<DVector<f64>> = (0..m)
        .filter(|&c| eig.eigenvalues[c] > 0.5)
        .map(|c| eig.eigenvectors.column(c).into_owned())
        .collect();
    debug_assert_eq!(cols.len(), m - k);
    cols.sort_by_key(|v| {
        let mut best = 0;
        for i in 1..v.len() {
            if v[i].abs() > v[best].abs() {
                best = i;
            }
        }
        best
    });
    for col in &mut cols {
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                *col = -col.clone();
            }
        }
    }
    Ok(DMatrix::from_columns(&cols))
}

/// The `R`-bandlimited constraint: `G = Q V^T` selects frequencies `R+1..M`, `a = 0`,
/// and `U` is the first `R` eigenvector columns.
pub fn bandlimited_constraint(spec: &Spectrum, r: usize) -> Result<ConstraintSet> {
    let m = spec.dim();
    if r == 0 || r > m {
        return Err(Error::BandOutOfRange { r, m });
    }
    let g = spec.vectors.columns(r, m - r).transpose();
    Ok(ConstraintSet {
        g,
        a: DVector::zeros(m - r),
        u: spec.low_band(r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::spectrum::decompose;

    #[test]
    fn empty_constraint_is_identity() {
        assert_eq!(nullspace_basis(&DMatrix::zeros(0, 4)).unwrap(), DMatrix::identity(4, 4));
    }

    #[test]
    fn sum_constraint_on_two_vertices() {
        let g = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let u = nullspace_basis(&g).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((u[(0, 0)] - h).abs() < 1e-14);
        assert!((u[(1, 0)] + h).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_rejected() {
        let g = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0]);
        assert!(matches!(
            nullspace_basis(&g),
            Err(Error::RankDeficientConstraint { .. })
        ));
    }

    #[test]
    fn bandlimited_matches_generic_range() {
        let p3 = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = decompose(&p3.laplacian()).unwrap();
        let c = bandlimited_constraint(&s, 2).unwrap();
        assert_eq!(c.u, s.vectors.columns(0, 2).into_owned());
        assert!((&c.g * &c.u).amax() <= 1e-12);
        let generic = nullspace_basis(&c.g).unwrap();
        let proj_a = &generic * generic.transpose();
        let proj_b = &c.u * c.u.transpose();
        assert!((proj_a - proj_b).amax() < 1e-10);

        let full = bandlimited_constraint(&s, 3).unwrap();
        assert_eq!(full.num_constraints(), 0);
        assert_eq!(full.u, s.vectors);
        assert!(bandlimited_constraint(&s, 0).is_err());
        assert!(bandlimited_constraint(&s, 4).is_err());
    }
}
