//! Laplacian eigendecomposition with fixed ordering and sign conventions, the graph
//! Fourier transform, and the Laplacian pseudo-inverse.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::symmetrize;

/// Relative threshold (w.r.t. the largest eigenvalue) below which an eigenvalue is zero,
/// and below which two eigenvalues belong to the same cluster.
pub const ZERO_EIGEN_RTOL: f64 = 1e-9;

/// Entries with magnitude below this are skipped by the sign rule.
const SIGN_THRESHOLD: f64 = 1e-12;

/// A vertex-domain signal.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSignal(pub DVector<f64>);

/// A signal expressed in the Laplacian eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSignal(pub DVector<f64>);

impl GraphSignal {
    pub fn from_vec(v: Vec<f64>) -> Self {
        GraphSignal(DVector::from_vec(v))
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl SpectralSignal {
    pub fn from_vec(v: Vec<f64>) -> Self {
        SpectralSignal(DVector::from_vec(v))
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Eigenpairs of a connected-graph Laplacian.
///
/// Conventions:
/// * eigenvalues ascending, the first snapped to exactly `0.0`;
/// * the first eigenvector is exactly `1/sqrt(M)` in every entry;
/// * eigenvalues closer than `1e-9 * lambda_max` form a cluster: they share their mean
///   value, and their vectors are ordered by the index of their largest-magnitude entry;
/// * every eigenvector's first entry above `1e-12` in magnitude is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Element-wise `sqrt` of the eigenvalues. The first entry is exactly zero.
    pub fn sqrt_eigenvalues(&self) -> DVector<f64> {
        self.eigenvalues.map(|l| l.max(0.0).sqrt())
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// First `r` eigenvector columns.
    pub fn low_band(&self, r: usize) -> DMatrix<f64> {
        self.vectors.columns(0, r).into_owned()
    }

    /// Rebuilds `V diag(lambda) V^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.eigenvalues[k];
        }
        symmetrize(&(&scaled * self.vectors.transpose()))
    }

    /// `sum_{lambda_m > 0} v_m v_m^T / lambda_m`.
    pub fn pinv(&self) -> DMatrix<f64> {
        let m = self.dim();
        let mut out = DMatrix::zeros(m, m);
        for k in 1..m {
            let v = self.vectors.column(k);
            out += (v * v.transpose()) / self.eigenvalues[k];
        }
        symmetrize(&out)
    }

    pub fn gft(&self, s: &GraphSignal) -> Result<SpectralSignal> {
        check_len(self.dim(), s.len())?;
        Ok(SpectralSignal(self.vectors.tr_mul(&s.0)))
    }

    pub fn inverse_gft(&self, s: &SpectralSignal) -> Result<GraphSignal> {
        check_len(self.dim(), s.len())?;
        Ok(GraphSignal(&self.vectors * &s.0))
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Eigendecomposition of a connected-graph Laplacian under the conventions of
/// [`Spectrum`].
pub fn decompose(laplacian: &DMatrix<f64>) -> Result<Spectrum> {
    let m = laplacian.nrows();
    check_len(m, laplacian.ncols())?;
    if m == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    if m == 1 {
        return Ok(Spectrum {
            eigenvalues: DVector::from_element(1, 0.0),
            vectors: DMatrix::from_element(1, 1, 1.0),
        });
    }

    let eig = SymmetricEigen::new(symmetrize(laplacian));
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut cols: Vec<DVector<f64>> = order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();

    let lambda_max = values[m - 1];
    let tol = ZERO_EIGEN_RTOL * lambda_max;
    let zeros = values.iter().filter(|&&l| l < tol).count();
    if lambda_max <= 0.0 || zeros != 1 {
        return Err(Error::DisconnectedGraph {
            zero_eigenvalues: if lambda_max <= 0.0 { m } else { zeros },
        });
    }

    values[0] = 0.0;
    cols[0] = DVector::from_element(m, 1.0 / (m as f64).sqrt());

    // clusters of numerically repeated eigenvalues among 2..M
    let mut start = 1;
    while start < m {
        let mut end = start + 1;
        while end < m && values[end] - values[end - 1] < tol {
            end += 1;
        }
        if end - start > 1 {
            let mean = values[start..end].iter().sum::<f64>() / (end - start) as f64;
            for v in &mut values[start..end] {
                *v = mean;
            }
            let mut block: Vec<DVector<f64>> = cols[start..end].to_vec();
            block.sort_by_key(peak_index);
            cols.splice(start..end, block);
        }
        start = end;
    }

    for col in cols.iter_mut().skip(1) {
        if let Some(first) = col.iter().find(|x| x.abs() > SIGN_THRESHOLD) {
            if *first < 0.0 {
                *col = -col.clone();
            }
        }
    }

    Ok(Spectrum {
        eigenvalues: DVector::from_vec(values),
        vectors: DMatrix::from_columns(&cols),
    })
}

/// Index of the largest-magnitude entry, lowest index on ties.
fn peak_index(v: &DVector<f64>) -> usize {
    let mut best = 0;
    for k in 1..v.len() {
        if v[k].abs() > v[best].abs() {
            best = k;
        }
    }
    best
}

/// Laplacian pseudo-inverse through the rank-one shift
/// `(L - 11^T/M)^{-1} + 11^T/M`.
pub fn pinv_laplacian(laplacian: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = laplacian.nrows();
    check_len(m, laplacian.ncols())?;
    let avg = DMatrix::from_element(m, m, 1.0 / m as f64);
    let shifted = laplacian - &avg;
    let inv = shifted
        .lu()
        .try_inverse()
        .ok_or(Error::DisconnectedGraph { zero_eigenvalues: 2 })?;
    // an (almost) singular shift still "inverts"; catch it through the residual
    let out = symmetrize(&(inv + avg));
    let resid = (laplacian * &out * laplacian - laplacian).amax();
    let scale = laplacian.amax().max(f64::MIN_POSITIVE);
    if !resid.is_finite() || resid > 1e-6 * scale {
        return Err(Error::DisconnectedGraph { zero_eigenvalues: 2 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn p2(w: f64) -> DMatrix<f64> {
        Graph::from_triples(2, &[(0, 1, w)]).unwrap().laplacian()
    }

    #[test]
    fn p2_spectrum() {
        let s = decompose(&p2(1.0)).unwrap();
        assert_eq!(s.eigenvalues[0], 0.0);
        assert!((s.eigenvalues[1] - 2.0).abs() < 1e-14);
        let h = 1.0 / 2f64.sqrt();
        assert!((s.vectors[(0, 1)] - h).abs() < 1e-14);
        assert!((s.vectors[(1, 1)] + h).abs() < 1e-14);
    }

    #[test]
    fn p3_and_k3_spectra() {
        // characteristic polynomials: P3 -> x(x-1)(x-3), K3 -> x(x-3)^2
        let p3 = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = decompose(&p3.laplacian()).unwrap();
        for (got, want) in s.eigenvalues.iter().zip([0.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let k3 = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let s = decompose(&k3.laplacian()).unwrap();
        for (got, want) in s.eigenvalues.iter().zip([0.0, 3.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((s.reconstruct() - k3.laplacian()).norm() / k3.laplacian().norm() < 1e-9);
    }

    #[test]
    fn disconnected_rejected() {
        let g = Graph::from_triples(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(matches!(
            decompose(&g.laplacian()),
            Err(Error::DisconnectedGraph { zero_eigenvalues: 2 })
        ));
        assert!(pinv_laplacian(&g.laplacian()).is_err());
        let empty = Graph::from_triples(3, &[]).unwrap();
        assert!(decompose(&empty.laplacian()).is_err());
    }

    #[test]
    fn gft_examples() {
        let s = decompose(&p2(1.0)).unwrap();
        let a = 1.7;
        let t = s.gft(&GraphSignal::from_vec(vec![a, a])).unwrap();
        assert!((t.0[0] - a * 2f64.sqrt()).abs() < 1e-14 && t.0[1].abs() < 1e-14);
        let t = s.gft(&GraphSignal::from_vec(vec![1.0, -1.0])).unwrap();
        assert!(t.0[0].abs() < 1e-14 && (t.0[1] - 2f64.sqrt()).abs() < 1e-14);
        assert!(s.gft(&GraphSignal::from_vec(vec![1.0])).is_err());
    }

    #[test]
    fn pinv_examples() {
        let p = pinv_laplacian(&p2(1.0)).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[0.25, -0.25, -0.25, 0.25]);
        assert!((p - want).amax() < 1e-14);
        let p = pinv_laplacian(&p2(5.0)).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[0.05, -0.05, -0.05, 0.05]);
        assert!((p - want).amax() < 1e-14);
        let k3 = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let l = k3.laplacian();
        let p = pinv_laplacian(&l).unwrap();
        assert!((p - &l / 9.0).amax() < 1e-14);
    }

    #[test]
    fn single_vertex() {
        let g = Graph::from_triples(1, &[]).unwrap();
        let s = decompose(&g.laplacian()).unwrap();
        assert_eq!(s.eigenvalues[0], 0.0);
        assert_eq!(s.vectors[(0, 0)], 1.0);
    }
}
