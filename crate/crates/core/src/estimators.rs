//! Closed-form estimators: the efficient estimator for relative measurements and the
//! constrained maximum-likelihood estimator for sampled bandlimited signals.
//!
//! Both come in a one-shot form and a precomputed form that reuses the gain matrix
//! across many observations with the same geometry.

use nalgebra::{DMatrix, DVector};

use crate::bounds::sampled_band;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{invert_information, symmetrize};
use crate::spectrum::{pinv_laplacian, GraphSignal, SpectralSignal, Spectrum};

/// Edge measurements `h_{i,j} = w_{i,j} (theta_i - theta_j) + noise`, one per edge of
/// `graph` in its lexicographic edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeObservation {
    pub graph: Graph,
    pub x: DVector<f64>,
}

impl RelativeObservation {
    pub fn new(graph: Graph, x: DVector<f64>) -> Result<Self> {
        if x.len() != graph.num_edges() {
            return Err(Error::DimensionMismatch {
                expected: graph.num_edges(),
                found: x.len(),
            });
        }
        Ok(RelativeObservation { graph, x })
    }
}

/// Noisy samples `x = theta_S + w_S` of a signal on the sorted vertex set `subset`, with
/// the noise covariance on that set.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedObservation {
    pub subset: Vec<usize>,
    pub x: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl MaskedObservation {
    pub fn new(subset: Vec<usize>, x: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if subset.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGraph("sample set must be sorted and unique".into()));
        }
        if x.len() != subset.len() {
            return Err(Error::DimensionMismatch {
                expected: subset.len(),
                found: x.len(),
            });
        }
        if cov.nrows() != subset.len() || cov.ncols() != subset.len() {
            return Err(Error::DimensionMismatch {
                expected: subset.len(),
                found: cov.nrows(),
            });
        }
        Ok(MaskedObservation { subset, x, cov })
    }
}

/// `theta_hat = Lbar^+ E x`, optionally shifted so that `theta_hat[anchor] = 0`.
#[derive(Debug, Clone)]
pub struct RelativeEstimator {
    gain: DMatrix<f64>,
    anchor: Option<usize>,
}

impl RelativeEstimator {
    pub fn new(meas: &Graph, anchor: Option<usize>) -> Result<Self> {
        let m = meas.num_vertices();
        if let Some(a) = anchor {
            if a >= m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: a + 1,
                });
            }
        }
        if !meas.is_connected() {
            return Err(Error::DisconnectedGraph { zero_eigenvalues: 2 });
        }
        let lp = pinv_laplacian(&meas.laplacian())?;
        Ok(RelativeEstimator {
            gain: lp * meas.incidence().matrix,
            anchor,
        })
    }

    pub fn estimate(&self, x: &DVector<f64>) -> Result<GraphSignal> {
        if x.len() != self.gain.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.gain.ncols(),
                found: x.len(),
            });
        }
        let mut est = &self.gain * x;
        if let Some(a) = self.anchor {
            let shift = est[a];
            est.add_scalar_mut(-shift);
        }
        Ok(GraphSignal(est))
    }
}

pub fn relative_estimate(obs: &RelativeObservation, anchor: Option<usize>) -> Result<GraphSignal> {
    RelativeEstimator::new(&obs.graph, anchor)?.estimate(&obs.x)
}

/// Constrained ML for an `R`-bandlimited signal:
/// `theta~_R = (V_SR^T S^{-1} V_SR)^{-1} V_SR^T S^{-1} x`, higher frequencies zero.
#[derive(Debug, Clone)]
pub struct CmlEstimator {
    /// `R x |S|` map from samples to the low-band coefficients.
    gain: DMatrix<f64>,
    low_band: DMatrix<f64>,
    m: usize,
}

impl CmlEstimator {
    pub fn new(spec: &Spectrum, r: usize, subset: &[usize], cov: &DMatrix<f64>) -> Result<Self> {
        let vsr = sampled_band(spec, r, subset)?;
        let d = subset.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: cov.nrows(),
            });
        }
        if (cov - cov.transpose()).amax() > 1e-10 * cov.amax().max(1.0) {
            return Err(Error::BadCovariance("noise covariance is not symmetric".into()));
        }
        let chol = symmetrize(cov)
            .cholesky()
            .ok_or_else(|| Error::BadCovariance("noise covariance is not positive definite".into()))?;
        // S^{-1} V_SR
        let whitened = chol.solve(&vsr);
        if d < r {
            return Err(Error::SingularInformation { cond: f64::INFINITY });
        }
        let info = symmetrize(&vsr.tr_mul(&whitened));
        let inv = invert_information(&info)?;
        Ok(CmlEstimator {
            gain: inv * whitened.transpose(),
            low_band: spec.low_band(r),
            m: spec.dim(),
        })
    }

    /// Low-band coefficients only.
    pub fn estimate_low(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.gain.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.gain.ncols(),
                found: x.len(),
            });
        }
        Ok(&self.gain * x)
    }

    pub fn estimate(&self, x: &DVector<f64>) -> Result<(GraphSignal, SpectralSignal)> {
        let low = self.estimate_low(x)?;
        let vertex = &self.low_band * &low;
        let mut freq = DVector::zeros(self.m);
        freq.rows_mut(0, low.len()).copy_from(&low);
        Ok((GraphSignal(vertex), SpectralSignal(freq)))
    }
}

pub fn cml_bandlimited(obs: &MaskedObservation, spec: &Spectrum, r: usize) -> Result<(GraphSignal, SpectralSignal)> {
    CmlEstimator::new(spec, r, &obs.subset, &obs.cov)?.estimate(&obs.x)
}

/// The `R` low-frequency estimates of [`cml_bandlimited`], with no statement about the
/// remaining frequencies.
pub fn alt_band_estimate(obs: &MaskedObservation, spec: &Spectrum, r: usize) -> Result<SpectralSignal> {
    Ok(SpectralSignal(
        CmlEstimator::new(spec, r, &obs.subset, &obs.cov)?.estimate_low(&obs.x)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::decompose;

    #[test]
    fn p2_relative() {
        let g = Graph::from_triples(2, &[(0, 1, 1.0)]).unwrap();
        let h = 1.3;
        let obs = RelativeObservation::new(g, DVector::from_vec(vec![h])).unwrap();
        let free = relative_estimate(&obs, None).unwrap();
        assert!((free.0[0] - h / 2.0).abs() < 1e-14 && (free.0[1] + h / 2.0).abs() < 1e-14);
        let anchored = relative_estimate(&obs, Some(0)).unwrap();
        assert_eq!(anchored.0[0], 0.0);
        assert!((anchored.0[1] + h).abs() < 1e-14);
    }

    #[test]
    fn relative_noiseless_recovery() {
        let g = Graph::from_triples(4, &[(0, 1, 2.0), (1, 2, 0.5), (2, 3, 1.5), (0, 3, 1.0), (1, 3, 3.0)]).unwrap();
        let theta = DVector::from_vec(vec![0.3, -1.0, 2.0, 0.7]);
        let x = DVector::from_iterator(
            g.num_edges(),
            g.edges().iter().map(|e| e.weight * (theta[e.i] - theta[e.j])),
        );
        let est = relative_estimate(&RelativeObservation::new(g, x).unwrap(), None).unwrap();
        let diff = &est.0 - &theta;
        assert!(diff.iter().all(|d| (d - diff[0]).abs() < 1e-9));
    }

    #[test]
    fn relative_rejects_bad_input() {
        let g = Graph::from_triples(3, &[(0, 1, 1.0)]).unwrap();
        let obs = RelativeObservation::new(g.clone(), DVector::zeros(1)).unwrap();
        assert!(matches!(
            relative_estimate(&obs, None),
            Err(Error::DisconnectedGraph { .. })
        ));
        assert!(RelativeObservation::new(g, DVector::zeros(2)).is_err());
    }

    #[test]
    fn cml_p3_two_samples() {
        let p3 = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let spec = decompose(&p3.laplacian()).unwrap();
        let coeffs = DVector::from_vec(vec![0.4, -1.2, 0.0]);
        let theta = &spec.vectors * &coeffs;
        let s = vec![0, 2];
        let x = DVector::from_vec(vec![theta[0], theta[2]]);
        let obs = MaskedObservation::new(s, x, DMatrix::identity(2, 2)).unwrap();
        let (v, f) = cml_bandlimited(&obs, &spec, 2).unwrap();
        assert!((&v.0 - &theta).amax() < 1e-9);
        assert_eq!(f.0[2], 0.0);
        let low = alt_band_estimate(&obs, &spec, 2).unwrap();
        assert_eq!(low.0.as_slice(), &f.0.as_slice()[..2]);
    }

    #[test]
    fn cml_full_band_is_gft() {
        let g = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 1.0)]).unwrap();
        let spec = decompose(&g.laplacian()).unwrap();
        let x = DVector::from_vec(vec![1.0, -0.5, 2.0]);
        let obs = MaskedObservation::new(vec![0, 1, 2], x.clone(), DMatrix::identity(3, 3) * 0.3).unwrap();
        let low = alt_band_estimate(&obs, &spec, 3).unwrap();
        assert!((low.0 - spec.vectors.tr_mul(&x)).amax() < 1e-12);
    }

    #[test]
    fn cml_errors() {
        let p3 = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let spec = decompose(&p3.laplacian()).unwrap();
        let obs = MaskedObservation::new(vec![1], DVector::zeros(1), DMatrix::identity(1, 1)).unwrap();
        assert!(matches!(
            cml_bandlimited(&obs, &spec, 2),
            Err(Error::SingularInformation { .. })
        ));
        let obs = MaskedObservation::new(vec![0, 1], DVector::zeros(2), DMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(cml_bandlimited(&obs, &spec, 2), Err(Error::BadCovariance(_))));
    }
}
