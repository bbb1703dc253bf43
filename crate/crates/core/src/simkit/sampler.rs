//! Noisy observations for the relative-measurement and sampling models.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimators::{MaskedObservation, RelativeObservation};
use crate::graph::Graph;
use crate::linalg::symmetrize;
use crate::spectrum::GraphSignal;

/// Zero-mean Gaussian vectors with a fixed PSD covariance `F F^T`.
#[derive(Debug, Clone)]
pub struct GaussianNoise {
    factor: DMatrix<f64>,
    diagonal: bool,
}

impl GaussianNoise {
    /// Accepts singular covariances; eigenvalues down to `-1e-10 * max|eig|` count as zero.
    pub fn new(cov: &DMatrix<f64>) -> Result<Self> {
        if !cov.is_square() {
            return Err(Error::BadCovariance(format!(
                "covariance is {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadCovariance("covariance has non-finite entries".into()));
        }
        if (cov - cov.transpose()).amax() > 1e-10 * cov.amax().max(1.0) {
            return Err(Error::BadCovariance("covariance is not symmetric".into()));
        }
        let n = cov.nrows();
        let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || cov[(i, j)] == 0.0));
        if is_diag {
            if let Some(v) = cov.diagonal().iter().find(|v| **v < 0.0) {
                return Err(Error::BadCovariance(format!("negative variance {v}")));
            }
            return Ok(GaussianNoise {
                factor: DMatrix::from_diagonal(&cov.diagonal().map(f64::sqrt)),
                diagonal: true,
            });
        }
        let eig = SymmetricEigen::new(symmetrize(cov));
        let scale = eig.eigenvalues.amax();
        if eig.eigenvalues.iter().any(|&l| l < -1e-10 * scale) {
            return Err(Error::BadCovariance("covariance is not positive semidefinite".into()));
        }
        let mut factor = eig.eigenvectors;
        for (k, mut col) in factor.column_iter_mut().enumerate() {
            col *= eig.eigenvalues[k].max(0.0).sqrt();
        }
        Ok(GaussianNoise {
            factor,
            diagonal: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let n = self.dim();
        let z = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        if self.diagonal {
            z.component_mul(&self.factor.diagonal())
        } else {
            &self.factor * z
        }
    }
}

/// Noiseless edge measurements `w_e (theta_i - theta_j)` in edge order.
pub fn relative_measurements(meas: &Graph, theta: &GraphSignal) -> Result<DVector<f64>> {
    if theta.len() != meas.num_vertices() {
        return Err(Error::DimensionMismatch {
            expected: meas.num_vertices(),
            found: theta.len(),
        });
    }
    Ok(DVector::from_iterator(
        meas.num_edges(),
        meas.edges().iter().map(|e| e.weight * (theta.0[e.i] - theta.0[e.j])),
    ))
}

/// `h_{i,j} = w_{i,j}(theta_i - theta_j) + nu_{i,j}` with i.i.d. `N(0, sigma2)` noise.
pub fn sample_relative<R: Rng + ?Sized>(
    meas: &Graph,
    theta: &GraphSignal,
    sigma2: f64,
    rng: &mut R,
) -> Result<RelativeObservation> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::InvalidVariance(sigma2));
    }
    let mut x = relative_measurements(meas, theta)?;
    let sd = sigma2.sqrt();
    for v in x.iter_mut() {
        *v += sd * rng.sample::<f64, _>(StandardNormal);
    }
    RelativeObservation::new(meas.clone(), x)
}

/// `x = theta_S + w_S` with `w_S ~ N(0, cov)`; `cov` is the covariance on `subset`.
pub fn sample_masked<R: Rng + ?Sized>(
    theta: &GraphSignal,
    subset: &[usize],
    cov: &DMatrix<f64>,
    rng: &mut R,
) -> Result<MaskedObservation> {
    if let Some(&bad) = subset.iter().find(|&&i| i >= theta.len()) {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            found: bad + 1,
        });
    }
    if cov.nrows() != subset.len() {
        return Err(Error::DimensionMismatch {
            expected: subset.len(),
            found: cov.nrows(),
        });
    }
    let noise = GaussianNoise::new(cov)?;
    let x = DVector::from_iterator(subset.len(), subset.iter().map(|&i| theta.0[i])) + noise.draw(rng);
    MaskedObservation::new(subset.to_vec(), x, cov.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn noiseless_relative() {
        let g = Graph::from_triples(2, &[(0, 1, 2.0)]).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let obs = sample_relative(&g, &GraphSignal::from_vec(vec![1.0, 0.0]), 0.0, &mut rng).unwrap();
        assert_eq!(obs.x.as_slice(), &[2.0]);
    }

    #[test]
    fn zero_covariance_masked() {
        let theta = GraphSignal::from_vec(vec![1.0, 2.0, 3.0]);
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let obs = sample_masked(&theta, &[0, 2], &DMatrix::zeros(2, 2), &mut rng).unwrap();
        assert_eq!(obs.x.as_slice(), &[1.0, 3.0]);
    }

    #[test]
    fn rejects_indefinite_covariance() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(GaussianNoise::new(&cov), Err(Error::BadCovariance(_))));
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(GaussianNoise::new(&cov), Err(Error::BadCovariance(_))));
    }
}
