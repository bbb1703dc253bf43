//! The Laplacian-weighted matrix cost, its trace (the Dirichlet energy of the error),
//! frequency-domain and band-restricted variants, Monte Carlo risk accumulation and the
//! empirical graph-unbiasedness check.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectrum::{GraphSignal, SpectralSignal, Spectrum};

/// Number of standard errors a bias statistic may deviate from zero.
pub const BIAS_Z_THRESHOLD: f64 = 3.0;

/// `C = a a^T` for `a = Lambda^{1/2} V^T eps`, plus the error it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    pub matrix: DMatrix<f64>,
    pub error: DVector<f64>,
}

impl CostMatrix {
    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

fn error_of(est: &GraphSignal, truth: &GraphSignal, m: usize) -> Result<DVector<f64>> {
    check_len(m, est.len())?;
    check_len(m, truth.len())?;
    Ok(&est.0 - &truth.0)
}

/// `err - err[0] 1`. Every weighted projection below discards the constant component
/// (`lambda_1 = 0`), so removing it first keeps a large common offset from cancelling
/// against the eigenvectors in floating point.
fn offset_free(err: &DVector<f64>) -> DVector<f64> {
    match err.iter().next() {
        Some(&e0) => err.add_scalar(-e0),
        None => err.clone(),
    }
}

/// Matrix cost `Lambda^{1/2} V^T (est - truth)(est - truth)^T V Lambda^{1/2}`.
pub fn cost_matrix(est: &GraphSignal, truth: &GraphSignal, spec: &Spectrum) -> Result<CostMatrix> {
    let error = error_of(est, truth, spec.dim())?;
    let a = spec
        .sqrt_eigenvalues()
        .component_mul(&spec.vectors.tr_mul(&offset_free(&error)));
    Ok(CostMatrix {
        matrix: &a * a.transpose(),
        error,
    })
}

/// The same cost evaluated element by element from pairwise error differences:
///
/// `C_mn = sqrt(l_m) sqrt(l_n) sum_k sum_l V_km V_ln (e_k - e_m)(e_l - e_n)`.
///
/// This is `O(M^4)` and meant as a cross-check for small graphs.
pub fn cost_matrix_elementwise(est: &GraphSignal, truth: &GraphSignal, spec: &Spectrum) -> Result<CostMatrix> {
    let m = spec.dim();
    let e = error_of(est, truth, m)?;
    let v = &spec.vectors;
    let s = spec.sqrt_eigenvalues();
    let mut c = DMatrix::zeros(m, m);
    for row in 0..m {
        for col in 0..m {
            let mut acc = 0.0;
            for k in 0..m {
                for l in 0..m {
                    acc += v[(k, row)] * v[(l, col)] * (e[k] - e[row]) * (e[l] - e[col]);
                }
            }
            c[(row, col)] = s[row] * s[col] * acc;
        }
    }
    Ok(CostMatrix { matrix: c, error: e })
}

/// Frequency-domain form `Lambda^{1/2} d d^T Lambda^{1/2}` with `d` the GFT error.
pub fn frequency_cost(est_f: &SpectralSignal, truth_f: &SpectralSignal, spec: &Spectrum) -> Result<CostMatrix> {
    let m = spec.dim();
    check_len(m, est_f.len())?;
    check_len(m, truth_f.len())?;
    let d = &est_f.0 - &truth_f.0;
    let a = spec.sqrt_eigenvalues().component_mul(&d);
    Ok(CostMatrix {
        matrix: &a * a.transpose(),
        error: &spec.vectors * d,
    })
}

/// `Lambda^{p/2}`-weighted cost; `p = 1` is [`cost_matrix`].
pub fn generalized_cost(est: &GraphSignal, truth: &GraphSignal, spec: &Spectrum, p: f64) -> Result<CostMatrix> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidPower(p));
    }
    let error = error_of(est, truth, spec.dim())?;
    let w = spec.eigenvalues.map(|l| l.max(0.0).powf(p / 2.0));
    let a = w.component_mul(&spec.vectors.tr_mul(&offset_free(&error)));
    Ok(CostMatrix {
        matrix: &a * a.transpose(),
        error,
    })
}

/// Cost restricted to the frequency indices in `band` (0-based), giving a
/// `|band| x |band|` matrix.
pub fn band_cost(est: &GraphSignal, truth: &GraphSignal, spec: &Spectrum, band: &[usize]) -> Result<CostMatrix> {
    if band.is_empty() {
        return Err(Error::EmptyBand);
    }
    let m = spec.dim();
    if let Some(&bad) = band.iter().find(|&&k| k >= m) {
        return Err(Error::BandOutOfRange { r: bad + 1, m });
    }
    let error = error_of(est, truth, m)?;
    let sq = spec.sqrt_eigenvalues();
    let centered = offset_free(&error);
    let a = DVector::from_iterator(
        band.len(),
        band.iter().map(|&k| sq[k] * spec.vectors.column(k).dot(&centered)),
    );
    Ok(CostMatrix {
        matrix: &a * a.transpose(),
        error,
    })
}

/// `eps^T L eps`.
pub fn dirichlet_energy(err: &GraphSignal, laplacian: &DMatrix<f64>) -> Result<f64> {
    check_len(laplacian.nrows(), err.len())?;
    Ok(err.0.dot(&(laplacian * &err.0)))
}

/// `sum over edges of w (eps_i - eps_j)^2`, i.e. half the symmetric double sum.
pub fn dirichlet_energy_pairwise(err: &GraphSignal, graph: &Graph) -> Result<f64> {
    check_len(graph.num_vertices(), err.len())?;
    let e = &err.0;
    Ok(graph
        .edges()
        .iter()
        .map(|edge| edge.weight * (e[edge.i] - e[edge.j]).powi(2))
        .sum())
}

/// `sum_{m >= 2} lambda_m (V^T eps)_m^2`.
pub fn dirichlet_energy_spectral(err: &GraphSignal, spec: &Spectrum) -> Result<f64> {
    let f = spec.gft(&GraphSignal(offset_free(&err.0)))?;
    Ok((1..spec.dim()).map(|k| spec.eigenvalues[k] * f.0[k] * f.0[k]).sum())
}

/// Monte Carlo estimate of the expected cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskEstimate {
    pub matrix: DMatrix<f64>,
    pub trials: usize,
    pub trace_mean: f64,
    pub trace_se: f64,
}

/// Streaming mean of cost matrices; keeps the per-trial traces for the standard error.
#[derive(Debug, Clone)]
pub struct RiskAccumulator {
    mean: DMatrix<f64>,
    traces: Vec<f64>,
}

impl RiskAccumulator {
    pub fn new(m: usize) -> Self {
        RiskAccumulator {
            mean: DMatrix::zeros(m, m),
            traces: Vec::new(),
        }
    }

    pub fn push(&mut self, cost: &CostMatrix) -> Result<()> {
        check_len(self.mean.nrows(), cost.matrix.nrows())?;
        self.traces.push(cost.trace());
        let n = self.traces.len() as f64;
        self.mean += (&cost.matrix - &self.mean) / n;
        Ok(())
    }

    pub fn finish(self) -> RiskEstimate {
        let (trace_mean, trace_se) = mean_and_se(&self.traces);
        RiskEstimate {
            matrix: self.mean,
            trials: self.traces.len(),
            trace_mean,
            trace_se,
        }
    }
}

/// Sample mean and standard error of the mean (`std / sqrt(n)`, unbiased variance).
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Outcome of the `U^T L E[err] = 0` test.
#[derive(Debug, Clone, PartialEq)]
pub struct UnbiasednessCheck {
    pub statistic: DVector<f64>,
    pub se: DVector<f64>,
    pub pass: bool,
    /// Largest `|statistic_k| / se_k` (0 when every statistic is exactly zero).
    pub max_z: f64,
}

fn finish_check(statistic: DVector<f64>, se: DVector<f64>, roundoff: DVector<f64>) -> UnbiasednessCheck {
    let mut pass = true;
    let mut max_z: f64 = 0.0;
    for k in 0..statistic.len() {
        let s = statistic[k].abs();
        if s > BIAS_Z_THRESHOLD * se[k] + roundoff[k] {
            pass = false;
        }
        if s > roundoff[k] {
            max_z = max_z.max(if se[k] > 0.0 { s / se[k] } else { f64::INFINITY });
        }
    }
    UnbiasednessCheck {
        statistic,
        se,
        pass,
        max_z,
    }
}

/// Tests `U^T L mean_error = 0` component-wise at three standard errors, propagating the
/// per-vertex standard errors as if they were independent.
///
/// A roundoff allowance of `1e-12 * (|U^T L| |mean_error|)_k` is added to each threshold
/// so that exactly-constant errors pass with zero standard error.
pub fn check_graph_unbiasedness(
    mean_error: &DVector<f64>,
    se: &DVector<f64>,
    laplacian: &DMatrix<f64>,
    u: &DMatrix<f64>,
) -> Result<UnbiasednessCheck> {
    let m = laplacian.nrows();
    check_len(m, mean_error.len())?;
    check_len(m, se.len())?;
    check_len(m, u.nrows())?;
    let t = u.tr_mul(laplacian);
    let statistic = &t * mean_error;
    let prop = t.map(|x| x * x) * se.map(|x| x * x);
    let roundoff = t.abs() * mean_error.abs() * 1e-12;
    Ok(finish_check(statistic, prop.map(f64::sqrt), roundoff))
}

/// Same test, but computed from the individual trial errors so that correlations between
/// vertices are accounted for exactly: each trial contributes `z_t = U^T L err_t`, and
/// the statistic is the mean of `z_t` with its own standard error.
pub fn check_graph_unbiasedness_samples(
    errors: &[DVector<f64>],
    laplacian: &DMatrix<f64>,
    u: &DMatrix<f64>,
) -> Result<UnbiasednessCheck> {
    let m = laplacian.nrows();
    check_len(m, u.nrows())?;
    let t = u.tr_mul(laplacian);
    let k = t.nrows();
    let mut zs: Vec<Vec<f64>> = vec![Vec::with_capacity(errors.len()); k];
    let mut abs_scale = DVector::zeros(k);
    for e in errors {
        check_len(m, e.len())?;
        let z = &t * e;
        for c in 0..k {
            zs[c].push(z[c]);
        }
        abs_scale += t.abs() * e.abs();
    }
    let n = errors.len().max(1) as f64;
    let mut statistic = DVector::zeros(k);
    let mut se = DVector::zeros(k);
    for c in 0..k {
        let (mu, s) = mean_and_se(&zs[c]);
        statistic[c] = mu;
        se[c] = s;
    }
    Ok(finish_check(statistic, se, abs_scale * (1e-12 / n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::decompose;

    fn p2() -> (Graph, Spectrum) {
        let g = Graph::from_triples(2, &[(0, 1, 1.0)]).unwrap();
        let s = decompose(&g.laplacian()).unwrap();
        (g, s)
    }

    fn sig(v: &[f64]) -> GraphSignal {
        GraphSignal::from_vec(v.to_vec())
    }

    #[test]
    fn zero_and_constant_errors_cost_nothing() {
        let (_, s) = p2();
        let t = sig(&[0.3, -1.2]);
        assert_eq!(cost_matrix(&t, &t, &s).unwrap().matrix.amax(), 0.0);
        let shifted = sig(&[0.3 + 4.0, -1.2 + 4.0]);
        assert!(cost_matrix(&shifted, &t, &s).unwrap().matrix.amax() < 1e-12);
    }

    #[test]
    fn p2_unit_error_trace() {
        let (_, s) = p2();
        let c = cost_matrix(&sig(&[1.0, 0.0]), &sig(&[0.0, 0.0]), &s).unwrap();
        assert!((c.trace() - 1.0).abs() < 1e-14);
        assert_eq!(c.matrix[(0, 0)], 0.0);
        assert_eq!(c.matrix[(0, 1)], 0.0);
    }

    #[test]
    fn dirichlet_examples() {
        let k3 = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let l = k3.laplacian();
        assert_eq!(dirichlet_energy(&sig(&[2.0, 2.0, 2.0]), &l).unwrap(), 0.0);
        assert_eq!(dirichlet_energy(&sig(&[1.0, 0.0, 0.0]), &l).unwrap(), 2.0);
        assert_eq!(dirichlet_energy_pairwise(&sig(&[1.0, 0.0, 0.0]), &k3).unwrap(), 2.0);
        let p2w = Graph::from_triples(2, &[(0, 1, 5.0)]).unwrap();
        assert_eq!(dirichlet_energy(&sig(&[1.0, -1.0]), &p2w.laplacian()).unwrap(), 20.0);
        assert!(dirichlet_energy(&sig(&[1.0]), &l).is_err());
    }

    #[test]
    fn elementwise_first_row_is_exactly_zero() {
        let g = Graph::from_triples(3, &[(0, 1, 2.0), (1, 2, 0.5)]).unwrap();
        let s = decompose(&g.laplacian()).unwrap();
        let c = cost_matrix_elementwise(&sig(&[0.4, -2.0, 1.1]), &sig(&[0.0; 3]), &s).unwrap();
        for k in 0..3 {
            assert_eq!(c.matrix[(0, k)], 0.0);
            assert_eq!(c.matrix[(k, 0)], 0.0);
        }
        let c2 = cost_matrix(&sig(&[0.4, -2.0, 1.1]), &sig(&[0.0; 3]), &s).unwrap();
        assert!((c.matrix - c2.matrix).amax() < 1e-12);
    }

    #[test]
    fn frequency_cost_examples() {
        let g = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = decompose(&g.laplacian()).unwrap();
        let zero = SpectralSignal::from_vec(vec![0.0; 3]);
        let dc = SpectralSignal::from_vec(vec![5.0, 0.0, 0.0]);
        assert_eq!(frequency_cost(&dc, &zero, &s).unwrap().matrix.amax(), 0.0);
        let e2 = SpectralSignal::from_vec(vec![0.0, 1.0, 0.0]);
        assert!((frequency_cost(&e2, &zero, &s).unwrap().trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generalized_and_band_reductions() {
        let g = Graph::from_triples(3, &[(0, 1, 1.5), (1, 2, 1.0), (0, 2, 0.2)]).unwrap();
        let s = decompose(&g.laplacian()).unwrap();
        let (a, b) = (sig(&[0.1, 0.7, -0.3]), sig(&[0.0, 0.2, 0.2]));
        let base = cost_matrix(&a, &b, &s).unwrap().matrix;
        assert!((generalized_cost(&a, &b, &s, 1.0).unwrap().matrix - &base).amax() < 1e-14);
        assert!((band_cost(&a, &b, &s, &[0, 1, 2]).unwrap().matrix - &base).amax() < 1e-14);
        assert_eq!(band_cost(&a, &b, &s, &[0]).unwrap().matrix.amax(), 0.0);
        assert!(matches!(generalized_cost(&a, &b, &s, 0.5), Err(Error::InvalidPower(_))));
        assert!(matches!(band_cost(&a, &b, &s, &[]), Err(Error::EmptyBand)));
    }

    #[test]
    fn risk_accumulator_trace_matches() {
        let (_, s) = p2();
        let mut acc = RiskAccumulator::new(2);
        let truth = sig(&[0.0, 0.0]);
        for x in [0.5, -1.0, 2.0] {
            acc.push(&cost_matrix(&sig(&[x, 0.0]), &truth, &s).unwrap()).unwrap();
        }
        let r = acc.finish();
        assert_eq!(r.trials, 3);
        assert!((r.matrix.trace() - r.trace_mean).abs() < 1e-12);
        assert!((r.trace_mean - (0.25 + 1.0 + 4.0) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unbiasedness_constant_bias_is_invisible() {
        let g = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let l = g.laplacian();
        let u = DMatrix::identity(3, 3);
        let mean = DVector::from_element(3, 0.8);
        let chk = check_graph_unbiasedness(&mean, &DVector::zeros(3), &l, &u).unwrap();
        assert_eq!(chk.statistic.amax(), 0.0);
        assert!(chk.pass);
        let chk = check_graph_unbiasedness(&DVector::zeros(3), &DVector::zeros(3), &l, &u).unwrap();
        assert!(chk.pass);
        let biased = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let chk = check_graph_unbiasedness(&biased, &DVector::from_element(3, 0.01), &l, &u).unwrap();
        assert!(!chk.pass);
    }

    #[test]
    fn unconstrained_check_is_frequency_bias_check() {
        // with U = I the statistic is V Lambda (mean frequency bias)
        let g = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let l = g.laplacian();
        let s = decompose(&l).unwrap();
        let mean = DVector::from_vec(vec![0.2, -0.4, 0.9]);
        let chk = check_graph_unbiasedness(&mean, &DVector::zeros(3), &l, &DMatrix::identity(3, 3)).unwrap();
        let fb = s.vectors.tr_mul(&mean);
        let via_freq = &s.vectors * DVector::from_fn(3, |k, _| s.eigenvalues[k] * fb[k]);
        assert!((chk.statistic - via_freq).amax() < 1e-12);
    }
}
