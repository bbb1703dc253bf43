//! Fisher information representations and the Laplacian-weighted Cramér-Rao bounds:
//! the general constrained bound, the CCRB it is a weighted version of, and the closed
//! forms for relative measurements and bandlimited sampling.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::constraint::ConstraintSet;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{invert_information, pinv_symmetric, principal_submatrix, scale_both, select_rows, symmetrize};
use crate::spectrum::{pinv_laplacian, Spectrum};

/// Fisher information matrix in one of its concrete forms. All forms are independent of
/// the signal value.
#[derive(Debug, Clone, PartialEq)]
pub enum FisherInfo {
    /// A symmetric PSD matrix.
    Explicit(DMatrix<f64>),
    /// Independent Gaussian noise with the given per-coordinate variances, `J = diag(1/var)`.
    Diagonal(DVector<f64>),
    /// Relative measurements over a measurement graph with i.i.d. edge noise.
    Relative { graph: Graph, sigma2: f64 },
}

impl FisherInfo {
    /// Validates symmetry (1e-10) and positive semidefiniteness (eigenvalues >= -1e-8).
    pub fn explicit(j: DMatrix<f64>) -> Result<Self> {
        if !j.is_square() {
            return Err(Error::DimensionMismatch {
                expected: j.nrows(),
                found: j.ncols(),
            });
        }
        if (&j - j.transpose()).amax() > 1e-10 {
            return Err(Error::BadCovariance("information matrix is not symmetric".into()));
        }
        if crate::linalg::min_eigenvalue(&j) < -1e-8 {
            return Err(Error::BadCovariance("information matrix is not PSD".into()));
        }
        Ok(FisherInfo::Explicit(j))
    }

    pub fn diagonal(variances: DVector<f64>) -> Result<Self> {
        if let Some(&v) = variances.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidVariance(v));
        }
        Ok(FisherInfo::Diagonal(variances))
    }

    /// `J = I / sigma2` on `n` coordinates.
    pub fn iid(n: usize, sigma2: f64) -> Result<Self> {
        FisherInfo::diagonal(DVector::from_element(n, sigma2))
    }

    pub fn dim(&self) -> usize {
        match self {
            FisherInfo::Explicit(j) => j.nrows(),
            FisherInfo::Diagonal(v) => v.len(),
            FisherInfo::Relative { graph, .. } => graph.num_vertices(),
        }
    }

    pub fn materialize(&self) -> Result<DMatrix<f64>> {
        match self {
            FisherInfo::Explicit(j) => Ok(j.clone()),
            FisherInfo::Diagonal(v) => Ok(DMatrix::from_diagonal(&v.map(|x| 1.0 / x))),
            FisherInfo::Relative { graph, sigma2 } => relative_fim(graph, *sigma2),
        }
    }

    /// Information carried by the coordinates in `idx`: the principal submatrix, which for
    /// independent noise is the information of the sampled coordinates.
    pub fn restrict(&self, idx: &[usize]) -> Result<FisherInfo> {
        let n = self.dim();
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad + 1,
            });
        }
        Ok(match self {
            FisherInfo::Diagonal(v) => {
                FisherInfo::Diagonal(DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i])))
            }
            other => FisherInfo::Explicit(principal_submatrix(&other.materialize()?, idx)),
        })
    }
}

/// Which model / policy produced a bound. Free-form tags end up in CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub matrix: DMatrix<f64>,
    pub trace: f64,
    pub model: String,
    pub policy: String,
}

impl BoundResult {
    fn new(matrix: DMatrix<f64>, model: &str, policy: &str) -> Self {
        let matrix = symmetrize(&matrix);
        BoundResult {
            trace: matrix.trace(),
            matrix,
            model: model.into(),
            policy: policy.into(),
        }
    }

    pub fn with_policy(mut self, policy: &str) -> Self {
        self.policy = policy.into();
        self
    }
}

/// One line of `model,policy,M,R,D,sigma2,trace`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSummary {
    pub model: String,
    pub policy: String,
    pub m: usize,
    /// Bandwidth; absent for relative measurements.
    pub r: Option<usize>,
    /// Number of measurements: sampled vertices or measured edges.
    pub d: usize,
    pub sigma2: f64,
    pub trace: f64,
}

impl BoundSummary {
    pub const HEADER: &'static str = "model,policy,M,R,D,sigma2,trace";
}

impl fmt::Display for BoundSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.r.map(|r| r.to_string()).unwrap_or_default();
        write!(
            f,
            "{},{},{},{},{},{},{}",
            self.model, self.policy, self.m, r, self.d, self.sigma2, self.trace
        )
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

/// `U (U^T J U)^+ U^T`.
pub fn ccrb(j: &FisherInfo, constraints: &ConstraintSet) -> Result<DMatrix<f64>> {
    let jm = j.materialize()?;
    check_len(constraints.dim(), jm.nrows())?;
    let u = &constraints.u;
    let reduced = pinv_symmetric(&(u.tr_mul(&jm) * u));
    Ok(symmetrize(&(u * reduced * u.transpose())))
}

/// The graph CRB `Lambda^{1/2} V^T U (U^T J U)^+ U^T V Lambda^{1/2}`.
pub fn graph_crb(spec: &Spectrum, j: &FisherInfo, constraints: &ConstraintSet) -> Result<BoundResult> {
    let jm = j.materialize()?;
    let m = spec.dim();
    check_len(m, jm.nrows())?;
    check_len(m, constraints.dim())?;
    let u = &constraints.u;
    let reduced = pinv_symmetric(&(u.tr_mul(&jm) * u));
    // rows of V^T U weighted by sqrt(lambda); the first row is exactly zero
    let sq = spec.sqrt_eigenvalues();
    let mut w = spec.vectors.tr_mul(u);
    for (k, mut row) in w.row_iter_mut().enumerate() {
        row *= sq[k];
    }
    let b = &w * reduced * w.transpose();
    Ok(BoundResult::new(b, "general", "given"))
}

/// FIM of the relative-measurement model,
/// `(1/sigma2) Lbar (E E^T - 11^T/M)^{-1} Lbar`.
pub fn relative_fim(meas: &Graph, sigma2: f64) -> Result<DMatrix<f64>> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::InvalidVariance(sigma2));
    }
    if !meas.is_connected() {
        return Err(Error::DisconnectedGraph { zero_eigenvalues: 2 });
    }
    let m = meas.num_vertices();
    let lbar = meas.laplacian();
    let e = meas.incidence().matrix;
    let shifted = &e * e.transpose() - DMatrix::from_element(m, m, 1.0 / m as f64);
    let solved = shifted
        .lu()
        .solve(&lbar)
        .ok_or(Error::DisconnectedGraph { zero_eigenvalues: 2 })?;
    Ok(symmetrize(&(&lbar * solved / sigma2)))
}

/// Pseudo-inverse of [`relative_fim`] in closed form, `sigma2 Lbar^+ E E^T Lbar^+`.
pub fn relative_fim_pinv(meas: &Graph, sigma2: f64) -> Result<DMatrix<f64>> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::InvalidVariance(sigma2));
    }
    if !meas.is_connected() {
        return Err(Error::DisconnectedGraph { zero_eigenvalues: 2 });
    }
    let lp = pinv_laplacian(&meas.laplacian())?;
    let e = meas.incidence().matrix;
    let y = &lp * &e;
    Ok(symmetrize(&(&y * y.transpose() * sigma2)))
}

/// Graph CRB for relative measurements on `meas`, scored against the physical graph
/// whose Laplacian and spectrum are given.
pub fn relative_crb(laplacian: &DMatrix<f64>, spec: &Spectrum, meas: &Graph, sigma2: f64) -> Result<BoundResult> {
    if meas.num_vertices() != spec.dim() || laplacian.nrows() != spec.dim() {
        return Err(Error::VertexCountMismatch {
            physical: spec.dim(),
            measurement: meas.num_vertices(),
        });
    }
    let jp = relative_fim_pinv(meas, sigma2)?;
    let b = scale_both(&spec.vectors.tr_mul(&(jp * &spec.vectors)), &spec.sqrt_eigenvalues());
    Ok(BoundResult::new(b, "relative", "given"))
}

/// `sigma2 Tr(E^T Lbar^+ L Lbar^+ E)`, the trace of [`relative_crb`] computed without the
/// spectrum.
pub fn relative_crb_trace(laplacian: &DMatrix<f64>, meas: &Graph, sigma2: f64) -> Result<f64> {
    if meas.num_vertices() != laplacian.nrows() {
        return Err(Error::VertexCountMismatch {
            physical: laplacian.nrows(),
            measurement: meas.num_vertices(),
        });
    }
    if !meas.is_connected() {
        return Err(Error::DisconnectedGraph { zero_eigenvalues: 2 });
    }
    let lp = pinv_laplacian(&meas.laplacian())?;
    let y = lp * meas.incidence().matrix;
    let ly = laplacian * &y;
    Ok(sigma2 * y.component_mul(&ly).sum())
}

/// Rows `s` and the first `r` columns of the eigenvector matrix.
pub fn sampled_band(spec: &Spectrum, r: usize, s: &[usize]) -> Result<DMatrix<f64>> {
    let m = spec.dim();
    if r == 0 || r > m {
        return Err(Error::BandOutOfRange { r, m });
    }
    if let Some(&bad) = s.iter().find(|&&i| i >= m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: bad + 1,
        });
    }
    if s.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGraph("sample set must be sorted and unique".into()));
    }
    Ok(select_rows(&spec.vectors, s).columns(0, r).into_owned())
}

/// `V_SR^T J_S V_SR`.
pub fn band_information(spec: &Spectrum, r: usize, s: &[usize], j_s: &FisherInfo) -> Result<DMatrix<f64>> {
    let vsr = sampled_band(spec, r, s)?;
    let js = j_s.materialize()?;
    check_len(s.len(), js.nrows())?;
    Ok(symmetrize(&(vsr.tr_mul(&js) * &vsr)))
}

fn inverse_band_information(spec: &Spectrum, r: usize, s: &[usize], j_s: &FisherInfo) -> Result<DMatrix<f64>> {
    if s.len() < r {
        // validate the other arguments first so that errors are reported consistently
        sampled_band(spec, r, s)?;
        return Err(Error::SingularInformation { cond: f64::INFINITY });
    }
    invert_information(&band_information(spec, r, s, j_s)?)
}

/// Trace graph CRB for an `R`-bandlimited signal sampled on `s`:
/// `sum_{m=2}^{R} lambda_m [(V_SR^T J_S V_SR)^{-1}]_mm`.
pub fn bandlimited_crb_trace(spec: &Spectrum, r: usize, s: &[usize], j_s: &FisherInfo) -> Result<f64> {
    let inv = inverse_band_information(spec, r, s, j_s)?;
    Ok((1..r).map(|k| spec.eigenvalues[k] * inv[(k, k)]).sum())
}

/// A-optimal design objective `Tr((V_SR^T J_S V_SR)^{-1})`, the trace of the bandlimited CCRB.
pub fn a_design_objective(spec: &Spectrum, r: usize, s: &[usize], j_s: &FisherInfo) -> Result<f64> {
    Ok(inverse_band_information(spec, r, s, j_s)?.trace())
}

/// E-optimal design objective: smallest singular value of `V_SR` (zero when `|S| < R`).
pub fn e_design_objective(spec: &Spectrum, r: usize, s: &[usize]) -> Result<f64> {
    let vsr = sampled_band(spec, r, s)?;
    if s.len() < r {
        return Ok(0.0);
    }
    Ok(vsr.svd(false, false).singular_values.min())
}

/// `M^T J_S M` for the sampling mask of `s`: an `M x M` matrix that is zero outside `s`.
pub fn lift_sampled_information(m: usize, s: &[usize], j_s: &FisherInfo) -> Result<DMatrix<f64>> {
    let js = j_s.materialize()?;
    check_len(s.len(), js.nrows())?;
    let mut out = DMatrix::zeros(m, m);
    for (a, &i) in s.iter().enumerate() {
        for (b, &k) in s.iter().enumerate() {
            out[(i, k)] = js[(a, b)];
        }
    }
    Ok(out)
}

/// Bound for the unconstrained low-band risk:
/// `Lambda_R^{1/2} V_R^T J^+ V_R Lambda_R^{1/2}` (an `R x R` matrix).
pub fn alt_band_bound(spec: &Spectrum, r: usize, j: &FisherInfo) -> Result<DMatrix<f64>> {
    let m = spec.dim();
    if r == 0 || r > m {
        return Err(Error::BandOutOfRange { r, m });
    }
    let jm = j.materialize()?;
    check_len(m, jm.nrows())?;
    let vr = spec.low_band(r);
    let inner = vr.tr_mul(&(pinv_symmetric(&jm) * &vr));
    let sq = spec.sqrt_eigenvalues().rows(0, r).into_owned();
    Ok(symmetrize(&scale_both(&inner, &sq)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::bandlimited_constraint;
    use crate::spectrum::decompose;

    fn p2() -> (Graph, DMatrix<f64>, Spectrum) {
        let g = Graph::from_triples(2, &[(0, 1, 1.0)]).unwrap();
        let l = g.laplacian();
        let s = decompose(&l).unwrap();
        (g, l, s)
    }

    #[test]
    fn unconstrained_p2_bound() {
        let (g, l, s) = p2();
        let sigma2 = 0.7;
        let j = FisherInfo::Explicit(&l / sigma2);
        let b = graph_crb(&s, &j, &ConstraintSet::unconstrained(2)).unwrap();
        assert!((b.trace - sigma2).abs() < 1e-12);
        assert_eq!(b.matrix[(0, 0)], 0.0);
        let scaled = graph_crb(
            &s,
            &FisherInfo::Explicit(&l * (3.0 / sigma2)),
            &ConstraintSet::unconstrained(2),
        )
        .unwrap();
        assert!((scaled.trace - sigma2 / 3.0).abs() < 1e-12);
        let rel = relative_crb(&l, &s, &g, sigma2).unwrap();
        assert!((rel.trace - sigma2).abs() < 1e-12);
    }

    #[test]
    fn ccrb_reduces_to_inverse() {
        let j = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let c = ccrb(&FisherInfo::Explicit(j.clone()), &ConstraintSet::unconstrained(2)).unwrap();
        assert!((c - j.try_inverse().unwrap()).amax() < 1e-12);
    }

    #[test]
    fn relative_fim_unit_weights() {
        let (g, l, _) = p2();
        let j = relative_fim(&g, 1.0).unwrap();
        assert!((j - &l).amax() < 1e-12);
        let jp = relative_fim_pinv(&g, 2.0).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!((jp - want).amax() < 1e-12);
        assert!(relative_fim(&g, 0.0).is_err());
        let disc = Graph::from_triples(3, &[(0, 1, 1.0)]).unwrap();
        assert!(matches!(relative_fim(&disc, 1.0), Err(Error::DisconnectedGraph { .. })));
    }

    #[test]
    fn relative_crb_vertex_mismatch() {
        let (_, l, s) = p2();
        let g3 = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert!(matches!(
            relative_crb(&l, &s, &g3, 1.0),
            Err(Error::VertexCountMismatch { .. })
        ));
    }

    #[test]
    fn bandlimited_p3() {
        let p3 = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = decompose(&p3.laplacian()).unwrap();
        let sigma2 = 0.4;
        let j = FisherInfo::iid(3, sigma2).unwrap();
        let t = bandlimited_crb_trace(&s, 2, &[0, 1, 2], &j).unwrap();
        assert!((t - sigma2).abs() < 1e-12);
        assert_eq!(bandlimited_crb_trace(&s, 1, &[0, 1, 2], &j).unwrap(), 0.0);
        let j1 = FisherInfo::iid(1, sigma2).unwrap();
        assert!(matches!(
            bandlimited_crb_trace(&s, 2, &[1], &j1),
            Err(Error::SingularInformation { .. })
        ));
        let a = a_design_objective(&s, 2, &[0, 1, 2], &j).unwrap();
        assert!((a - 2.0 * sigma2).abs() < 1e-12);
        assert!((e_design_objective(&s, 3, &[0, 1, 2]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn graph_crb_matches_bandlimited_closed_form() {
        let g = Graph::from_triples(4, &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (0, 3, 1.0)]).unwrap();
        let spec = decompose(&g.laplacian()).unwrap();
        let s = [0, 2, 3];
        let js = FisherInfo::diagonal(DVector::from_vec(vec![0.5, 1.0, 2.0])).unwrap();
        let closed = bandlimited_crb_trace(&spec, 2, &s, &js).unwrap();
        let lifted = FisherInfo::Explicit(lift_sampled_information(4, &s, &js).unwrap());
        let general = graph_crb(&spec, &lifted, &bandlimited_constraint(&spec, 2).unwrap()).unwrap();
        assert!((general.trace - closed).abs() < 1e-12 * closed.max(1.0));
    }

    #[test]
    fn alt_band_bound_edge_cases() {
        let g = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let spec = decompose(&g.laplacian()).unwrap();
        let id = FisherInfo::Explicit(DMatrix::identity(3, 3));
        let b = alt_band_bound(&spec, 1, &id).unwrap();
        assert_eq!(b, DMatrix::zeros(1, 1));
        let b = alt_band_bound(&spec, 3, &id).unwrap();
        assert!((b - DMatrix::from_diagonal(&spec.eigenvalues)).amax() < 1e-12);
    }

    #[test]
    fn summary_line() {
        let s = BoundSummary {
            model: "relative".into(),
            policy: "given".into(),
            m: 2,
            r: None,
            d: 1,
            sigma2: 1.0,
            trace: 1.0,
        };
        assert_eq!(s.to_string(), "relative,given,2,,1,1,1");
    }
}
