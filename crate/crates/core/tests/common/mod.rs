#![allow(dead_code)]

use graphcrb::{Edge, Graph};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Random connected graph: a random labelled tree plus `extra` additional random edges,
/// weights uniform on [0.2, 3].
pub fn random_connected(m: usize, extra: usize, rng: &mut ChaCha20Rng) -> Graph {
    let mut edges = Vec::new();
    let mut keys = std::collections::BTreeSet::new();
    for v in 1..m {
        let u = rng.random_range(0..v);
        keys.insert((u, v));
        edges.push(Edge::new(u, v, rng.random_range(0.2..3.0)));
    }
    let max_edges = m * (m - 1) / 2;
    let mut added = 0;
    while added < extra && keys.len() < max_edges {
        let a = rng.random_range(0..m);
        let b = rng.random_range(0..m);
        if a == b {
            continue;
        }
        let k = (a.min(b), a.max(b));
        if keys.insert(k) {
            edges.push(Edge::new(k.0, k.1, rng.random_range(0.2..3.0)));
            added += 1;
        }
    }
    Graph::new(m, edges).unwrap()
}

/// Random graph with `m` in `lo..=hi` and a random number of extra edges.
pub fn random_graph_in(lo: usize, hi: usize, rng: &mut ChaCha20Rng) -> Graph {
    let m = rng.random_range(lo..=hi);
    let extra = rng.random_range(0..=m);
    random_connected(m, extra, rng)
}

pub fn normal_vec(n: usize, rng: &mut ChaCha20Rng) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// Spectral pseudo-inverse through an eigendecomposition computed here, not through the
/// library's spectrum type.
pub fn spectral_pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = nalgebra::SymmetricEigen::new(a.clone());
    let tol = 1e-9 * eig.eigenvalues.amax();
    let n = a.nrows();
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        if eig.eigenvalues[k].abs() > tol {
            let v = eig.eigenvectors.column(k);
            out += v * v.transpose() / eig.eigenvalues[k];
        }
    }
    out
}

/// Random symmetric positive definite matrix `A A^T + c I`.
pub fn random_spd(n: usize, c: f64, rng: &mut ChaCha20Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    &a * a.transpose() + DMatrix::identity(n, n) * c
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.amax()
}
