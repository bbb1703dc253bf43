//! Seeded random graph generators. Disconnected draws are discarded and redrawn from
//! the same stream, at most [`MAX_ATTEMPTS`] times.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};

pub const MAX_ATTEMPTS: usize = 100;

/// Edge weights drawn i.i.d. uniform on `[lo, hi]`; `None` gives unit weights.
pub type WeightRange = Option<(f64, f64)>;

fn check_weights(weights: WeightRange) -> Result<()> {
    if let Some((lo, hi)) = weights {
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::GenerationFailed(format!("bad weight range [{lo}, {hi}]")));
        }
    }
    Ok(())
}

fn finish(m: usize, keys: &BTreeSet<(usize, usize)>, weights: WeightRange, rng: &mut ChaCha20Rng) -> Result<Graph> {
    let edges = keys.iter().map(|&(i, j)| {
        let w = match weights {
            Some((lo, hi)) if hi > lo => rng.random_range(lo..=hi),
            Some((lo, _)) => lo,
            None => 1.0,
        };
        Edge::new(i, j, w)
    });
    Graph::new(m, edges.collect::<Vec<_>>())
}

fn connected(m: usize, keys: &BTreeSet<(usize, usize)>) -> bool {
    let edges: Vec<Edge> = keys.iter().map(|&(i, j)| Edge::new(i, j, 1.0)).collect();
    Graph::new(m, edges).map(|g| g.is_connected()).unwrap_or(false)
}

/// Small-world graph: a ring lattice where each vertex links to `degree / 2` neighbours
/// on each side, after which every lattice edge `(u, u + j)` is rewired to a uniformly
/// chosen new endpoint with probability `rewire`.
pub fn gen_watts_strogatz(m: usize, degree: usize, rewire: f64, seed: u64, weights: WeightRange) -> Result<Graph> {
    if degree == 0 || !degree.is_multiple_of(2) || degree >= m {
        return Err(Error::GenerationFailed(format!(
            "mean degree must be even, positive and below M = {m} (got {degree})"
        )));
    }
    if !(0.0..=1.0).contains(&rewire) {
        return Err(Error::GenerationFailed(format!(
            "rewiring probability {rewire} outside [0, 1]"
        )));
    }
    check_weights(weights)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
        for j in 1..=degree / 2 {
            for u in 0..m {
                let v = (u + j) % m;
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
        for j in 1..=degree / 2 {
            for u in 0..m {
                let v = (u + j) % m;
                if rng.random::<f64>() >= rewire {
                    continue;
                }
                if adj[u].len() >= m - 1 {
                    continue;
                }
                let mut w = rng.random_range(0..m);
                while w == u || adj[u].contains(&w) {
                    w = rng.random_range(0..m);
                }
                if adj[u].remove(&v) {
                    adj[v].remove(&u);
                }
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
        let keys: BTreeSet<(usize, usize)> = adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect();
        if connected(m, &keys) {
            return finish(m, &keys, weights, &mut rng);
        }
    }
    Err(Error::GenerationFailed(format!(
        "no connected Watts-Strogatz graph in {MAX_ATTEMPTS} attempts"
    )))
}

/// `G(M, p)`: every vertex pair is an edge independently with probability `p`.
pub fn gen_erdos_renyi(m: usize, p: f64, seed: u64, weights: WeightRange) -> Result<Graph> {
    if m == 0 {
        return Err(Error::GenerationFailed("graph needs at least one vertex".into()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::GenerationFailed(format!("edge probability {p} outside (0, 1]")));
    }
    check_weights(weights)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let mut keys = BTreeSet::new();
        for i in 0..m {
            for j in i + 1..m {
                if rng.random::<f64>() < p {
                    keys.insert((i, j));
                }
            }
        }
        if connected(m, &keys) {
            return finish(m, &keys, weights, &mut rng);
        }
    }
    Err(Error::GenerationFailed(format!(
        "no connected Erdos-Renyi graph in {MAX_ATTEMPTS} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_lattice_without_rewiring() {
        let g = gen_watts_strogatz(10, 4, 0.0, 3, None).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 4));
        assert_eq!(g.num_edges(), 20);
    }

    #[test]
    fn edge_count_preserved() {
        let g = gen_watts_strogatz(118, 4, 0.2, 11, Some((0.5, 1.5))).unwrap();
        assert_eq!(g.num_edges(), 236);
        assert!(g.is_connected());
        assert!(g.edges().iter().all(|e| (0.5..=1.5).contains(&e.weight)));
    }

    #[test]
    fn seeded() {
        assert_eq!(
            gen_watts_strogatz(30, 4, 0.3, 5, None).unwrap(),
            gen_watts_strogatz(30, 4, 0.3, 5, None).unwrap()
        );
        assert_eq!(
            gen_erdos_renyi(30, 0.2, 5, None).unwrap(),
            gen_erdos_renyi(30, 0.2, 5, None).unwrap()
        );
    }

    #[test]
    fn complete_graph() {
        let g = gen_erdos_renyi(7, 1.0, 0, None).unwrap();
        assert_eq!(g.num_edges(), 21);
    }

    #[test]
    fn bad_parameters() {
        assert!(gen_watts_strogatz(10, 3, 0.1, 0, None).is_err());
        assert!(gen_watts_strogatz(4, 4, 0.1, 0, None).is_err());
        assert!(gen_erdos_renyi(10, 0.0, 0, None).is_err());
        assert!(matches!(
            gen_erdos_renyi(50, 0.001, 0, None),
            Err(Error::GenerationFailed(_))
        ));
    }
}
