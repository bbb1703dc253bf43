//! Spanning-tree measurement graphs for the relative-measurement model.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bounds::relative_crb_trace;
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TreePolicy {
    /// Maximum spanning tree under squared weights.
    MaxSt,
    /// Minimum spanning tree under squared weights.
    MinSt,
    /// Minimum spanning tree under i.i.d. uniform random keys.
    RandSt,
}

impl TreePolicy {
    pub fn tag(&self) -> &'static str {
        match self {
            TreePolicy::MaxSt => "max-st",
            TreePolicy::MinSt => "min-st",
            TreePolicy::RandSt => "rand-st",
        }
    }
}

impl fmt::Display for TreePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for TreePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-st" => Ok(TreePolicy::MaxSt),
            "min-st" => Ok(TreePolicy::MinSt),
            "rand-st" => Ok(TreePolicy::RandSt),
            other => Err(Error::Config(format!("unknown spanning-tree policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgePolicyResult {
    /// Tree edges with their physical weights, lexicographic order.
    pub edges: Vec<Edge>,
    pub policy: TreePolicy,
    pub seed: u64,
    /// Trace of the relative-measurement bound for this tree at the requested noise level.
    pub crb_trace: f64,
}

impl EdgePolicyResult {
    pub fn tree_graph(&self, num_vertices: usize) -> Result<Graph> {
        Graph::new(num_vertices, self.edges.iter().copied())
    }

    /// Sum of squared weights, the quantity the MST step optimizes.
    pub fn squared_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight * e.weight).sum()
    }
}

/// Kruskal over `keys` (one per edge of `g`, in edge order). Ties keep lexicographic edge
/// order. Returns the chosen edge indices, sorted.
pub fn kruskal(g: &Graph, keys: &[f64], maximize: bool) -> Result<Vec<usize>> {
    if keys.len() != g.num_edges() {
        return Err(Error::DimensionMismatch {
            expected: g.num_edges(),
            found: keys.len(),
        });
    }
    let mut order: Vec<usize> = (0..keys.len()).collect();
    // stable sort, so equal keys stay in edge order
    order.sort_by(|&a, &b| {
        let c = keys[a].total_cmp(&keys[b]);
        if maximize {
            c.reverse()
        } else {
            c
        }
    });
    let m = g.num_vertices();
    let mut uf = UnionFind::new(m);
    let mut chosen = Vec::with_capacity(m.saturating_sub(1));
    for k in order {
        let e = g.edges()[k];
        if uf.union(e.i, e.j) {
            chosen.push(k);
            if chosen.len() + 1 == m {
                break;
            }
        }
    }
    if chosen.len() + 1 != m {
        return Err(Error::DisconnectedGraph {
            zero_eigenvalues: m - chosen.len(),
        });
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Picks a spanning tree of `g` by `policy` and scores it with the relative-measurement
/// bound at noise variance `sigma2`. `seed` only matters for `RandSt`.
pub fn spanning_tree_policy(g: &Graph, policy: TreePolicy, seed: u64, sigma2: f64) -> Result<EdgePolicyResult> {
    let keys: Vec<f64> = match policy {
        TreePolicy::MaxSt | TreePolicy::MinSt => g.edges().iter().map(|e| e.weight * e.weight).collect(),
        TreePolicy::RandSt => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            (0..g.num_edges()).map(|_| rng.random::<f64>()).collect()
        }
    };
    let chosen = kruskal(g, &keys, policy == TreePolicy::MaxSt)?;
    let edges: Vec<Edge> = chosen.iter().map(|&k| g.edges()[k]).collect();
    let tree = Graph::new(g.num_vertices(), edges.iter().copied())?;
    let crb_trace = relative_crb_trace(&g.laplacian(), &tree, sigma2)?;
    Ok(EdgePolicyResult {
        edges,
        policy,
        seed,
        crb_trace,
    })
}

/// Checks that `edges` form a spanning tree on `m` vertices.
pub fn validate_tree(m: usize, edges: &[Edge]) -> Result<()> {
    if edges.len() + 1 != m {
        return Err(Error::InvalidTree(format!("{} edges for {} vertices", edges.len(), m)));
    }
    let mut uf = UnionFind::new(m);
    for e in edges {
        if e.i >= m || e.j >= m || e.i == e.j {
            return Err(Error::InvalidTree(format!("bad edge ({}, {})", e.i + 1, e.j + 1)));
        }
        if !(e.weight > 0.0) || !e.weight.is_finite() {
            return Err(Error::InvalidTree(format!(
                "bad weight on edge ({}, {})",
                e.i + 1,
                e.j + 1
            )));
        }
        if !uf.union(e.i, e.j) {
            return Err(Error::InvalidTree(format!(
                "edge ({}, {}) closes a cycle",
                e.i + 1,
                e.j + 1
            )));
        }
    }
    Ok(())
}

/// Total stretch of `g` over `tree`: for every edge of `g`, its weight times the
/// resistance (sum of `1/w`) of the tree path joining its endpoints.
pub fn tree_stretch(g: &Graph, tree: &[Edge]) -> Result<f64> {
    let m = g.num_vertices();
    validate_tree(m, tree)?;
    let mut adj = vec![Vec::new(); m];
    for e in tree {
        adj[e.i].push((e.j, e.weight));
        adj[e.j].push((e.i, e.weight));
    }
    // root the tree at vertex 0
    let mut parent = vec![usize::MAX; m];
    let mut depth = vec![0usize; m];
    let mut resist = vec![0.0; m];
    let mut seen = vec![false; m];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(u, w) in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                parent[u] = v;
                depth[u] = depth[v] + 1;
                resist[u] = resist[v] + 1.0 / w;
                stack.push(u);
            }
        }
    }
    let lca = |mut a: usize, mut b: usize| {
        while depth[a] > depth[b] {
            a = parent[a];
        }
        while depth[b] > depth[a] {
            b = parent[b];
        }
        while a != b {
            a = parent[a];
            b = parent[b];
        }
        a
    };
    Ok(g.edges()
        .iter()
        .map(|e| e.weight * (resist[e.i] + resist[e.j] - 2.0 * resist[lca(e.i, e.j)]))
        .sum())
}
