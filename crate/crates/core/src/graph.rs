//! Undirected weighted simple graphs, their Laplacians and oriented incidence
//! matrices.
//!
//! Vertices are 0-based inside the library. File formats and the command line
//! use 1-based indices; conversion happens at the I/O boundary.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One undirected edge with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(i: usize, j: usize, weight: f64) -> Self {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        Edge { i, j, weight }
    }

    pub fn key(&self) -> (usize, usize) {
        (self.i, self.j)
    }
}

/// A simple undirected graph with strictly positive edge weights.
///
/// Edges are kept in lexicographic `(i, j)` order; every derived matrix uses that
/// order for its columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<Edge>,
}

impl Graph {
    /// Validates and builds a graph. Endpoints may be given in either order.
    pub fn new(num_vertices: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for e in edges {
            let e = Edge::new(e.i, e.j, e.weight);
            if e.j >= num_vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) references a vertex outside 1..={}",
                    e.i + 1,
                    e.j + 1,
                    num_vertices
                )));
            }
            if e.i == e.j {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {}", e.i + 1)));
            }
            if !e.weight.is_finite() || e.weight <= 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has weight {}; weights must be positive and finite",
                    e.i + 1,
                    e.j + 1,
                    e.weight
                )));
            }
            if !seen.insert(e.key()) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    e.i + 1,
                    e.j + 1
                )));
            }
            out.push(e);
        }
        out.sort_by_key(|e| e.key());
        Ok(Graph {
            num_vertices,
            edges: out,
        })
    }

    /// Convenience constructor from `(i, j, w)` triples.
    pub fn from_triples(num_vertices: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        Graph::new(num_vertices, triples.iter().map(|&(i, j, w)| Edge::new(i, j, w)))
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> DVector<f64> {
        DVector::from_iterator(self.edges.len(), self.edges.iter().map(|e| e.weight))
    }

    /// Weight of edge `(i, j)`, or `None` when absent.
    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.edges
            .binary_search_by_key(&key, |e| e.key())
            .ok()
            .map(|k| self.edges[k].weight)
    }

    /// Same vertex set and edge set, new weights.
    pub fn map_weights(&self, mut f: impl FnMut(&Edge) -> f64) -> Result<Self> {
        let edges: Vec<Edge> = self.edges.iter().map(|e| Edge::new(e.i, e.j, f(e))).collect();
        Graph::new(self.num_vertices, edges)
    }

    pub fn adjacency_lists(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for e in &self.edges {
            adj[e.i].push((e.j, e.weight));
            adj[e.j].push((e.i, e.weight));
        }
        adj
    }

    /// Breadth-first connectivity check.
    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency_lists();
        let mut seen = vec![false; self.num_vertices];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(u, _) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.num_vertices
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.num_vertices];
        for e in &self.edges {
            d[e.i] += 1;
            d[e.j] += 1;
        }
        d
    }

    /// `L = D - W`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let m = self.num_vertices;
        let mut l = DMatrix::zeros(m, m);
        for e in &self.edges {
            l[(e.i, e.j)] -= e.weight;
            l[(e.j, e.i)] -= e.weight;
            l[(e.i, e.i)] += e.weight;
            l[(e.j, e.j)] += e.weight;
        }
        l
    }

    /// Oriented incidence matrix, one column per edge in lexicographic order,
    /// `+1` on the smaller endpoint.
    pub fn incidence(&self) -> IncidenceMatrix {
        let mut matrix = DMatrix::zeros(self.num_vertices, self.edges.len());
        for (c, e) in self.edges.iter().enumerate() {
            matrix[(e.i, c)] = 1.0;
            matrix[(e.j, c)] = -1.0;
        }
        IncidenceMatrix {
            matrix,
            edge_order: self.edges.iter().map(|e| e.key()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    pub matrix: DMatrix<f64>,
    pub edge_order: Vec<(usize, usize)>,
}

impl IncidenceMatrix {
    /// `E diag(w) E^T`.
    pub fn weighted_laplacian(&self, weights: &DVector<f64>) -> DMatrix<f64> {
        let mut scaled = self.matrix.clone();
        for (c, mut col) in scaled.column_iter_mut().enumerate() {
            col *= weights[c];
        }
        &scaled * self.matrix.transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_two_laplacian() {
        let g = Graph::from_triples(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(g.laplacian(), DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        let g = Graph::from_triples(2, &[(0, 1, 5.0)]).unwrap();
        assert_eq!(g.laplacian(), DMatrix::from_row_slice(2, 2, &[5.0, -5.0, -5.0, 5.0]));
    }

    #[test]
    fn triangle_laplacian() {
        let g = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, -1.0, -1.0, 2.0, -1.0, -1.0, -1.0, 2.0]);
        assert_eq!(g.laplacian(), expected);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::from_triples(2, &[(0, 0, 1.0)]).is_err());
        assert!(Graph::from_triples(2, &[(0, 1, 0.0)]).is_err());
        assert!(Graph::from_triples(2, &[(0, 1, -1.0)]).is_err());
        assert!(Graph::from_triples(2, &[(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(Graph::from_triples(2, &[(0, 2, 1.0)]).is_err());
        assert!(Graph::from_triples(0, &[]).is_err());
    }

    #[test]
    fn edges_sorted_and_normalized() {
        let g = Graph::from_triples(3, &[(2, 1, 1.0), (1, 0, 2.0)]).unwrap();
        assert_eq!(g.edges()[0].key(), (0, 1));
        assert_eq!(g.edges()[1].key(), (1, 2));
        assert_eq!(g.weight(1, 0), Some(2.0));
        assert_eq!(g.weight(0, 2), None);
    }

    #[test]
    fn incidence_columns() {
        let g = Graph::from_triples(2, &[(0, 1, 1.0)]).unwrap();
        let inc = g.incidence();
        assert_eq!(inc.matrix, DMatrix::from_column_slice(2, 1, &[1.0, -1.0]));

        let tri = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let inc = tri.incidence();
        assert_eq!(inc.edge_order, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(&inc.matrix * inc.matrix.transpose(), tri.laplacian());

        let p3 = Graph::from_triples(3, &[(0, 1, 2.5), (1, 2, 0.75)]).unwrap();
        let inc = p3.incidence();
        let rebuilt = inc.weighted_laplacian(&p3.weights());
        assert!((rebuilt - p3.laplacian()).amax() <= 1e-12);
    }

    #[test]
    fn connectivity() {
        let g = Graph::from_triples(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(!g.is_connected());
        let g = Graph::from_triples(1, &[]).unwrap();
        assert!(g.is_connected());
    }
}
