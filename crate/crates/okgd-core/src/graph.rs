//! Weighted undirected graphs without self-loops, their combinatorial
//! Laplacian, the smoothness functional, and random/geometric constructors.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Weighted undirected graph without self-loops.
///
/// Weights are stored both as a dense symmetric matrix (for the Laplacian)
/// and as per-node adjacency lists (the update path only ever touches a
/// node's neighbors). Immutable after construction; safe to share across
/// threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    weights: Vec<f64>, // dense n*n, row-major, symmetric, zero diagonal
    degrees: Vec<f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl Graph {
    /// Builds a graph from an unordered edge list. Each edge `(u, v, w)` is
    /// mirrored so `W` is symmetric by construction. Zero-weight edges are
    /// dropped; self-loops, negative weights, out-of-range indices, and
    /// duplicate pairs are rejected.
    pub fn from_edges(n_nodes: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::Config("graph must have at least one node".into()));
        }
        let mut weights = vec![0.0; n_nodes * n_nodes];
        for &(u, v, w) in edges {
            if u >= n_nodes || v >= n_nodes {
                return Err(Error::Data(format!(
                    "edge ({u}, {v}) out of range for {n_nodes} nodes"
                )));
            }
            if u == v {
                return Err(Error::Data(format!("self-loop on node {u}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Data(format!("edge ({u}, {v}) has invalid weight {w}")));
            }
            if weights[u * n_nodes + v] != 0.0 {
                return Err(Error::Data(format!("duplicate edge ({u}, {v})")));
            }
            if w == 0.0 {
                continue;
            }
            weights[u * n_nodes + v] = w;
            weights[v * n_nodes + u] = w;
        }

        let mut degrees = vec![0.0; n_nodes];
        let mut neighbors = vec![Vec::new(); n_nodes];
        for v in 0..n_nodes {
            for u in 0..n_nodes {
                let w = weights[v * n_nodes + u];
                if w > 0.0 {
                    degrees[v] += w;
                    neighbors[v].push((u, w));
                }
            }
        }

        Ok(Graph {
            n: n_nodes,
            weights,
            degrees,
            neighbors,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.weights[u * self.n + v]
    }

    pub fn degree(&self, v: usize) -> f64 {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Neighbors of `v` with edge weights, ascending by node index.
    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.neighbors[v]
    }

    /// Iterates each undirected edge once, with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors[u]
                .iter()
                .filter(move |&&(v, _)| v > u)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    pub fn n_edges(&self) -> usize {
        self.edges().count()
    }

    /// Average node degree; 0 for an edgeless graph.
    pub fn mean_degree(&self) -> f64 {
        self.degrees.iter().sum::<f64>() / self.n as f64
    }

    /// Combinatorial Laplacian `L = diag(d) - W`. Symmetric PSD with zero
    /// row sums.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.degrees[i]
            } else {
                -self.weights[i * n + j]
            }
        })
    }

    /// Smoothness of a graph signal, computed as the pairwise sum
    /// `1/2 * sum_{u,v} W_uv (x_u - x_v)^2`. Lower means adjacent values are
    /// more similar; always nonnegative.
    pub fn smoothness(&self, x: &[f64]) -> Result<f64> {
        self.check_signal(x)?;
        let mut s = 0.0;
        for (u, v, w) in self.edges() {
            let d = x[u] - x[v];
            s += w * d * d;
        }
        Ok(s)
    }

    /// Smoothness computed through the quadratic form `x^T L x`. Agrees with
    /// [`Graph::smoothness`] up to floating-point error; kept as an
    /// independent route.
    pub fn smoothness_quadratic(&self, x: &[f64]) -> Result<f64> {
        self.check_signal(x)?;
        let lap = self.laplacian();
        let xv = nalgebra::DVector::from_column_slice(x);
        Ok((xv.transpose() * lap * xv)[(0, 0)])
    }

    fn check_signal(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::dim("graph signal", self.n, x.len()));
        }
        Ok(())
    }
}

/// Parameters of the stochastic block model sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub n_clusters: usize,
    pub cluster_size: usize,
    pub p_intra: f64,
    pub p_inter: f64,
}

/// Samples a stochastic block model graph with unit edge weights. Each
/// unordered intra-cluster pair is connected with probability `p_intra`,
/// inter-cluster pairs with `p_inter`. Returns the graph and per-node
/// cluster labels. Deterministic given `seed`.
pub fn sample_sbm(params: &SbmParams, seed: u64) -> Result<(Graph, Vec<usize>)> {
    let SbmParams {
        n_clusters,
        cluster_size,
        p_intra,
        p_inter,
    } = *params;
    if n_clusters == 0 || cluster_size == 0 {
        return Err(Error::Config("SBM needs at least one node".into()));
    }
    for (name, p) in [("p_intra", p_intra), ("p_inter", p_inter)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("SBM {name} must be in [0, 1], got {p}")));
        }
    }
    let n = n_clusters * cluster_size;
    let labels: Vec<usize> = (0..n).map(|v| v / cluster_size).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if labels[u] == labels[v] { p_intra } else { p_inter };
            if rng.random::<f64>() < p {
                edges.push((u, v, 1.0));
            }
        }
    }
    Ok((Graph::from_edges(n, &edges)?, labels))
}

/// Builds a unit-weight k-nearest-neighbor graph from a point cloud,
/// symmetrized by union: `u ~ v` iff `v` is among the `k` nearest of `u` or
/// vice versa (Euclidean distance, ties broken by ascending index).
pub fn knn_graph(points: &[Vec<f64>], k: usize) -> Result<Graph> {
    let n = points.len();
    if n < 2 {
        return Err(Error::Data("k-NN graph needs at least two points".into()));
    }
    if k == 0 || k >= n {
        return Err(Error::Config(format!(
            "k must satisfy 1 <= k < n_points (k={k}, n_points={n})"
        )));
    }
    let dim = points[0].len();
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::dim(format!("point {i}"), dim, p.len()));
        }
    }

    let dist2 = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    };

    let mut edge_present = vec![false; n * n];
    for u in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&v| v != u).collect();
        order.sort_by(|&a, &b| {
            dist2(&points[u], &points[a])
                .total_cmp(&dist2(&points[u], &points[b]))
                .then(a.cmp(&b))
        });
        for &v in order.iter().take(k) {
            edge_present[u.min(v) * n + u.max(v)] = true;
        }
    }
    let edges: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .filter(|&(u, v)| edge_present[u * n + v])
        .map(|(u, v)| (u, v, 1.0))
        .collect();
    Graph::from_edges(n, &edges)
}
