//! Directed k-nearest-neighbor graph construction and the graph constants
//! that enter the null moments.
//!
//! Each node points to its `k` nearest neighbors under the chosen metric;
//! ties in distance break by ascending node index so that construction is
//! deterministic. The constants are `q1`, the number of directed edges whose
//! reverse edge is also present, and `q2 = sum_i d_in(i) (d_in(i) - 1)`, the
//! number of ordered pairs of distinct in-edges sharing a target.

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use rayon::prelude::*;

/// Distance used for neighbor search. Euclidean is the default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
}

impl Metric {
    fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let d = x - y;
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

/// Dense symmetric matrix of pairwise distances with a zero diagonal.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    values: Vec<f64>,
    n: usize,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// Euclidean pairwise distances. Entries are finite by `DataMatrix` construction.
pub fn pairwise_distances(data: &DataMatrix) -> DistanceMatrix {
    pairwise_distances_with(data, Metric::Euclidean)
}

/// Pairwise distances under an explicit metric.
pub fn pairwise_distances_with(data: &DataMatrix, metric: Metric) -> DistanceMatrix {
    let n = data.n_obs();
    let mut values = vec![0.0; n * n];
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; n];
            for (j, cell) in row.iter_mut().enumerate() {
                if j != i {
                    *cell = metric.distance(data.row(i), data.row(j));
                }
            }
            row
        })
        .collect();
    for (i, row) in rows.into_iter().enumerate() {
        values[i * n..(i + 1) * n].copy_from_slice(&row);
    }
    // enforce exact symmetry: keep the (i, j) value computed once
    for i in 0..n {
        for j in (i + 1)..n {
            let v = values[i * n + j];
            values[j * n + i] = v;
        }
    }
    DistanceMatrix { values, n }
}

/// Directed k-NN graph: per-node out-edges in ascending distance order,
/// in-edges in CSR form, and the constants `q1` and `q2`.
#[derive(Clone, Debug)]
pub struct KnnGraph {
    n_nodes: usize,
    k: usize,
    out_edges: Vec<u32>,
    in_offsets: Vec<u32>,
    in_edges: Vec<u32>,
    in_degrees: Vec<u32>,
    q1: u64,
    q2: u64,
}

impl KnnGraph {
    /// Builds a graph from explicit out-edge lists (`k` targets per node).
    ///
    /// Every node must have exactly `k` distinct targets, none of them itself.
    pub fn from_out_edges(n_nodes: usize, k: usize, out_edges: Vec<u32>) -> Result<Self> {
        if n_nodes < 2 || k < 1 || k > n_nodes - 1 {
            return Err(Error::InvalidK { k, max: n_nodes.saturating_sub(1) });
        }
        if out_edges.len() != n_nodes * k {
            return Err(Error::InvalidParameter(format!(
                "expected {} out-edges for {n_nodes} nodes with k = {k}, got {}",
                n_nodes * k,
                out_edges.len()
            )));
        }
        let mut seen = vec![false; n_nodes];
        for i in 0..n_nodes {
            let targets = &out_edges[i * k..(i + 1) * k];
            for &j in targets {
                let j = j as usize;
                if j >= n_nodes {
                    return Err(Error::NodeOutOfRange { node: j, n_nodes });
                }
                if j == i || seen[j] {
                    return Err(Error::InvalidParameter(format!(
                        "node {i} has a self-loop or duplicate target"
                    )));
                }
                seen[j] = true;
            }
            for &j in targets {
                seen[j as usize] = false;
            }
        }
        Ok(Self::finalize(n_nodes, k, out_edges))
    }

    fn finalize(n_nodes: usize, k: usize, out_edges: Vec<u32>) -> Self {
        let mut in_degrees = vec![0u32; n_nodes];
        for &j in &out_edges {
            in_degrees[j as usize] += 1;
        }
        let mut in_offsets = vec![0u32; n_nodes + 1];
        for i in 0..n_nodes {
            in_offsets[i + 1] = in_offsets[i] + in_degrees[i];
        }
        let mut cursor: Vec<u32> = in_offsets[..n_nodes].to_vec();
        let mut in_edges = vec![0u32; out_edges.len()];
        for i in 0..n_nodes {
            for &j in &out_edges[i * k..(i + 1) * k] {
                in_edges[cursor[j as usize] as usize] = i as u32;
                cursor[j as usize] += 1;
            }
        }
        let (q1, q2) = quantities_from_edges(n_nodes, k, &out_edges, &in_degrees);
        Self { n_nodes, k, out_edges, in_offsets, in_edges, in_degrees, q1, q2 }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Count of directed edges whose reverse edge is also in the graph.
    pub fn q1(&self) -> u64 {
        self.q1
    }

    /// `sum_i d_in(i) * (d_in(i) - 1)`.
    pub fn q2(&self) -> u64 {
        self.q2
    }

    pub fn in_degrees(&self) -> &[u32] {
        &self.in_degrees
    }

    /// Out-neighbors of `i` in ascending distance order.
    pub fn out_neighbors(&self, i: usize) -> &[u32] {
        &self.out_edges[i * self.k..(i + 1) * self.k]
    }

    /// Nodes that point to `i`.
    pub fn in_neighbors(&self, i: usize) -> &[u32] {
        &self.in_edges[self.in_offsets[i] as usize..self.in_offsets[i + 1] as usize]
    }
}

/// Builds the k-NN digraph from a distance matrix.
///
/// Node `i`'s out-edges are the `k` smallest entries of row `i` excluding `i`
/// itself; equal distances break by ascending node index.
pub fn build_knn_graph(dists: &DistanceMatrix, k: usize) -> Result<KnnGraph> {
    let n = dists.n();
    if n < 2 || k < 1 || k > n - 1 {
        return Err(Error::InvalidK { k, max: n.saturating_sub(1) });
    }
    let rows: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = dists.row(i);
            let mut order: Vec<u32> = (0..n as u32).filter(|&j| j as usize != i).collect();
            order.sort_unstable_by(|&a, &b| {
                row[a as usize].total_cmp(&row[b as usize]).then(a.cmp(&b))
            });
            order.truncate(k);
            order
        })
        .collect();
    let mut out_edges = Vec::with_capacity(n * k);
    for row in rows {
        out_edges.extend_from_slice(&row);
    }
    Ok(KnnGraph::finalize(n, k, out_edges))
}

/// Recomputes `(q1, q2, in_degrees)` from the out-edge lists alone, for
/// cross-checking the cached fields.
pub fn graph_quantities(graph: &KnnGraph) -> (u64, u64, Vec<u32>) {
    let n = graph.n_nodes();
    let k = graph.k();
    let mut in_degrees = vec![0u32; n];
    for i in 0..n {
        for &j in graph.out_neighbors(i) {
            in_degrees[j as usize] += 1;
        }
    }
    let out: Vec<u32> = (0..n).flat_map(|i| graph.out_neighbors(i).to_vec()).collect();
    let (q1, q2) = quantities_from_edges(n, k, &out, &in_degrees);
    (q1, q2, in_degrees)
}

fn quantities_from_edges(n: usize, k: usize, out_edges: &[u32], in_degrees: &[u32]) -> (u64, u64) {
    let words = (n * n + 63) / 64;
    let mut adj = vec![0u64; words];
    for (i, chunk) in out_edges.chunks(k).enumerate() {
        for &j in chunk {
            let bit = i * n + j as usize;
            adj[bit / 64] |= 1 << (bit % 64);
        }
    }
    let mut q1 = 0u64;
    for (i, chunk) in out_edges.chunks(k).enumerate() {
        for &j in chunk {
            let rev = j as usize * n + i;
            if adj[rev / 64] >> (rev % 64) & 1 == 1 {
                q1 += 1;
            }
        }
    }
    let q2 = in_degrees.iter().map(|&d| d as u64 * (d as u64).saturating_sub(1)).sum();
    (q1, q2)
}
