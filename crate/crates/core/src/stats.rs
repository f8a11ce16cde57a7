//! Edge-count statistics on a labeled k-NN graph.
//!
//! For a labeling `x` with `m` ones and `n` twos, let `R1` and `R2` count the
//! directed edges joining two cluster-1 (resp. cluster-2) observations. The
//! two criteria are standardized forms of
//!
//! ```text
//! R_w = ((n - 1) R1 + (m - 1) R2) / (N - 2)      (weighted within-cluster count)
//! R_d = R1 - R2                                  (difference count)
//! ```
//!
//! Under the permutation null (uniformly random labeling with `m` ones) the
//! exact moments are, with `kN` total edges and graph constants `q1`, `q2`:
//!
//! ```text
//! mu_w  = (m-1)(n-1) k N / ((N-1)(N-2))
//! var_w = [m n (m-1)(n-1) / (N (N-1)(N-2)(N-3))]
//!         * (kN + q1 - (q2 + kN - k^2 N)/(N-2) - 2 k^2 N/(N-1))
//! mu_d  = k (m - n)
//! var_d = [m n / (N (N-1))] * (q2 + kN - k^2 N)
//! ```
//!
//! `Z_w = (R_w - mu_w)/sqrt(var_w)`, `Z_d = (R_d - mu_d)/sqrt(var_d)`, and the
//! combined criterion is `M_kappa = max(Z_w, kappa * Z_d)`. The moment
//! expressions are validated against exhaustive enumeration over all
//! `C(N, m)` labelings in the `verify` module and the test suite.

use crate::data::LabelVector;
use crate::error::{Error, Result};
use crate::knn::KnnGraph;
use serde::{Deserialize, Serialize};

/// Which standardized statistic a search maximizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    /// `Z_w`, powerful when both clusters are internally cohesive.
    #[serde(rename = "z_w")]
    Weighted,
    /// `Z_d`, powerful when one cluster scatters into the other.
    #[serde(rename = "z_d")]
    Difference,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Weighted => "z_w",
            Objective::Difference => "z_d",
        }
    }
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exact permutation-null moments of `R_w` and `R_d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NullMoments {
    pub mu_w: f64,
    pub var_w: f64,
    pub mu_d: f64,
    pub var_d: f64,
}

/// Null moments for a labeling with `m` ones on a graph with `n_total` nodes,
/// `k` out-edges per node, and constants `q1`, `q2`.
///
/// Variances may be zero for degenerate graphs (for instance `k = N - 1`
/// zeroes both); standardization is where that becomes an error.
pub fn null_moments(n_total: usize, m: usize, k: usize, q1: u64, q2: u64) -> Result<NullMoments> {
    if n_total < 6 {
        return Err(Error::TooFewObservations { min: 6, got: n_total });
    }
    if m < 2 || n_total - m < 2 {
        return Err(Error::DegenerateLabeling { m, n: n_total - m });
    }
    let nf = n_total as f64;
    let mf = m as f64;
    let nn = nf - mf;
    let kf = k as f64;
    let kn = kf * nf;
    let k2n = kf * kf * nf;
    let q1 = q1 as f64;
    let q2 = q2 as f64;

    let mu_w = (mf - 1.0) * (nn - 1.0) * kn / ((nf - 1.0) * (nf - 2.0));
    let var_w = mf * nn * (mf - 1.0) * (nn - 1.0) / (nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0))
        * (kn + q1 - (q2 + kn - k2n) / (nf - 2.0) - 2.0 * k2n / (nf - 1.0));
    let mu_d = kf * (mf - nn);
    let var_d = mf * nn / (nf * (nf - 1.0)) * (q2 + kn - k2n);
    Ok(NullMoments { mu_w, var_w, mu_d, var_d })
}

/// Everything derived from one (graph, labeling, kappa) triple.
#[derive(Clone, Copy, Debug)]
pub struct GraphStatistics {
    pub r1: u64,
    pub r2: u64,
    pub r_w: f64,
    pub r_d: f64,
    pub mu_w: f64,
    pub var_w: f64,
    pub mu_d: f64,
    pub var_d: f64,
    pub z_w: f64,
    pub z_d: f64,
    pub m_kappa: f64,
    pub kappa: f64,
}

/// Counts the directed edges with both endpoints labeled 1 (`r1`) and with
/// both endpoints labeled 2 (`r2`).
pub fn edge_counts(graph: &KnnGraph, labels: &LabelVector) -> Result<(u64, u64)> {
    check_len(graph, labels)?;
    let x = labels.labels();
    let mut r1 = 0u64;
    let mut r2 = 0u64;
    for i in 0..graph.n_nodes() {
        let li = x[i];
        for &j in graph.out_neighbors(i) {
            let lj = x[j as usize];
            if li == lj {
                if li == 1 {
                    r1 += 1;
                } else {
                    r2 += 1;
                }
            }
        }
    }
    Ok((r1, r2))
}

/// The combined criterion `max(z_w, kappa * z_d)`.
pub fn combined_criterion(z_w: f64, z_d: f64, kappa: f64) -> f64 {
    z_w.max(kappa * z_d)
}

/// Computes `R1`, `R2`, the null moments, both standardized scores, and the
/// combined criterion for a labeling.
pub fn statistics(graph: &KnnGraph, labels: &LabelVector, kappa: f64) -> Result<GraphStatistics> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    check_len(graph, labels)?;
    let (m, n) = (labels.m(), labels.n());
    if m < 2 || n < 2 {
        return Err(Error::DegenerateLabeling { m, n });
    }
    let (r1, r2) = edge_counts(graph, labels)?;
    let nm = null_moments(graph.n_nodes(), m, graph.k(), graph.q1(), graph.q2())?;
    if nm.var_w <= 0.0 {
        return Err(Error::DegenerateVariance { statistic: "z_w", k: graph.k() });
    }
    if nm.var_d <= 0.0 {
        return Err(Error::DegenerateVariance { statistic: "z_d", k: graph.k() });
    }
    let nf = graph.n_nodes() as f64;
    let r_w = ((n as f64 - 1.0) * r1 as f64 + (m as f64 - 1.0) * r2 as f64) / (nf - 2.0);
    let r_d = r1 as f64 - r2 as f64;
    let z_w = (r_w - nm.mu_w) / nm.var_w.sqrt();
    let z_d = (r_d - nm.mu_d) / nm.var_d.sqrt();
    Ok(GraphStatistics {
        r1,
        r2,
        r_w,
        r_d,
        mu_w: nm.mu_w,
        var_w: nm.var_w,
        mu_d: nm.mu_d,
        var_d: nm.var_d,
        z_w,
        z_d,
        m_kappa: combined_criterion(z_w, z_d, kappa),
        kappa,
    })
}

/// Change in `(r1, r2)` if `labels[node]` flips, computed from the edges
/// incident to `node` only.
///
/// Rejects flips that would shrink either cluster below 2 members.
pub fn flip_delta(graph: &KnnGraph, labels: &LabelVector, node: usize) -> Result<(i64, i64)> {
    check_len(graph, labels)?;
    if node >= graph.n_nodes() {
        return Err(Error::NodeOutOfRange { node, n_nodes: graph.n_nodes() });
    }
    let lab = labels.get(node);
    let shrinking = if lab == 1 { labels.m() } else { labels.n() };
    if shrinking <= 2 {
        return Err(Error::RejectedFlip { node, min: 2 });
    }
    let x = labels.labels();
    let mut same = 0i64;
    let mut other = 0i64;
    for &j in graph.out_neighbors(node).iter().chain(graph.in_neighbors(node)) {
        if x[j as usize] == lab {
            same += 1;
        } else {
            other += 1;
        }
    }
    Ok(if lab == 1 { (-same, other) } else { (other, -same) })
}

/// Per-cluster neighbor proportions and their single-distribution baselines.
///
/// `p11` is the fraction of edges leaving cluster 1 that stay in cluster 1,
/// `p22` the same for cluster 2. If a cluster is empty its proportions are
/// NaN; the baselines are `(m-1)/(N-1)` and `(n-1)/(N-1)`.
#[derive(Clone, Copy, Debug)]
pub struct NeighborProbs {
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
    pub p11_base: f64,
    pub p22_base: f64,
}

pub fn neighbor_probs(graph: &KnnGraph, labels: &LabelVector) -> Result<NeighborProbs> {
    check_len(graph, labels)?;
    let (r1, r2) = edge_counts(graph, labels)?;
    let k = graph.k() as f64;
    let (m, n) = (labels.m() as f64, labels.n() as f64);
    let nf = graph.n_nodes() as f64;
    let p11 = if labels.m() > 0 { r1 as f64 / (k * m) } else { f64::NAN };
    let p22 = if labels.n() > 0 { r2 as f64 / (k * n) } else { f64::NAN };
    Ok(NeighborProbs {
        p11,
        p12: 1.0 - p11,
        p21: 1.0 - p22,
        p22,
        p11_base: (m - 1.0) / (nf - 1.0),
        p22_base: (n - 1.0) / (nf - 1.0),
    })
}

/// Sign pattern of `(p11 - baseline, p22 - baseline)` that decides which
/// criterion's expectation peaks at the true labeling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// Both proportions above baseline: `Z_w` peaks at the truth.
    One,
    /// `p11` above, `p22` below: `Z_d` peaks at the truth.
    Two,
    /// `p11` below, `p22` above: `Z_d` peaks at the swapped truth.
    Three,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Scenario::One => "scenario1",
            Scenario::Two => "scenario2",
            Scenario::Three => "scenario3",
        };
        f.write_str(s)
    }
}

/// Classifies the sign pattern; inequalities are strict, so exact equality
/// with a baseline (and any NaN) maps to `None`.
pub fn classify_scenario(probs: &NeighborProbs) -> Option<Scenario> {
    let up1 = probs.p11 > probs.p11_base;
    let dn1 = probs.p11 < probs.p11_base;
    let up2 = probs.p22 > probs.p22_base;
    let dn2 = probs.p22 < probs.p22_base;
    match (up1, dn1, up2, dn2) {
        (true, _, true, _) => Some(Scenario::One),
        (true, _, _, true) => Some(Scenario::Two),
        (_, true, true, _) => Some(Scenario::Three),
        _ => None,
    }
}

fn check_len(graph: &KnnGraph, labels: &LabelVector) -> Result<()> {
    if labels.len() != graph.n_nodes() {
        return Err(Error::LengthMismatch { expected: graph.n_nodes(), got: labels.len() });
    }
    Ok(())
}

/// Precomputed `mu` and `1/sigma` for every feasible `m`, so the optimizer
/// evaluates a candidate flip in O(1) after the edge deltas are known.
#[derive(Clone, Debug)]
pub(crate) struct NullTables {
    pub n: usize,
    mu_w: Vec<f64>,
    inv_sd_w: Vec<f64>,
    mu_d: Vec<f64>,
    inv_sd_d: Vec<f64>,
    inv_n_minus_2: f64,
    pub weighted_ok: bool,
    pub difference_ok: bool,
}

impl NullTables {
    pub fn new(graph: &KnnGraph) -> Result<Self> {
        let n = graph.n_nodes();
        if n < 6 {
            return Err(Error::TooFewObservations { min: 6, got: n });
        }
        let mut mu_w = vec![f64::NAN; n + 1];
        let mut inv_sd_w = vec![f64::NAN; n + 1];
        let mut mu_d = vec![f64::NAN; n + 1];
        let mut inv_sd_d = vec![f64::NAN; n + 1];
        let mut weighted_ok = true;
        let mut difference_ok = true;
        for m in 2..=(n - 2) {
            let nm = null_moments(n, m, graph.k(), graph.q1(), graph.q2())?;
            mu_w[m] = nm.mu_w;
            mu_d[m] = nm.mu_d;
            if nm.var_w > 0.0 {
                inv_sd_w[m] = 1.0 / nm.var_w.sqrt();
            } else {
                weighted_ok = false;
            }
            if nm.var_d > 0.0 {
                inv_sd_d[m] = 1.0 / nm.var_d.sqrt();
            } else {
                difference_ok = false;
            }
        }
        Ok(Self {
            n,
            mu_w,
            inv_sd_w,
            mu_d,
            inv_sd_d,
            inv_n_minus_2: 1.0 / (n as f64 - 2.0),
            weighted_ok,
            difference_ok,
        })
    }

    pub fn available(&self, objective: Objective) -> bool {
        match objective {
            Objective::Weighted => self.weighted_ok,
            Objective::Difference => self.difference_ok,
        }
    }

    #[inline]
    pub fn score(&self, objective: Objective, r1: i64, r2: i64, m: usize) -> f64 {
        let n = (self.n - m) as f64;
        let mf = m as f64;
        match objective {
            Objective::Weighted => {
                let r_w = ((n - 1.0) * r1 as f64 + (mf - 1.0) * r2 as f64) * self.inv_n_minus_2;
                (r_w - self.mu_w[m]) * self.inv_sd_w[m]
            }
            Objective::Difference => (r1 as f64 - r2 as f64 - self.mu_d[m]) * self.inv_sd_d[m],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knn::{build_knn_graph, pairwise_distances};
    use crate::DataMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn three_node_graph() -> KnnGraph {
        // 0 -> 1, 1 -> 0, 2 -> 1
        KnnGraph::from_out_edges(3, 1, vec![1, 0, 1]).unwrap()
    }

    fn random_graph(n: usize, k: usize, seed: u64) -> KnnGraph {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> =
            (0..n).map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        build_knn_graph(&pairwise_distances(&DataMatrix::from_rows(rows).unwrap()), k).unwrap()
    }

    #[test]
    fn all_ones_counts_every_edge() {
        let g = random_graph(9, 2, 3);
        let labels = LabelVector::new(vec![1; 9]).unwrap();
        let (r1, r2) = edge_counts(&g, &labels).unwrap();
        assert_eq!(r1, 18);
        assert_eq!(r2, 0);
    }

    #[test]
    fn hand_enumerated_three_node_counts() {
        let g = three_node_graph();
        let labels = LabelVector::new(vec![1, 1, 2]).unwrap();
        assert_eq!(edge_counts(&g, &labels).unwrap(), (2, 0));
    }

    #[test]
    fn counts_match_brute_force_recount() {
        let g = random_graph(10, 3, 11);
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let labels =
            LabelVector::new((0..10).map(|_| rng.gen_range(1..=2) as u8).collect()).unwrap();
        let (r1, r2) = edge_counts(&g, &labels).unwrap();
        let mut b1 = 0;
        let mut b2 = 0;
        for i in 0..10usize {
            for j in 0..10usize {
                if g.out_neighbors(i).contains(&(j as u32)) {
                    match (labels.get(i), labels.get(j)) {
                        (1, 1) => b1 += 1,
                        (2, 2) => b2 += 1,
                        _ => {}
                    }
                }
            }
        }
        assert_eq!((r1, r2), (b1, b2));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let g = three_node_graph();
        let labels = LabelVector::new(vec![1, 2]).unwrap();
        assert!(matches!(edge_counts(&g, &labels), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn balanced_labeling_centers_the_difference() {
        let nm = null_moments(10, 5, 2, 4, 6).unwrap();
        assert_eq!(nm.mu_d, 0.0);
    }

    #[test]
    fn mu_w_closed_form_value() {
        // 49 * 49 * 5 * 100 / (99 * 98)
        let nm = null_moments(100, 50, 5, 0, 0).unwrap();
        let expected = 1_200_500.0 / 9_702.0;
        assert!((nm.mu_w - expected).abs() / expected < 1e-12);
        assert!((nm.mu_w - 123.737_373_737).abs() < 1e-6);
    }

    #[test]
    fn degenerate_cluster_sizes_rejected() {
        assert!(matches!(null_moments(10, 1, 2, 0, 0), Err(Error::DegenerateLabeling { .. })));
        assert!(matches!(null_moments(10, 9, 2, 0, 0), Err(Error::DegenerateLabeling { .. })));
        assert!(matches!(null_moments(5, 2, 1, 0, 0), Err(Error::TooFewObservations { .. })));
    }

    #[test]
    fn complete_graph_standardization_fails_loudly() {
        let g = random_graph(8, 7, 2);
        let labels = LabelVector::from_split(4, 4);
        assert!(matches!(
            statistics(&g, &labels, 1.55),
            Err(Error::DegenerateVariance { .. })
        ));
    }

    /// Exhaustive check on one fixed graph: the null moments equal the mean
    /// and variance of R_w and R_d over all C(8, 4) = 70 labelings, and the
    /// z-scores average to 0 with variance 1 over the same family.
    #[test]
    fn moments_match_exhaustive_enumeration_and_scores_standardize() {
        let g = random_graph(8, 2, 21);
        let n = 8usize;
        let m = 4usize;
        let mut rws = vec![];
        let mut rds = vec![];
        let mut zws = vec![];
        let mut zds = vec![];
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != m {
                continue;
            }
            let labels = LabelVector::new(
                (0..n).map(|i| if mask >> i & 1 == 1 { 1u8 } else { 2u8 }).collect(),
            )
            .unwrap();
            let s = statistics(&g, &labels, 1.55).unwrap();
            rws.push(s.r_w);
            rds.push(s.r_d);
            zws.push(s.z_w);
            zds.push(s.z_d);
        }
        assert_eq!(rws.len(), 70);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let var = |v: &[f64]| {
            let mu = mean(v);
            v.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / v.len() as f64
        };
        let nm = null_moments(n, m, g.k(), g.q1(), g.q2()).unwrap();
        assert!((mean(&rws) - nm.mu_w).abs() < 1e-10);
        assert!((var(&rws) - nm.var_w).abs() < 1e-10);
        assert!((mean(&rds) - nm.mu_d).abs() < 1e-10);
        assert!((var(&rds) - nm.var_d).abs() < 1e-10);
        assert!(mean(&zws).abs() < 1e-10);
        assert!((var(&zws) - 1.0).abs() < 1e-10);
        assert!(mean(&zds).abs() < 1e-10);
        assert!((var(&zds) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn combiner_takes_the_max() {
        assert_eq!(combined_criterion(1.0, 1.0, 1.55), 1.55);
        assert_eq!(combined_criterion(3.0, 1.0, 1.55), 3.0);
    }

    #[test]
    fn label_swap_keeps_zw_and_negates_zd() {
        let g = random_graph(10, 3, 33);
        let labels = LabelVector::new(vec![1, 2, 1, 1, 2, 2, 1, 2, 2, 1]).unwrap();
        let a = statistics(&g, &labels, 1.55).unwrap();
        let b = statistics(&g, &labels.swapped(), 1.55).unwrap();
        assert!((a.z_w - b.z_w).abs() < 1e-12);
        assert!((a.z_d + b.z_d).abs() < 1e-12);
    }

    #[test]
    fn flip_with_no_same_label_neighbors_only_adds() {
        // line: 0 at 0.0, 2 at 1.0, 3 at 1.9, 1 at 10, 4 at 20; k = 1
        // edges: 0->2, 2->3, 3->2, 1->3, 4->1
        let data = DataMatrix::from_rows(vec![
            vec![0.0],
            vec![10.0],
            vec![1.0],
            vec![1.9],
            vec![20.0],
        ])
        .unwrap();
        let g = build_knn_graph(&pairwise_distances(&data), 1).unwrap();
        let labels = LabelVector::new(vec![1, 1, 2, 2, 1]).unwrap();
        // node 0 has one incident edge (0 -> 2) and no label-1 neighbors,
        // so flipping it loses nothing from r1 and adds the 0 -> 2 edge to r2
        assert_eq!(flip_delta(&g, &labels, 0).unwrap(), (0, 1));
    }

    #[test]
    fn flip_delta_matches_hand_enumeration() {
        // 6 nodes so the flip keeps both clusters at size >= 2.
        // edges: 0->1, 1->0, 2->1, 3->4, 4->5, 5->4
        let g = KnnGraph::from_out_edges(6, 1, vec![1, 0, 1, 4, 5, 4]).unwrap();
        let labels = LabelVector::new(vec![1, 1, 1, 2, 2, 2]).unwrap();
        // node 1 touches edges 0->1, 1->0, 2->1, all inside cluster 1; flipping
        // it removes all three from r1 and adds nothing to r2
        assert_eq!(flip_delta(&g, &labels, 1).unwrap(), (-3, 0));
    }

    #[test]
    fn flip_shrinking_a_minimal_cluster_is_rejected() {
        let g = three_node_graph();
        let labels = LabelVector::new(vec![1, 1, 2]).unwrap();
        assert!(matches!(flip_delta(&g, &labels, 1), Err(Error::RejectedFlip { node: 1, .. })));
        assert!(matches!(flip_delta(&g, &labels, 2), Err(Error::RejectedFlip { node: 2, .. })));
    }

    #[test]
    fn single_cluster_probs_hit_one() {
        let g = random_graph(8, 2, 40);
        let labels = LabelVector::new(vec![1; 8]).unwrap();
        let p = neighbor_probs(&g, &labels).unwrap();
        assert_eq!(p.p11, 1.0);
        assert!(p.p22.is_nan());
    }

    #[test]
    fn balanced_baselines() {
        let g = random_graph(100, 3, 41);
        let labels = LabelVector::from_split(50, 50);
        let p = neighbor_probs(&g, &labels).unwrap();
        assert!((p.p11_base - 49.0 / 99.0).abs() < 1e-15);
        assert!((p.p22_base - 49.0 / 99.0).abs() < 1e-15);
    }

    #[test]
    fn scenario_classification() {
        let probs = |p11: f64, p22: f64| NeighborProbs {
            p11,
            p12: 1.0 - p11,
            p21: 1.0 - p22,
            p22,
            p11_base: 0.5,
            p22_base: 0.5,
        };
        assert_eq!(classify_scenario(&probs(0.8, 0.7)), Some(Scenario::One));
        assert_eq!(classify_scenario(&probs(0.8, 0.3)), Some(Scenario::Two));
        assert_eq!(classify_scenario(&probs(0.3, 0.8)), Some(Scenario::Three));
        assert_eq!(classify_scenario(&probs(0.5, 0.8)), None);
        assert_eq!(classify_scenario(&probs(0.5, 0.5)), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Random flip sequences: flip_delta composes to the full recount.
        #[test]
        fn flip_deltas_compose(seed in 0u64..10_000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let n = rng.gen_range(8..14);
            let k = rng.gen_range(1..4);
            let g = random_graph(n, k, seed ^ 0xABCD);
            let mut labels = LabelVector::from_split(n / 2, n - n / 2);
            let (mut r1, mut r2) = edge_counts(&g, &labels).unwrap();
            for _ in 0..30 {
                let i = rng.gen_range(0..n);
                match flip_delta(&g, &labels, i) {
                    Ok((d1, d2)) => {
                        labels.flip(i);
                        r1 = (r1 as i64 + d1) as u64;
                        r2 = (r2 as i64 + d2) as u64;
                        let recount = edge_counts(&g, &labels).unwrap();
                        prop_assert_eq!((r1, r2), recount);
                    }
                    Err(Error::RejectedFlip { .. }) => {}
                    Err(e) => return Err(TestCaseError::fail(e.to_string())),
                }
            }
        }

        /// Count bounds and nonnegative variances on constructible graphs.
        #[test]
        fn bounds_and_variances(seed in 0u64..10_000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let n = rng.gen_range(6..14);
            let k = rng.gen_range(1..(n - 1).min(5));
            let g = random_graph(n, k, seed ^ 0x1234);
            let m = rng.gen_range(2..=(n - 2));
            let mut v: Vec<u8> = (0..n).map(|i| if i < m { 1 } else { 2 }).collect();
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                v.swap(i, j);
            }
            let labels = LabelVector::new(v).unwrap();
            let (r1, r2) = edge_counts(&g, &labels).unwrap();
            prop_assert!(r1 <= (g.k() * labels.m()) as u64);
            prop_assert!(r2 <= (g.k() * labels.n()) as u64);
            let nm = null_moments(n, labels.m(), g.k(), g.q1(), g.q2()).unwrap();
            prop_assert!(nm.var_d >= 0.0);
            if k <= n - 2 {
                prop_assert!(nm.var_w >= -1e-9);
            }
        }
    }
}
