//! Enumeration-based ground truths for the statistics and the expectation
//! oracle, runnable as a diagnostic suite.
//!
//! Everything here recomputes from first principles: edge counts come from a
//! freshly built adjacency matrix and double loops, moments from averaging
//! over every labeling, expectations from averaging over every mislabeled
//! subset. None of it shares code with the formula implementations it checks.

use crate::data::LabelVector;
use crate::error::Result;
use crate::knn::KnnGraph;
use crate::oracle::{
    expected_edge_counts, theorem1_argmax_check, Perturbation, TwoClusterModel,
};
use crate::stats::{edge_counts, flip_delta, null_moments, Scenario};
use itertools::Itertools;
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Result of one named check.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Descriptions of the first few failing cases.
    pub first_failures: Vec<String>,
    /// Largest relative error seen, where the check compares numbers.
    pub worst_rel_err: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} ({} cases, {} failures, worst rel err {:.3e})",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.cases,
            self.failures,
            self.worst_rel_err
        )?;
        for msg in &self.first_failures {
            write!(f, "\n    {msg}")?;
        }
        Ok(())
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// A random digraph with exactly `k` distinct out-edges per node.
fn random_digraph(n: usize, k: usize, rng: &mut ChaCha12Rng) -> KnnGraph {
    let mut out = Vec::with_capacity(n * k);
    let mut pool: Vec<u32> = (0..n as u32).collect();
    for i in 0..n {
        pool.shuffle(rng);
        let mut taken = 0;
        for &j in pool.iter() {
            if j as usize != i {
                out.push(j);
                taken += 1;
                if taken == k {
                    break;
                }
            }
        }
    }
    KnnGraph::from_out_edges(n, k, out).expect("generated digraph is well formed")
}

fn adjacency(graph: &KnnGraph) -> Vec<bool> {
    let n = graph.n_nodes();
    let mut adj = vec![false; n * n];
    for i in 0..n {
        for &j in graph.out_neighbors(i) {
            adj[i * n + j as usize] = true;
        }
    }
    adj
}

fn recount(adj: &[bool], n: usize, labels: &[u8]) -> (u64, u64) {
    let mut r1 = 0;
    let mut r2 = 0;
    for i in 0..n {
        for j in 0..n {
            if adj[i * n + j] {
                match (labels[i], labels[j]) {
                    (1, 1) => r1 += 1,
                    (2, 2) => r2 += 1,
                    _ => {}
                }
            }
        }
    }
    (r1, r2)
}

/// Mean and population variance of `R_w` and `R_d` over all `C(N, m)`
/// labelings, computed by brute force.
pub fn enumerate_null_moments(graph: &KnnGraph, m: usize) -> (f64, f64, f64, f64) {
    let n = graph.n_nodes();
    let adj = adjacency(graph);
    let mut rws = Vec::new();
    let mut rds = Vec::new();
    for ones in (0..n).combinations(m) {
        let mut labels = vec![2u8; n];
        for &i in &ones {
            labels[i] = 1;
        }
        let (r1, r2) = recount(&adj, n, &labels);
        let nn = (n - m) as f64;
        let mf = m as f64;
        rws.push(((nn - 1.0) * r1 as f64 + (mf - 1.0) * r2 as f64) / (n as f64 - 2.0));
        rds.push(r1 as f64 - r2 as f64);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let var = |v: &[f64], mu: f64| v.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / v.len() as f64;
    let (mw, md) = (mean(&rws), mean(&rds));
    (mw, var(&rws, mw), md, var(&rds, md))
}

/// Average `(R1, R2)` over every placement of `delta1` mislabeled members of
/// cluster 1 and `delta2` of cluster 2, for the truth "first `m_star` rows
/// are cluster 1".
pub fn enumerate_expected_counts(
    graph: &KnnGraph,
    m_star: usize,
    delta1: usize,
    delta2: usize,
) -> (f64, f64) {
    let n = graph.n_nodes();
    let adj = adjacency(graph);
    let mut tot1 = 0u64;
    let mut tot2 = 0u64;
    let mut count = 0u64;
    for flip1 in (0..m_star).combinations(delta1) {
        for flip2 in (m_star..n).combinations(delta2) {
            let mut labels: Vec<u8> =
                (0..n).map(|i| if i < m_star { 1 } else { 2 }).collect();
            for &i in &flip1 {
                labels[i] = 2;
            }
            for &i in &flip2 {
                labels[i] = 1;
            }
            let (r1, r2) = recount(&adj, n, &labels);
            tot1 += r1;
            tot2 += r2;
            count += 1;
        }
    }
    (tot1 as f64 / count as f64, tot2 as f64 / count as f64)
}

/// Null-moment exactness: for N in {6, 8, 10}, k in {1, 2, 3}, every
/// m in 2..=N-2, and `graphs_per_combo` random digraphs each, the enumerated
/// mean and variance of `R_w` and `R_d` match the formulas within 1e-9
/// relative error.
pub fn check_null_moments(seed: u64, graphs_per_combo: usize) -> CheckOutcome {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = CheckOutcome {
        name: "null-moment-exactness",
        cases: 0,
        failures: 0,
        first_failures: vec![],
        worst_rel_err: 0.0,
    };
    for n in [6usize, 8, 10] {
        for k in [1usize, 2, 3] {
            for m in 2..=(n - 2) {
                for g in 0..graphs_per_combo {
                    let graph = random_digraph(n, k, &mut rng);
                    let (mw, vw, md, vd) = enumerate_null_moments(&graph, m);
                    let nm = null_moments(n, m, k, graph.q1(), graph.q2())
                        .expect("valid sizes");
                    out.cases += 1;
                    let errs = [
                        rel_err(mw, nm.mu_w),
                        rel_err(vw, nm.var_w),
                        rel_err(md, nm.mu_d),
                        rel_err(vd, nm.var_d),
                    ];
                    let worst = errs.iter().cloned().fold(0.0, f64::max);
                    out.worst_rel_err = out.worst_rel_err.max(worst);
                    if worst > 1e-9 {
                        out.failures += 1;
                        if out.first_failures.len() < 5 {
                            out.first_failures.push(format!(
                                "N={n} m={m} k={k} graph {g}: rel err {worst:.3e}"
                            ));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Oracle-expectation exactness: `expected_edge_counts` matches exhaustive
/// mislabeling enumeration within 1e-9 relative error on every instance with
/// `m* + n* <= 10` (all cluster splits, k in {1, 2, 3}, full delta grid).
pub fn check_expected_edge_counts(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = CheckOutcome {
        name: "expected-edge-counts",
        cases: 0,
        failures: 0,
        first_failures: vec![],
        worst_rel_err: 0.0,
    };
    for n in 6..=10usize {
        for m_star in 2..=(n - 2) {
            for k in [1usize, 2, 3] {
                let graph = random_digraph(n, k, &mut rng);
                let truth = LabelVector::from_split(m_star, n - m_star);
                let model = TwoClusterModel::from_labeled_graph(&graph, &truth)
                    .expect("sizes are valid");
                for delta1 in 0..=m_star {
                    for delta2 in 0..=(n - m_star) {
                        let (b1, b2) =
                            enumerate_expected_counts(&graph, m_star, delta1, delta2);
                        let (e1, e2) =
                            expected_edge_counts(&model, &Perturbation::new(delta1, delta2))
                                .expect("deltas in range");
                        out.cases += 1;
                        let worst = rel_err(b1, e1).max(rel_err(b2, e2));
                        out.worst_rel_err = out.worst_rel_err.max(worst);
                        if worst > 1e-9 {
                            out.failures += 1;
                            if out.first_failures.len() < 5 {
                                out.first_failures.push(format!(
                                    "N={n} m*={m_star} k={k} deltas=({delta1},{delta2}): \
                                     enum ({b1:.6}, {b2:.6}) vs formula ({e1:.6}, {e2:.6})"
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn sample_model(rng: &mut ChaCha12Rng, scenario: Scenario) -> TwoClusterModel {
    // margin keeps the sampled proportions strictly inside the scenario region
    // so floating-point grid ties cannot blur the argmax
    const MARGIN: f64 = 0.05;
    loop {
        let m_star = rng.gen_range(3..=9);
        let n_star = rng.gen_range(3..=9);
        let n_total = m_star + n_star;
        let k = rng.gen_range(1..=4usize.min(n_total - 2));
        let b1 = (m_star as f64 - 1.0) / (n_total as f64 - 1.0);
        let b2 = (n_star as f64 - 1.0) / (n_total as f64 - 1.0);
        let above = |b: f64, rng: &mut ChaCha12Rng| -> Option<f64> {
            let lo = b + MARGIN;
            (lo < 0.99).then(|| rng.gen_range(lo..0.99))
        };
        let below = |b: f64, rng: &mut ChaCha12Rng| -> Option<f64> {
            let hi = b - MARGIN;
            (hi > 0.01).then(|| rng.gen_range(0.01..hi))
        };
        let pair = match scenario {
            Scenario::One => above(b1, rng).zip(above(b2, rng)),
            Scenario::Two => above(b1, rng).zip(below(b2, rng)),
            Scenario::Three => below(b1, rng).zip(above(b2, rng)),
        };
        if let Some((p11, p22)) = pair {
            let model = TwoClusterModel::new(m_star, n_star, k, p11, p22).expect("valid model");
            debug_assert_eq!(model.scenario(), Some(scenario));
            return model;
        }
    }
}

/// Theorem-1 argmax property: for random models in each scenario, the grid
/// argmax of the relevant expectation lands exactly where the theory says.
pub fn check_theorem1_argmax(seed: u64, models_per_scenario: usize) -> CheckOutcome {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = CheckOutcome {
        name: "theorem1-argmax",
        cases: 0,
        failures: 0,
        first_failures: vec![],
        worst_rel_err: 0.0,
    };
    for scenario in [Scenario::One, Scenario::Two, Scenario::Three] {
        for _ in 0..models_per_scenario {
            let model = sample_model(&mut rng, scenario);
            let report = theorem1_argmax_check(&model).expect("sampled model has a scenario");
            out.cases += 1;
            if !report.consistent {
                out.failures += 1;
                if out.first_failures.len() < 5 {
                    out.first_failures.push(format!(
                        "{scenario} m*={} n*={} k={} p11*={:.3} p22*={:.3}: argmax {:?}, expected {:?}",
                        model.m_star,
                        model.n_star,
                        model.k,
                        model.p11_star,
                        model.p22_star,
                        report.argmax,
                        report.expected_argmax,
                    ));
                }
            }
        }
    }
    out
}

/// Incremental correctness: `flip_delta` equals a full recount difference on
/// random (graph, labels, flip) triples, exactly.
pub fn check_flip_delta(seed: u64, triples: usize) -> CheckOutcome {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = CheckOutcome {
        name: "flip-delta-recount",
        cases: 0,
        failures: 0,
        first_failures: vec![],
        worst_rel_err: 0.0,
    };
    while out.cases < triples {
        let n = rng.gen_range(6..14);
        let k = rng.gen_range(1..4);
        let graph = random_digraph(n, k, &mut rng);
        let adj = adjacency(&graph);
        let mut raw: Vec<u8> = (0..n).map(|i| if i < n / 2 { 1 } else { 2 }).collect();
        raw.shuffle(&mut rng);
        let labels = LabelVector::new(raw.clone()).unwrap();
        let node = rng.gen_range(0..n);
        let Ok((d1, d2)) = flip_delta(&graph, &labels, node) else {
            continue; // flip would break the minimum cluster size; resample
        };
        let (before1, before2) = recount(&adj, n, &raw);
        let mut flipped = raw.clone();
        flipped[node] = 3 - flipped[node];
        let (after1, after2) = recount(&adj, n, &flipped);
        out.cases += 1;
        let exact = (after1 as i64 - before1 as i64, after2 as i64 - before2 as i64);
        if (d1, d2) != exact {
            out.failures += 1;
            if out.first_failures.len() < 5 {
                out.first_failures.push(format!(
                    "N={n} k={k} node {node}: flip_delta ({d1}, {d2}) vs recount {exact:?}"
                ));
            }
        }
        // cross-check the incremental path against the library recount too
        let lv = LabelVector::new(flipped).unwrap();
        let lib = edge_counts(&graph, &lv).unwrap();
        if (after1, after2) != lib {
            out.failures += 1;
        }
    }
    out
}

/// The full diagnostic suite at its default sizes.
pub fn run_all_checks(seed: u64) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        check_null_moments(seed, 20),
        check_expected_edge_counts(seed.wrapping_add(1)),
        check_theorem1_argmax(seed.wrapping_add(2), 50),
        check_flip_delta(seed.wrapping_add(3), 10_000),
    ])
}
