//! Neighborhood-size selection: pick the k whose best combined criterion is
//! largest, by full grid sweep or by ternary search over k.

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::knn::{build_knn_graph, pairwise_distances};
use crate::optimizer::{cluster_fixed_k, ClusterResult, OptimizerConfig};
use crate::stats::Objective;
use rayon::prelude::*;
use std::collections::HashMap;

/// One row of a k sweep.
#[derive(Clone, Debug)]
pub struct KSweepRecord {
    pub k: usize,
    pub best_z_w: f64,
    pub best_z_d: f64,
    pub m_kappa: f64,
    pub winner: Objective,
    pub labels: crate::data::LabelVector,
}

impl KSweepRecord {
    fn from_result(r: ClusterResult) -> Self {
        Self {
            k: r.k_used,
            best_z_w: r.z_w,
            best_z_d: r.z_d,
            m_kappa: r.m_kappa,
            winner: r.objective_kind,
            labels: r.labels,
        }
    }
}

/// Grid-sweep outcome: the winning record plus every per-k record.
#[derive(Clone, Debug)]
pub struct KSelection {
    pub best: KSweepRecord,
    pub sweep: Vec<KSweepRecord>,
}

/// The default sweep grid: 1, 1 + step, ..., up to N - 3.
pub fn default_k_grid(n_obs: usize, step: usize) -> Vec<usize> {
    let top = n_obs.saturating_sub(3);
    (1..=top).step_by(step.max(1)).collect()
}

/// Builds the graph for every k in `grid`, clusters at each, and returns the
/// record with the largest combined criterion (ties to the smallest k).
pub fn select_k_grid(
    data: &DataMatrix,
    kappa: f64,
    config: &OptimizerConfig,
    grid: &[usize],
) -> Result<KSelection> {
    let n = data.n_obs();
    if n < 6 {
        return Err(Error::TooFewObservations { min: 6, got: n });
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let top = n - 3;
    if let Some(&bad) = grid.iter().find(|&&k| k < 1 || k > top) {
        return Err(Error::InvalidK { k: bad, max: top });
    }
    let dists = pairwise_distances(data);
    let sweep: Vec<KSweepRecord> = grid
        .par_iter()
        .map(|&k| {
            let graph = build_knn_graph(&dists, k)?;
            cluster_fixed_k(&graph, Some(&dists), kappa, config).map(KSweepRecord::from_result)
        })
        .collect::<Result<_>>()?;
    let best = sweep
        .iter()
        .min_by(|a, b| b.m_kappa.total_cmp(&a.m_kappa).then(a.k.cmp(&b.k)))
        .expect("grid is nonempty")
        .clone();
    Ok(KSelection { best, sweep })
}

/// Result of one integer ternary search.
#[derive(Clone, Debug)]
pub struct TernarySearchResult {
    /// Midpoint of the final bracket.
    pub k: usize,
    /// f at that midpoint.
    pub value: f64,
    /// Distinct arguments evaluated, in first-use order.
    pub evaluated: Vec<usize>,
    /// True when the width-2 bracket could not shrink further and the loop
    /// was cut short; the returned midpoint is the bracket's interior point.
    pub stalled: bool,
}

/// Ternary search for the maximum of a unimodal `f` over integers
/// `[left, right]`.
///
/// Probes sit at `floor(left + (right - left)/3)` and
/// `floor(right - (right - left)/3)`; the bracket keeps the side of the
/// larger probe until its width is at most 1, and the value at
/// `floor((left + right)/2)` is returned. Evaluations are memoized.
pub fn ternary_search_max(
    mut left: usize,
    mut right: usize,
    mut f: impl FnMut(usize) -> f64,
) -> TernarySearchResult {
    assert!(left <= right, "empty search interval");
    let mut memo: HashMap<usize, f64> = HashMap::new();
    let mut evaluated = Vec::new();
    let mut eval = |k: usize, memo: &mut HashMap<usize, f64>, evaluated: &mut Vec<usize>| {
        *memo.entry(k).or_insert_with(|| {
            evaluated.push(k);
            f(k)
        })
    };
    let mut stalled = false;
    while right - left > 1 {
        let gap = right - left;
        let left_third = left + gap / 3;
        let right_third = right - (gap + 2) / 3;
        let fl = eval(left_third, &mut memo, &mut evaluated);
        let fr = eval(right_third, &mut memo, &mut evaluated);
        if fl < fr {
            if left_third == left {
                // width-2 bracket whose left probe is the endpoint itself;
                // the update cannot make progress, and the midpoint below is
                // exactly the better probe
                stalled = true;
                break;
            }
            left = left_third;
        } else {
            right = right_third;
        }
    }
    let mid = (left + right) / 2;
    let value = eval(mid, &mut memo, &mut evaluated);
    TernarySearchResult { k: mid, value, evaluated, stalled }
}

/// Ternary-search outcome with its probe diagnostics.
#[derive(Clone, Debug)]
pub struct TernaryOutcome {
    pub best: KSweepRecord,
    /// Every k clustered across both searches, ascending.
    pub evaluated_ks: Vec<usize>,
    /// Distinct k values probed by the weighted-score search.
    pub w_evaluations: usize,
    /// Distinct k values probed by the difference-score search.
    pub d_evaluations: usize,
}

/// Runs the ternary search twice over k in `[1, N-1]` (once per objective,
/// with the best-of-restarts score as the deterministic `f(k)`) and returns
/// the landing record with the larger combined criterion.
///
/// A k whose null variance degenerates scores `-inf`. Per-k clusterings are
/// cached and shared between the two searches.
pub fn select_k_ternary(
    data: &DataMatrix,
    kappa: f64,
    config: &OptimizerConfig,
) -> Result<TernaryOutcome> {
    let n = data.n_obs();
    if n < 8 {
        return Err(Error::TooFewObservations { min: 8, got: n });
    }
    let dists = pairwise_distances(data);
    let mut cache: HashMap<usize, Option<KSweepRecord>> = HashMap::new();
    let mut failure: Option<Error> = None;

    let record_at = |k: usize,
                     cache: &mut HashMap<usize, Option<KSweepRecord>>,
                     failure: &mut Option<Error>|
     -> Option<KSweepRecord> {
        cache
            .entry(k)
            .or_insert_with(|| {
                let built = build_knn_graph(&dists, k)
                    .and_then(|g| cluster_fixed_k(&g, Some(&dists), kappa, config));
                match built {
                    Ok(r) => Some(KSweepRecord::from_result(r)),
                    Err(Error::DegenerateVariance { .. }) => None,
                    Err(e) => {
                        if failure.is_none() {
                            *failure = Some(e);
                        }
                        None
                    }
                }
            })
            .clone()
    };

    let searches: Vec<TernarySearchResult> = [Objective::Weighted, Objective::Difference]
        .into_iter()
        .map(|objective| {
            ternary_search_max(1, n - 1, |k| {
                record_at(k, &mut cache, &mut failure)
                    .map_or(f64::NEG_INFINITY, |r| match objective {
                        Objective::Weighted => r.best_z_w,
                        Objective::Difference => r.best_z_d,
                    })
            })
        })
        .collect();
    if let Some(e) = failure {
        return Err(e);
    }

    let candidates: Vec<KSweepRecord> = {
        let mut ks: Vec<usize> = searches.iter().map(|s| s.k).collect();
        ks.dedup();
        ks.into_iter().filter_map(|k| cache.get(&k).cloned().flatten()).collect()
    };
    let best = candidates
        .iter()
        .min_by(|a, b| b.m_kappa.total_cmp(&a.m_kappa).then(a.k.cmp(&b.k)))
        .cloned()
        .ok_or(Error::DegenerateVariance { statistic: "z_w and z_d", k: searches[0].k })?;

    let mut evaluated_ks: Vec<usize> = cache.keys().copied().collect();
    evaluated_ks.sort_unstable();
    Ok(TernaryOutcome {
        best,
        evaluated_ks,
        w_evaluations: searches[0].evaluated.len(),
        d_evaluations: searches[1].evaluated.len(),
    })
}
