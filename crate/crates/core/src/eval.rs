//! Scoring clusterings against ground truth and running repeated seeded
//! experiments.

use crate::data::LabelVector;
use crate::error::{Error, Result};
use crate::knn::{build_knn_graph, pairwise_distances};
use crate::kselect::{default_k_grid, select_k_grid, select_k_ternary};
use crate::optimizer::{cluster_fixed_k, maximize_both, OptimizerConfig};
use crate::rng::derive_seed;
use crate::sim::{generate, MixtureSpec};
use crate::stats::combined_criterion;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Fraction of observations misassigned under the better of the two cluster
/// identifications, so a plain swap of the names scores 0.
pub fn misclustering_rate(est: &LabelVector, truth: &LabelVector) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(Error::LengthMismatch { expected: truth.len(), got: est.len() });
    }
    let n = est.len();
    if n == 0 {
        return Err(Error::TooFewObservations { min: 1, got: 0 });
    }
    let disagree =
        est.labels().iter().zip(truth.labels()).filter(|(a, b)| a != b).count() as f64 / n as f64;
    Ok(disagree.min(1.0 - disagree))
}

/// Fraction of the C(N, 2) observation pairs on which the two partitions
/// agree (both together or both apart).
pub fn rand_index(est: &LabelVector, truth: &LabelVector) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(Error::LengthMismatch { expected: truth.len(), got: est.len() });
    }
    let n = est.len();
    if n < 2 {
        return Err(Error::TooFewObservations { min: 2, got: n });
    }
    let mut agree = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            let together_est = est.get(i) == est.get(j);
            let together_truth = truth.get(i) == truth.get(j);
            if together_est == together_truth {
                agree += 1;
            }
        }
    }
    Ok(agree as f64 / (n * (n - 1) / 2) as f64)
}

/// How k is chosen on each run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KMode {
    /// Full sweep over 1, 1 + step, ..., N - 3.
    Grid { step: usize },
    Ternary,
    Fixed { k: usize },
}

/// One simulation run's scores.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub k_chosen: usize,
    pub mis_rate: f64,
    pub rand_index: f64,
    pub m_kappa: f64,
}

/// Aggregate over repeated seeded runs; means are exactly the means of the
/// per-run entries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub mis_rate: f64,
    pub mis_rate_se: f64,
    pub rand_index: f64,
    pub rand_index_se: f64,
    pub n_runs: usize,
    pub per_run: Vec<RunRecord>,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Generates, clusters, and scores `n_runs` independent datasets; run `r`
/// draws its data from `derive_seed(spec.seed, r)` and its restarts from
/// `derive_seed(config.seed, r)`.
pub fn run_experiment(
    spec: &MixtureSpec,
    kappa: f64,
    config: &OptimizerConfig,
    n_runs: usize,
    k_mode: KMode,
) -> Result<EvaluationReport> {
    if n_runs < 1 {
        return Err(Error::InvalidParameter("n_runs must be at least 1".into()));
    }
    spec.validate()?;
    let per_run: Vec<RunRecord> = (0..n_runs)
        .into_par_iter()
        .map(|run| {
            let seed = derive_seed(spec.seed, run as u64);
            let run_spec = MixtureSpec { seed, ..spec.clone() };
            let (data, truth) = generate(&run_spec)?;
            let run_config =
                OptimizerConfig { seed: derive_seed(config.seed, run as u64), ..config.clone() };
            let (k_chosen, m_kappa, labels) = match k_mode {
                KMode::Grid { step } => {
                    let grid = default_k_grid(data.n_obs(), step);
                    let sel = select_k_grid(&data, kappa, &run_config, &grid)?;
                    (sel.best.k, sel.best.m_kappa, sel.best.labels)
                }
                KMode::Ternary => {
                    let sel = select_k_ternary(&data, kappa, &run_config)?;
                    (sel.best.k, sel.best.m_kappa, sel.best.labels)
                }
                KMode::Fixed { k } => {
                    let dists = pairwise_distances(&data);
                    let graph = build_knn_graph(&dists, k)?;
                    let res = cluster_fixed_k(&graph, Some(&dists), kappa, &run_config)?;
                    (k, res.m_kappa, res.labels)
                }
            };
            Ok(RunRecord {
                run,
                seed,
                k_chosen,
                mis_rate: misclustering_rate(&labels, &truth)?,
                rand_index: rand_index(&labels, &truth)?,
                m_kappa,
            })
        })
        .collect::<Result<_>>()?;
    let (mis_rate, mis_rate_se) =
        mean_se(&per_run.iter().map(|r| r.mis_rate).collect::<Vec<_>>());
    let (ri, ri_se) = mean_se(&per_run.iter().map(|r| r.rand_index).collect::<Vec<_>>());
    Ok(EvaluationReport {
        mis_rate,
        mis_rate_se,
        rand_index: ri,
        rand_index_se: ri_se,
        n_runs,
        per_run,
    })
}

/// Which mixture parameter a ratio sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VaryParam {
    /// Vary the location shift `a`.
    Location,
    /// Vary the scale multiplier `b`.
    Scale,
}

/// One run of a ratio sweep: the score ratio at the selected k, plus the
/// error each criterion commits when used alone.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioRun {
    /// The varied parameter's value.
    pub value: f64,
    pub run: usize,
    pub seed: u64,
    /// k maximizing the combined criterion.
    pub k_selected: usize,
    /// `best_z_w / best_z_d` at that k.
    pub ratio: f64,
    /// Mis-clustering of the weighted-score labeling at its own best k.
    pub mis_w: f64,
    /// Mis-clustering of the difference-score labeling at its own best k.
    pub mis_d: f64,
}

/// Five-number summary of the ratios at one parameter value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioSummary {
    pub value: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean_mis_w: f64,
    pub mean_mis_d: f64,
}

/// Raw per-run rows plus per-value summaries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioSweep {
    pub vary: VaryParam,
    pub runs: Vec<RatioRun>,
    pub summary: Vec<RatioSummary>,
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// For each value of the varied parameter, runs `n_runs` seeded datasets,
/// sweeps k over the default grid, and reports the distribution of
/// `best_z_w / best_z_d` at the combined-criterion-selected k together with
/// the mean mis-clustering of each criterion used alone.
pub fn kappa_ratio_sweep(
    base: &MixtureSpec,
    vary: VaryParam,
    values: &[f64],
    kappa: f64,
    config: &OptimizerConfig,
    n_runs: usize,
) -> Result<RatioSweep> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("the varied parameter needs at least one value".into()));
    }
    if n_runs < 1 {
        return Err(Error::InvalidParameter("n_runs must be at least 1".into()));
    }
    let mut runs: Vec<RatioRun> = Vec::new();
    for (vi, &value) in values.iter().enumerate() {
        let mut spec = base.clone();
        match vary {
            VaryParam::Location => spec.a = value,
            VaryParam::Scale => spec.b = value,
        }
        spec.validate()?;
        let value_seed = derive_seed(base.seed, vi as u64);
        let cfg_seed = derive_seed(config.seed, vi as u64);
        let batch: Vec<RatioRun> = (0..n_runs)
            .into_par_iter()
            .map(|run| {
                let seed = derive_seed(value_seed, run as u64);
                let run_spec = MixtureSpec { seed, ..spec.clone() };
                let (data, truth) = generate(&run_spec)?;
                let run_config =
                    OptimizerConfig { seed: derive_seed(cfg_seed, run as u64), ..config.clone() };
                let dists = pairwise_distances(&data);
                let grid = default_k_grid(data.n_obs(), 2);

                let mut best_sel: Option<(f64, usize, f64)> = None; // (m_kappa, k, ratio)
                let mut best_w: Option<(f64, LabelVector)> = None;
                let mut best_d: Option<(f64, LabelVector)> = None;
                for &k in &grid {
                    let graph = build_knn_graph(&dists, k)?;
                    let dual = maximize_both(&graph, Some(&dists), &run_config)?;
                    let zw = dual.best_value(crate::stats::Objective::Weighted);
                    let zd = dual.best_value(crate::stats::Objective::Difference);
                    let mk = combined_criterion(zw, zd, kappa);
                    if best_sel.as_ref().map_or(true, |&(bm, _, _)| mk > bm) {
                        best_sel = Some((mk, k, zw / zd));
                    }
                    if let Some(w) = dual.weighted {
                        if best_w.as_ref().map_or(true, |(bv, _)| w.value > *bv) {
                            best_w = Some((w.value, w.labels));
                        }
                    }
                    if let Some(d) = dual.difference {
                        if best_d.as_ref().map_or(true, |(bv, _)| d.value > *bv) {
                            best_d = Some((d.value, d.labels));
                        }
                    }
                }
                let (_, k_selected, ratio) = best_sel.expect("grid is nonempty");
                let (_, labels_w) = best_w.ok_or(Error::DegenerateVariance {
                    statistic: "z_w",
                    k: k_selected,
                })?;
                let (_, labels_d) = best_d.ok_or(Error::DegenerateVariance {
                    statistic: "z_d",
                    k: k_selected,
                })?;
                Ok(RatioRun {
                    value,
                    run,
                    seed,
                    k_selected,
                    ratio,
                    mis_w: misclustering_rate(&labels_w, &truth)?,
                    mis_d: misclustering_rate(&labels_d, &truth)?,
                })
            })
            .collect::<Result<_>>()?;
        runs.extend(batch);
    }
    let summary = values
        .iter()
        .map(|&value| {
            let batch: Vec<&RatioRun> =
                runs.iter().filter(|r| r.value == value).collect();
            let mut ratios: Vec<f64> = batch.iter().map(|r| r.ratio).collect();
            ratios.sort_by(f64::total_cmp);
            let mean = |f: fn(&RatioRun) -> f64| {
                batch.iter().map(|r| f(r)).sum::<f64>() / batch.len() as f64
            };
            RatioSummary {
                value,
                min: ratios[0],
                q1: quantile(&ratios, 0.25),
                median: quantile(&ratios, 0.5),
                q3: quantile(&ratios, 0.75),
                max: ratios[ratios.len() - 1],
                mean_mis_w: mean(|r| r.mis_w),
                mean_mis_d: mean(|r| r.mis_d),
            }
        })
        .collect();
    Ok(RatioSweep { vary, runs, summary })
}
