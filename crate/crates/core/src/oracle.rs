//! Closed-form expectations of the edge counts and scores under a two-cluster
//! model, used to cross-validate the statistics and the optimizer.
//!
//! A model fixes the true cluster sizes `(m*, n*)`, the neighbor count `k`,
//! and the true neighbor proportions `p11*, p12*, p21*, p22*`. A perturbation
//! mislabels `delta1` members of cluster 1 and `delta2` members of cluster 2,
//! chosen uniformly at random; the expectations below are exact over that
//! choice, which is what `verify::check_expected_edge_counts` exercises by
//! exhaustive enumeration.
//!
//! The score expectations factor into a signal coefficient times a shape
//! function of `(delta1, delta2)`:
//!
//! ```text
//! E2(Z_d) ∝ (p11* m* - p22* n* - (m* - n*)) * k * f_d(delta1, delta2)
//! E2(Z_w) ∝ k [m*(n*-1) p11* + n*(m*-1) p22* - (m*-1)(n*-1) N/(N-1)]/(N-2)
//!           * f_w(delta1, delta2)
//! ```
//!
//! with `f_w = f_d * f_d_tilde - h`. Constant positive factors that do not
//! depend on the perturbation are dropped, so values are comparable across
//! the perturbation grid but not across models.

use crate::data::LabelVector;
use crate::error::{Error, Result};
use crate::knn::KnnGraph;
use crate::stats::{edge_counts, Objective, Scenario};

/// True two-cluster configuration at a fixed `k`.
#[derive(Clone, Copy, Debug)]
pub struct TwoClusterModel {
    pub m_star: usize,
    pub n_star: usize,
    pub k: usize,
    pub p11_star: f64,
    pub p12_star: f64,
    pub p21_star: f64,
    pub p22_star: f64,
}

impl TwoClusterModel {
    /// `p12*` and `p21*` are filled in as the complements.
    pub fn new(m_star: usize, n_star: usize, k: usize, p11_star: f64, p22_star: f64) -> Result<Self> {
        if m_star < 2 || n_star < 2 {
            return Err(Error::DegenerateLabeling { m: m_star, n: n_star });
        }
        let n_total = m_star + n_star;
        if k < 1 || k > n_total - 1 {
            return Err(Error::InvalidK { k, max: n_total - 1 });
        }
        for p in [p11_star, p22_star] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "neighbor proportion {p} outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            m_star,
            n_star,
            k,
            p11_star,
            p12_star: 1.0 - p11_star,
            p21_star: 1.0 - p22_star,
            p22_star,
        })
    }

    /// Reads the true proportions off a labeled graph.
    pub fn from_labeled_graph(graph: &KnnGraph, truth: &LabelVector) -> Result<Self> {
        let (r1, r2) = edge_counts(graph, truth)?;
        let (m, n) = (truth.m(), truth.n());
        if m < 2 || n < 2 {
            return Err(Error::DegenerateLabeling { m, n });
        }
        let k = graph.k();
        Self::new(m, n, k, r1 as f64 / (k * m) as f64, r2 as f64 / (k * n) as f64)
    }

    pub fn n_total(&self) -> usize {
        self.m_star + self.n_star
    }

    /// Baselines `(m*-1)/(N-1)` and `(n*-1)/(N-1)`.
    pub fn baselines(&self) -> (f64, f64) {
        let nf = self.n_total() as f64 - 1.0;
        ((self.m_star as f64 - 1.0) / nf, (self.n_star as f64 - 1.0) / nf)
    }

    /// Which scenario the model's proportions fall in, if any.
    pub fn scenario(&self) -> Option<Scenario> {
        let (b1, b2) = self.baselines();
        match (self.p11_star > b1, self.p11_star < b1, self.p22_star > b2, self.p22_star < b2) {
            (true, _, true, _) => Some(Scenario::One),
            (true, _, _, true) => Some(Scenario::Two),
            (_, true, true, _) => Some(Scenario::Three),
            _ => None,
        }
    }
}

/// How many members of each true cluster are mislabeled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Perturbation {
    pub delta1: usize,
    pub delta2: usize,
}

impl Perturbation {
    pub fn new(delta1: usize, delta2: usize) -> Self {
        Self { delta1, delta2 }
    }

    /// Size of labeled cluster 1 after the perturbation.
    pub fn resulting_m(&self, model: &TwoClusterModel) -> usize {
        model.m_star + self.delta2 - self.delta1
    }
}

fn check_ranges(model: &TwoClusterModel, pert: &Perturbation) -> Result<()> {
    if pert.delta1 > model.m_star || pert.delta2 > model.n_star {
        return Err(Error::InvalidParameter(format!(
            "perturbation ({}, {}) exceeds cluster sizes ({}, {})",
            pert.delta1, pert.delta2, model.m_star, model.n_star
        )));
    }
    Ok(())
}

/// Expected `(R1, R2)` after the perturbation, exact over the uniformly
/// random choice of which members are mislabeled.
pub fn expected_edge_counts(model: &TwoClusterModel, pert: &Perturbation) -> Result<(f64, f64)> {
    check_ranges(model, pert)?;
    let ms = model.m_star as f64;
    let ns = model.n_star as f64;
    let k = model.k as f64;
    let d1 = pert.delta1 as f64;
    let d2 = pert.delta2 as f64;
    let (p11, p12, p21, p22) =
        (model.p11_star, model.p12_star, model.p21_star, model.p22_star);

    let e_r1 = p11 * k * ms * ((ms - d1) * (ms - d1 - 1.0)) / (ms * (ms - 1.0))
        + p12 * k * ms * ((ms - d1) * d2) / (ms * ns)
        + p21 * k * ns * ((ms - d1) * d2) / (ms * ns)
        + p22 * k * ns * (d2 * (d2 - 1.0)) / (ns * (ns - 1.0));
    let e_r2 = p22 * k * ns * ((ns - d2) * (ns - d2 - 1.0)) / (ns * (ns - 1.0))
        + p21 * k * ns * ((ns - d2) * d1) / (ns * ms)
        + p12 * k * ms * ((ns - d2) * d1) / (ns * ms)
        + p11 * k * ms * (d1 * (d1 - 1.0)) / (ms * (ms - 1.0));
    Ok((e_r1, e_r2))
}

/// Shape of the difference-score expectation over the perturbation grid.
///
/// Defined where the perturbed sizes are both positive.
pub fn shape_fd(model: &TwoClusterModel, pert: &Perturbation) -> f64 {
    let ms = model.m_star as f64;
    let ns = model.n_star as f64;
    let d1 = pert.delta1 as f64;
    let d2 = pert.delta2 as f64;
    let m = ms - d1 + d2;
    let n = ns + d1 - d2;
    (1.0 - d1 / ms - d2 / ns) / (m * n).sqrt()
}

/// Companion shape with the sizes shifted by one; defined where the perturbed
/// sizes both exceed one.
pub fn shape_fd_tilde(model: &TwoClusterModel, pert: &Perturbation) -> f64 {
    let ms = model.m_star as f64;
    let ns = model.n_star as f64;
    let d1 = pert.delta1 as f64;
    let d2 = pert.delta2 as f64;
    let m = ms - d1 + d2;
    let n = ns + d1 - d2;
    (1.0 - d1 / (ms - 1.0) - d2 / (ns - 1.0)) / ((m - 1.0) * (n - 1.0)).sqrt()
}

/// Cross-mislabeling penalty; positive whenever `delta1 * delta2 > 0`.
pub fn shape_h(model: &TwoClusterModel, pert: &Perturbation) -> f64 {
    let ms = model.m_star as f64;
    let ns = model.n_star as f64;
    let nf = model.n_total() as f64;
    let d1 = pert.delta1 as f64;
    let d2 = pert.delta2 as f64;
    let m = ms - d1 + d2;
    let n = ns + d1 - d2;
    ((nf - 2.0) / (ms * ns * (ms - 1.0) * (ns - 1.0)) * d1 * d2)
        / (m * n * (m - 1.0) * (n - 1.0)).sqrt()
}

/// Shape of the weighted-score expectation, `f_d * f_d_tilde - h` expanded.
pub fn shape_fw(model: &TwoClusterModel, pert: &Perturbation) -> f64 {
    let ms = model.m_star as f64;
    let ns = model.n_star as f64;
    let d1 = pert.delta1 as f64;
    let d2 = pert.delta2 as f64;
    let m = ms - d1 + d2;
    let n = ns + d1 - d2;
    let num = 1.0 + d1 * d1 / (ms * (ms - 1.0)) + d2 * d2 / (ns * (ns - 1.0))
        + 2.0 * d1 * d2 / (ms * ns)
        - (2.0 * ms - 1.0) * d1 / (ms * (ms - 1.0))
        - (2.0 * ns - 1.0) * d2 / (ns * (ns - 1.0));
    num / (m * n * (m - 1.0) * (n - 1.0)).sqrt()
}

/// Expected difference score: signal coefficient times `k * f_d`, up to a
/// positive graph constant. Errors if the perturbed labeling has an empty
/// cluster, where the standardization is undefined.
pub fn expected_z_d(model: &TwoClusterModel, pert: &Perturbation) -> Result<f64> {
    check_ranges(model, pert)?;
    let m = model.m_star + pert.delta2 - pert.delta1;
    if m == 0 || m == model.n_total() {
        return Err(Error::DegenerateLabeling { m, n: model.n_total() - m });
    }
    let ms = model.m_star as f64;
    let ns = model.n_star as f64;
    let coeff = model.p11_star * ms - model.p22_star * ns - (ms - ns);
    Ok(coeff * model.k as f64 * shape_fd(model, pert))
}

/// Expected weighted score: signal coefficient times `f_w`, up to a positive
/// graph constant. Errors if either perturbed cluster has fewer than 2
/// members.
pub fn expected_z_w(model: &TwoClusterModel, pert: &Perturbation) -> Result<f64> {
    check_ranges(model, pert)?;
    let m = model.m_star + pert.delta2 - pert.delta1;
    let n_total = model.n_total();
    if m < 2 || m > n_total - 2 {
        return Err(Error::DegenerateLabeling { m, n: n_total - m });
    }
    let ms = model.m_star as f64;
    let ns = model.n_star as f64;
    let nf = n_total as f64;
    let coeff = model.k as f64
        * (ms * (ns - 1.0) * model.p11_star + ns * (ms - 1.0) * model.p22_star
            - (ms - 1.0) * (ns - 1.0) * nf / (nf - 1.0))
        / (nf - 2.0);
    Ok(coeff * shape_fw(model, pert))
}

/// Grid argmax of the scenario's expectation versus the location the theory
/// predicts.
#[derive(Clone, Debug)]
pub struct Theorem1Report {
    pub scenario: Scenario,
    /// Which expectation was maximized over the grid.
    pub statistic: Objective,
    /// Perturbations attaining the maximum, within relative tolerance 1e-12.
    pub argmax: Vec<(usize, usize)>,
    /// Where the maximum should sit for this scenario.
    pub expected_argmax: Vec<(usize, usize)>,
    pub max_value: f64,
    pub consistent: bool,
}

/// Enumerates the relevant expectation over the full perturbation grid and
/// reports whether its argmax lands where the scenario predicts: at the truth
/// for scenario 2, at the swapped truth for scenario 3, and at either for
/// scenario 1.
///
/// Returns an error for models whose proportions fall in no scenario.
pub fn theorem1_argmax_check(model: &TwoClusterModel) -> Result<Theorem1Report> {
    let scenario = model.scenario().ok_or_else(|| {
        Error::InvalidParameter(
            "model proportions fall in no scenario; the argmax claim does not apply".into(),
        )
    })?;
    let statistic = match scenario {
        Scenario::One => Objective::Weighted,
        Scenario::Two | Scenario::Three => Objective::Difference,
    };
    let mut cells = Vec::new();
    for delta1 in 0..=model.m_star {
        for delta2 in 0..=model.n_star {
            let pert = Perturbation::new(delta1, delta2);
            let value = match statistic {
                Objective::Weighted => expected_z_w(model, &pert),
                Objective::Difference => expected_z_d(model, &pert),
            };
            if let Ok(v) = value {
                cells.push(((delta1, delta2), v));
            }
        }
    }
    let max_value = cells.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * max_value.abs().max(1.0);
    let argmax: Vec<(usize, usize)> =
        cells.iter().filter(|&&(_, v)| v >= max_value - tol).map(|&(c, _)| c).collect();
    let expected_argmax = match scenario {
        Scenario::One => vec![(0, 0), (model.m_star, model.n_star)],
        Scenario::Two => vec![(0, 0)],
        Scenario::Three => vec![(model.m_star, model.n_star)],
    };
    let consistent = argmax == expected_argmax;
    Ok(Theorem1Report { scenario, statistic, argmax, expected_argmax, max_value, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(m: usize, n: usize, k: usize, p11: f64, p22: f64) -> TwoClusterModel {
        TwoClusterModel::new(m, n, k, p11, p22).unwrap()
    }

    #[test]
    fn unperturbed_expectations_are_the_true_counts() {
        let m = model(5, 7, 3, 0.8, 0.6);
        let (e1, e2) = expected_edge_counts(&m, &Perturbation::new(0, 0)).unwrap();
        assert!((e1 - 0.8 * 3.0 * 5.0).abs() < 1e-12);
        assert!((e2 - 0.6 * 3.0 * 7.0).abs() < 1e-12);
    }

    #[test]
    fn full_swap_exchanges_the_roles() {
        let m = model(5, 7, 3, 0.8, 0.6);
        let (e1, e2) = expected_edge_counts(&m, &Perturbation::new(5, 7)).unwrap();
        assert!((e1 - 0.6 * 3.0 * 7.0).abs() < 1e-12);
        assert!((e2 - 0.8 * 3.0 * 5.0).abs() < 1e-12);
    }

    #[test]
    fn fd_extremes_are_reciprocal_roots() {
        let m = model(4, 6, 2, 0.9, 0.2);
        let top = 1.0 / ((4.0f64 * 6.0).sqrt());
        assert!((shape_fd(&m, &Perturbation::new(0, 0)) - top).abs() < 1e-15);
        assert!((shape_fd(&m, &Perturbation::new(4, 6)) + top).abs() < 1e-15);
    }

    #[test]
    fn fd_strictly_decreases_along_both_axes() {
        let m = model(5, 5, 2, 0.9, 0.2);
        let valid = |d1: usize, d2: usize| {
            let mm = 5 + d2 - d1;
            mm >= 1 && mm <= 9
        };
        for d1 in 0..=5usize {
            for d2 in 0..=5usize {
                if d1 < 5 && valid(d1, d2) && valid(d1 + 1, d2) {
                    assert!(
                        shape_fd(&m, &Perturbation::new(d1 + 1, d2))
                            < shape_fd(&m, &Perturbation::new(d1, d2))
                    );
                }
                if d2 < 5 && valid(d1, d2) && valid(d1, d2 + 1) {
                    assert!(
                        shape_fd(&m, &Perturbation::new(d1, d2 + 1))
                            < shape_fd(&m, &Perturbation::new(d1, d2))
                    );
                }
            }
        }
    }

    #[test]
    fn fw_corner_values() {
        let m = model(5, 5, 2, 0.9, 0.8);
        let top = 1.0 / (5.0f64 * 5.0 * 4.0 * 4.0).sqrt();
        let at = |d1, d2| shape_fw(&m, &Perturbation::new(d1, d2));
        assert!((at(0, 0) - top).abs() < 1e-15);
        assert!((at(5, 5) - top).abs() < 1e-12);
        assert!(at(5, 4) < at(0, 0));
        assert!(at(4, 5) < at(0, 0));
        assert!(at(4, 4) < at(0, 0));
    }

    #[test]
    fn fw_decomposes_into_fd_fdtilde_minus_h() {
        let m = model(6, 4, 2, 0.7, 0.3);
        for d1 in 0..=6usize {
            for d2 in 0..=4usize {
                let mm = 6 + d2 - d1;
                if mm < 2 || mm > 8 {
                    continue;
                }
                let p = Perturbation::new(d1, d2);
                let direct = shape_fw(&m, &p);
                let composed = shape_fd(&m, &p) * shape_fd_tilde(&m, &p) - shape_h(&m, &p);
                assert!((direct - composed).abs() < 1e-13);
                if d1 > 0 && d2 > 0 {
                    assert!(shape_h(&m, &p) > 0.0);
                }
            }
        }
    }

    #[test]
    fn scenario_two_peaks_at_the_truth() {
        // p11 above baseline 4/9, p22 below baseline 4/9
        let m = model(5, 5, 2, 0.8, 0.2);
        let report = theorem1_argmax_check(&m).unwrap();
        assert_eq!(report.scenario, Scenario::Two);
        assert!(report.consistent, "argmax {:?}", report.argmax);
        assert_eq!(report.argmax, vec![(0, 0)]);
    }

    #[test]
    fn scenario_three_peaks_at_the_swap() {
        let m = model(5, 5, 2, 0.2, 0.8);
        let report = theorem1_argmax_check(&m).unwrap();
        assert_eq!(report.scenario, Scenario::Three);
        assert!(report.consistent, "argmax {:?}", report.argmax);
        assert_eq!(report.argmax, vec![(5, 5)]);
    }

    #[test]
    fn scenario_one_peaks_at_truth_and_swap() {
        let m = model(6, 6, 3, 0.8, 0.8);
        let report = theorem1_argmax_check(&m).unwrap();
        assert_eq!(report.scenario, Scenario::One);
        assert!(report.consistent, "argmax {:?}", report.argmax);
        assert_eq!(report.argmax, vec![(0, 0), (6, 6)]);
    }

    #[test]
    fn no_scenario_is_not_applicable() {
        // both proportions exactly at baseline
        let m = model(5, 5, 2, 4.0 / 9.0, 4.0 / 9.0);
        assert!(theorem1_argmax_check(&m).is_err());
    }
}
