//! Output schemas and rendering.
//!
//! The structured format is JSON with stable field names (`k`, `z_w`, `z_d`,
//! `m_kappa`, `winner`, `labels`, `seed`, `runtime_ms`, ...); parsing an
//! emitted file and re-emitting it reproduces the bytes. The table format is
//! plain text for reading, with sweeps as plottable CSV.

use knnclust::{RatioRun, RatioSummary, RunRecord, VaryParam};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Scores can be `-inf` when a side's null variance degenerates (too-regular
/// graphs); JSON has no infinities, so those serialize as `null` and parse
/// back as `-inf`.
pub mod score_json {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

/// One per-k row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    #[serde(with = "score_json")]
    pub z_w: f64,
    #[serde(with = "score_json")]
    pub z_d: f64,
    pub m_kappa: f64,
    pub winner: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mis_rate: Option<f64>,
}

/// Result of `cluster` (and the body of `sweep-k`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub command: String,
    pub seed: u64,
    pub kappa: f64,
    pub k_mode: String,
    pub k: usize,
    #[serde(with = "score_json")]
    pub z_w: f64,
    #[serde(with = "score_json")]
    pub z_d: f64,
    pub m_kappa: f64,
    pub winner: String,
    pub labels: Vec<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mis_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rand_index: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

/// Result of `experiment`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub command: String,
    pub seed: u64,
    pub kappa: f64,
    pub k_mode: String,
    pub n_runs: usize,
    pub mis_rate: f64,
    pub mis_rate_se: f64,
    pub rand_index: f64,
    pub rand_index_se: f64,
    pub per_run: Vec<RunRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

/// Result of `sweep-kappa`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KappaSweepReport {
    pub command: String,
    pub seed: u64,
    pub kappa: f64,
    pub vary: VaryParam,
    pub n_runs: usize,
    pub summary: Vec<RatioSummary>,
    pub runs: Vec<RatioRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

/// Canonical structured emission: pretty JSON plus a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let with_mis = rows.iter().any(|r| r.mis_rate.is_some());
    let mut out = String::from(if with_mis {
        "k,z_w,z_d,m_kappa,winner,mis_rate\n"
    } else {
        "k,z_w,z_d,m_kappa,winner\n"
    });
    for r in rows {
        write!(out, "{},{},{},{},{}", r.k, r.z_w, r.z_d, r.m_kappa, r.winner).unwrap();
        if with_mis {
            match r.mis_rate {
                Some(m) => write!(out, ",{m}").unwrap(),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

pub fn cluster_table(r: &ClusterReport) -> String {
    let mut out = String::new();
    writeln!(out, "command: cluster").unwrap();
    writeln!(out, "seed: {}", r.seed).unwrap();
    writeln!(out, "kappa: {}", r.kappa).unwrap();
    writeln!(out, "k: {} ({})", r.k, r.k_mode).unwrap();
    writeln!(out, "z_w: {:.6}", r.z_w).unwrap();
    writeln!(out, "z_d: {:.6}", r.z_d).unwrap();
    writeln!(out, "m_kappa: {:.6}", r.m_kappa).unwrap();
    writeln!(out, "winner: {}", r.winner).unwrap();
    if let Some(m) = r.mis_rate {
        writeln!(out, "mis_rate: {m:.6}").unwrap();
    }
    if let Some(ri) = r.rand_index {
        writeln!(out, "rand_index: {ri:.6}").unwrap();
    }
    if let Some(ms) = r.runtime_ms {
        writeln!(out, "runtime_ms: {ms}").unwrap();
    }
    if let Some(sweep) = &r.sweep {
        writeln!(out, "sweep:").unwrap();
        out.push_str(&sweep_csv(sweep));
    }
    writeln!(out, "labels:").unwrap();
    for l in &r.labels {
        writeln!(out, "{l}").unwrap();
    }
    out
}

pub fn experiment_table(r: &ExperimentReport) -> String {
    let mut out = String::new();
    writeln!(out, "command: experiment").unwrap();
    writeln!(out, "seed: {}", r.seed).unwrap();
    writeln!(out, "kappa: {}", r.kappa).unwrap();
    writeln!(out, "k_mode: {}", r.k_mode).unwrap();
    writeln!(out, "runs: {}", r.n_runs).unwrap();
    writeln!(out, "mis_rate: {:.6} (se {:.6})", r.mis_rate, r.mis_rate_se).unwrap();
    writeln!(out, "rand_index: {:.6} (se {:.6})", r.rand_index, r.rand_index_se).unwrap();
    if let Some(ms) = r.runtime_ms {
        writeln!(out, "runtime_ms: {ms}").unwrap();
    }
    writeln!(out, "per_run:").unwrap();
    writeln!(out, "run,seed,k_chosen,mis_rate,rand_index,m_kappa").unwrap();
    for p in &r.per_run {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.run, p.seed, p.k_chosen, p.mis_rate, p.rand_index, p.m_kappa
        )
        .unwrap();
    }
    out
}

pub fn kappa_sweep_table(r: &KappaSweepReport) -> String {
    let mut out = String::new();
    let vary = match r.vary {
        VaryParam::Location => "a",
        VaryParam::Scale => "b",
    };
    writeln!(out, "command: sweep-kappa").unwrap();
    writeln!(out, "seed: {}", r.seed).unwrap();
    writeln!(out, "vary: {vary}").unwrap();
    writeln!(out, "runs_per_value: {}", r.n_runs).unwrap();
    if let Some(ms) = r.runtime_ms {
        writeln!(out, "runtime_ms: {ms}").unwrap();
    }
    writeln!(out, "summary:").unwrap();
    writeln!(out, "{vary},min,q1,median,q3,max,mean_mis_w,mean_mis_d").unwrap();
    for s in &r.summary {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.value, s.min, s.q1, s.median, s.q3, s.max, s.mean_mis_w, s.mean_mis_d
        )
        .unwrap();
    }
    writeln!(out, "runs:").unwrap();
    writeln!(out, "{vary},run,seed,k_selected,ratio,mis_w,mis_d").unwrap();
    for p in &r.runs {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.value, p.run, p.seed, p.k_selected, p.ratio, p.mis_w, p.mis_d
        )
        .unwrap();
    }
    out
}
