// SPDX-License-Identifier: MIT OR Apache-2.0

//! JSON report types. Field order is fixed and floats use the shortest
//! round-trip encoding, so regenerating a report from the same inputs is
//! byte-identical. Probabilities carry a raw and a log10 form; non-finite
//! values (underflowed log10, infinite Bayes factors) serialize as `null`
//! next to an explicit flag.

use ebcp::segmentation::CredibleInterval;
use serde::{Deserialize, Serialize};

pub const LOG10_E: f64 = std::f64::consts::LOG10_E;

/// `Some(x)` only when finite; JSON has no NaN/∞.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ModelReport {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    pub prior: Vec<f64>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ProbEntry {
    /// location (1-based) or shift
    pub at: i64,
    pub p: f64,
    pub log10_p: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct IntervalReport {
    pub level: f64,
    pub lo: i64,
    pub hi: i64,
    pub attained_mass: f64,
}

impl From<CredibleInterval<f64>> for IntervalReport {
    fn from(ci: CredibleInterval<f64>) -> Self {
        Self {
            level: ci.level,
            lo: ci.lo,
            hi: ci.hi,
            attained_mass: ci.attained_mass,
        }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ChangePointReport {
    pub k: usize,
    pub mode: i64,
    pub credible_interval: IntervalReport,
    pub posterior: Vec<ProbEntry>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct SegmentReport {
    pub command: String,
    pub input: String,
    pub series: String,
    pub n: usize,
    pub segments: usize,
    pub model: ModelReport,
    /// log Σ_partitions ∏ P(Y_J|J)
    pub log_evidence_sum: f64,
    /// ln C(n−1, K−1), the uniform-prior constant
    pub log_partition_count: f64,
    /// log P(Y|K) = log_evidence_sum − log_partition_count
    pub log_evidence: f64,
    pub changepoints: Vec<ChangePointReport>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct SeriesRef {
    pub input: String,
    pub label: String,
    #[serde(rename = "K")]
    pub big_k: usize,
    pub k: usize,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ShiftReport {
    pub command: String,
    pub series: [SeriesRef; 2],
    pub n: usize,
    pub shift: Vec<ProbEntry>,
    pub credible_interval: IntervalReport,
    pub contains_zero: bool,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct CommonResultReport {
    pub k: Vec<usize>,
    pub p0: f64,
    pub q0: f64,
    pub posterior_e0: f64,
    pub log10_posterior_e0: Option<f64>,
    pub bayes_factor: Option<f64>,
    pub bayes_factor_infinite: bool,
    pub log10_bayes_factor: Option<f64>,
    pub log_q_joint: f64,
    pub log_q_marg: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct CommonReport {
    pub command: String,
    pub n: usize,
    pub series: Vec<SeriesRef>,
    pub results: Vec<CommonResultReport>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct PhiReport {
    pub command: String,
    pub series: Vec<PhiEstimateReport>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct PhiEstimateReport {
    pub input: String,
    pub label: String,
    pub phi_hat: Option<f64>,
    pub window_used: usize,
    pub windows_evaluated: usize,
    pub fallback_applied: bool,
}

/// Pretty JSON with a trailing newline (stable across runs).
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}
