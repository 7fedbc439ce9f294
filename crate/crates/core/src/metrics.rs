//! Rank-weighted effectiveness metrics over a SERP for an arbitrary
//! binary gain function: precision at k, rank-biased precision, and
//! discounted cumulative gain at k.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::annotations::{relevance_of, LabelStore};
use crate::corpus::{Cell, Dataset, SerpRecord, MAX_RANK};
use crate::error::Error;
use crate::Result;

/// The three metrics this crate reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "p")]
    Precision,
    #[serde(rename = "rbp")]
    Rbp,
    #[serde(rename = "dcg")]
    Dcg,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Precision, Metric::Rbp, Metric::Dcg];

    /// Short stable identifier used in plan entry ids and file names.
    pub fn id(&self) -> &'static str {
        match self {
            Metric::Precision => "p",
            Metric::Rbp => "rbp",
            Metric::Dcg => "dcg",
        }
    }

    /// Human-readable column header for a given cutoff.
    pub fn label(&self, k: usize) -> String {
        match self {
            Metric::Precision => format!("P@{k}"),
            Metric::Rbp => "RBP".to_string(),
            Metric::Dcg => format!("DCG@{k}"),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "p" => Ok(Metric::Precision),
            "rbp" => Ok(Metric::Rbp),
            "dcg" => Ok(Metric::Dcg),
            other => Err(format!(
                "unknown metric {other:?} (expected p, rbp, or dcg)"
            )),
        }
    }
}

/// Per-rank gains for one SERP; index i holds the gain at rank i+1.
/// Entries are in [0, 1] and the length never exceeds the maximum SERP
/// depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainVector(Vec<f64>);

impl GainVector {
    pub fn new(gains: Vec<f64>) -> Result<GainVector> {
        if gains.len() > MAX_RANK as usize {
            return Err(Error::Invalid(format!(
                "gain vector of length {} exceeds maximum SERP depth {MAX_RANK}",
                gains.len()
            )));
        }
        for (i, &g) in gains.iter().enumerate() {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::Invalid(format!(
                    "gain {g} at rank {} outside [0, 1]",
                    i + 1
                )));
            }
        }
        Ok(GainVector(gains))
    }

    pub fn gains(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Cutoff and persistence knobs shared by every metric computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    /// Rank cutoff for P@k and DCG@k.
    #[serde(default = "default_k")]
    pub k: usize,
    /// RBP persistence parameter, in (0, 1).
    #[serde(default = "default_persistence")]
    pub rbp_persistence: f64,
}

fn default_k() -> usize {
    10
}

fn default_persistence() -> f64 {
    0.8
}

impl Default for MetricConfig {
    fn default() -> MetricConfig {
        MetricConfig {
            k: default_k(),
            rbp_persistence: default_persistence(),
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Invalid(format!(
                "cutoff k must be >= 1, got {}",
                self.k
            )));
        }
        if !(self.rbp_persistence > 0.0 && self.rbp_persistence < 1.0) {
            return Err(Error::Invalid(format!(
                "rbp_persistence must be in (0, 1), got {}",
                self.rbp_persistence
            )));
        }
        Ok(())
    }
}

/// Fraction of the top k ranks carrying gain: (sum of gains at ranks
/// 1..=min(n, k)) / k. Ranks past the end of a short SERP count as zero
/// gain, so the divisor is always k.
pub fn precision_at_k(g: &GainVector, cfg: &MetricConfig) -> f64 {
    let top: f64 = g.gains().iter().take(cfg.k).sum();
    top / cfg.k as f64
}

/// Rank-biased precision: (1 - p) * sum over ranks of gain_i * p^(i-1),
/// with persistence p. Uses every returned rank; no cutoff applies.
pub fn rbp(g: &GainVector, cfg: &MetricConfig) -> f64 {
    let p = cfg.rbp_persistence;
    let mut weight = 1.0;
    let mut sum = 0.0;
    for &gain in g.gains() {
        sum += gain * weight;
        weight *= p;
    }
    (1.0 - p) * sum
}

/// Discounted cumulative gain at k: sum over ranks 1..=min(n, k) of
/// gain_i / log2(i + 1). Binary gains make this the plain discount form.
pub fn dcg_at_k(g: &GainVector, cfg: &MetricConfig) -> f64 {
    g.gains()
        .iter()
        .take(cfg.k)
        .enumerate()
        .map(|(i, &gain)| gain / ((i + 2) as f64).log2())
        .sum()
}

/// Dispatches one metric by tag.
pub fn score(metric: Metric, g: &GainVector, cfg: &MetricConfig) -> f64 {
    match metric {
        Metric::Precision => precision_at_k(g, cfg),
        Metric::Rbp => rbp(g, cfg),
        Metric::Dcg => dcg_at_k(g, cfg),
    }
}

/// Largest value a metric can reach under this configuration, given the
/// loader's cap on SERP depth. Used for figure axis bounds.
pub fn max_score(metric: Metric, cfg: &MetricConfig) -> f64 {
    let full = GainVector::new(vec![1.0; MAX_RANK as usize]).expect("static bounds");
    score(metric, &full, cfg)
}

/// Relevance gain vector of a SERP: 1.0 at ranks whose document has an
/// on-topic consensus label, 0.0 elsewhere. Documents without any label
/// contribute zero gain.
pub fn relevance_gains(serp: &SerpRecord, labels: &LabelStore) -> GainVector {
    let gains = serp
        .results
        .iter()
        .map(|r| {
            labels
                .label(serp.location, &r.doc_id)
                .map(relevance_of)
                .unwrap_or(0.0)
        })
        .collect();
    GainVector::new(gains).expect("SERP invariants bound the gain vector")
}

/// The three relevance-based scores of one SERP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryScores {
    pub precision: f64,
    pub rbp: f64,
    pub dcg: f64,
}

impl QueryScores {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Precision => self.precision,
            Metric::Rbp => self.rbp,
            Metric::Dcg => self.dcg,
        }
    }
}

/// Scores one SERP with relevance gains.
pub fn query_scores(serp: &SerpRecord, labels: &LabelStore, cfg: &MetricConfig) -> QueryScores {
    let g = relevance_gains(serp, labels);
    QueryScores {
        precision: precision_at_k(&g, cfg),
        rbp: rbp(&g, cfg),
        dcg: dcg_at_k(&g, cfg),
    }
}

/// Unweighted arithmetic means of the three metrics over one cell's
/// queries, plus the query count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanScores {
    pub precision: f64,
    pub rbp: f64,
    pub dcg: f64,
    pub n_queries: usize,
}

impl MeanScores {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Precision => self.precision,
            Metric::Rbp => self.rbp,
            Metric::Dcg => self.dcg,
        }
    }
}

/// Means of the relevance-based metrics over every SERP in a cell, in
/// topic id order.
pub fn mean_scores(
    d: &Dataset,
    labels: &LabelStore,
    cell: Cell,
    cfg: &MetricConfig,
) -> Result<MeanScores> {
    let serps = d.cell_serps(cell);
    if serps.is_empty() {
        return Err(Error::Invalid(format!("no SERPs in cell {cell}")));
    }
    let n = serps.len() as f64;
    let mut sums = (0.0, 0.0, 0.0);
    for serp in &serps {
        let s = query_scores(serp, labels, cfg);
        sums.0 += s.precision;
        sums.1 += s.rbp;
        sums.2 += s.dcg;
    }
    Ok(MeanScores {
        precision: sums.0 / n,
        rbp: sums.1 / n,
        dcg: sums.2 / n,
        n_queries: serps.len(),
    })
}
