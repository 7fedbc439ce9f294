//! Per-leaning metric scores, per-query bias, and per-cell Mean Bias /
//! Mean Absolute Bias.
//!
//! The bias score of one query is the raw difference between a metric
//! evaluated with gains restricted to conservative-leaning documents and
//! the same metric restricted to liberal-leaning documents. Positive means
//! conservative skew.

use serde::{Deserialize, Serialize};

use crate::annotations::{leaning_of, LabelStore};
use crate::corpus::{Cell, Dataset, Leaning, SerpRecord, Topic};
use crate::error::Error;
use crate::metrics::{score, GainVector, Metric, MetricConfig};
use crate::Result;

/// One query's metric evaluated per leaning, plus their difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaningScores {
    pub topic_id: String,
    pub metric: Metric,
    pub score_conservative: f64,
    pub score_liberal: f64,
    /// score_conservative - score_liberal; positive means conservative
    /// documents rank better.
    pub beta: f64,
}

/// Bias aggregates of one engine-location cell for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSummary {
    pub cell: Cell,
    pub metric: Metric,
    /// Mean of beta over queries; opposing skews cancel.
    pub mb: f64,
    /// Mean of |beta| over queries; magnitude regardless of direction.
    pub mab: f64,
    pub n_queries: usize,
    pub per_query: Vec<LeaningScores>,
}

/// Gain vector attributing 1.0 to ranks whose consensus label maps to the
/// requested leaning and 0.0 to every other rank. Missing labels
/// contribute no gain.
pub fn leaning_gains(
    serp: &SerpRecord,
    labels: &LabelStore,
    topic: &Topic,
    leaning: Leaning,
) -> GainVector {
    let gains = serp
        .results
        .iter()
        .map(|r| match labels.label(serp.location, &r.doc_id) {
            Some(label) if leaning_of(label.stance, topic) == Some(leaning) => 1.0,
            _ => 0.0,
        })
        .collect();
    GainVector::new(gains).expect("SERP invariants bound the gain vector")
}

/// Evaluates one metric per leaning for one query and takes the
/// difference.
pub fn query_bias(
    serp: &SerpRecord,
    labels: &LabelStore,
    topic: &Topic,
    metric: Metric,
    cfg: &MetricConfig,
) -> LeaningScores {
    let conservative = leaning_gains(serp, labels, topic, Leaning::Conservative);
    let liberal = leaning_gains(serp, labels, topic, Leaning::Liberal);
    let score_conservative = score(metric, &conservative, cfg);
    let score_liberal = score(metric, &liberal, cfg);
    LeaningScores {
        topic_id: serp.topic_id.clone(),
        metric,
        score_conservative,
        score_liberal,
        beta: score_conservative - score_liberal,
    }
}

/// Reduces one cell's per-query scores to MB (mean of beta) and MAB (mean
/// of |beta|).
pub fn summarize_bias(
    cell: Cell,
    metric: Metric,
    per_query: Vec<LeaningScores>,
) -> Result<BiasSummary> {
    if per_query.is_empty() {
        return Err(Error::Invalid(format!(
            "no per-query bias scores for cell {cell}"
        )));
    }
    debug_assert!(per_query.iter().all(|s| s.metric == metric));
    let n = per_query.len() as f64;
    let mb = per_query.iter().map(|s| s.beta).sum::<f64>() / n;
    let mab = per_query.iter().map(|s| s.beta.abs()).sum::<f64>() / n;
    Ok(BiasSummary {
        cell,
        metric,
        mb,
        mab,
        n_queries: per_query.len(),
        per_query,
    })
}

/// Computes a cell's full bias summary for one metric, visiting SERPs in
/// topic id order.
pub fn cell_bias(
    d: &Dataset,
    labels: &LabelStore,
    cell: Cell,
    metric: Metric,
    cfg: &MetricConfig,
) -> Result<BiasSummary> {
    let per_query: Vec<LeaningScores> = d
        .cell_serps(cell)
        .iter()
        .map(|serp| {
            let topic = d
                .topic(&serp.topic_id)
                .expect("dataset invariant: every SERP topic resolves");
            query_bias(serp, labels, topic, metric, cfg)
        })
        .collect();
    summarize_bias(cell, metric, per_query)
}
