//! Orchestrates the bias questions as a declarative test plan over a
//! dataset: per-cell existence of bias, engine-vs-engine magnitude per
//! location, and location-vs-location comparison per engine, all under
//! one Bonferroni family.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::annotations::{AggregatedStance, LabelStore};
use crate::bias::{cell_bias, BiasSummary};
use crate::corpus::{matched_topics, Cell, Dataset, Engine, Location, MAX_RANK};
use crate::error::Error;
use crate::metrics::{mean_scores, query_scores, MeanScores, Metric, MetricConfig, QueryScores};
use crate::stats::{
    bonferroni, one_sample_ttest, paired_ttest, verdict, CorrectionPlan, TestResult,
};
use crate::Result;

/// What one plan entry tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    /// One-sample test of a cell's per-query beta values against zero.
    ExistenceMb,
    /// One-sample test of a cell's per-query |beta| values against zero.
    ExistenceMab,
    /// Paired test of beta between two cells, paired by topic.
    PairedMb,
    /// Paired test of |beta| between two cells, paired by topic.
    PairedMab,
    /// Paired test of relevance-metric scores between two cells. Not part
    /// of the Bonferroni family.
    PerformancePaired,
}

impl EntryKind {
    /// Whether the entry counts toward the corrected hypothesis family.
    pub fn in_family(&self) -> bool {
        !matches!(self, EntryKind::PerformancePaired)
    }
}

/// One test to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub id: String,
    pub kind: EntryKind,
    pub cell_a: Cell,
    /// Present for paired kinds, absent for existence kinds.
    pub cell_b: Option<Cell>,
    pub metric: Metric,
}

/// A full ordered test plan plus its family-wise alpha.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPlan {
    pub entries: Vec<PlanEntry>,
    pub alpha: f64,
    /// Overrides the computed hypothesis count when set.
    pub m_override: Option<u32>,
}

impl TestPlan {
    /// Bonferroni hypothesis count: the number of family entries, unless
    /// overridden.
    pub fn m(&self) -> u32 {
        self.m_override
            .unwrap_or(self.entries.iter().filter(|e| e.kind.in_family()).count() as u32)
    }

    pub fn correction(&self) -> Result<CorrectionPlan> {
        bonferroni(self.alpha, self.m())
    }
}

/// Plan-construction switches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanOptions {
    /// Adds per-cell MAB existence tests to the family (growing m).
    #[serde(default)]
    pub include_mab_existence: bool,
    #[serde(default)]
    pub m_override: Option<u32>,
}

/// A pair of cells compared by paired tests, with a stable id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonSpec {
    pub id: String,
    pub cell_a: Cell,
    pub cell_b: Cell,
}

/// Stable id for a cell pair: engines compared within a location, or
/// locations compared within an engine; anything else spells out both
/// cells.
pub fn comparison_id(cell_a: Cell, cell_b: Cell) -> String {
    if cell_a.location == cell_b.location {
        format!("{}:{}-vs-{}", cell_a.location, cell_a.engine, cell_b.engine)
    } else if cell_a.engine == cell_b.engine {
        format!(
            "{}:{}-vs-{}",
            cell_a.engine, cell_a.location, cell_b.location
        )
    } else {
        format!("{}-vs-{}", cell_a.id(), cell_b.id())
    }
}

/// The four standard comparisons: engines within each location, then
/// locations within each engine.
pub fn standard_comparisons() -> Vec<ComparisonSpec> {
    let mut comps = Vec::new();
    for location in Location::ALL {
        let a = Cell::new(Engine::Engine1, location);
        let b = Cell::new(Engine::Engine2, location);
        comps.push(ComparisonSpec {
            id: comparison_id(a, b),
            cell_a: a,
            cell_b: b,
        });
    }
    for engine in Engine::ALL {
        let a = Cell::new(engine, Location::Uk);
        let b = Cell::new(engine, Location::Us);
        comps.push(ComparisonSpec {
            id: comparison_id(a, b),
            cell_a: a,
            cell_b: b,
        });
    }
    comps
}

/// Builds the default plan over the full engine-location grid:
/// per-cell MB existence tests (4 cells x 3 metrics), paired MB and MAB
/// tests for the four standard comparisons (4 x 3 x 2), and
/// out-of-family performance paired tests (4 x 3). The family size is
/// 36 unless MAB existence tests are switched in or m is overridden.
pub fn default_plan(d: &Dataset, alpha: f64) -> Result<TestPlan> {
    default_plan_with(d, alpha, &PlanOptions::default())
}

pub fn default_plan_with(d: &Dataset, alpha: f64, options: &PlanOptions) -> Result<TestPlan> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Invalid(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    let missing: Vec<String> = Cell::grid()
        .iter()
        .filter(|c| d.cell_serps(**c).is_empty())
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Invalid(format!(
            "missing cells: {}",
            missing.join(",")
        )));
    }

    let mut entries = Vec::new();
    for cell in Cell::grid() {
        for metric in Metric::ALL {
            entries.push(PlanEntry {
                id: format!("existence_mb:{}:{}", cell.id(), metric.id()),
                kind: EntryKind::ExistenceMb,
                cell_a: cell,
                cell_b: None,
                metric,
            });
        }
    }
    if options.include_mab_existence {
        for cell in Cell::grid() {
            for metric in Metric::ALL {
                entries.push(PlanEntry {
                    id: format!("existence_mab:{}:{}", cell.id(), metric.id()),
                    kind: EntryKind::ExistenceMab,
                    cell_a: cell,
                    cell_b: None,
                    metric,
                });
            }
        }
    }
    for comp in standard_comparisons() {
        for metric in Metric::ALL {
            for kind in [EntryKind::PairedMb, EntryKind::PairedMab] {
                let tag = match kind {
                    EntryKind::PairedMb => "paired_mb",
                    _ => "paired_mab",
                };
                entries.push(PlanEntry {
                    id: format!("{tag}:{}:{}", comp.id, metric.id()),
                    kind,
                    cell_a: comp.cell_a,
                    cell_b: Some(comp.cell_b),
                    metric,
                });
            }
        }
    }
    for comp in standard_comparisons() {
        for metric in Metric::ALL {
            entries.push(PlanEntry {
                id: format!("performance:{}:{}", comp.id, metric.id()),
                kind: EntryKind::PerformancePaired,
                cell_a: comp.cell_a,
                cell_b: Some(comp.cell_b),
                metric,
            });
        }
    }
    Ok(TestPlan {
        entries,
        alpha,
        m_override: options.m_override,
    })
}

/// Outcome of one plan entry. Zero-variance samples yield an explicit
/// untestable verdict instead of failing the audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TestOutcome {
    Tested {
        result: TestResult,
        raw_significant: bool,
        /// None for out-of-family entries, which no correction applies
        /// to.
        corrected_significant: Option<bool>,
    },
    Untestable {
        reason: String,
    },
}

/// One executed plan entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryResult {
    pub entry: PlanEntry,
    pub outcome: TestOutcome,
}

/// Everything reported about one cell: mean retrieval performance and the
/// bias summary per metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: Cell,
    pub means: MeanScores,
    pub bias: Vec<BiasSummary>,
}

/// Topic matching bookkeeping for one comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub id: String,
    pub cell_a: Cell,
    pub cell_b: Cell,
    pub matched_topics: Vec<String>,
    /// Topics present only in cell_a (excluded from paired tests).
    pub only_in_a: usize,
    pub only_in_b: usize,
}

/// Label coverage and shape anomalies observed while auditing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataQuality {
    /// Ranked result slots across all SERPs.
    pub total_results: usize,
    pub labeled_results: usize,
    pub missing_labels: usize,
    /// Labeled results whose consensus is unresolved; they contribute to
    /// no metric.
    pub unresolved_labels: usize,
    /// SERPs returning fewer than the maximum depth.
    pub short_serps: usize,
    pub aggregation_warnings: Vec<String>,
}

/// Complete audit output: inputs summary, correction, per-cell scores,
/// comparisons, and one result per plan entry in plan order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub alpha: f64,
    pub correction: CorrectionPlan,
    pub metric_config: MetricConfig,
    pub cells: Vec<CellReport>,
    pub comparisons: Vec<ComparisonReport>,
    pub entries: Vec<EntryResult>,
    pub data_quality: DataQuality,
}

impl AuditReport {
    pub fn cell_report(&self, cell: Cell) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.cell == cell)
    }

    pub fn entry(&self, id: &str) -> Option<&EntryResult> {
        self.entries.iter().find(|e| e.entry.id == id)
    }
}

fn untestable_on_degenerate(err: Error) -> Result<TestOutcome> {
    match err {
        Error::Degenerate(_) => Ok(TestOutcome::Untestable {
            reason: "untestable: zero variance".into(),
        }),
        other => Err(other),
    }
}

fn outcome_of(
    test: Result<TestResult>,
    plan: &CorrectionPlan,
    in_family: bool,
) -> Result<TestOutcome> {
    match test {
        Ok(result) => {
            let (raw, corrected) = verdict(result.p_value, plan);
            Ok(TestOutcome::Tested {
                result,
                raw_significant: raw,
                corrected_significant: in_family.then_some(corrected),
            })
        }
        Err(err) => untestable_on_degenerate(err),
    }
}

/// Executes every plan entry over the dataset and labels. Deterministic:
/// identical inputs produce an identical report. Paired tests pair by the
/// sorted matched-topic list of their two cells; topics present in only
/// one cell are excluded from paired tests (but still count toward
/// existence tests) and reported per comparison.
pub fn run_audit(
    d: &Dataset,
    labels: &LabelStore,
    plan: &TestPlan,
    cfg: &MetricConfig,
) -> Result<AuditReport> {
    if plan.entries.is_empty() {
        return Err(Error::Invalid("empty test plan".into()));
    }
    cfg.validate()?;
    let mut seen_ids = BTreeSet::new();
    for e in &plan.entries {
        if !seen_ids.insert(e.id.as_str()) {
            return Err(Error::Invalid(format!("duplicate plan entry id {}", e.id)));
        }
        let needs_pair = matches!(
            e.kind,
            EntryKind::PairedMb | EntryKind::PairedMab | EntryKind::PerformancePaired
        );
        if needs_pair && e.cell_b.is_none() {
            return Err(Error::Invalid(format!(
                "paired plan entry {} lacks a second cell",
                e.id
            )));
        }
    }
    let correction = plan.correction()?;

    // Cells touched by the plan, in canonical grid order.
    let mut plan_cells: BTreeSet<Cell> = BTreeSet::new();
    for e in &plan.entries {
        plan_cells.insert(e.cell_a);
        if let Some(b) = e.cell_b {
            plan_cells.insert(b);
        }
    }
    let cells_in_order: Vec<Cell> = Cell::grid()
        .into_iter()
        .filter(|c| plan_cells.contains(c))
        .collect();

    // Per-cell summaries, computed once and shared by every entry.
    let mut bias_by_cell: BTreeMap<(Cell, Metric), BiasSummary> = BTreeMap::new();
    let mut scores_by_cell: BTreeMap<Cell, BTreeMap<String, QueryScores>> = BTreeMap::new();
    let mut cells = Vec::new();
    for &cell in &cells_in_order {
        let means = mean_scores(d, labels, cell, cfg)?;
        let mut bias = Vec::new();
        for metric in Metric::ALL {
            let summary = cell_bias(d, labels, cell, metric, cfg)?;
            bias_by_cell.insert((cell, metric), summary.clone());
            bias.push(summary);
        }
        let mut per_topic = BTreeMap::new();
        for serp in d.cell_serps(cell) {
            per_topic.insert(serp.topic_id.clone(), query_scores(serp, labels, cfg));
        }
        scores_by_cell.insert(cell, per_topic);
        cells.push(CellReport { cell, means, bias });
    }

    // Comparisons referenced by paired entries, in first-use order.
    let mut comparisons: Vec<ComparisonReport> = Vec::new();
    let mut comp_ids = BTreeSet::new();
    for e in &plan.entries {
        let Some(cell_b) = e.cell_b else { continue };
        let id = comparison_id(e.cell_a, cell_b);
        if !comp_ids.insert(id.clone()) {
            continue;
        }
        let matched = matched_topics(d, e.cell_a, cell_b)?;
        let a_topics = d.cell_topic_ids(e.cell_a);
        let b_topics = d.cell_topic_ids(cell_b);
        comparisons.push(ComparisonReport {
            id,
            cell_a: e.cell_a,
            cell_b,
            only_in_a: a_topics.len() - matched.len(),
            only_in_b: b_topics.len() - matched.len(),
            matched_topics: matched,
        });
    }

    let beta_of = |cell: Cell, metric: Metric| -> BTreeMap<&String, f64> {
        bias_by_cell[&(cell, metric)]
            .per_query
            .iter()
            .map(|s| (&s.topic_id, s.beta))
            .collect()
    };

    let mut entries = Vec::new();
    for e in &plan.entries {
        let outcome = match e.kind {
            EntryKind::ExistenceMb => {
                let betas: Vec<f64> = bias_by_cell[&(e.cell_a, e.metric)]
                    .per_query
                    .iter()
                    .map(|s| s.beta)
                    .collect();
                outcome_of(one_sample_ttest(&betas, 0.0), &correction, true)?
            }
            EntryKind::ExistenceMab => {
                let mags: Vec<f64> = bias_by_cell[&(e.cell_a, e.metric)]
                    .per_query
                    .iter()
                    .map(|s| s.beta.abs())
                    .collect();
                outcome_of(one_sample_ttest(&mags, 0.0), &correction, true)?
            }
            EntryKind::PairedMb | EntryKind::PairedMab => {
                let cell_b = e.cell_b.expect("validated above");
                let comp_id = comparison_id(e.cell_a, cell_b);
                let comp = comparisons
                    .iter()
                    .find(|c| c.id == comp_id)
                    .expect("comparison built above");
                let a = beta_of(e.cell_a, e.metric);
                let b = beta_of(cell_b, e.metric);
                let abs = matches!(e.kind, EntryKind::PairedMab);
                let take = |m: &BTreeMap<&String, f64>, t: &String| {
                    let v = m[t];
                    if abs {
                        v.abs()
                    } else {
                        v
                    }
                };
                let xs: Vec<f64> = comp.matched_topics.iter().map(|t| take(&a, t)).collect();
                let ys: Vec<f64> = comp.matched_topics.iter().map(|t| take(&b, t)).collect();
                outcome_of(paired_ttest(&xs, &ys), &correction, true)?
            }
            EntryKind::PerformancePaired => {
                let cell_b = e.cell_b.expect("validated above");
                let comp_id = comparison_id(e.cell_a, cell_b);
                let comp = comparisons
                    .iter()
                    .find(|c| c.id == comp_id)
                    .expect("comparison built above");
                let a = &scores_by_cell[&e.cell_a];
                let b = &scores_by_cell[&cell_b];
                let xs: Vec<f64> = comp
                    .matched_topics
                    .iter()
                    .map(|t| a[t].get(e.metric))
                    .collect();
                let ys: Vec<f64> = comp
                    .matched_topics
                    .iter()
                    .map(|t| b[t].get(e.metric))
                    .collect();
                outcome_of(paired_ttest(&xs, &ys), &correction, false)?
            }
        };
        entries.push(EntryResult {
            entry: e.clone(),
            outcome,
        });
    }

    // Label coverage over the audited cells.
    let mut dq = DataQuality {
        total_results: 0,
        labeled_results: 0,
        missing_labels: 0,
        unresolved_labels: 0,
        short_serps: 0,
        aggregation_warnings: labels.warnings().to_vec(),
    };
    for &cell in &cells_in_order {
        for serp in d.cell_serps(cell) {
            if serp.results.len() < MAX_RANK as usize {
                dq.short_serps += 1;
            }
            for r in &serp.results {
                dq.total_results += 1;
                match labels.label(serp.location, &r.doc_id) {
                    Some(label) => {
                        dq.labeled_results += 1;
                        if label.stance == AggregatedStance::Unresolved {
                            dq.unresolved_labels += 1;
                        }
                    }
                    None => dq.missing_labels += 1,
                }
            }
        }
    }

    Ok(AuditReport {
        alpha: plan.alpha,
        correction,
        metric_config: *cfg,
        cells,
        comparisons,
        entries,
        data_quality: dq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Leaning, SerpRecord, SerpResult, Topic};
    use crate::testutil::{build_grid as build, skewed_slot};

    #[test]
    fn default_plan_counts() {
        let (d, _) = build(3, skewed_slot);
        let plan = default_plan(&d, 0.05).unwrap();
        assert_eq!(plan.m(), 36);
        assert_eq!(plan.entries.len(), 48);
        assert_eq!(
            plan.entries
                .iter()
                .filter(|e| e.kind == EntryKind::PerformancePaired)
                .count(),
            12
        );
        let plan = default_plan_with(
            &d,
            0.05,
            &PlanOptions {
                include_mab_existence: true,
                m_override: None,
            },
        )
        .unwrap();
        assert_eq!(plan.m(), 48);
        let plan = default_plan_with(
            &d,
            0.05,
            &PlanOptions {
                include_mab_existence: false,
                m_override: Some(40),
            },
        )
        .unwrap();
        assert_eq!(plan.m(), 40);
        assert!((plan.correction().unwrap().adjusted_alpha - 0.00125).abs() < 1e-12);
    }

    #[test]
    fn default_plan_reports_missing_cells() {
        let topics = vec![Topic {
            topic_id: "t0".into(),
            title: "T".into(),
            query: "q?".into(),
            pro_leaning: Leaning::Conservative,
        }];
        let serps = vec![
            SerpRecord {
                engine: Engine::Engine1,
                location: Location::Uk,
                topic_id: "t0".into(),
                results: vec![SerpResult {
                    rank: 1,
                    doc_id: "d1".into(),
                    url: "https://news.example/1".into(),
                }],
            },
            SerpRecord {
                engine: Engine::Engine2,
                location: Location::Uk,
                topic_id: "t0".into(),
                results: vec![SerpResult {
                    rank: 1,
                    doc_id: "d2".into(),
                    url: "https://news.example/2".into(),
                }],
            },
        ];
        let d = Dataset::new(topics, serps, BTreeMap::new()).unwrap();
        let err = default_plan(&d, 0.05).unwrap_err();
        assert_eq!(err.to_string(), "missing cells: (engine1,US),(engine2,US)");
    }

    #[test]
    fn audit_uniform_skew_is_significant() {
        let (d, labels) = build(12, skewed_slot);
        let plan = default_plan(&d, 0.05).unwrap();
        let report = run_audit(&d, &labels, &plan, &MetricConfig::default()).unwrap();
        assert_eq!(report.correction.m, 36);
        assert_eq!(report.entries.len(), 48);
        // Every conservative document outranks every liberal one, so all
        // existence tests reject decisively.
        for e in &report.entries {
            if e.entry.kind != EntryKind::ExistenceMb {
                continue;
            }
            match &e.outcome {
                TestOutcome::Tested {
                    result,
                    raw_significant,
                    corrected_significant,
                } => {
                    assert!(result.mean_effect > 0.0, "{}", e.entry.id);
                    assert!(*raw_significant, "{}", e.entry.id);
                    assert_eq!(*corrected_significant, Some(true), "{}", e.entry.id);
                }
                other => panic!("{}: {other:?}", e.entry.id),
            }
        }
    }

    #[test]
    fn audit_identical_engines_untestable() {
        // Same layout for both engines within a location: every paired
        // difference is zero.
        let (d, labels) = build(6, |cell, topic, rank| {
            skewed_slot(Cell::new(Engine::Engine1, cell.location), topic, rank)
        });
        let plan = default_plan(&d, 0.05).unwrap();
        let report = run_audit(&d, &labels, &plan, &MetricConfig::default()).unwrap();
        for e in &report.entries {
            let engine_pair = e
                .entry
                .cell_b
                .is_some_and(|b| b.location == e.entry.cell_a.location);
            if !engine_pair {
                continue;
            }
            match &e.outcome {
                TestOutcome::Untestable { reason } => {
                    assert_eq!(reason, "untestable: zero variance", "{}", e.entry.id)
                }
                other => panic!("{} should be untestable, got {other:?}", e.entry.id),
            }
        }
    }

    #[test]
    fn audit_label_free_dataset_reports_coverage() {
        let (d, _) = build(4, skewed_slot);
        let labels = LabelStore::new();
        let plan = default_plan(&d, 0.05).unwrap();
        let report = run_audit(&d, &labels, &plan, &MetricConfig::default()).unwrap();
        assert_eq!(
            report.data_quality.missing_labels,
            report.data_quality.total_results
        );
        assert_eq!(report.data_quality.labeled_results, 0);
        for cell in &report.cells {
            assert_eq!(cell.means.precision, 0.0);
            assert_eq!(cell.means.dcg, 0.0);
            for b in &cell.bias {
                assert_eq!(b.mb, 0.0);
                assert_eq!(b.mab, 0.0);
            }
        }
        for e in &report.entries {
            assert!(
                matches!(e.outcome, TestOutcome::Untestable { .. }),
                "{}",
                e.entry.id
            );
        }
    }

    #[test]
    fn audit_is_deterministic() {
        let (d, labels) = build(8, skewed_slot);
        let plan = default_plan(&d, 0.05).unwrap();
        let a = run_audit(&d, &labels, &plan, &MetricConfig::default()).unwrap();
        let b = run_audit(&d, &labels, &plan, &MetricConfig::default()).unwrap();
        assert_eq!(a, b);
        let ja = serde_json::to_string(&a).unwrap();
        let jb = serde_json::to_string(&b).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn engine_swap_negates_paired_t() {
        let (d, labels) = build(6, skewed_slot);
        // Same data with the engine tags swapped.
        let (d_swapped, labels_swapped) = build(6, |cell, topic, rank| {
            skewed_slot(Cell::new(cell.engine.other(), cell.location), topic, rank)
        });
        let plan = default_plan(&d, 0.05).unwrap();
        let cfg = MetricConfig::default();
        let r1 = run_audit(&d, &labels, &plan, &cfg).unwrap();
        let r2 = run_audit(&d_swapped, &labels_swapped, &plan, &cfg).unwrap();
        for (e1, e2) in r1.entries.iter().zip(&r2.entries) {
            let engine_pair = e1
                .entry
                .cell_b
                .is_some_and(|b| b.location == e1.entry.cell_a.location);
            match (&e1.outcome, &e2.outcome) {
                (TestOutcome::Tested { result: a, .. }, TestOutcome::Tested { result: b, .. })
                    if engine_pair =>
                {
                    // doc_ids differ across the swap, but the engine-pair
                    // t statistic must negate and p must be preserved.
                    assert!((a.t_stat + b.t_stat).abs() < 1e-9, "{}", e1.entry.id);
                    assert!((a.p_value - b.p_value).abs() < 1e-9, "{}", e1.entry.id);
                }
                _ => {}
            }
        }
        // Existence results swap cells: engine1's verdicts in r1 equal
        // engine2's in r2.
        for e1 in &r1.entries {
            if e1.entry.kind != EntryKind::ExistenceMb {
                continue;
            }
            let swapped_id = if e1.entry.id.contains("engine1") {
                e1.entry.id.replace("engine1", "engine2")
            } else {
                e1.entry.id.replace("engine2", "engine1")
            };
            let e2 = r2.entry(&swapped_id).unwrap();
            match (&e1.outcome, &e2.outcome) {
                (TestOutcome::Tested { result: a, .. }, TestOutcome::Tested { result: b, .. }) => {
                    assert!((a.t_stat - b.t_stat).abs() < 1e-9);
                    assert!((a.p_value - b.p_value).abs() < 1e-9);
                }
                other => panic!("unexpected outcomes {other:?}"),
            }
        }
    }

    #[test]
    fn malformed_plans_rejected() {
        let (d, labels) = build(2, skewed_slot);
        let cfg = MetricConfig::default();
        let empty = TestPlan {
            entries: vec![],
            alpha: 0.05,
            m_override: None,
        };
        assert!(run_audit(&d, &labels, &empty, &cfg).is_err());
        let missing_pair = TestPlan {
            entries: vec![PlanEntry {
                id: "performance:broken:p".into(),
                kind: EntryKind::PerformancePaired,
                cell_a: Cell::new(Engine::Engine1, Location::Uk),
                cell_b: None,
                metric: Metric::Precision,
            }],
            alpha: 0.05,
            m_override: Some(1),
        };
        let err = run_audit(&d, &labels, &missing_pair, &cfg).unwrap_err();
        assert!(err.to_string().contains("lacks a second cell"));
        let mut dup = default_plan(&d, 0.05).unwrap();
        let first = dup.entries[0].clone();
        dup.entries.push(first);
        let err = run_audit(&d, &labels, &dup, &cfg).unwrap_err();
        assert!(err.to_string().contains("duplicate plan entry id"));
    }

    #[test]
    fn comparison_reports_match_counts() {
        let (d, labels) = build(5, skewed_slot);
        let plan = default_plan(&d, 0.05).unwrap();
        let report = run_audit(&d, &labels, &plan, &MetricConfig::default()).unwrap();
        assert_eq!(report.comparisons.len(), 4);
        for comp in &report.comparisons {
            assert_eq!(comp.matched_topics.len(), 5);
            assert_eq!(comp.only_in_a, 0);
            assert_eq!(comp.only_in_b, 0);
        }
        assert_eq!(report.comparisons[0].id, "UK:engine1-vs-engine2");
        assert_eq!(report.comparisons[1].id, "US:engine1-vs-engine2");
        assert_eq!(report.comparisons[2].id, "engine1:UK-vs-US");
        assert_eq!(report.comparisons[3].id, "engine2:UK-vs-US");
    }
}
