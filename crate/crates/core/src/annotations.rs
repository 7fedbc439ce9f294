//! Crowdsourced stance judgments: ingestion, majority-vote aggregation,
//! inter-rater agreement, and the stance-to-leaning mapping.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Leaning, Location, Topic};
use crate::error::Error;
use crate::Result;

/// A single worker's stance call on one document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stance {
    Pro,
    Against,
    Neutral,
    NotRelevant,
}

impl Stance {
    pub const ALL: [Stance; 4] = [
        Stance::Pro,
        Stance::Against,
        Stance::Neutral,
        Stance::NotRelevant,
    ];
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stance::Pro => "pro",
            Stance::Against => "against",
            Stance::Neutral => "neutral",
            Stance::NotRelevant => "not_relevant",
        })
    }
}

impl FromStr for Stance {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pro" => Ok(Stance::Pro),
            "against" => Ok(Stance::Against),
            "neutral" => Ok(Stance::Neutral),
            "not_relevant" => Ok(Stance::NotRelevant),
            other => Err(format!(
                "unknown stance {other:?} (expected pro, against, neutral, or not_relevant)"
            )),
        }
    }
}

/// Consensus stance after aggregation; `Unresolved` marks documents where
/// no category reached a strict majority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregatedStance {
    Pro,
    Against,
    Neutral,
    NotRelevant,
    Unresolved,
}

impl From<Stance> for AggregatedStance {
    fn from(s: Stance) -> AggregatedStance {
        match s {
            Stance::Pro => AggregatedStance::Pro,
            Stance::Against => AggregatedStance::Against,
            Stance::Neutral => AggregatedStance::Neutral,
            Stance::NotRelevant => AggregatedStance::NotRelevant,
        }
    }
}

impl fmt::Display for AggregatedStance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AggregatedStance::Pro => "pro",
            AggregatedStance::Against => "against",
            AggregatedStance::Neutral => "neutral",
            AggregatedStance::NotRelevant => "not_relevant",
            AggregatedStance::Unresolved => "unresolved",
        })
    }
}

/// One row of a judgments file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerJudgment {
    pub doc_id: String,
    pub worker_id: String,
    pub stance: Stance,
}

/// Majority-vote consensus for one document. `support` counts the workers
/// who voted for the winning stance; for `Unresolved` it is the size of
/// the largest (non-majority) faction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregatedLabel {
    pub doc_id: String,
    pub stance: AggregatedStance,
    pub support: u32,
}

/// Result of aggregating a judgment collection: consensus labels plus
/// warnings about documents whose judgment count deviates from the
/// expected three workers per document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateOutcome {
    pub labels: BTreeMap<String, AggregatedLabel>,
    pub warnings: Vec<String>,
}

/// Chance-corrected agreement over a judgment collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub kappa: f64,
    pub n_items: usize,
    pub n_raters_per_item: usize,
    /// Fraction of all judgments falling in each stance category.
    pub category_proportions: BTreeMap<String, f64>,
    /// Items dropped because their rater count differed from the modal
    /// rater count.
    pub excluded_items: usize,
}

fn group_by_doc(judgments: &[WorkerJudgment]) -> Result<BTreeMap<&str, BTreeMap<Stance, u32>>> {
    if judgments.is_empty() {
        return Err(Error::Invalid("no judgments to aggregate".into()));
    }
    let mut seen: BTreeMap<(&str, &str), ()> = BTreeMap::new();
    let mut by_doc: BTreeMap<&str, BTreeMap<Stance, u32>> = BTreeMap::new();
    for j in judgments {
        if seen
            .insert((j.doc_id.as_str(), j.worker_id.as_str()), ())
            .is_some()
        {
            return Err(Error::Invalid(format!(
                "duplicate judgment for doc_id {} by worker {}",
                j.doc_id, j.worker_id
            )));
        }
        *by_doc
            .entry(j.doc_id.as_str())
            .or_default()
            .entry(j.stance)
            .or_default() += 1;
    }
    Ok(by_doc)
}

/// Collapses per-worker judgments into one label per document by strict
/// majority: a stance wins iff more than half of the document's workers
/// chose it; otherwise the label is `Unresolved`. Worker order never
/// matters. Documents with a judgment count other than 3 are labelled all
/// the same but flagged in `warnings`.
pub fn aggregate(judgments: &[WorkerJudgment]) -> Result<AggregateOutcome> {
    let by_doc = group_by_doc(judgments)?;
    let mut labels = BTreeMap::new();
    let mut warnings = Vec::new();
    for (doc_id, counts) in by_doc {
        let total: u32 = counts.values().sum();
        if total != 3 {
            warnings.push(format!("doc_id {doc_id} has {total} judgments, expected 3"));
        }
        let (&best_stance, &best_count) = counts.iter().max_by_key(|(_, &c)| c).expect("nonempty");
        let label = if best_count * 2 > total {
            AggregatedLabel {
                doc_id: doc_id.to_string(),
                stance: best_stance.into(),
                support: best_count,
            }
        } else {
            AggregatedLabel {
                doc_id: doc_id.to_string(),
                stance: AggregatedStance::Unresolved,
                support: best_count,
            }
        };
        labels.insert(doc_id.to_string(), label);
    }
    Ok(AggregateOutcome { labels, warnings })
}

/// Fleiss' kappa over the four stance categories. Items whose rater count
/// differs from the modal rater count are excluded and reported. Exactly
/// 1.0 when all raters agree on every item.
pub fn fleiss_kappa(judgments: &[WorkerJudgment]) -> Result<AgreementReport> {
    let by_doc = group_by_doc(judgments)?;

    // Modal rater count decides which items enter the computation; ties
    // prefer the larger count.
    let mut count_freq: BTreeMap<u32, u32> = BTreeMap::new();
    for counts in by_doc.values() {
        *count_freq.entry(counts.values().sum()).or_default() += 1;
    }
    let (&r, _) = count_freq
        .iter()
        .max_by_key(|(&count, &freq)| (freq, count))
        .expect("nonempty");
    if r < 2 {
        return Err(Error::Invalid(
            "agreement requires at least 2 raters per item".into(),
        ));
    }
    let items: Vec<&BTreeMap<Stance, u32>> = by_doc
        .values()
        .filter(|counts| counts.values().sum::<u32>() == r)
        .collect();
    let excluded_items = by_doc.len() - items.len();
    if items.is_empty() {
        return Err(Error::Invalid(
            "no items eligible for agreement computation".into(),
        ));
    }

    let n = items.len() as f64;
    let rf = r as f64;
    let mut category_totals: BTreeMap<Stance, f64> = BTreeMap::new();
    let mut p_bar = 0.0;
    for counts in &items {
        let mut sum_sq = 0.0;
        for (&stance, &c) in counts.iter() {
            sum_sq += (c as f64) * (c as f64);
            *category_totals.entry(stance).or_default() += c as f64;
        }
        p_bar += (sum_sq - rf) / (rf * (rf - 1.0));
    }
    p_bar /= n;

    let mut p_e = 0.0;
    let mut category_proportions = BTreeMap::new();
    for stance in Stance::ALL {
        let p_j = category_totals.get(&stance).copied().unwrap_or(0.0) / (n * rf);
        p_e += p_j * p_j;
        category_proportions.insert(stance.to_string(), p_j);
    }

    if p_e >= 1.0 {
        return Err(Error::Degenerate("degenerate agreement".into()));
    }
    let kappa = (p_bar - p_e) / (1.0 - p_e);
    Ok(AgreementReport {
        kappa,
        n_items: items.len(),
        n_raters_per_item: r as usize,
        category_proportions,
        excluded_items,
    })
}

/// Maps a consensus stance to an ideological leaning through the topic's
/// pro-side alignment. Pro takes the topic's pro leaning, against takes
/// the opposite; everything else carries no leaning.
pub fn leaning_of(stance: AggregatedStance, topic: &Topic) -> Option<Leaning> {
    match stance {
        AggregatedStance::Pro => Some(topic.pro_leaning),
        AggregatedStance::Against => Some(topic.pro_leaning.opposite()),
        AggregatedStance::Neutral
        | AggregatedStance::NotRelevant
        | AggregatedStance::Unresolved => None,
    }
}

/// Binary relevance gain of a consensus label: any on-topic stance (pro,
/// against, neutral) counts as relevant; not_relevant and unresolved do
/// not.
pub fn relevance_of(label: &AggregatedLabel) -> f64 {
    match label.stance {
        AggregatedStance::Pro | AggregatedStance::Against | AggregatedStance::Neutral => 1.0,
        AggregatedStance::NotRelevant | AggregatedStance::Unresolved => 0.0,
    }
}

/// Aggregated labels grouped by the market whose workers produced them.
/// Judgment collections stay separate per location because each location's
/// SERPs were judged by that location's workers.
#[derive(Debug, Clone, Default)]
pub struct LabelStore {
    labels: BTreeMap<Location, BTreeMap<String, AggregatedLabel>>,
    judgments: BTreeMap<Location, Vec<WorkerJudgment>>,
    warnings: Vec<String>,
}

impl LabelStore {
    pub fn new() -> LabelStore {
        LabelStore::default()
    }

    /// Aggregates and stores one location's judgments. Repeated calls for
    /// the same location extend the collection and re-aggregate.
    pub fn add_judgments(
        &mut self,
        location: Location,
        judgments: Vec<WorkerJudgment>,
    ) -> Result<()> {
        let all = self.judgments.entry(location).or_default();
        all.extend(judgments);
        let outcome = aggregate(all)?;
        self.warnings
            .extend(outcome.warnings.iter().map(|w| format!("{location}: {w}")));
        self.labels.insert(location, outcome.labels);
        Ok(())
    }

    pub fn label(&self, location: Location, doc_id: &str) -> Option<&AggregatedLabel> {
        self.labels.get(&location)?.get(doc_id)
    }

    pub fn location_labels(
        &self,
        location: Location,
    ) -> Option<&BTreeMap<String, AggregatedLabel>> {
        self.labels.get(&location)
    }

    pub fn agreement(&self, location: Location) -> Result<AgreementReport> {
        let judgments = self.judgments.get(&location).ok_or_else(|| {
            Error::Invalid(format!("no judgments loaded for location {location}"))
        })?;
        fleiss_kappa(judgments)
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn is_empty(&self) -> bool {
        self.labels.values().all(|m| m.is_empty())
    }
}

/// Loads a judgments CSV: columns doc_id, worker_id, stance. `#` comment
/// lines are ignored.
pub fn load_judgments(path: &Path) -> Result<Vec<WorkerJudgment>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::malformed(path, 0, format!("{other:?}")),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::malformed(path, 1, e.to_string()))?
        .clone();
    let idx_of = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::malformed(path, 1, format!("missing column {name:?}")))
    };
    let (di, wi, si) = (idx_of("doc_id")?, idx_of("worker_id")?, idx_of("stance")?);
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::malformed(path, 0, e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let get = |i: usize| -> Result<&str> {
            rec.get(i)
                .ok_or_else(|| Error::malformed(path, line, "missing field".to_string()))
        };
        out.push(WorkerJudgment {
            doc_id: get(di)?.to_string(),
            worker_id: get(wi)?.to_string(),
            stance: get(si)?
                .parse()
                .map_err(|e: String| Error::malformed(path, line, e))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn judgment(doc: &str, worker: &str, stance: Stance) -> WorkerJudgment {
        WorkerJudgment {
            doc_id: doc.into(),
            worker_id: worker.into(),
            stance,
        }
    }

    fn triple(doc: &str, stances: [Stance; 3]) -> Vec<WorkerJudgment> {
        stances
            .iter()
            .enumerate()
            .map(|(i, &s)| judgment(doc, &format!("w{i}"), s))
            .collect()
    }

    fn topic(pro_leaning: Leaning) -> Topic {
        Topic {
            topic_id: "t1".into(),
            title: "T".into(),
            query: "q?".into(),
            pro_leaning,
        }
    }

    #[test]
    fn majority_wins() {
        let out = aggregate(&triple("d1", [Stance::Pro, Stance::Pro, Stance::Against])).unwrap();
        let label = &out.labels["d1"];
        assert_eq!(label.stance, AggregatedStance::Pro);
        assert_eq!(label.support, 2);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn three_way_split_is_unresolved() {
        let out = aggregate(&triple(
            "d1",
            [Stance::Pro, Stance::Against, Stance::Neutral],
        ))
        .unwrap();
        assert_eq!(out.labels["d1"].stance, AggregatedStance::Unresolved);
        assert_eq!(out.labels["d1"].support, 1);
    }

    #[test]
    fn unanimous_not_relevant() {
        let out = aggregate(&triple(
            "d1",
            [
                Stance::NotRelevant,
                Stance::NotRelevant,
                Stance::NotRelevant,
            ],
        ))
        .unwrap();
        assert_eq!(out.labels["d1"].stance, AggregatedStance::NotRelevant);
        assert_eq!(out.labels["d1"].support, 3);
    }

    #[test]
    fn judgment_count_deviation_warns() {
        let js = vec![
            judgment("d1", "w0", Stance::Pro),
            judgment("d1", "w1", Stance::Pro),
        ];
        let out = aggregate(&js).unwrap();
        assert_eq!(out.labels["d1"].stance, AggregatedStance::Pro);
        assert_eq!(out.warnings.len(), 1);
        assert!(out.warnings[0].contains("has 2 judgments"));
        // A 1-1 split of two workers has no strict majority.
        let js = vec![
            judgment("d2", "w0", Stance::Pro),
            judgment("d2", "w1", Stance::Against),
        ];
        assert_eq!(
            aggregate(&js).unwrap().labels["d2"].stance,
            AggregatedStance::Unresolved
        );
    }

    #[test]
    fn aggregate_rejects_empty_and_duplicates() {
        assert!(aggregate(&[]).is_err());
        let js = vec![
            judgment("d1", "w0", Stance::Pro),
            judgment("d1", "w0", Stance::Against),
        ];
        assert!(aggregate(&js)
            .unwrap_err()
            .to_string()
            .contains("duplicate judgment"));
    }

    #[test]
    fn kappa_perfect_agreement_is_exactly_one() {
        let mut js = Vec::new();
        for (i, stance) in [Stance::Pro, Stance::Against, Stance::Neutral, Stance::Pro]
            .iter()
            .enumerate()
        {
            js.extend(triple(&format!("d{i}"), [*stance; 3]));
        }
        let report = fleiss_kappa(&js).unwrap();
        assert_eq!(report.kappa, 1.0);
        assert_eq!(report.n_items, 4);
        assert_eq!(report.n_raters_per_item, 3);
        assert_eq!(report.excluded_items, 0);
    }

    #[test]
    fn kappa_two_item_reference_table() {
        // item1 {pro, pro, against}, item2 {against, against, pro}:
        // P_bar = 1/3, P_e = 1/2, kappa = -1/3.
        let mut js = triple("d1", [Stance::Pro, Stance::Pro, Stance::Against]);
        js.extend(triple(
            "d2",
            [Stance::Against, Stance::Against, Stance::Pro],
        ));
        let report = fleiss_kappa(&js).unwrap();
        assert_abs_diff_eq!(report.kappa, -1.0 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(report.category_proportions["pro"], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(report.category_proportions["neutral"], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn kappa_single_category_is_degenerate() {
        let mut js = Vec::new();
        for i in 0..3 {
            js.extend(triple(&format!("d{i}"), [Stance::Pro; 3]));
        }
        let err = fleiss_kappa(&js).unwrap_err();
        assert_eq!(err.to_string(), "degenerate agreement");
    }

    #[test]
    fn kappa_excludes_off_count_items() {
        let mut js = triple("d1", [Stance::Pro, Stance::Pro, Stance::Against]);
        js.extend(triple(
            "d2",
            [Stance::Against, Stance::Against, Stance::Pro],
        ));
        js.push(judgment("d3", "w0", Stance::Neutral));
        js.push(judgment("d3", "w1", Stance::Neutral));
        let report = fleiss_kappa(&js).unwrap();
        assert_eq!(report.excluded_items, 1);
        assert_eq!(report.n_items, 2);
        assert_abs_diff_eq!(report.kappa, -1.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn leaning_mapping() {
        let lib = topic(Leaning::Liberal);
        let con = topic(Leaning::Conservative);
        assert_eq!(
            leaning_of(AggregatedStance::Pro, &lib),
            Some(Leaning::Liberal)
        );
        assert_eq!(
            leaning_of(AggregatedStance::Against, &lib),
            Some(Leaning::Conservative)
        );
        assert_eq!(
            leaning_of(AggregatedStance::Pro, &con),
            Some(Leaning::Conservative)
        );
        assert_eq!(leaning_of(AggregatedStance::Neutral, &lib), None);
        assert_eq!(leaning_of(AggregatedStance::NotRelevant, &con), None);
        assert_eq!(leaning_of(AggregatedStance::Unresolved, &lib), None);
    }

    #[test]
    fn relevance_mapping() {
        let label = |stance| AggregatedLabel {
            doc_id: "d".into(),
            stance,
            support: 3,
        };
        assert_eq!(relevance_of(&label(AggregatedStance::Pro)), 1.0);
        assert_eq!(relevance_of(&label(AggregatedStance::Against)), 1.0);
        assert_eq!(relevance_of(&label(AggregatedStance::Neutral)), 1.0);
        assert_eq!(relevance_of(&label(AggregatedStance::NotRelevant)), 0.0);
        assert_eq!(relevance_of(&label(AggregatedStance::Unresolved)), 0.0);
    }

    #[test]
    fn label_store_round_trip() {
        let mut store = LabelStore::new();
        store
            .add_judgments(
                Location::Uk,
                triple("d1", [Stance::Pro, Stance::Pro, Stance::Neutral]),
            )
            .unwrap();
        assert_eq!(
            store.label(Location::Uk, "d1").unwrap().stance,
            AggregatedStance::Pro
        );
        assert!(store.label(Location::Us, "d1").is_none());
        assert!(store.agreement(Location::Us).is_err());
    }

    proptest! {
        // Worker order never changes the aggregate.
        #[test]
        fn aggregate_permutation_invariant(perm in Just(()).prop_perturb(|_, mut rng| {
            let mut idx: Vec<usize> = (0..6).collect();
            for i in (1..idx.len()).rev() {
                let j = (rng.next_u32() as usize) % (i + 1);
                idx.swap(i, j);
            }
            idx
        })) {
            let mut js = triple("d1", [Stance::Pro, Stance::Against, Stance::Pro]);
            js.extend(triple("d2", [Stance::Neutral, Stance::NotRelevant, Stance::Against]));
            let base = aggregate(&js).unwrap();
            let shuffled: Vec<WorkerJudgment> = perm.iter().map(|&i| js[i].clone()).collect();
            prop_assert_eq!(aggregate(&shuffled).unwrap(), base);
        }

        // For 3 workers: resolved iff at least two judgments coincide.
        #[test]
        fn three_worker_majority_rule(a in 0usize..4, b in 0usize..4, c in 0usize..4) {
            let stances = [Stance::ALL[a], Stance::ALL[b], Stance::ALL[c]];
            let out = aggregate(&triple("d1", stances)).unwrap();
            let any_pair = a == b || b == c || a == c;
            prop_assert_eq!(
                out.labels["d1"].stance != AggregatedStance::Unresolved,
                any_pair
            );
        }

        // Pro and against always map to opposite leanings for one topic.
        #[test]
        fn pro_against_opposite(pro_is_lib in any::<bool>()) {
            let t = topic(if pro_is_lib { Leaning::Liberal } else { Leaning::Conservative });
            let p = leaning_of(AggregatedStance::Pro, &t).unwrap();
            let a = leaning_of(AggregatedStance::Against, &t).unwrap();
            prop_assert_eq!(p, a.opposite());
        }
    }
}
