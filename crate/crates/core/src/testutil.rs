//! Shared fixture builders for unit tests.

use std::collections::BTreeMap;

use crate::annotations::{LabelStore, Stance, WorkerJudgment};
use crate::corpus::{Cell, Dataset, Leaning, Location, SerpRecord, SerpResult, Topic};

/// Builds a full-grid dataset whose per-cell leaning layout is driven by a
/// slot function: for each (cell, topic index, rank) it returns the stance
/// every worker assigns.
pub(crate) fn build_grid(
    n_topics: usize,
    slot: impl Fn(Cell, usize, u32) -> Stance,
) -> (Dataset, LabelStore) {
    let topics: Vec<Topic> = (0..n_topics)
        .map(|i| Topic {
            topic_id: format!("t{i:02}"),
            title: format!("Topic {i}"),
            query: format!("question {i}?"),
            pro_leaning: if i % 2 == 0 {
                Leaning::Conservative
            } else {
                Leaning::Liberal
            },
        })
        .collect();
    let mut serps = Vec::new();
    let mut judgments: BTreeMap<Location, Vec<WorkerJudgment>> = BTreeMap::new();
    for cell in Cell::grid() {
        for (i, t) in topics.iter().enumerate() {
            let results: Vec<SerpResult> = (1..=10)
                .map(|r| SerpResult {
                    rank: r,
                    doc_id: format!("{}-{}-{}-r{r:02}", cell.engine, cell.location, t.topic_id),
                    url: format!("https://news.example/{}/{r}", t.topic_id),
                })
                .collect();
            for res in &results {
                let stance = slot(cell, i, res.rank);
                for w in 0..3 {
                    judgments
                        .entry(cell.location)
                        .or_default()
                        .push(WorkerJudgment {
                            doc_id: res.doc_id.clone(),
                            worker_id: format!("w{w}"),
                            stance,
                        });
                }
            }
            serps.push(SerpRecord {
                engine: cell.engine,
                location: cell.location,
                topic_id: t.topic_id.clone(),
                results,
            });
        }
    }
    let dataset = Dataset::new(topics, serps, BTreeMap::new()).unwrap();
    let mut labels = LabelStore::new();
    for (loc, js) in judgments {
        labels.add_judgments(loc, js).unwrap();
    }
    (dataset, labels)
}

/// Stance meaning "this document leans `leaning`" for the topic at index
/// `topic_idx` under the alternating pro_leaning layout of `build_grid`.
pub(crate) fn stance_for(leaning: Leaning, topic_idx: usize) -> Stance {
    let pro_leaning = if topic_idx.is_multiple_of(2) {
        Leaning::Conservative
    } else {
        Leaning::Liberal
    };
    if pro_leaning == leaning {
        Stance::Pro
    } else {
        Stance::Against
    }
}

/// Layout with conservative skew everywhere: top ranks conservative,
/// depth varying by topic and engine so samples are never degenerate.
pub(crate) fn skewed_slot(cell: Cell, topic: usize, rank: u32) -> Stance {
    let c_top = 4 + ((topic + cell.engine as usize) % 4) as u32;
    let l_bottom = 1 + ((topic + 2 * cell.engine as usize) % 2) as u32;
    if rank <= c_top {
        stance_for(Leaning::Conservative, topic)
    } else if rank > 10 - l_bottom {
        stance_for(Leaning::Liberal, topic)
    } else if rank.is_multiple_of(2) {
        Stance::Neutral
    } else {
        Stance::NotRelevant
    }
}
