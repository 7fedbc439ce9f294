//! SERP and topic data model: loading, validation, and deterministic
//! access for everything downstream.
//!
//! A dataset is described by a small TOML manifest pointing at two CSV
//! files (topics and ranked results) plus free-form provenance metadata.
//! All invariants are checked at load time; a loaded [`Dataset`] is
//! immutable and safe to share across threads.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Ideological side of a document or of a topic's "pro" stance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Leaning {
    Conservative,
    Liberal,
}

impl Leaning {
    pub fn opposite(self) -> Leaning {
        match self {
            Leaning::Conservative => Leaning::Liberal,
            Leaning::Liberal => Leaning::Conservative,
        }
    }
}

impl fmt::Display for Leaning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Leaning::Conservative => "conservative",
            Leaning::Liberal => "liberal",
        })
    }
}

impl FromStr for Leaning {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "conservative" => Ok(Leaning::Conservative),
            "liberal" => Ok(Leaning::Liberal),
            other => Err(format!(
                "unknown leaning {other:?} (expected \"conservative\" or \"liberal\")"
            )),
        }
    }
}

/// Anonymized engine tag. Display names come from a config alias map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Engine1,
    Engine2,
}

impl Engine {
    pub const ALL: [Engine; 2] = [Engine::Engine1, Engine::Engine2];

    pub fn other(self) -> Engine {
        match self {
            Engine::Engine1 => Engine::Engine2,
            Engine::Engine2 => Engine::Engine1,
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Engine1 => "engine1",
            Engine::Engine2 => "engine2",
        })
    }
}

impl FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "engine1" => Ok(Engine::Engine1),
            "engine2" => Ok(Engine::Engine2),
            other => Err(format!(
                "unknown engine {other:?} (expected \"engine1\" or \"engine2\")"
            )),
        }
    }
}

/// Market a SERP was collected from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Location {
    #[serde(rename = "UK")]
    Uk,
    #[serde(rename = "US")]
    Us,
}

impl Location {
    pub const ALL: [Location; 2] = [Location::Uk, Location::Us];

    pub fn other(self) -> Location {
        match self {
            Location::Uk => Location::Us,
            Location::Us => Location::Uk,
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Location::Uk => "UK",
            Location::Us => "US",
        })
    }
}

impl FromStr for Location {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "UK" => Ok(Location::Uk),
            "US" => Ok(Location::Us),
            other => Err(format!(
                "unknown location {other:?} (expected \"UK\" or \"US\")"
            )),
        }
    }
}

/// One engine-location slice of the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub engine: Engine,
    pub location: Location,
}

impl Cell {
    pub fn new(engine: Engine, location: Location) -> Cell {
        Cell { engine, location }
    }

    /// All four grid cells in canonical order: UK engines first, then US.
    pub fn grid() -> [Cell; 4] {
        [
            Cell::new(Engine::Engine1, Location::Uk),
            Cell::new(Engine::Engine2, Location::Uk),
            Cell::new(Engine::Engine1, Location::Us),
            Cell::new(Engine::Engine2, Location::Us),
        ]
    }

    /// Stable identifier used in plan entry ids and report keys.
    pub fn id(&self) -> String {
        format!("{}:{}", self.engine, self.location)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.engine, self.location)
    }
}

/// A controversial topic, its query text, and the ideological alignment of
/// its "pro" side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub topic_id: String,
    pub title: String,
    pub query: String,
    pub pro_leaning: Leaning,
}

/// One ranked result within a SERP.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerpResult {
    pub rank: u32,
    pub doc_id: String,
    pub url: String,
}

/// One engine x location x topic ranked list. Ranks are exactly 1..=n with
/// n <= 10; results are stored in rank order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerpRecord {
    pub engine: Engine,
    pub location: Location,
    pub topic_id: String,
    pub results: Vec<SerpResult>,
}

impl SerpRecord {
    pub fn cell(&self) -> Cell {
        Cell::new(self.engine, self.location)
    }

    pub fn key(&self) -> SerpKey {
        (self.engine, self.location, self.topic_id.clone())
    }
}

/// Unique identity of a SERP within a dataset.
pub type SerpKey = (Engine, Location, String);

fn key_display(key: &SerpKey) -> String {
    format!("({},{},{})", key.0, key.1, key.2)
}

/// Maximum SERP depth accepted by the loader.
pub const MAX_RANK: u32 = 10;

/// A validated, immutable collection of topics and SERPs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    topics: BTreeMap<String, Topic>,
    serps: BTreeMap<SerpKey, SerpRecord>,
    provenance: BTreeMap<String, String>,
}

impl Dataset {
    /// Assembles and validates a dataset from parts. Checks every
    /// structural invariant: unique topic ids, resolvable topic
    /// references, unique SERP keys, contiguous ranks, in-range ranks,
    /// and per-SERP doc id uniqueness.
    pub fn new(
        topics: Vec<Topic>,
        serps: Vec<SerpRecord>,
        provenance: BTreeMap<String, String>,
    ) -> Result<Dataset> {
        let mut topic_map = BTreeMap::new();
        for t in topics {
            if topic_map.contains_key(&t.topic_id) {
                return Err(Error::Invalid(format!("duplicate topic_id {}", t.topic_id)));
            }
            topic_map.insert(t.topic_id.clone(), t);
        }
        let mut serp_map: BTreeMap<SerpKey, SerpRecord> = BTreeMap::new();
        for mut serp in serps {
            let key = serp.key();
            if !topic_map.contains_key(&serp.topic_id) {
                return Err(Error::Invalid(format!(
                    "SERP {} references unknown topic_id {}",
                    key_display(&key),
                    serp.topic_id
                )));
            }
            if serp_map.contains_key(&key) {
                return Err(Error::Invalid(format!(
                    "duplicate SERP {}",
                    key_display(&key)
                )));
            }
            validate_results(&mut serp, &key)?;
            serp_map.insert(key, serp);
        }
        Ok(Dataset {
            topics: topic_map,
            serps: serp_map,
            provenance,
        })
    }

    pub fn topics(&self) -> impl Iterator<Item = &Topic> {
        self.topics.values()
    }

    pub fn topic(&self, topic_id: &str) -> Option<&Topic> {
        self.topics.get(topic_id)
    }

    pub fn serps(&self) -> impl Iterator<Item = &SerpRecord> {
        self.serps.values()
    }

    pub fn serp(&self, cell: Cell, topic_id: &str) -> Option<&SerpRecord> {
        self.serps
            .get(&(cell.engine, cell.location, topic_id.to_string()))
    }

    /// SERPs of one cell, in topic id order.
    pub fn cell_serps(&self, cell: Cell) -> Vec<&SerpRecord> {
        self.serps.values().filter(|s| s.cell() == cell).collect()
    }

    /// Topic ids present in a cell, sorted.
    pub fn cell_topic_ids(&self, cell: Cell) -> Vec<String> {
        self.cell_serps(cell)
            .iter()
            .map(|s| s.topic_id.clone())
            .collect()
    }

    pub fn provenance(&self) -> &BTreeMap<String, String> {
        &self.provenance
    }

    pub fn n_topics(&self) -> usize {
        self.topics.len()
    }

    pub fn n_serps(&self) -> usize {
        self.serps.len()
    }

    /// One-line load summary, e.g. "8 SERPs, 2 topics".
    pub fn summary(&self) -> String {
        format!("{} SERPs, {} topics", self.n_serps(), self.n_topics())
    }
}

fn validate_results(serp: &mut SerpRecord, key: &SerpKey) -> Result<()> {
    if serp.results.is_empty() {
        return Err(Error::Invalid(format!(
            "empty result list in SERP {}",
            key_display(key)
        )));
    }
    serp.results.sort_by_key(|r| r.rank);
    let n = serp.results.len() as u32;
    let mut seen_docs = BTreeMap::new();
    let mut prev_rank = 0u32;
    for r in &serp.results {
        if r.rank < 1 || r.rank > MAX_RANK {
            return Err(Error::Invalid(format!(
                "rank out of range: rank {} in SERP {}",
                r.rank,
                key_display(key)
            )));
        }
        if r.rank == prev_rank {
            return Err(Error::Invalid(format!(
                "duplicate rank {} in SERP {}",
                r.rank,
                key_display(key)
            )));
        }
        if r.rank != prev_rank + 1 {
            return Err(Error::Invalid(format!(
                "rank gap in SERP {}: rank {} follows rank {} (ranks must be exactly 1..{})",
                key_display(key),
                r.rank,
                prev_rank,
                n
            )));
        }
        if let Some(prev) = seen_docs.insert(r.doc_id.clone(), r.rank) {
            return Err(Error::Invalid(format!(
                "duplicate doc_id {} in SERP {} (ranks {} and {})",
                r.doc_id,
                key_display(key),
                prev,
                r.rank
            )));
        }
        prev_rank = r.rank;
    }
    Ok(())
}

/// Topic ids present in BOTH cells, sorted. This list is the pairing axis
/// for every paired test between the two cells.
pub fn matched_topics(d: &Dataset, cell_a: Cell, cell_b: Cell) -> Result<Vec<String>> {
    let a = d.cell_topic_ids(cell_a);
    let b = d.cell_topic_ids(cell_b);
    let b_set: std::collections::BTreeSet<&String> = b.iter().collect();
    let matched: Vec<String> = a.into_iter().filter(|t| b_set.contains(t)).collect();
    if matched.is_empty() {
        return Err(Error::Invalid("no matched topics".into()));
    }
    Ok(matched)
}

#[derive(Debug, Deserialize)]
struct Manifest {
    files: ManifestFiles,
    #[serde(default)]
    provenance: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
struct ManifestFiles {
    topics: PathBuf,
    serps: PathBuf,
}

/// Builds a CSV reader that tolerates `#` comment lines, so shipped sample
/// files can carry inline documentation.
fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::malformed(path, 0, format!("{other:?}")),
        })
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

fn field<'a>(
    rec: &'a csv::StringRecord,
    headers: &csv::StringRecord,
    name: &str,
    path: &Path,
) -> Result<&'a str> {
    let idx = headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::malformed(path, 1, format!("missing column {name:?}")))?;
    rec.get(idx).ok_or_else(|| {
        Error::malformed(
            path,
            record_line(rec),
            format!("missing value for column {name:?}"),
        )
    })
}

fn parse_field<T: FromStr<Err = String>>(
    rec: &csv::StringRecord,
    headers: &csv::StringRecord,
    name: &str,
    path: &Path,
) -> Result<T> {
    let raw = field(rec, headers, name, path)?;
    raw.parse()
        .map_err(|e: String| Error::malformed(path, record_line(rec), e))
}

/// Loads the topics CSV: columns topic_id, title, query, pro_leaning.
pub fn load_topics(path: &Path) -> Result<Vec<Topic>> {
    let mut reader = csv_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::malformed(path, 1, e.to_string()))?
        .clone();
    let mut topics = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::malformed(path, 0, e.to_string()))?;
        topics.push(Topic {
            topic_id: field(&rec, &headers, "topic_id", path)?.to_string(),
            title: field(&rec, &headers, "title", path)?.to_string(),
            query: field(&rec, &headers, "query", path)?.to_string(),
            pro_leaning: parse_field(&rec, &headers, "pro_leaning", path)?,
        });
    }
    Ok(topics)
}

/// Loads the SERP CSV: columns engine, location, topic_id, rank, doc_id,
/// url. Rows belonging to one (engine, location, topic_id) key are grouped
/// into a single record; input order within a group is irrelevant.
pub fn load_serps(path: &Path) -> Result<Vec<SerpRecord>> {
    let mut reader = csv_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::malformed(path, 1, e.to_string()))?
        .clone();
    // Grouped in first-seen order; Dataset::new re-sorts by key anyway.
    let mut order: Vec<SerpKey> = Vec::new();
    let mut groups: BTreeMap<SerpKey, SerpRecord> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::malformed(path, 0, e.to_string()))?;
        let line = record_line(&rec);
        let engine: Engine = parse_field(&rec, &headers, "engine", path)?;
        let location: Location = parse_field(&rec, &headers, "location", path)?;
        let topic_id = field(&rec, &headers, "topic_id", path)?.to_string();
        let rank_raw = field(&rec, &headers, "rank", path)?;
        let rank: u32 = rank_raw
            .parse()
            .map_err(|_| Error::malformed(path, line, format!("invalid rank {rank_raw:?}")))?;
        let result = SerpResult {
            rank,
            doc_id: field(&rec, &headers, "doc_id", path)?.to_string(),
            url: field(&rec, &headers, "url", path)?.to_string(),
        };
        let key: SerpKey = (engine, location, topic_id.clone());
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                SerpRecord {
                    engine,
                    location,
                    topic_id,
                    results: Vec::new(),
                }
            })
            .results
            .push(result);
    }
    Ok(order
        .into_iter()
        .map(|k| groups.remove(&k).unwrap())
        .collect())
}

/// Loads a dataset from its TOML manifest. File paths inside the manifest
/// are resolved relative to the manifest's directory.
pub fn load_dataset(manifest_path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest =
        toml::from_str(&text).map_err(|e| Error::malformed(manifest_path, 0, e.to_string()))?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let topics = load_topics(&base.join(&manifest.files.topics))?;
    let serps = load_serps(&base.join(&manifest.files.serps))?;
    Dataset::new(topics, serps, manifest.provenance)
}
