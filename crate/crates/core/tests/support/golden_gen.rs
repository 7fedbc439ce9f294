//! Builds the golden benchmark dataset: 2 engines x 2 locations x 12
//! topics with scripted labels. UK result lists stack conservative-
//! leaning documents on top (with per-topic/engine count jitter), so
//! every UK bias score is positive with low spread. US lists mirror
//! their layout by topic parity, so US bias scores sum to exactly zero
//! while every test still sees nonzero variance.
//!
//! The committed files under data/golden must equal this generator's
//! output byte for byte; a test enforces that.

pub const N_TOPICS: usize = 12;

pub struct GoldenFiles {
    pub topics: String,
    pub serps: String,
    pub judgments_uk: String,
    pub judgments_us: String,
    pub dataset_toml: String,
    pub audit_toml: String,
}

/// Stance names for the ten ranks of one result list.
pub fn layout(engine: usize, location: &str, topic: usize) -> [&'static str; 10] {
    // Stance realizing a leaning depends on the topic's pro side:
    // even topics are pro-conservative, odd pro-liberal.
    let (cons, lib) = if topic.is_multiple_of(2) {
        ("pro", "against")
    } else {
        ("against", "pro")
    };
    let mut slots = ["neutral"; 10];
    match location {
        "UK" => {
            let c = 4 + (topic + engine) % 3;
            let l = 1 + topic % 2;
            let nr = (topic + engine) % 2;
            slots[..c].fill(cons);
            slots[c..c + nr].fill("not_relevant");
            slots[10 - l..].fill(lib);
        }
        "US" => {
            // Magnitude alternates per topic pair (and oppositely per
            // engine) so |beta| is never constant; each pair still
            // cancels exactly, keeping every US mean at zero.
            let pair = topic / 2;
            let a = if engine == 1 {
                2 + pair % 2
            } else {
                3 - pair % 2
            };
            let nr = (topic + 2 * engine) % 3;
            let (top, bottom) = if topic.is_multiple_of(2) {
                (cons, lib)
            } else {
                (lib, cons)
            };
            slots[..a].fill(top);
            slots[a..a + nr].fill("not_relevant");
            slots[9..].fill(bottom);
        }
        other => panic!("unknown location {other}"),
    }
    slots
}

pub fn doc_id(engine: usize, location: &str, topic: usize, rank: usize) -> String {
    format!(
        "{}-e{engine}-t{topic:02}-r{rank:02}",
        location.to_lowercase()
    )
}

pub fn generate() -> GoldenFiles {
    let mut topics = String::from(
        "# Synthetic benchmark topics; even-numbered topics are pro-conservative.\n\
         topic_id,title,query,pro_leaning\n",
    );
    for t in 0..N_TOPICS {
        let leaning = if t % 2 == 0 {
            "conservative"
        } else {
            "liberal"
        };
        topics.push_str(&format!(
            "t{t:02},Synthetic topic {t:02},synthetic query {t:02},{leaning}\n"
        ));
    }

    let mut serps = String::from(
        "# Scripted top-10 result lists for the golden benchmark.\n\
         engine,location,topic_id,rank,doc_id,url\n",
    );
    let mut judgments = vec![String::new(), String::new()];
    for (li, location) in ["UK", "US"].iter().enumerate() {
        judgments[li] =
            format!("# Scripted unanimous judgments ({location}).\ndoc_id,worker_id,stance\n");
        for engine in [1usize, 2] {
            for t in 0..N_TOPICS {
                let slots = layout(engine, location, t);
                for (i, stance) in slots.iter().enumerate() {
                    let rank = i + 1;
                    let doc = doc_id(engine, location, t, rank);
                    serps.push_str(&format!(
                        "engine{engine},{location},t{t:02},{rank},{doc},https://example.net/{}/t{t:02}/e{engine}/{rank}\n",
                        location.to_lowercase()
                    ));
                    for worker in ["w01", "w02", "w03"] {
                        judgments[li].push_str(&format!("{doc},{worker},{stance}\n"));
                    }
                }
            }
        }
    }

    let dataset_toml = "\
# Manifest for the golden benchmark dataset.

[files]
topics = \"topics.csv\"
serps = \"serps.csv\"

[provenance]
kind = \"scripted benchmark, regenerate with: cargo run --example gen_golden\"
"
    .to_string();

    let audit_toml = "\
# Audit configuration for the golden benchmark dataset.

dataset = \"dataset.toml\"
alpha = 0.05
output_dir = \"out\"

[[judgments]]
location = \"UK\"
path = \"judgments_uk.csv\"

[[judgments]]
location = \"US\"
path = \"judgments_us.csv\"
"
    .to_string();

    let [judgments_uk, judgments_us] = <[String; 2]>::try_from(judgments).unwrap();
    GoldenFiles {
        topics,
        serps,
        judgments_uk,
        judgments_us,
        dataset_toml,
        audit_toml,
    }
}

impl GoldenFiles {
    /// (relative file name, contents) pairs in write order.
    pub fn entries(&self) -> [(&'static str, &str); 6] {
        [
            ("topics.csv", &self.topics),
            ("serps.csv", &self.serps),
            ("judgments_uk.csv", &self.judgments_uk),
            ("judgments_us.csv", &self.judgments_us),
            ("dataset.toml", &self.dataset_toml),
            ("audit.toml", &self.audit_toml),
        ]
    }
}
