//! Audit configuration file: input paths, alpha, metric knobs, plan
//! switches, and rendering options, all in one TOML document.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audit::PlanOptions;
use crate::corpus::{Engine, Location};
use crate::error::Error;
use crate::metrics::MetricConfig;
use crate::Result;

/// How p-values appear in rendered tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueStyle {
    /// Four-decimal numeric values.
    #[default]
    Raw,
    /// Conventional threshold labels ("< 0.01", "> 0.05").
    Threshold,
}

impl std::str::FromStr for PValueStyle {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "raw" => Ok(PValueStyle::Raw),
            "threshold" => Ok(PValueStyle::Threshold),
            other => Err(format!(
                "unknown p-value style {other:?} (expected \"raw\" or \"threshold\")"
            )),
        }
    }
}

/// One judgments file and the market whose workers produced it.
#[derive(Debug, Clone, Deserialize)]
pub struct JudgmentsEntry {
    pub location: Location,
    pub path: PathBuf,
}

/// Rendering options.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct ReportOptions {
    #[serde(default)]
    pub p_value_style: PValueStyle,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Parsed audit configuration. All paths are resolved relative to the
/// config file's directory at load time.
#[derive(Debug, Clone, Deserialize)]
pub struct AuditConfig {
    /// Path to the dataset manifest.
    pub dataset: PathBuf,
    /// Judgment files, one or more per location.
    pub judgments: Vec<JudgmentsEntry>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub metrics: MetricConfig,
    #[serde(default)]
    pub plan: PlanOptions,
    #[serde(default)]
    pub report: ReportOptions,
    /// Display aliases for the anonymized engine tags.
    #[serde(default)]
    pub engines: BTreeMap<String, String>,
}

impl AuditConfig {
    pub fn load(path: &Path) -> Result<AuditConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: AuditConfig =
            toml::from_str(&text).map_err(|e| Error::malformed(path, 0, e.to_string()))?;
        config.validate()?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.dataset = base.join(&config.dataset);
        config.output_dir = base.join(&config.output_dir);
        for j in &mut config.judgments {
            j.path = base.join(&j.path);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Invalid(format!(
                "alpha must be in (0, 1), got {}",
                self.alpha
            )));
        }
        self.metrics.validate()?;
        if self.judgments.is_empty() {
            return Err(Error::Invalid("config lists no judgment files".into()));
        }
        for key in self.engines.keys() {
            key.parse::<Engine>()
                .map_err(|e| Error::Invalid(format!("bad engine alias key: {e}")))?;
        }
        Ok(())
    }

    /// Display name of an engine: the configured alias, or "Engine 1" /
    /// "Engine 2".
    pub fn engine_name(&self, engine: Engine) -> String {
        self.engines
            .get(&engine.to_string())
            .cloned()
            .unwrap_or_else(|| default_engine_name(engine))
    }
}

/// Fallback display name when no alias is configured.
pub fn default_engine_name(engine: Engine) -> String {
    match engine {
        Engine::Engine1 => "Engine 1".to_string(),
        Engine::Engine2 => "Engine 2".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("audit.toml");
        std::fs::write(
            &path,
            r#"
dataset = "data/dataset.toml"
alpha = 0.01
output_dir = "results"

[[judgments]]
location = "UK"
path = "data/judgments_uk.csv"

[[judgments]]
location = "US"
path = "data/judgments_us.csv"

[metrics]
k = 10
rbp_persistence = 0.9

[plan]
include_mab_existence = true
m_override = 48

[report]
p_value_style = "threshold"

[engines]
engine1 = "Bingle"
engine2 = "Goog"
"#,
        )
        .unwrap();
        let config = AuditConfig::load(&path).unwrap();
        assert_eq!(config.alpha, 0.01);
        assert_eq!(config.dataset, dir.path().join("data/dataset.toml"));
        assert_eq!(config.output_dir, dir.path().join("results"));
        assert_eq!(config.judgments.len(), 2);
        assert_eq!(config.judgments[0].location, Location::Uk);
        assert_eq!(
            config.judgments[1].path,
            dir.path().join("data/judgments_us.csv")
        );
        assert_eq!(config.metrics.rbp_persistence, 0.9);
        assert!(config.plan.include_mab_existence);
        assert_eq!(config.plan.m_override, Some(48));
        assert_eq!(config.report.p_value_style, PValueStyle::Threshold);
        assert_eq!(config.engine_name(Engine::Engine1), "Bingle");
        assert_eq!(config.engine_name(Engine::Engine2), "Goog");
    }

    #[test]
    fn defaults_fill_in() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("audit.toml");
        std::fs::write(
            &path,
            "dataset = \"d.toml\"\n\n[[judgments]]\nlocation = \"UK\"\npath = \"j.csv\"\n",
        )
        .unwrap();
        let config = AuditConfig::load(&path).unwrap();
        assert_eq!(config.alpha, 0.05);
        assert_eq!(config.metrics, MetricConfig::default());
        assert_eq!(config.report.p_value_style, PValueStyle::Raw);
        assert!(!config.plan.include_mab_existence);
        assert_eq!(config.engine_name(Engine::Engine1), "Engine 1");
    }

    #[test]
    fn rejects_bad_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("audit.toml");
        std::fs::write(
            &path,
            "dataset = \"d.toml\"\nalpha = 1.5\n\n[[judgments]]\nlocation = \"UK\"\npath = \"j.csv\"\n",
        )
        .unwrap();
        assert!(AuditConfig::load(&path).is_err());
        std::fs::write(&path, "dataset = \"d.toml\"\njudgments = []\n").unwrap();
        assert!(AuditConfig::load(&path).is_err());
        std::fs::write(
            &path,
            "dataset = \"d.toml\"\n\n[[judgments]]\nlocation = \"FR\"\npath = \"j.csv\"\n",
        )
        .unwrap();
        assert!(AuditConfig::load(&path).is_err());
    }
}
