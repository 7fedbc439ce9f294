//! Renders an audit into human-readable tables, figure point files, and a
//! machine-readable summary.
//!
//! Rendering is a pure function of the report: identical reports produce
//! byte-identical files. Table cells carry exactly four decimal places
//! (round-half-even); full-precision values live in the JSON summary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::audit::{AuditReport, ComparisonReport, EntryKind, EntryResult, TestOutcome};
use crate::config::{default_engine_name, PValueStyle};
use crate::corpus::{Cell, Engine, Location};
use crate::error::Error;
use crate::metrics::{max_score, Metric};
use crate::Result;

/// Display names for the anonymized engine tags.
#[derive(Debug, Clone)]
pub struct EngineNames {
    names: BTreeMap<Engine, String>,
}

impl Default for EngineNames {
    fn default() -> EngineNames {
        let mut names = BTreeMap::new();
        for e in Engine::ALL {
            names.insert(e, default_engine_name(e));
        }
        EngineNames { names }
    }
}

impl EngineNames {
    /// Builds names from a config alias map keyed by engine tag.
    pub fn from_aliases(aliases: &BTreeMap<String, String>) -> Result<EngineNames> {
        let mut out = EngineNames::default();
        for (key, name) in aliases {
            let engine: Engine = key
                .parse()
                .map_err(|e: String| Error::Invalid(format!("bad engine alias key: {e}")))?;
            out.names.insert(engine, name.clone());
        }
        Ok(out)
    }

    pub fn name(&self, engine: Engine) -> &str {
        &self.names[&engine]
    }

    /// Row label for a cell, e.g. "Engine 1 (UK)".
    pub fn cell_label(&self, cell: Cell) -> String {
        format!("{} ({})", self.name(cell.engine), cell.location)
    }
}

/// Formats a value with exactly four decimals, round-half-even, with
/// negative zero normalized to "0.0000".
pub fn fmt4(x: f64) -> String {
    let s = format!("{:.4}", x);
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

/// Formats a p-value: four decimals in raw style, or a conventional
/// threshold label in threshold style.
pub fn format_p(p: f64, style: PValueStyle) -> String {
    match style {
        PValueStyle::Raw => fmt4(p),
        PValueStyle::Threshold => {
            if p < 0.0001 {
                "< 0.0001".to_string()
            } else if p < 0.001 {
                "< 0.001".to_string()
            } else if p < 0.01 {
                "< 0.01".to_string()
            } else if p < 0.05 {
                "< 0.05".to_string()
            } else {
                "> 0.05".to_string()
            }
        }
    }
}

/// Significance marker for a tested outcome: "**" when significant under
/// the corrected threshold, "*" under the raw threshold only.
fn marker(raw: bool, corrected: Option<bool>) -> &'static str {
    match (raw, corrected) {
        (_, Some(true)) => " **",
        (true, _) => " *",
        _ => "",
    }
}

/// Table cell for one entry's p-value, marker included.
fn p_cell(entry: Option<&EntryResult>, style: PValueStyle) -> String {
    match entry {
        None => "-".to_string(),
        Some(e) => match &e.outcome {
            TestOutcome::Tested {
                result,
                raw_significant,
                corrected_significant,
            } => format!(
                "{}{}",
                format_p(result.p_value, style),
                marker(*raw_significant, *corrected_significant)
            ),
            TestOutcome::Untestable { .. } => "n/a (zero variance)".to_string(),
        },
    }
}

/// Renders rows as an aligned text table: first column left-aligned, the
/// rest right-aligned, two spaces between columns.
fn align(rows: &[Vec<String>]) -> String {
    let n_cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0usize; n_cols];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            if i == 0 {
                line.push_str(&format!("{:<width$}", cell, width = widths[i]));
            } else {
                line.push_str(&format!("{:>width$}", cell, width = widths[i]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Renders rows as CSV with the same cell contents as the text table.
fn to_csv(rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
}

fn legend(report: &AuditReport) -> String {
    format!(
        "*  p <= {} (raw)   ** p <= {:.6} (adjusted for {} hypotheses)\n",
        report.alpha, report.correction.adjusted_alpha, report.correction.m
    )
}

fn entry_index(report: &AuditReport) -> BTreeMap<&str, &EntryResult> {
    report
        .entries
        .iter()
        .map(|e| (e.entry.id.as_str(), e))
        .collect()
}

fn metric_headers(report: &AuditReport) -> Vec<String> {
    Metric::ALL
        .iter()
        .map(|m| m.label(report.metric_config.k))
        .collect()
}

/// Renders the retrieval-performance table of one comparison. Returns the
/// aligned text and CSV variants.
pub fn render_performance_table(
    report: &AuditReport,
    comp: &ComparisonReport,
    names: &EngineNames,
    style: PValueStyle,
) -> (String, String) {
    let index = entry_index(report);
    let mut rows = vec![{
        let mut h = vec![String::new()];
        h.extend(metric_headers(report));
        h
    }];
    for cell in [comp.cell_a, comp.cell_b] {
        let mut row = vec![names.cell_label(cell)];
        match report.cell_report(cell) {
            Some(c) => {
                for m in Metric::ALL {
                    row.push(fmt4(c.means.get(m)));
                }
            }
            None => row.extend(Metric::ALL.iter().map(|_| "-".to_string())),
        }
        rows.push(row);
    }
    let mut p_row = vec!["p-value".to_string()];
    for m in Metric::ALL {
        let id = format!("performance:{}:{}", comp.id, m.id());
        p_row.push(p_cell(index.get(id.as_str()).copied(), style));
    }
    rows.push(p_row);

    let title = format!(
        "Retrieval performance: {} vs {} ({} matched topics, paired two-tailed t-tests)\n\n",
        names.cell_label(comp.cell_a),
        names.cell_label(comp.cell_b),
        comp.matched_topics.len()
    );
    let text = format!("{title}{}\n{}", align(&rows), legend(report));
    (text, to_csv(&rows))
}

/// Renders the bias table of one comparison: MB and MAB row groups with a
/// p-value footer each.
pub fn render_bias_table(
    report: &AuditReport,
    comp: &ComparisonReport,
    names: &EngineNames,
    style: PValueStyle,
) -> (String, String) {
    let index = entry_index(report);
    let mut rows = vec![{
        let mut h = vec!["group".to_string(), String::new()];
        h.extend(metric_headers(report));
        h
    }];
    for (group, tag) in [("MB", "paired_mb"), ("MAB", "paired_mab")] {
        for cell in [comp.cell_a, comp.cell_b] {
            let mut row = vec![group.to_string(), names.cell_label(cell)];
            match report.cell_report(cell) {
                Some(c) => {
                    for m in Metric::ALL {
                        let summary = c.bias.iter().find(|b| b.metric == m);
                        row.push(match summary {
                            Some(b) => fmt4(if group == "MB" { b.mb } else { b.mab }),
                            None => "-".to_string(),
                        });
                    }
                }
                None => row.extend(Metric::ALL.iter().map(|_| "-".to_string())),
            }
            rows.push(row);
        }
        let mut p_row = vec![group.to_string(), "p-value".to_string()];
        for m in Metric::ALL {
            let id = format!("{tag}:{}:{}", comp.id, m.id());
            p_row.push(p_cell(index.get(id.as_str()).copied(), style));
        }
        rows.push(p_row);
    }

    let title = format!(
        "Ideological bias: {} vs {} (per-query beta; {} matched topics, paired two-tailed t-tests)\n\n",
        names.cell_label(comp.cell_a),
        names.cell_label(comp.cell_b),
        comp.matched_topics.len()
    );
    let text = format!("{title}{}\n{}", align(&rows), legend(report));
    (text, to_csv(&rows))
}

/// Renders the existence-of-bias table: one row per one-sample test in
/// plan order.
pub fn render_existence_table(
    report: &AuditReport,
    names: &EngineNames,
    style: PValueStyle,
) -> (String, String) {
    let mut rows = vec![vec![
        "cell".to_string(),
        "metric".to_string(),
        "measure".to_string(),
        "value".to_string(),
        "t".to_string(),
        "df".to_string(),
        "p-value".to_string(),
        "verdict".to_string(),
    ]];
    for e in &report.entries {
        let measure = match e.entry.kind {
            EntryKind::ExistenceMb => "MB",
            EntryKind::ExistenceMab => "MAB",
            _ => continue,
        };
        let cell = e.entry.cell_a;
        let value = report
            .cell_report(cell)
            .and_then(|c| c.bias.iter().find(|b| b.metric == e.entry.metric))
            .map(|b| fmt4(if measure == "MB" { b.mb } else { b.mab }))
            .unwrap_or_else(|| "-".to_string());
        let mut row = vec![
            names.cell_label(cell),
            e.entry.metric.label(report.metric_config.k),
            measure.to_string(),
            value,
        ];
        match &e.outcome {
            TestOutcome::Tested {
                result,
                raw_significant,
                corrected_significant,
            } => {
                row.push(fmt4(result.t_stat));
                row.push(result.df.to_string());
                row.push(format!(
                    "{}{}",
                    format_p(result.p_value, style),
                    marker(*raw_significant, *corrected_significant)
                ));
                row.push(match (raw_significant, corrected_significant) {
                    (_, Some(true)) => "significant (corrected)".to_string(),
                    (true, _) => "significant (raw only)".to_string(),
                    _ => "not significant".to_string(),
                });
            }
            TestOutcome::Untestable { .. } => {
                row.push("-".to_string());
                row.push("-".to_string());
                row.push("n/a (zero variance)".to_string());
                row.push("untestable".to_string());
            }
        }
        rows.push(row);
    }

    let title = format!(
        "Existence of bias: one-sample two-tailed t-tests against zero\nalpha = {}, m = {}, adjusted alpha = {:.6}, family-wise error without correction = {}\n\n",
        report.alpha,
        report.correction.m,
        report.correction.adjusted_alpha,
        fmt4(report.correction.fwer_uncorrected),
    );
    let text = format!("{title}{}\n{}", align(&rows), legend(report));
    (text, to_csv(&rows))
}

fn figure_csv(points: &[(f64, f64, String, String)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "topic_id", "series"])
        .expect("in-memory write");
    for (x, y, topic, series) in points {
        w.write_record([&x.to_string(), &y.to_string(), topic, series])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
}

/// Renders figure point files for one metric: per-location leaning
/// scatters (x = conservative score, y = liberal score, one series per
/// engine) and per-location beta scatters (x = engine1 beta, y = engine2
/// beta). Every file ends with two `diagonal` rows carrying the identity
/// reference line's endpoints. Returns (file name, contents) pairs.
pub fn render_figure_data(report: &AuditReport, metric: Metric) -> Vec<(String, String)> {
    let mut files = Vec::new();
    let bound = max_score(metric, &report.metric_config);

    for location in Location::ALL {
        let mut points: Vec<(f64, f64, String, String)> = Vec::new();
        let mut any_cell = false;
        for engine in Engine::ALL {
            let cell = Cell::new(engine, location);
            let Some(c) = report.cell_report(cell) else {
                continue;
            };
            any_cell = true;
            if let Some(b) = c.bias.iter().find(|b| b.metric == metric) {
                for q in &b.per_query {
                    points.push((
                        q.score_conservative,
                        q.score_liberal,
                        q.topic_id.clone(),
                        engine.to_string(),
                    ));
                }
            }
        }
        if any_cell {
            points.push((0.0, 0.0, String::new(), "diagonal".to_string()));
            points.push((bound, bound, String::new(), "diagonal".to_string()));
            files.push((
                format!("leaning_{}_{}.csv", metric.id(), location),
                figure_csv(&points),
            ));
        }
    }

    for location in Location::ALL {
        let comp = report.comparisons.iter().find(|c| {
            c.cell_a == Cell::new(Engine::Engine1, location)
                && c.cell_b == Cell::new(Engine::Engine2, location)
        });
        let Some(comp) = comp else { continue };
        let beta_of = |cell: Cell| -> Option<BTreeMap<&String, f64>> {
            Some(
                report
                    .cell_report(cell)?
                    .bias
                    .iter()
                    .find(|b| b.metric == metric)?
                    .per_query
                    .iter()
                    .map(|s| (&s.topic_id, s.beta))
                    .collect(),
            )
        };
        let (Some(a), Some(b)) = (beta_of(comp.cell_a), beta_of(comp.cell_b)) else {
            continue;
        };
        let mut points: Vec<(f64, f64, String, String)> = comp
            .matched_topics
            .iter()
            .map(|t| (a[t], b[t], t.clone(), comp.id.clone()))
            .collect();
        points.push((-bound, -bound, String::new(), "diagonal".to_string()));
        points.push((bound, bound, String::new(), "diagonal".to_string()));
        files.push((
            format!("beta_{}_{}.csv", metric.id(), location),
            figure_csv(&points),
        ));
    }

    files
}

/// Serializes the full report as pretty-printed JSON with stable key
/// order. Every test's statistic, p-value, and verdict appears at full
/// precision.
pub fn render_summary(report: &AuditReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Parses a summary produced by [`render_summary`]; numeric fields round-
/// trip exactly.
pub fn parse_summary(text: &str) -> Result<AuditReport> {
    serde_json::from_str(text).map_err(|e| Error::Invalid(format!("bad summary file: {e}")))
}

fn file_id(comparison_id: &str) -> String {
    comparison_id.replace(':', "_")
}

fn write(path: &Path, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    written.push(path.to_path_buf());
    Ok(())
}

/// Writes every output of an audit under `out_dir`: per-comparison
/// performance and bias tables (text and CSV), the existence table, the
/// figure point files for all three metrics, and the JSON summary.
/// Returns the written paths in order.
pub fn render_all(
    report: &AuditReport,
    out_dir: &Path,
    names: &EngineNames,
    style: PValueStyle,
) -> Result<Vec<PathBuf>> {
    let tables = out_dir.join("tables");
    let figures = out_dir.join("figures");
    std::fs::create_dir_all(&tables).map_err(|e| Error::io(&tables, e))?;
    std::fs::create_dir_all(&figures).map_err(|e| Error::io(&figures, e))?;
    let mut written = Vec::new();

    for comp in &report.comparisons {
        let id = file_id(&comp.id);
        let (text, csv) = render_performance_table(report, comp, names, style);
        write(
            &tables.join(format!("performance_{id}.txt")),
            &text,
            &mut written,
        )?;
        write(
            &tables.join(format!("performance_{id}.csv")),
            &csv,
            &mut written,
        )?;
        let (text, csv) = render_bias_table(report, comp, names, style);
        write(&tables.join(format!("bias_{id}.txt")), &text, &mut written)?;
        write(&tables.join(format!("bias_{id}.csv")), &csv, &mut written)?;
    }

    let (text, csv) = render_existence_table(report, names, style);
    write(&tables.join("existence.txt"), &text, &mut written)?;
    write(&tables.join("existence.csv"), &csv, &mut written)?;

    for metric in Metric::ALL {
        for (name, contents) in render_figure_data(report, metric) {
            write(&figures.join(name), &contents, &mut written)?;
        }
    }

    write(
        &out_dir.join("summary.json"),
        &render_summary(report),
        &mut written,
    )?;
    Ok(written)
}
