//! Command-line front end: validate datasets, score inter-rater
//! agreement, run the full audit, or re-render outputs from a saved
//! summary.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use serpbias::annotations::{fleiss_kappa, load_judgments, LabelStore};
use serpbias::audit::{default_plan_with, run_audit, AuditReport, TestOutcome};
use serpbias::config::{AuditConfig, PValueStyle};
use serpbias::corpus::{load_dataset, Cell};
use serpbias::report::{parse_summary, render_all, EngineNames};
use serpbias::Error;

#[derive(Parser)]
#[command(
    name = "serpbias",
    version,
    about = "Audits ideological bias in search-engine result pages"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load the dataset and judgments, check every invariant, and print
    /// a coverage summary.
    Validate {
        /// Audit configuration file (TOML).
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Compute chance-corrected inter-rater agreement per judgment file.
    Agreement {
        /// Audit configuration file (TOML).
        #[arg(short, long)]
        config: PathBuf,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run the full audit: tables, figure data, and summary.json.
    Audit {
        /// Audit configuration file (TOML).
        #[arg(short, long)]
        config: PathBuf,
        /// Write outputs here instead of the configured directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Override the significance level.
        #[arg(long)]
        alpha: Option<f64>,
        /// Override the RBP persistence parameter.
        #[arg(long)]
        rbp_persistence: Option<f64>,
        /// Override how table p-values are shown: raw | threshold.
        #[arg(long)]
        p_style: Option<PValueStyle>,
    },
    /// Re-render tables and figure data from a saved summary.json.
    Render {
        /// Summary file written by a previous audit run.
        #[arg(long)]
        summary: PathBuf,
        /// Output directory (default: the summary file's directory).
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Override how table p-values are shown: raw | threshold.
        #[arg(long)]
        p_style: Option<PValueStyle>,
        /// Optional config supplying engine display aliases.
        #[arg(short, long)]
        config: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config } => cmd_validate(&config),
        Command::Agreement { config, json } => cmd_agreement(&config, json),
        Command::Audit {
            config,
            output_dir,
            alpha,
            rbp_persistence,
            p_style,
        } => cmd_audit(&config, output_dir, alpha, rbp_persistence, p_style),
        Command::Render {
            summary,
            output_dir,
            p_style,
            config,
        } => cmd_render(&summary, output_dir, p_style, config.as_deref()),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn load_labels(config: &AuditConfig) -> serpbias::Result<LabelStore> {
    let mut store = LabelStore::new();
    for entry in &config.judgments {
        let judgments = load_judgments(&entry.path)?;
        store.add_judgments(entry.location, judgments)?;
    }
    Ok(store)
}

fn cmd_validate(config_path: &Path) -> serpbias::Result<()> {
    let config = AuditConfig::load(config_path)?;
    let dataset = load_dataset(&config.dataset)?;
    println!("dataset: {}", dataset.summary());
    for (key, value) in dataset.provenance() {
        println!("  {key}: {value}");
    }
    let labels = load_labels(&config)?;
    for warning in labels.warnings() {
        println!("warning: {warning}");
    }
    println!("coverage:");
    for cell in Cell::grid() {
        let serps = dataset.cell_serps(cell);
        let total: usize = serps.iter().map(|s| s.results.len()).sum();
        let labeled = serps
            .iter()
            .flat_map(|s| &s.results)
            .filter(|r| labels.label(cell.location, &r.doc_id).is_some())
            .count();
        println!(
            "  {cell}: {} SERPs, {labeled}/{total} results labeled",
            serps.len()
        );
    }
    println!("ok");
    Ok(())
}

fn cmd_agreement(config_path: &Path, json: bool) -> serpbias::Result<()> {
    let config = AuditConfig::load(config_path)?;
    let mut reports = Vec::new();
    for entry in &config.judgments {
        let judgments = load_judgments(&entry.path)?;
        let report = fleiss_kappa(&judgments)?;
        reports.push((entry.location, entry.path.clone(), report));
    }
    if json {
        let value: Vec<serde_json::Value> = reports
            .iter()
            .map(|(location, path, r)| {
                serde_json::json!({
                    "location": location,
                    "path": path,
                    "agreement": r,
                })
            })
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&value).expect("report serializes")
        );
        return Ok(());
    }
    for (location, path, r) in &reports {
        println!("{location} ({})", path.display());
        println!("  kappa: {:.4}", r.kappa);
        println!(
            "  items: {} ({} raters each, {} excluded)",
            r.n_items, r.n_raters_per_item, r.excluded_items
        );
        for (category, share) in &r.category_proportions {
            println!("  {category}: {:.4}", share);
        }
    }
    Ok(())
}

fn audit_counts(report: &AuditReport) -> (usize, usize, usize) {
    let mut raw = 0;
    let mut corrected = 0;
    let mut untestable = 0;
    for e in &report.entries {
        match &e.outcome {
            TestOutcome::Tested {
                raw_significant,
                corrected_significant,
                ..
            } => {
                if *raw_significant {
                    raw += 1;
                }
                if *corrected_significant == Some(true) {
                    corrected += 1;
                }
            }
            TestOutcome::Untestable { .. } => untestable += 1,
        }
    }
    (raw, corrected, untestable)
}

fn cmd_audit(
    config_path: &Path,
    output_dir: Option<PathBuf>,
    alpha: Option<f64>,
    rbp_persistence: Option<f64>,
    p_style: Option<PValueStyle>,
) -> serpbias::Result<()> {
    let mut config = AuditConfig::load(config_path)?;
    if let Some(dir) = output_dir {
        config.output_dir = dir;
    }
    if let Some(a) = alpha {
        config.alpha = a;
    }
    if let Some(p) = rbp_persistence {
        config.metrics.rbp_persistence = p;
    }
    if let Some(style) = p_style {
        config.report.p_value_style = style;
    }
    config.validate()?;

    let dataset = load_dataset(&config.dataset)?;
    println!("dataset: {}", dataset.summary());
    let labels = load_labels(&config)?;
    for warning in labels.warnings() {
        println!("warning: {warning}");
    }

    let plan = default_plan_with(&dataset, config.alpha, &config.plan)?;
    let correction = plan.correction()?;
    println!(
        "plan: {} tests, m = {}, alpha = {}, adjusted alpha = {:.6}",
        plan.entries.len(),
        correction.m,
        correction.alpha,
        correction.adjusted_alpha
    );

    let report = run_audit(&dataset, &labels, &plan, &config.metrics)?;
    let names = EngineNames::from_aliases(&config.engines)?;
    let written = render_all(
        &report,
        &config.output_dir,
        &names,
        config.report.p_value_style,
    )?;

    let (raw, corrected_n, untestable) = audit_counts(&report);
    println!(
        "verdicts: {raw} raw-significant, {corrected_n} corrected-significant, {untestable} untestable"
    );
    println!(
        "wrote {} files under {}",
        written.len(),
        config.output_dir.display()
    );
    Ok(())
}

fn cmd_render(
    summary_path: &Path,
    output_dir: Option<PathBuf>,
    p_style: Option<PValueStyle>,
    config_path: Option<&Path>,
) -> serpbias::Result<()> {
    let text = std::fs::read_to_string(summary_path).map_err(|e| Error::io(summary_path, e))?;
    let report = parse_summary(&text)?;
    let config = config_path.map(AuditConfig::load).transpose()?;
    let names = match &config {
        Some(c) => EngineNames::from_aliases(&c.engines)?,
        None => EngineNames::default(),
    };
    let style = p_style
        .or(config.as_ref().map(|c| c.report.p_value_style))
        .unwrap_or_default();
    let out_dir = output_dir.unwrap_or_else(|| {
        summary_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .to_path_buf()
    });
    let written = render_all(&report, &out_dir, &names, style)?;
    println!("wrote {} files under {}", written.len(), out_dir.display());
    Ok(())
}
