//! Command-line interface.
//!
//! Exit codes:
//!
//! | Code | Meaning |
//! |---|---|
//! | 0 | success; for `verify`, no Discrepancy or Ineligible finding (NeedsReview alone still exits 0) |
//! | 1 | `verify` found at least one Discrepancy or Ineligible item |
//! | 2 | usage error (bad flags or arguments) |
//! | 3 | validation error (invalid KB, application document, item file or config) |
//! | 4 | IO or runtime failure |

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use gpva_core::gir::classify;
use gpva_core::intake::{parse_application, parse_item_blocks};
use gpva_core::verify::{render_report_text, Status};

use crate::config::ServiceConfig;
use crate::engine::Verifier;
use crate::kb_handle::{load_kb, KbLoadError};
use crate::metrics::simulate_throughput;
use crate::service::Service;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "gpva", version, about = "HS classification verification for tariff-exemption applications")]
pub struct Cli {
    /// Service configuration file (TOML). `GPVA_*` variables override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify an application document and write the report.
    Verify {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
    },
    /// Classify the first item of an item file and print the code and trace.
    Classify {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        item: PathBuf,
    },
    /// Knowledge base maintenance.
    Kb {
        #[command(subcommand)]
        command: KbCommand,
    },
    /// Run the HTTP API.
    Serve,
    /// Verify n synthetic items and compare with the manual baseline.
    SimulateThroughput {
        n: usize,
        /// KB to use; the configured KB when omitted.
        #[arg(long)]
        kb: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum KbCommand {
    /// Validate a KB file and print its version.
    Validate { path: PathBuf },
}

struct Failure {
    code: i32,
    message: String,
}

fn validation(message: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_VALIDATION, message: message.to_string() }
}

fn runtime(message: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_RUNTIME, message: message.to_string() }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| runtime(format!("cannot read {}: {e}", path.display())))
}

fn kb(path: &Path) -> Result<gpva_core::kb::KnowledgeBase, Failure> {
    load_kb(path).map_err(|e| match e {
        KbLoadError::Read { .. } => runtime(e),
        _ => validation(e),
    })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: Cli) -> Result<i32, Failure> {
    let config = || ServiceConfig::load(cli.config.as_deref()).map_err(validation);
    match &cli.command {
        Command::Verify { kb: kb_path, input, report, format } => {
            let config = config()?;
            let kb = kb(kb_path)?;
            let parsed = parse_application(&read(input)?).map_err(|e| validation(format!("{}: {e}", input.display())))?;
            if !parsed.is_clean() {
                let lines: Vec<String> = parsed
                    .issues
                    .iter()
                    .map(|i| format!("item block {} line {}: {}: {}", i.block, i.line, i.field, i.message))
                    .collect();
                return Err(validation(format!("{}:\n{}", input.display(), lines.join("\n"))));
            }
            let result = Verifier::from_config(&config).verify(&kb, &parsed.application);
            let body = match format {
                ReportFormat::Json => result.to_json(),
                ReportFormat::Text => render_report_text(&result),
            };
            match report {
                Some(path) => std::fs::write(path, body.as_bytes())
                    .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))?,
                None => println!("{body}"),
            }
            let s = &result.summary;
            eprintln!(
                "{} item(s): Verified {}, Discrepancy {}, Ineligible {}, NeedsReview {}",
                s.total, s.verified, s.discrepancy, s.ineligible, s.needs_review
            );
            let flagged = result.findings.iter().any(|f| matches!(f.status, Status::Discrepancy | Status::Ineligible));
            Ok(if flagged { EXIT_FINDINGS } else { EXIT_OK })
        }
        Command::Classify { kb: kb_path, item } => {
            let config = config()?;
            let kb = kb(kb_path)?;
            let (items, issues) = parse_item_blocks(&read(item)?).map_err(|e| validation(format!("{}: {e}", item.display())))?;
            if let Some(issue) = issues.first() {
                return Err(validation(format!("{}: {}: {}", item.display(), issue.field, issue.message)));
            }
            let item = items.first().ok_or_else(|| validation("no item"))?;
            let result = classify(&kb, item, &config.engine());
            let mut out = std::io::stdout().lock();
            let code = result.code.as_ref().map_or_else(|| String::from("none"), |c| c.to_string());
            let _ = writeln!(out, "code: {code}");
            let _ = writeln!(out, "confidence: {:.2}", result.confidence);
            if result.needs_review || result.evidence_incomplete {
                let _ = writeln!(out, "needs review: {}", result.needs_review || result.evidence_incomplete);
            }
            if !result.missing_attributes.is_empty() {
                let _ = writeln!(out, "missing attributes: {}", result.missing_attributes.join(", "));
            }
            let _ = writeln!(out, "trace:");
            for (i, step) in result.trace.iter().enumerate() {
                let notes =
                    if step.cited_notes.is_empty() { String::new() } else { format!(" [notes: {}]", step.cited_notes.join(", ")) };
                let _ = writeln!(out, "  {}. {}: {}{notes}", i + 1, step.rule.name(), step.justification);
            }
            Ok(EXIT_OK)
        }
        Command::Kb { command: KbCommand::Validate { path } } => {
            let kb = kb(path)?;
            println!(
                "ok: version {}, {} heading(s), {} note(s), fingerprint {}",
                kb.version(),
                kb.heading_count(),
                kb.notes().len(),
                kb.fingerprint()
            );
            Ok(EXIT_OK)
        }
        Command::Serve => {
            let config = config()?;
            let service = Service::from_config(config).map_err(validation)?;
            let rt = tokio::runtime::Runtime::new().map_err(runtime)?;
            eprintln!("listening on {}", service.config().listen);
            rt.block_on(crate::api::serve(Arc::new(service))).map_err(runtime)?;
            Ok(EXIT_OK)
        }
        Command::SimulateThroughput { n, kb: kb_path } => {
            let config = config()?;
            let kb = kb(kb_path.as_deref().unwrap_or(&config.kb_path))?;
            let report = simulate_throughput(&kb, &Verifier::from_config(&config), *n, config.manual_seconds_per_item);
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(EXIT_OK)
        }
    }
}
