//! `perfport`: command-line front end for the portability results repository.
//!
//! Exit codes: 0 success, 1 partial or data failure, 2 usage or configuration failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use perfport_core::report::Format;

#[derive(Debug, Parser)]
#[command(name = "perfport", version, about = "Performance portability metrics and results repository")]
pub struct Cli {
    /// Repository directory.
    #[arg(long, global = true, env = "PERFPORT_REPO")]
    pub repo: Option<PathBuf>,

    /// Output format: text, markdown or csv.
    #[arg(long, global = true, default_value = "text", value_parser = parse_format)]
    pub format: Format,

    /// Decimal places for portability scores (efficiency cells use one fewer).
    #[arg(long, global = true, default_value_t = 1)]
    pub precision: usize,

    #[command(subcommand)]
    pub command: Command,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Manage platform descriptors.
    #[command(subcommand)]
    Platform(PlatformCommand),
    /// Ingest a file of run records, one JSON object per line.
    Ingest(IngestArgs),
    /// Render a portability report for an application or a suite.
    Report(ReportArgs),
    /// List best-known baselines in every reference space.
    Baselines(BaselinesArgs),
    /// List stored records matching key=value filters.
    Query(QueryArgs),
}

#[derive(Debug, Subcommand)]
pub enum PlatformCommand {
    /// Register a platform (idempotent for identical definitions).
    Add(PlatformAddArgs),
}

#[derive(Debug, Args)]
pub struct PlatformAddArgs {
    /// Read platforms from a file, one JSON object per line.
    #[arg(long, conflicts_with_all = ["id", "json"])]
    pub file: Option<PathBuf>,
    /// Inline JSON platform definition.
    #[arg(long, conflicts_with = "id")]
    pub json: Option<String>,
    #[arg(long, requires_all = ["name", "cores", "chips", "cores_per_chip"])]
    pub id: Option<String>,
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value = "cpu")]
    pub arch_class: String,
    #[arg(long)]
    pub cores: Option<u32>,
    #[arg(long)]
    pub chips: Option<u32>,
    #[arg(long)]
    pub cores_per_chip: Option<u32>,
    /// Theoretical peak, GFLOP/s.
    #[arg(long)]
    pub peak_theoretical: Option<f64>,
    /// Roofline compute roof, GFLOP/s.
    #[arg(long, requires = "peak_bandwidth")]
    pub peak_flops: Option<f64>,
    /// Roofline memory roof, GB/s.
    #[arg(long, requires = "peak_flops")]
    pub peak_bandwidth: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub file: PathBuf,
    /// Accept duplicates as new records superseding the earlier ones.
    #[arg(long)]
    pub supersede: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, conflicts_with = "suite", required_unless_present = "suite")]
    pub app: Option<String>,
    #[arg(long)]
    pub suite: Option<String>,
    /// Comma-separated platform ids, or `all`.
    #[arg(long, default_value = "all")]
    pub platforms: String,
    /// app-0, app-1, app-2, arch-0 or arch-1.
    #[arg(long = "type", default_value = "app-0")]
    pub etype: String,
    /// Comma-separated: pp, hm, hm-strict, sd, or all.
    #[arg(long)]
    pub metrics: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub workload: Option<String>,
    /// Per-platform suite efficiencies (`platform_id,efficiency_percent`) instead of computing them.
    #[arg(long, requires = "suite")]
    pub suite_efficiencies: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselinesArgs {
    #[arg(long)]
    pub app: String,
    #[arg(long)]
    pub platform: String,
    #[arg(long)]
    pub workload: String,
    /// Restrict the same-implementation space to one programming model.
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Filter predicate `key=value` (application, suite, platform, model, level, workload, portable).
    #[arg(long = "where")]
    pub filters: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("perfport: {e}");
            e.exit_code()
        }
    }
}
