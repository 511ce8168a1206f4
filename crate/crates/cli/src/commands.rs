use std::fmt::{self, Write as _};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use perfport_core::efficiency::{EfficiencyError, EfficiencyType};
use perfport_core::report::{
    application_report, parse_suite_column, render, render_suite, suite_report, suite_report_from_column, Format,
    MetricSelection, RenderOptions, ReportError, ReportRequest,
};
use perfport_core::repository::{
    IngestOptions, Level, Platform, PlatformAdd, RecordFilter, RecordInput, ReferenceSpace, RepoError, Repository,
};

use crate::{BaselinesArgs, Cli, Command, IngestArgs, PlatformAddArgs, PlatformCommand, QueryArgs, ReportArgs};

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or configuration: exit 2.
    Usage(String),
    /// Command ran but some data was rejected: exit 1.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Data(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

impl From<RepoError> for CliError {
    fn from(e: RepoError) -> Self {
        match e {
            RepoError::Rejected(_) | RepoError::Duplicate { .. } | RepoError::Corrupt { .. } => {
                CliError::Data(e.to_string())
            }
            _ => usage(e),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Efficiency(EfficiencyError::Repository(RepoError::Io { .. })) => CliError::Data(e.to_string()),
            _ => usage(e),
        }
    }
}

fn repo_path(cli: &Cli) -> Result<&Path, CliError> {
    cli.repo.as_deref().ok_or_else(|| usage("no repository: pass --repo or set PERFPORT_REPO"))
}

fn emit(out: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    let _ = stdout.flush();
}

pub fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Platform(PlatformCommand::Add(args)) => platform_add(cli, args),
        Command::Ingest(args) => ingest(cli, args),
        Command::Report(args) => report(cli, args),
        Command::Baselines(args) => baselines(cli, args),
        Command::Query(args) => query(cli, args),
    }
}

fn read_file(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn platform_add(cli: &Cli, args: &PlatformAddArgs) -> Result<ExitCode, CliError> {
    let platforms: Vec<Platform> = if let Some(file) = &args.file {
        read_file(file)?
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| usage(format!("{}:{}: {e}", file.display(), i + 1))))
            .collect::<Result<_, _>>()?
    } else if let Some(json) = &args.json {
        vec![serde_json::from_str(json).map_err(usage)?]
    } else {
        let id = args.id.clone().ok_or_else(|| usage("platform add needs --file, --json or --id"))?;
        let roofline = match (args.peak_flops, args.peak_bandwidth) {
            (Some(peak_flops), Some(peak_bandwidth)) => Some(perfport_core::RooflineSpec { peak_flops, peak_bandwidth }),
            _ => None,
        };
        vec![Platform {
            platform_id: id,
            name: args.name.clone().unwrap_or_default(),
            arch_class: args.arch_class.parse().map_err(usage)?,
            cores: args.cores.unwrap_or_default(),
            chips: args.chips.unwrap_or_default(),
            cores_per_chip: args.cores_per_chip.unwrap_or_default(),
            peak_theoretical: args.peak_theoretical,
            roofline,
        }]
    };
    for p in &platforms {
        p.validate().map_err(usage)?;
    }

    let repo = Repository::open_write(repo_path(cli)?)?;
    let mut out = String::new();
    for p in platforms {
        let id = p.platform_id.clone();
        let verb = match repo.add_platform(p)? {
            PlatformAdd::Added => "added",
            PlatformAdd::Unchanged => "unchanged",
        };
        let _ = writeln!(out, "{verb} platform {id}");
    }
    emit(&out);
    Ok(ExitCode::SUCCESS)
}

fn ingest(cli: &Cli, args: &IngestArgs) -> Result<ExitCode, CliError> {
    let text = read_file(&args.file)?;
    let repo = Repository::open_write(repo_path(cli)?)?;
    let opts = IngestOptions { supersede: args.supersede };

    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut changes = Vec::new();
    let mut stale = std::collections::BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let result = serde_json::from_str::<RecordInput>(line)
            .map_err(|e| format!("parse error: {e}"))
            .and_then(|input| repo.ingest(input, opts).map_err(|e| e.to_string()));
        match result {
            Ok(outcome) => {
                accepted += 1;
                changes.extend(outcome.summary.baseline_changes);
                stale.extend(outcome.summary.stale_reports);
            }
            Err(msg) => {
                rejected += 1;
                eprintln!("{}:{lineno}: rejected: {msg}", args.file.display());
            }
        }
    }

    let mut out = format!("accepted {accepted}, rejected {rejected}\n");
    for c in &changes {
        let prev = c.previous.map_or_else(|| "none".to_string(), |p| format!("{} ({} s)", p.best_record, p.best_seconds));
        let _ = writeln!(
            out,
            "baseline {} {} {} {}: {prev} -> {} ({} s)",
            c.key.application_id, c.key.platform_id, c.key.workload, c.key.space, c.current.best_record, c.current.best_seconds
        );
    }
    for s in &stale {
        let _ = writeln!(out, "stale report {} {} {}", s.application_id, s.workload, s.etype);
    }
    emit(&out);
    Ok(if rejected > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn metric_selection(spec: Option<&str>) -> Result<MetricSelection, CliError> {
    let Some(spec) = spec else { return Ok(MetricSelection::default()) };
    let mut sel = MetricSelection::none();
    for part in spec.split(',').map(str::trim) {
        match part {
            "pp" | "arithmetic" => sel.arithmetic = true,
            "hm" | "harmonic" => sel.harmonic_supported = true,
            "hm-strict" | "strict" => sel.harmonic_strict = true,
            "sd" | "dispersion" => sel.dispersion = true,
            "all" => sel = MetricSelection::all(),
            other => return Err(usage(format!("unknown metric `{other}` (expected pp, hm, hm-strict, sd or all)"))),
        }
    }
    Ok(sel)
}

fn platform_list(spec: &str) -> Option<Vec<String>> {
    if spec == "all" {
        None
    } else {
        Some(spec.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
    }
}

fn report(cli: &Cli, args: &ReportArgs) -> Result<ExitCode, CliError> {
    let opts = RenderOptions { precision: cli.precision, metrics: metric_selection(args.metrics.as_deref())? };
    let platforms = platform_list(&args.platforms);

    if let Some(suite) = &args.suite {
        let report = match &args.suite_efficiencies {
            Some(path) => {
                let mut column = parse_suite_column(&read_file(path)?).map_err(usage)?;
                if let Some(ids) = &platforms {
                    column.retain(|(p, _)| ids.contains(p));
                }
                suite_report_from_column(suite, column)?
            }
            None => {
                let repo = Repository::open_read(repo_path(cli)?)?;
                suite_report(&repo.snapshot(), suite, platforms.as_deref())?
            }
        };
        emit(&render_suite(&report, cli.format, &opts));
        return Ok(ExitCode::SUCCESS);
    }

    let etype: EfficiencyType = args.etype.parse().map_err(usage)?;
    let app = args.app.clone().expect("clap enforces --app or --suite");
    let repo = Repository::open_read(repo_path(cli)?)?;
    let req = ReportRequest {
        application: app,
        platforms,
        etype,
        model: args.model.clone(),
        workload: args.workload.clone(),
    };
    let report = application_report(&repo.snapshot(), &req)?;
    emit(&render(&report, cli.format, &opts));
    Ok(ExitCode::SUCCESS)
}

fn baselines(cli: &Cli, args: &BaselinesArgs) -> Result<ExitCode, CliError> {
    let repo = Repository::open_read(repo_path(cli)?)?;
    let snap = repo.snapshot();

    let mut models: Vec<String> = match &args.model {
        Some(m) => vec![m.clone()],
        None => snap
            .records()
            .filter(|r| {
                r.application_id == args.app
                    && r.platform_id == args.platform
                    && r.workload == args.workload
                    && r.portable
                    && r.level == Level::Peak
            })
            .map(|r| r.model.clone())
            .collect(),
    };
    models.sort();
    models.dedup();

    let mut rows: Vec<(String, Option<(String, f64)>)> = Vec::new();
    if models.is_empty() {
        rows.push(("same_impl_peak".to_string(), None));
    }
    let spaces = models
        .into_iter()
        .map(|model| ReferenceSpace::SameImplPeak { model })
        .chain([ReferenceSpace::PortableAny, ReferenceSpace::AnyImpl]);
    for space in spaces {
        let label = space.to_string();
        let hit = snap.best_known(&args.app, &args.platform, &args.workload, space).ok();
        rows.push((label, hit.map(|(id, s)| (id.to_string(), s))));
    }

    let mut out = String::new();
    match cli.format {
        Format::Csv => {
            out.push_str("space,record,seconds\n");
            for (label, hit) in &rows {
                match hit {
                    Some((id, s)) => { let _ = writeln!(out, "\"{label}\",{id},{s}"); }
                    None => { let _ = writeln!(out, "\"{label}\",none,"); }
                }
            }
        }
        Format::Markdown => {
            out.push_str("| Space | Record | Seconds |\n| --- | --- | --- |\n");
            for (label, hit) in &rows {
                match hit {
                    Some((id, s)) => { let _ = writeln!(out, "| {label} | {id} | {s} |"); }
                    None => { let _ = writeln!(out, "| {label} | none | |"); }
                }
            }
        }
        Format::Text => {
            for (label, hit) in &rows {
                match hit {
                    Some((id, s)) => { let _ = writeln!(out, "{label}: {id} {s} s"); }
                    None => { let _ = writeln!(out, "{label}: none"); }
                }
            }
        }
    }
    emit(&out);
    Ok(ExitCode::SUCCESS)
}

fn query(cli: &Cli, args: &QueryArgs) -> Result<ExitCode, CliError> {
    let filter = RecordFilter::parse_pairs(args.filters.iter().map(String::as_str)).map_err(usage)?;
    let repo = Repository::open_read(repo_path(cli)?)?;
    let snap = repo.snapshot();
    let hits = snap.query(&filter);

    let header = ["record", "application", "suite", "platform", "model", "portable", "level", "workload", "threads", "seconds"];
    let cells = |r: &perfport_core::repository::RunRecord| {
        [
            r.record_id.0.to_string(),
            r.application_id.clone(),
            r.suite_id.clone(),
            r.platform_id.clone(),
            r.model.clone(),
            r.portable.to_string(),
            r.level.to_string(),
            r.workload.clone(),
            r.threads.to_string(),
            r.median_seconds.to_string(),
        ]
    };
    let mut out = String::new();
    match cli.format {
        Format::Csv => {
            let _ = writeln!(out, "{}", header.join(","));
            for r in &hits {
                let row: Vec<String> = cells(r)
                    .into_iter()
                    .map(|c| if c.contains([',', '"']) { format!("\"{}\"", c.replace('"', "\"\"")) } else { c })
                    .collect();
                let _ = writeln!(out, "{}", row.join(","));
            }
        }
        Format::Markdown => {
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let _ = writeln!(out, "|{}", " --- |".repeat(header.len()));
            for r in &hits {
                let _ = writeln!(out, "| {} |", cells(r).join(" | "));
            }
        }
        Format::Text => {
            let _ = writeln!(out, "{}", header.join("\t"));
            for r in &hits {
                let _ = writeln!(out, "{}", cells(r).join("\t"));
            }
        }
    }
    emit(&out);
    Ok(ExitCode::SUCCESS)
}
