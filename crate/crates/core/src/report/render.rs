use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use super::{ClassBreakdown, MetricSummary, PortabilityReport, ReportError, ReportRow, SuiteReport};

pub const CSV_HEADER: [&str; 6] = ["Platform", "Base threads", "Base seconds", "Peak threads", "Peak seconds", "Efficiency"];
const SUITE_HEADER: [&str; 2] = ["Platform", "Efficiency"];
const UNSUPPORTED: &str = "--";

const LABEL_PP: &str = "P̄P";
const LABEL_HM: &str = "ℰ(supported)";
const LABEL_HM_STRICT: &str = "ℰ(strict)";
const LABEL_SD_HM: &str = "S.D.(HM)";
const LABEL_SD_AM: &str = "S.D.(AM)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Markdown,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected text, markdown or csv)")),
        }
    }
}

/// Which summary metrics to print. Reports always compute all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricSelection {
    pub arithmetic: bool,
    pub harmonic_supported: bool,
    pub harmonic_strict: bool,
    pub dispersion: bool,
}

impl Default for MetricSelection {
    fn default() -> Self {
        Self { arithmetic: true, harmonic_supported: true, harmonic_strict: false, dispersion: true }
    }
}

impl MetricSelection {
    pub fn all() -> Self {
        Self { arithmetic: true, harmonic_supported: true, harmonic_strict: true, dispersion: true }
    }

    pub fn none() -> Self {
        Self { arithmetic: false, harmonic_supported: false, harmonic_strict: false, dispersion: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    /// Decimals for portability scores; efficiency columns use one fewer.
    pub precision: usize,
    pub metrics: MetricSelection,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { precision: 1, metrics: MetricSelection::default() }
    }
}

impl RenderOptions {
    fn cell_precision(&self) -> usize {
        self.precision.saturating_sub(1)
    }
}

/// Fixed-point rendering with ties rounded to even.
pub fn format_half_even(value: f64, digits: usize) -> String {
    let scale = 10f64.powi(digits as i32);
    let mut rounded = (value * scale).round_ties_even() / scale;
    if rounded == 0.0 {
        rounded = 0.0;
    }
    format!("{rounded:.digits$}")
}

fn pct(fraction: f64, digits: usize) -> String {
    format_half_even(fraction * 100.0, digits)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| UNSUPPORTED.to_string(), |v| v.to_string())
}

fn table_cells(row: &ReportRow, opts: &RenderOptions) -> [String; 6] {
    let eff = match row.efficiency {
        Some(e) => {
            let mut s = pct(e, opts.cell_precision());
            if row.clamped {
                s.push('*');
            }
            s
        }
        None => UNSUPPORTED.to_string(),
    };
    [
        row.platform_id.clone(),
        opt(row.base.map(|c| c.threads)),
        opt(row.base.map(|c| c.seconds)),
        opt(row.peak.map(|c| c.threads)),
        opt(row.peak.map(|c| c.seconds)),
        eff,
    ]
}

fn summary_parts(s: &MetricSummary, opts: &RenderOptions) -> Vec<String> {
    let p = opts.precision;
    let m = opts.metrics;
    let mut parts = Vec::new();
    if m.arithmetic {
        parts.push(format!("{LABEL_PP} = {}%", pct(s.pp_arithmetic.value, p)));
    }
    if m.harmonic_supported {
        parts.push(format!("{LABEL_HM} = {}%", pct(s.pp_harmonic_supported.value, p)));
    }
    if m.harmonic_strict {
        parts.push(format!("{LABEL_HM_STRICT} = {}%", pct(s.pp_harmonic_strict.value, p)));
    }
    if m.dispersion {
        if let Some(d) = s.dispersion {
            parts.push(format!("{LABEL_SD_HM} = {}", format_half_even(d.sd_hm, 2)));
            parts.push(format!("{LABEL_SD_AM} = {}", format_half_even(d.sd_am, 2)));
        }
    }
    if s.is_empty_support() {
        parts.push("(no supported platforms)".to_string());
    }
    parts
}

fn summary_line(label: &str, s: &MetricSummary, opts: &RenderOptions) -> String {
    format!(
        "{label} ({}/{} supported): {}",
        s.pp_arithmetic.platform_count_supported,
        s.pp_arithmetic.platform_count_total,
        summary_parts(s, opts).join("  ")
    )
}

fn title(report: &PortabilityReport) -> String {
    let mut t = report.application_id.clone();
    if let Some(m) = &report.model {
        let _ = write!(t, "  model={m}");
    }
    if let Some(w) = &report.workload {
        let _ = write!(t, "  workload={w}");
    }
    t
}

fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{s}{}", " ".repeat(widths[i] - s.chars().count())))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn class_lines(breakdown: &[ClassBreakdown], opts: &RenderOptions) -> Vec<String> {
    breakdown.iter().map(|c| summary_line(&c.arch_class.to_string(), &c.summary, opts)).collect()
}

/// Render a report. Output is a pure function of the report and options.
pub fn render(report: &PortabilityReport, format: Format, opts: &RenderOptions) -> String {
    match format {
        Format::Text => render_text(report, opts),
        Format::Markdown => render_markdown(report, opts),
        Format::Csv => render_csv(report),
    }
}

fn render_text(report: &PortabilityReport, opts: &RenderOptions) -> String {
    let mut out = format!("{}\n{}\n\n", title(report), report.efficiency_type.describe());
    let mut table = vec![CSV_HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    table.extend(report.rows.iter().map(|r| table_cells(r, opts).to_vec()));
    out.push_str(&aligned(&table));
    if report.rows.iter().any(|r| r.clamped) {
        out.push_str("* ratio above 1, clamped to 100%\n");
    }
    out.push('\n');
    out.push_str(&summary_line("all classes", &report.summary, opts));
    out.push('\n');
    if report.arch_class_breakdown.len() > 1 {
        for line in class_lines(&report.arch_class_breakdown, opts) {
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

fn md_row(cells: &[String]) -> String {
    format!("| {} |\n", cells.join(" | "))
}

fn render_markdown(report: &PortabilityReport, opts: &RenderOptions) -> String {
    let mut out = format!("### {}\n\n{}\n\n", title(report), report.efficiency_type.describe());
    out.push_str(&md_row(&CSV_HEADER.map(String::from)));
    out.push_str(&md_row(&vec!["---".to_string(); CSV_HEADER.len()]));
    for r in &report.rows {
        out.push_str(&md_row(&table_cells(r, opts)));
    }
    let footer = format!("{LABEL_PP} = {}%", pct(report.summary.pp_arithmetic.value, opts.precision));
    out.push_str(&md_row(&["".into(), "".into(), "".into(), "".into(), "".into(), format!("**{footer}**")]));
    out.push('\n');
    if report.rows.iter().any(|r| r.clamped) {
        out.push_str("\\* ratio above 1, clamped to 100%\n\n");
    }
    out.push_str(&format!("- {}\n", summary_line("all classes", &report.summary, opts)));
    if report.arch_class_breakdown.len() > 1 {
        for line in class_lines(&report.arch_class_breakdown, opts) {
            out.push_str(&format!("- {line}\n"));
        }
    }
    out
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().flexible(false).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv output is utf-8")
}

/// CSV carries full-precision fractions, so values re-derive exactly.
fn render_csv(report: &PortabilityReport) -> String {
    let mut w = csv_writer();
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in &report.rows {
        w.write_record([
            r.platform_id.clone(),
            opt(r.base.map(|c| c.threads)),
            opt(r.base.map(|c| c.seconds)),
            opt(r.peak.map(|c| c.threads)),
            opt(r.peak.map(|c| c.seconds)),
            opt(r.efficiency),
        ])
        .expect("in-memory write");
    }
    let s = &report.summary;
    let mut summary = vec![
        (LABEL_PP, Some(s.pp_arithmetic.value)),
        (LABEL_HM, Some(s.pp_harmonic_supported.value)),
        (LABEL_HM_STRICT, Some(s.pp_harmonic_strict.value)),
    ];
    if let Some(d) = s.dispersion {
        summary.push((LABEL_SD_HM, Some(d.sd_hm)));
        summary.push((LABEL_SD_AM, Some(d.sd_am)));
    }
    for (label, v) in summary {
        w.write_record([label.to_string(), String::new(), String::new(), String::new(), String::new(), opt(v)])
            .expect("in-memory write");
    }
    finish(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRow {
    pub platform_id: String,
    pub base_threads: Option<u32>,
    pub base_seconds: Option<f64>,
    pub peak_threads: Option<u32>,
    pub peak_seconds: Option<f64>,
    pub efficiency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedCsv {
    pub rows: Vec<ParsedRow>,
    /// Summary metrics keyed by label (`P̄P`, `ℰ(supported)`, ...).
    pub summary: BTreeMap<String, f64>,
}

fn cell<T: FromStr>(s: &str, line: usize) -> Result<Option<T>, ReportError> {
    if s == UNSUPPORTED {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| ReportError::SuiteColumn(format!("line {line}: cannot parse `{s}`")))
}

/// Parse the CSV produced by [`render`] back into numeric cells.
pub fn parse_csv(text: &str) -> Result<ParsedCsv, ReportError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| ReportError::SuiteColumn(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(ReportError::SuiteColumn(format!("unexpected header {:?}", header)));
    }
    let labels = [LABEL_PP, LABEL_HM, LABEL_HM_STRICT, LABEL_SD_HM, LABEL_SD_AM];
    let mut out = ParsedCsv::default();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| ReportError::SuiteColumn(e.to_string()))?;
        let line = i + 2;
        let f = |k: usize| rec.get(k).unwrap_or("");
        if labels.contains(&f(0)) {
            if let Some(v) = cell::<f64>(f(5), line)? {
                out.summary.insert(f(0).to_string(), v);
            }
            continue;
        }
        out.rows.push(ParsedRow {
            platform_id: f(0).to_string(),
            base_threads: cell(f(1), line)?,
            base_seconds: cell(f(2), line)?,
            peak_threads: cell(f(3), line)?,
            peak_seconds: cell(f(4), line)?,
            efficiency: cell(f(5), line)?,
        });
    }
    Ok(out)
}

/// Read a `platform_id,efficiency_percent` column; `--` marks unsupported.
pub fn parse_suite_column(text: &str) -> Result<Vec<(String, Option<f64>)>, ReportError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| ReportError::SuiteColumn(e.to_string()))?;
        let line = i + 2;
        if rec.len() != 2 {
            return Err(ReportError::SuiteColumn(format!("line {line}: expected 2 fields, got {}", rec.len())));
        }
        let pct: Option<f64> = cell(&rec[1], line)?;
        if let Some(p) = pct {
            if !(p > 0.0 && p <= 100.0) {
                return Err(ReportError::SuiteColumn(format!("line {line}: efficiency {p}% outside (0, 100]")));
            }
        }
        out.push((rec[0].to_string(), pct.map(|p| p / 100.0)));
    }
    Ok(out)
}

pub fn render_suite(report: &SuiteReport, format: Format, opts: &RenderOptions) -> String {
    let cells = |r: &super::SuiteRow| {
        [r.platform_id.clone(), r.efficiency.map_or_else(|| UNSUPPORTED.to_string(), |e| pct(e, opts.cell_precision()))]
    };
    let pp = &report.pp_arithmetic;
    let mut footer = format!("{LABEL_PP} = {}%", pct(pp.value, opts.precision));
    if pp.platform_count_supported == 0 {
        footer.push_str(" (no supported platforms)");
    }
    match format {
        Format::Text => {
            let mut table = vec![SUITE_HEADER.map(String::from).to_vec()];
            table.extend(report.rows.iter().map(|r| cells(r).to_vec()));
            format!(
                "{}\nsuite efficiency ({} of {} platforms supported)\n\n{}\n{footer}\n",
                report.suite_id,
                pp.platform_count_supported,
                pp.platform_count_total,
                aligned(&table)
            )
        }
        Format::Markdown => {
            let mut out = format!("### {}\n\n", report.suite_id);
            out.push_str(&md_row(&SUITE_HEADER.map(String::from)));
            out.push_str(&md_row(&["---".into(), "---".into()]));
            for r in &report.rows {
                out.push_str(&md_row(&cells(r)));
            }
            out.push_str(&md_row(&["".into(), format!("**{footer}**")]));
            out
        }
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(SUITE_HEADER).expect("in-memory write");
            for r in &report.rows {
                w.write_record([r.platform_id.clone(), opt(r.efficiency)]).expect("in-memory write");
            }
            w.write_record([LABEL_PP.to_string(), pp.value.to_string()]).expect("in-memory write");
            finish(w)
        }
    }
}
