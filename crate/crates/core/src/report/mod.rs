//! Portability reports over a platform set.
//!
//! A report holds one row per platform in the set, the efficiency used on each
//! supported platform, and all three portability metrics side by side. Rows
//! are also grouped by architecture class; the top-level numbers are the
//! all-classes roll-up.

mod render;

pub use render::{
    format_half_even, parse_csv, parse_suite_column, render, render_suite, Format, MetricSelection, ParsedCsv,
    ParsedRow, RenderOptions, CSV_HEADER,
};

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::efficiency::{record_efficiency, AppEfficiencyType, EfficiencyError, EfficiencyType};
use crate::metrics::{
    arithmetic_pp, dispersion, harmonic_pp, DispersionPair, EfficiencySample, HarmonicMode, MetricsError,
    PortabilityScore,
};
use crate::repository::{ArchClass, Level, RecordId, RunRecord, Snapshot};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no records for application `{0}`")]
    UnknownApplication(String),
    #[error("no records for suite `{0}`")]
    UnknownSuite(String),
    #[error("unknown platform `{0}`")]
    UnknownPlatform(String),
    #[error("application `{application}` has records for several workloads ({}); choose one", .workloads.join(", "))]
    AmbiguousWorkload { application: String, workloads: Vec<String> },
    #[error("application `{application}` has several portable implementations ({}); choose a model", .models.join(", "))]
    AmbiguousModel { application: String, models: Vec<String> },
    #[error(transparent)]
    Efficiency(#[from] EfficiencyError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("suite column: {0}")]
    SuiteColumn(String),
}

/// One measured run shown in a report row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunCell {
    pub record_id: Option<RecordId>,
    pub threads: u32,
    pub seconds: f64,
}

impl RunCell {
    fn of(r: &RunRecord) -> Self {
        Self { record_id: Some(r.record_id), threads: r.threads, seconds: r.median_seconds }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub platform_id: String,
    pub arch_class: ArchClass,
    pub base: Option<RunCell>,
    pub peak: Option<RunCell>,
    /// Fraction in (0, 1]; `None` marks an unsupported platform.
    pub efficiency: Option<f64>,
    pub clamped: bool,
    pub baseline_record: Option<RecordId>,
}

/// Portability metrics over one platform set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub pp_arithmetic: PortabilityScore<f64>,
    pub pp_harmonic_supported: PortabilityScore<f64>,
    pub pp_harmonic_strict: PortabilityScore<f64>,
    /// Absent when no platform is supported.
    pub dispersion: Option<DispersionPair<f64>>,
}

impl MetricSummary {
    pub fn from_rows(rows: &[ReportRow]) -> Result<Self, MetricsError> {
        let samples: Vec<EfficiencySample<f64>> = rows
            .iter()
            .map(|r| EfficiencySample { platform_id: r.platform_id.clone(), value: r.efficiency })
            .collect();
        Self::from_samples(&samples)
    }

    pub fn from_samples(samples: &[EfficiencySample<f64>]) -> Result<Self, MetricsError> {
        let any = samples.iter().any(|s| s.is_supported());
        Ok(Self {
            pp_arithmetic: arithmetic_pp(samples)?,
            pp_harmonic_supported: harmonic_pp(samples, HarmonicMode::Supported)?,
            pp_harmonic_strict: harmonic_pp(samples, HarmonicMode::Strict)?,
            dispersion: if any { Some(dispersion(samples)?) } else { None },
        })
    }

    pub fn is_empty_support(&self) -> bool {
        self.pp_arithmetic.platform_count_supported == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassBreakdown {
    pub arch_class: ArchClass,
    pub platform_set: Vec<String>,
    pub summary: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortabilityReport {
    pub application_id: String,
    pub model: Option<String>,
    pub workload: Option<String>,
    pub efficiency_type: EfficiencyType,
    pub platform_set: Vec<String>,
    pub rows: Vec<ReportRow>,
    /// All-classes roll-up.
    pub summary: MetricSummary,
    pub arch_class_breakdown: Vec<ClassBreakdown>,
}

impl PortabilityReport {
    /// Assemble a report from finished rows, deriving every metric.
    pub fn from_rows(
        application_id: impl Into<String>,
        model: Option<String>,
        workload: Option<String>,
        efficiency_type: EfficiencyType,
        rows: Vec<ReportRow>,
    ) -> Result<Self, MetricsError> {
        let summary = MetricSummary::from_rows(&rows)?;
        let classes: BTreeSet<ArchClass> = rows.iter().map(|r| r.arch_class).collect();
        let mut arch_class_breakdown = Vec::with_capacity(classes.len());
        for class in classes {
            let class_rows: Vec<ReportRow> = rows.iter().filter(|r| r.arch_class == class).cloned().collect();
            arch_class_breakdown.push(ClassBreakdown {
                arch_class: class,
                platform_set: class_rows.iter().map(|r| r.platform_id.clone()).collect(),
                summary: MetricSummary::from_rows(&class_rows)?,
            });
        }
        Ok(Self {
            application_id: application_id.into(),
            model,
            workload,
            efficiency_type,
            platform_set: rows.iter().map(|r| r.platform_id.clone()).collect(),
            rows,
            summary,
            arch_class_breakdown,
        })
    }
}

/// What to report on. `None` fields are inferred from the repository when unambiguous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRequest {
    pub application: String,
    /// `None` means every registered platform, in registration order.
    pub platforms: Option<Vec<String>>,
    pub etype: EfficiencyType,
    pub model: Option<String>,
    pub workload: Option<String>,
}

impl ReportRequest {
    pub fn new(application: impl Into<String>, etype: EfficiencyType) -> Self {
        Self { application: application.into(), platforms: None, etype, model: None, workload: None }
    }
}

fn platform_set(snapshot: &Snapshot, requested: Option<&[String]>) -> Result<Vec<(String, ArchClass)>, ReportError> {
    match requested {
        None => Ok(snapshot.platforms().iter().map(|p| (p.platform_id.clone(), p.arch_class)).collect()),
        Some(ids) => ids
            .iter()
            .map(|id| {
                snapshot
                    .platform(id)
                    .map(|p| (p.platform_id.clone(), p.arch_class))
                    .ok_or_else(|| ReportError::UnknownPlatform(id.clone()))
            })
            .collect(),
    }
}

/// Lowest-median record, ties to the earliest ingest.
fn best<'a>(records: impl Iterator<Item = &'a RunRecord>) -> Option<&'a RunRecord> {
    records.min_by(|a, b| a.median_seconds.total_cmp(&b.median_seconds).then(a.ingest_seq.cmp(&b.ingest_seq)))
}

fn single<'a>(values: impl Iterator<Item = &'a str>) -> Vec<String> {
    values.collect::<BTreeSet<_>>().into_iter().map(str::to_string).collect()
}

/// Per-platform efficiencies of one application and their portability metrics.
///
/// Platforms where the application has no usable record are kept as
/// unsupported rows; a report with no supported platform is valid and scores 0.
pub fn application_report(snapshot: &Snapshot, req: &ReportRequest) -> Result<PortabilityReport, ReportError> {
    let app = req.application.as_str();
    let all: Vec<&RunRecord> = snapshot.current_records().filter(|r| r.application_id == app).collect();
    if all.is_empty() {
        return Err(ReportError::UnknownApplication(app.to_string()));
    }

    let workload = match &req.workload {
        Some(w) => w.clone(),
        None => {
            let ws = single(all.iter().map(|r| r.workload.as_str()));
            if ws.len() > 1 {
                return Err(ReportError::AmbiguousWorkload { application: app.to_string(), workloads: ws });
            }
            ws.into_iter().next().expect("at least one record")
        }
    };
    let portable: Vec<&RunRecord> =
        all.iter().copied().filter(|r| r.portable && r.workload == workload).collect();
    let model = match &req.model {
        Some(m) => Some(m.clone()),
        None => {
            let ms = single(portable.iter().map(|r| r.model.as_str()));
            if ms.len() > 1 {
                return Err(ReportError::AmbiguousModel { application: app.to_string(), models: ms });
            }
            ms.into_iter().next()
        }
    };

    let platforms = platform_set(snapshot, req.platforms.as_deref())?;
    let mut rows = Vec::with_capacity(platforms.len());
    for (platform_id, arch_class) in platforms {
        let here = || {
            portable
                .iter()
                .copied()
                .filter(|r| r.platform_id == platform_id && Some(&r.model) == model.as_ref())
        };
        let base = best(here().filter(|r| r.level == Level::Base));
        let peak = best(here().filter(|r| r.level == Level::Peak));
        let mut row = ReportRow {
            platform_id: platform_id.clone(),
            arch_class,
            base: base.map(RunCell::of),
            peak: peak.map(RunCell::of),
            efficiency: None,
            clamped: false,
            baseline_record: None,
        };

        let subject = match req.etype {
            EfficiencyType::Application(AppEfficiencyType::Type0) => base.filter(|_| peak.is_some()),
            _ => base.or(peak),
        };
        if let Some(subject) = subject {
            match record_efficiency(snapshot, subject, req.etype) {
                Ok(score) => {
                    row.efficiency = Some(score.value);
                    row.clamped = score.clamped;
                    row.baseline_record = score.baseline_record;
                }
                // A record without measured throughput leaves the platform unsupported.
                Err(EfficiencyError::MissingRecordData { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
        rows.push(row);
    }

    Ok(PortabilityReport::from_rows(app, model, Some(workload), req.etype, rows)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteSource {
    /// Geometric mean of member-application type 0 efficiencies.
    Computed,
    /// Per-platform efficiencies supplied directly.
    Supplied,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow {
    pub platform_id: String,
    /// Fraction in (0, 1]; `None` when no member has a usable record.
    pub efficiency: Option<f64>,
    pub member_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite_id: String,
    pub source: SuiteSource,
    pub rows: Vec<SuiteRow>,
    pub pp_arithmetic: PortabilityScore<f64>,
}

impl SuiteReport {
    pub fn from_rows(suite_id: impl Into<String>, source: SuiteSource, rows: Vec<SuiteRow>) -> Result<Self, ReportError> {
        let samples: Vec<EfficiencySample<f64>> = rows
            .iter()
            .map(|r| EfficiencySample { platform_id: r.platform_id.clone(), value: r.efficiency })
            .collect();
        Ok(Self { suite_id: suite_id.into(), source, pp_arithmetic: arithmetic_pp(&samples)?, rows })
    }
}

fn geometric_mean(values: &[f64]) -> f64 {
    let log_sum: f64 = values.iter().map(|v| v.ln()).sum();
    (log_sum / values.len() as f64).exp()
}

/// Suite portability from member applications stored in the repository.
///
/// On each platform the suite efficiency is the geometric mean of the members'
/// type 0 efficiencies (each member's best base run against its own peak run).
pub fn suite_report(snapshot: &Snapshot, suite: &str, platforms: Option<&[String]>) -> Result<SuiteReport, ReportError> {
    let members: Vec<&RunRecord> = snapshot.current_records().filter(|r| r.suite_id == suite).collect();
    if members.is_empty() {
        return Err(ReportError::UnknownSuite(suite.to_string()));
    }
    let apps = single(members.iter().map(|r| r.application_id.as_str()));
    let etype = EfficiencyType::Application(AppEfficiencyType::Type0);

    let mut rows = Vec::new();
    for (platform_id, _) in platform_set(snapshot, platforms)? {
        let mut values = Vec::new();
        for app in &apps {
            let bases = members.iter().copied().filter(|r| {
                &r.application_id == app && r.platform_id == platform_id && r.portable && r.level == Level::Base
            });
            // Highest efficiency among the member's base runs that have a peak counterpart.
            let mut best_value: Option<f64> = None;
            for base in bases {
                match record_efficiency(snapshot, base, etype) {
                    Ok(s) => best_value = Some(best_value.map_or(s.value, |b: f64| b.max(s.value))),
                    Err(EfficiencyError::Repository(_)) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            values.extend(best_value);
        }
        rows.push(SuiteRow {
            platform_id,
            efficiency: (!values.is_empty()).then(|| geometric_mean(&values).min(1.0)),
            member_count: values.len(),
        });
    }
    SuiteReport::from_rows(suite, SuiteSource::Computed, rows)
}

/// Suite portability from a supplied per-platform efficiency column (fractions).
pub fn suite_report_from_column(
    suite: &str,
    column: impl IntoIterator<Item = (String, Option<f64>)>,
) -> Result<SuiteReport, ReportError> {
    let rows = column
        .into_iter()
        .map(|(platform_id, efficiency)| SuiteRow { platform_id, efficiency, member_count: 0 })
        .collect();
    SuiteReport::from_rows(suite, SuiteSource::Supplied, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_mean_of_two() {
        assert!((geometric_mean(&[0.9, 0.4]) - 0.6).abs() < 1e-12);
        assert!((geometric_mean(&[1.0, 1.0, 1.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn supplied_column_mean() {
        let col = [94.0, 91.0, 94.0, 86.0, 98.0, 95.0, 82.0, 84.0, 96.0, 94.0]
            .iter()
            .enumerate()
            .map(|(i, p)| ((i + 1).to_string(), Some(p / 100.0)));
        let r = suite_report_from_column("OMP2012", col).unwrap();
        assert_eq!(format_half_even(r.pp_arithmetic.value * 100.0, 1), "91.4");
        assert_eq!(r.pp_arithmetic.platform_count_supported, 10);
    }

    #[test]
    fn unsupported_column_entries_leave_support_set() {
        let r = suite_report_from_column("s", vec![("a".into(), Some(0.5)), ("b".into(), None)]).unwrap();
        assert_eq!(r.pp_arithmetic.value, 0.5);
        assert_eq!(r.pp_arithmetic.platform_count_supported, 1);
        assert_eq!(r.pp_arithmetic.platform_count_total, 2);
    }
}
