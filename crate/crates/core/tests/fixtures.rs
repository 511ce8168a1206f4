use std::path::PathBuf;

use perfport_core::efficiency::{record_efficiency, resolve_baseline, AppEfficiencyType, EfficiencyType};
use perfport_core::report::{
    application_report, format_half_even, parse_suite_column, render, render_suite, suite_report,
    suite_report_from_column, Format, MetricSelection, RenderOptions, ReportError, ReportRequest,
};
use perfport_core::repository::{
    IngestOptions, Level, Platform, RecordFilter, RecordInput, ReferenceSpace, Repository,
};

const TYPE0: EfficiencyType = EfficiencyType::Application(AppEfficiencyType::Type0);

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn load_omp2012() -> Repository {
    let repo = Repository::in_memory();
    for line in std::fs::read_to_string(fixture("omp2012/platforms.jsonl")).unwrap().lines() {
        repo.add_platform(serde_json::from_str::<Platform>(line).unwrap()).unwrap();
    }
    for line in std::fs::read_to_string(fixture("omp2012/records.jsonl")).unwrap().lines() {
        repo.ingest(serde_json::from_str::<RecordInput>(line).unwrap(), IngestOptions::default()).unwrap();
    }
    repo
}

#[test]
fn query_counts() {
    let repo = load_omp2012();
    let snap = repo.snapshot();
    let f = RecordFilter { suite: Some("OMP2012".into()), ..RecordFilter::default() };
    assert_eq!(snap.query(&f).len(), 60);

    let f = RecordFilter::parse_pairs(["level=peak", "platform=6"]).unwrap();
    let hits = snap.query(&f);
    assert_eq!(hits.len(), 3);
    let secs: Vec<f64> = hits.iter().map(|r| r.median_seconds).collect();
    assert_eq!(secs, vec![5.33, 26.7, 26.5]);

    assert!(Repository::in_memory().snapshot().query(&RecordFilter::default()).is_empty());
}

#[test]
fn md_report_rows_follow_raw_seconds() {
    let repo = load_omp2012();
    let report = application_report(&repo.snapshot(), &ReportRequest::new("350.md", TYPE0)).unwrap();
    let cells: Vec<String> =
        report.rows.iter().map(|r| format_half_even(r.efficiency.unwrap() * 100.0, 0)).collect();
    // Half-even rounding of peak/base; the published column differs by one on platforms 7 and 10.
    assert_eq!(cells, ["82", "83", "82", "65", "81", "95", "100", "99", "97", "73"]);
    assert_eq!(report.summary.pp_arithmetic.platform_count_supported, 10);
    assert!((report.summary.pp_arithmetic.value * 100.0 - 85.5).abs() < 0.5);
    assert_eq!(report.model.as_deref(), Some("OpenMP 3.1"));
    assert_eq!(report.workload.as_deref(), Some("ref"));
    assert_eq!(report.arch_class_breakdown.len(), 1);
}

#[test]
fn botsalgn_platform5_is_clamped() {
    let repo = load_omp2012();
    let report = application_report(&repo.snapshot(), &ReportRequest::new("358.botsalgn", TYPE0)).unwrap();
    let row = &report.rows[4];
    assert_eq!(row.efficiency, Some(1.0));
    assert!(row.clamped);
    assert!(report.rows.iter().filter(|r| r.clamped).count() == 1);
    let md = render(&report, Format::Markdown, &RenderOptions::default());
    assert!(md.contains("| 5 | 256 | 1133 | 256 | 1136 | 100* |"), "{md}");
}

#[test]
fn markdown_layout() {
    let repo = load_omp2012();
    let report = application_report(&repo.snapshot(), &ReportRequest::new("350.md", TYPE0)).unwrap();
    let md = render(&report, Format::Markdown, &RenderOptions::default());
    assert!(md.contains("| Platform | Base threads | Base seconds | Peak threads | Peak seconds | Efficiency |"));
    assert!(md.contains("| 1 | 32 | 975 | 32 | 803 | 82 |"));
    assert!(md.contains("| 4 | 576 | 59.5 | 576 | 38.6 | 65 |"));
    assert!(md.contains("**P̄P = 85.7%**"), "{md}");
    assert_eq!(md, render(&report, Format::Markdown, &RenderOptions::default()));
}

#[test]
fn text_metric_selection() {
    let repo = load_omp2012();
    let report = application_report(&repo.snapshot(), &ReportRequest::new("363.swim", TYPE0)).unwrap();
    let default = render(&report, Format::Text, &RenderOptions::default());
    assert!(default.contains("P̄P = ") && default.contains("ℰ(supported) = ") && default.contains("S.D.(AM) = "));
    assert!(!default.contains("ℰ(strict)"));
    let opts = RenderOptions { precision: 2, metrics: MetricSelection { harmonic_strict: true, ..MetricSelection::none() } };
    let strict_only = render(&report, Format::Text, &opts);
    assert!(strict_only.contains("ℰ(strict) = ") && !strict_only.contains("P̄P = "));
}

#[test]
fn subset_and_unknowns() {
    let repo = load_omp2012();
    let snap = repo.snapshot();
    let mut req = ReportRequest::new("350.md", TYPE0);
    req.platforms = Some(vec!["1".into(), "2".into()]);
    let r = application_report(&snap, &req).unwrap();
    assert_eq!(r.platform_set, ["1", "2"]);
    req.platforms = Some(vec!["11".into()]);
    assert!(matches!(application_report(&snap, &req), Err(ReportError::UnknownPlatform(_))));
    assert!(matches!(
        application_report(&snap, &ReportRequest::new("999.none", TYPE0)),
        Err(ReportError::UnknownApplication(_))
    ));
}

#[test]
fn empty_support_report() {
    let repo = load_omp2012();
    // Add a platform on which nothing has run.
    repo.add_platform(Platform {
        platform_id: "gpu0".into(),
        name: "accelerator".into(),
        arch_class: perfport_core::repository::ArchClass::Gpu,
        cores: 80,
        chips: 1,
        cores_per_chip: 80,
        peak_theoretical: Some(15_700.0),
        roofline: None,
    })
    .unwrap();
    let mut req = ReportRequest::new("350.md", TYPE0);
    req.platforms = Some(vec!["gpu0".into()]);
    let r = application_report(&repo.snapshot(), &req).unwrap();
    assert!(r.summary.is_empty_support());
    assert_eq!(r.summary.pp_arithmetic.value, 0.0);
    let text = render(&r, Format::Text, &RenderOptions::default());
    assert!(text.contains("P̄P = 0.0%") && text.contains("(no supported platforms)"), "{text}");
    let row = text.lines().find(|l| l.starts_with("gpu0")).unwrap();
    assert_eq!(row.split_whitespace().collect::<Vec<_>>(), ["gpu0", "--", "--", "--", "--", "--"]);
}

#[test]
fn suite_paths() {
    let column = parse_suite_column(&std::fs::read_to_string(fixture("omp2012/suite_efficiency.csv")).unwrap()).unwrap();
    let supplied = suite_report_from_column("OMP2012", column).unwrap();
    assert_eq!(format_half_even(supplied.pp_arithmetic.value * 100.0, 1), "91.4");
    let md = render_suite(&supplied, Format::Markdown, &RenderOptions::default());
    assert!(md.contains("**P̄P = 91.4%**"));

    let repo = load_omp2012();
    let computed = suite_report(&repo.snapshot(), "OMP2012", None).unwrap();
    assert_eq!(computed.rows.len(), 10);
    assert!(computed.rows.iter().all(|r| r.member_count == 3));
    // Platform 1: geometric mean of the three type 0 efficiencies.
    let e: [f64; 3] = [803.0 / 975.0, 1235.0 / 1276.0, 771.0 / 855.0];
    let g = (e[0] * e[1] * e[2]).powf(1.0 / 3.0);
    assert!((computed.rows[0].efficiency.unwrap() - g).abs() < 1e-12);
}

#[test]
fn type0_baseline_is_own_peak() {
    let repo = load_omp2012();
    let snap = repo.snapshot();
    let base = snap.records().find(|r| r.application_id == "363.swim" && r.platform_id == "6" && r.level == Level::Base).unwrap();
    let space = ReferenceSpace::SameImplPeak { model: "OpenMP 3.1".into() };
    let peak = resolve_baseline(&snap, "363.swim", "6", "ref", &space).unwrap();
    assert_eq!(peak.median_seconds, 26.5);
    let s = record_efficiency(&snap, base, TYPE0).unwrap();
    assert_eq!(s.baseline_record, Some(peak.record_id));
    assert_eq!(s.value, 26.5 / 28.4);
}

#[test]
fn report_is_unaffected_by_later_ingest() {
    let repo = load_omp2012();
    let before = repo.snapshot();
    let r0 = application_report(&before, &ReportRequest::new("350.md", EfficiencyType::Application(AppEfficiencyType::Type1))).unwrap();
    let mut faster: RecordInput =
        serde_json::from_str(std::fs::read_to_string(fixture("omp2012/records.jsonl")).unwrap().lines().next().unwrap()).unwrap();
    faster.model = "OpenMP 4.5".into();
    faster.run_seconds = vec![500.0];
    faster.median_seconds = None;
    let out = repo.ingest(faster, IngestOptions::default()).unwrap();
    assert!(!out.summary.stale_scores.is_empty());
    assert!(out
        .summary
        .stale_reports
        .iter()
        .any(|s| s.application_id == "350.md" && s.etype == EfficiencyType::Application(AppEfficiencyType::Type1)));

    let again = application_report(&before, &ReportRequest::new("350.md", EfficiencyType::Application(AppEfficiencyType::Type1))).unwrap();
    assert_eq!(r0, again);
    assert_eq!(repo.snapshot().len(), before.len() + 1);
}
