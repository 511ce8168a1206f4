//! Performance efficiency: achieved performance as a fraction of a reference.
//!
//! Application-approach efficiencies compare runtimes against a baseline run
//! drawn from a reference space of implementations:
//!
//! | type | reference                                         |
//! |------|---------------------------------------------------|
//! | 0    | peak-level run of the same implementation         |
//! | 1    | best-known portable implementation                |
//! | 2    | best-known implementation of any kind             |
//!
//! Architectural-approach efficiencies compare throughput against a platform
//! peak: theoretical (type 0) or Roofline-attainable (type 1).
//!
//! Ratios above 1 are clamped to 1 and flagged.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{roofline_attainable, RooflineSpec};
use crate::repository::{Level, Platform, RecordId, ReferenceSpace, RepoError, RunRecord, Snapshot};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppEfficiencyType {
    Type0,
    Type1,
    Type2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchEfficiencyType {
    Type0,
    Type1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    Application,
    Architectural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "approach", content = "type", rename_all = "snake_case")]
pub enum EfficiencyType {
    Application(AppEfficiencyType),
    Architectural(ArchEfficiencyType),
}

impl EfficiencyType {
    pub const ALL: [EfficiencyType; 5] = [
        EfficiencyType::Application(AppEfficiencyType::Type0),
        EfficiencyType::Application(AppEfficiencyType::Type1),
        EfficiencyType::Application(AppEfficiencyType::Type2),
        EfficiencyType::Architectural(ArchEfficiencyType::Type0),
        EfficiencyType::Architectural(ArchEfficiencyType::Type1),
    ];

    pub fn approach(self) -> Approach {
        match self {
            EfficiencyType::Application(_) => Approach::Application,
            EfficiencyType::Architectural(_) => Approach::Architectural,
        }
    }

    pub fn type_no(self) -> u8 {
        match self {
            EfficiencyType::Application(AppEfficiencyType::Type0)
            | EfficiencyType::Architectural(ArchEfficiencyType::Type0) => 0,
            EfficiencyType::Application(AppEfficiencyType::Type1)
            | EfficiencyType::Architectural(ArchEfficiencyType::Type1) => 1,
            EfficiencyType::Application(AppEfficiencyType::Type2) => 2,
        }
    }

    pub fn from_parts(approach: Approach, type_no: u8) -> Option<Self> {
        use {AppEfficiencyType as A, ArchEfficiencyType as R};
        Some(match (approach, type_no) {
            (Approach::Application, 0) => EfficiencyType::Application(A::Type0),
            (Approach::Application, 1) => EfficiencyType::Application(A::Type1),
            (Approach::Application, 2) => EfficiencyType::Application(A::Type2),
            (Approach::Architectural, 0) => EfficiencyType::Architectural(R::Type0),
            (Approach::Architectural, 1) => EfficiencyType::Architectural(R::Type1),
            _ => return None,
        })
    }

    pub fn describe(self) -> &'static str {
        match self {
            EfficiencyType::Application(AppEfficiencyType::Type0) => "application efficiency type 0 (base vs peak)",
            EfficiencyType::Application(AppEfficiencyType::Type1) => {
                "application efficiency type 1 (best portable implementation)"
            }
            EfficiencyType::Application(AppEfficiencyType::Type2) => {
                "application efficiency type 2 (best implementation of any kind)"
            }
            EfficiencyType::Architectural(ArchEfficiencyType::Type0) => {
                "architectural efficiency type 0 (theoretical peak)"
            }
            EfficiencyType::Architectural(ArchEfficiencyType::Type1) => "architectural efficiency type 1 (Roofline)",
        }
    }
}

impl fmt::Display for EfficiencyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.approach() {
            Approach::Application => "app",
            Approach::Architectural => "arch",
        };
        write!(f, "{prefix}-{}", self.type_no())
    }
}

impl FromStr for EfficiencyType {
    type Err = String;

    /// Accepts `app-0`, `app-1`, `app-2`, `arch-0`, `arch-1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("unknown efficiency type `{s}` (expected app-0, app-1, app-2, arch-0 or arch-1)");
        let (approach, no) = s.split_once('-').ok_or_else(bad)?;
        let approach = match approach {
            "app" | "application" => Approach::Application,
            "arch" | "architectural" => Approach::Architectural,
            _ => return Err(bad()),
        };
        let no: u8 = no.parse().map_err(|_| bad())?;
        EfficiencyType::from_parts(approach, no).ok_or_else(bad)
    }
}

#[derive(Debug, Error)]
pub enum EfficiencyError {
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: String },
    #[error("platform `{platform}` lacks {missing}, required for {etype}")]
    MissingPlatformData { platform: String, missing: &'static str, etype: EfficiencyType },
    #[error("record {record} lacks {missing}, required for {etype}")]
    MissingRecordData { record: RecordId, missing: &'static str, etype: EfficiencyType },
    #[error("record {record} is a {level} run; {etype} is computed for base runs")]
    WrongLevel { record: RecordId, level: Level, etype: EfficiencyType },
    #[error("record {record} is not portable; {etype} scores portable implementations")]
    NotPortable { record: RecordId, etype: EfficiencyType },
    #[error("unknown platform `{0}`")]
    UnknownPlatform(String),
    #[error(transparent)]
    Repository(#[from] RepoError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyScore<T> {
    pub value: T,
    pub etype: EfficiencyType,
    /// Raw ratio exceeded 1 and was clamped.
    pub clamped: bool,
    pub baseline_record: Option<RecordId>,
    /// Baseline seconds for application types, GFLOP/s for architectural ones.
    pub baseline_performance: Option<T>,
}

fn positive<T: Scalar>(what: &'static str, v: T) -> Result<T, EfficiencyError> {
    if v.is_positive() {
        Ok(v)
    } else {
        Err(EfficiencyError::NonPositive { what, value: format!("{v:?}") })
    }
}

fn clamp_ratio<T: Scalar>(ratio: T) -> (T, bool) {
    if ratio > T::one() {
        (T::one(), true)
    } else {
        (ratio, false)
    }
}

/// Base-vs-peak efficiency of one implementation: `min(1, peak / base)` on runtimes.
pub fn spec_efficiency<T: Scalar>(base_seconds: T, peak_seconds: T) -> Result<EfficiencyScore<T>, EfficiencyError> {
    app_efficiency(base_seconds, peak_seconds, AppEfficiencyType::Type0)
}

/// Runtime-based efficiency `min(1, baseline / achieved)`.
pub fn app_efficiency<T: Scalar>(
    achieved_seconds: T,
    baseline_seconds: T,
    etype: AppEfficiencyType,
) -> Result<EfficiencyScore<T>, EfficiencyError> {
    let achieved = positive("achieved runtime", achieved_seconds)?;
    let baseline = positive("baseline runtime", baseline_seconds)?;
    let (value, clamped) = clamp_ratio(baseline / achieved);
    Ok(EfficiencyScore {
        value,
        etype: EfficiencyType::Application(etype),
        clamped,
        baseline_record: None,
        baseline_performance: Some(baseline),
    })
}

/// Platform peaks used by architectural efficiencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformPeaks<T> {
    pub theoretical: Option<T>,
    pub roofline: Option<RooflineSpec<T>>,
}

impl From<&Platform> for PlatformPeaks<f64> {
    fn from(p: &Platform) -> Self {
        Self { theoretical: p.peak_theoretical, roofline: p.roofline }
    }
}

/// Throughput-based efficiency against the theoretical peak (type 0) or
/// the Roofline bound at `ai` (type 1).
pub fn arch_efficiency<T: Scalar>(
    achieved_throughput: T,
    platform_id: &str,
    peaks: &PlatformPeaks<T>,
    etype: ArchEfficiencyType,
    ai: Option<T>,
) -> Result<EfficiencyScore<T>, EfficiencyError> {
    let full = EfficiencyType::Architectural(etype);
    let missing = |what| EfficiencyError::MissingPlatformData { platform: platform_id.to_string(), missing: what, etype: full };
    let achieved = positive("achieved throughput", achieved_throughput)?;
    let reference = match etype {
        ArchEfficiencyType::Type0 => positive("theoretical peak", peaks.theoretical.ok_or_else(|| missing("peak_theoretical"))?)?,
        ArchEfficiencyType::Type1 => {
            let roof = peaks.roofline.ok_or_else(|| missing("roofline"))?;
            let ai = ai.ok_or(EfficiencyError::NonPositive { what: "arithmetic intensity", value: "missing".into() })?;
            roofline_attainable(ai, &roof)
                .map_err(|_| EfficiencyError::NonPositive { what: "arithmetic intensity", value: format!("{ai:?}") })?
        }
    };
    let (value, clamped) = clamp_ratio(achieved / reference);
    Ok(EfficiencyScore { value, etype: full, clamped, baseline_record: None, baseline_performance: Some(reference) })
}

/// Best-known record for a key by direct scan of the snapshot.
///
/// Minimum median runtime wins; ties go to the earliest ingest. This scan is
/// independent of the repository's incrementally maintained index.
pub fn resolve_baseline<'s>(
    snapshot: &'s Snapshot,
    application: &str,
    platform: &str,
    workload: &str,
    space: &ReferenceSpace,
) -> Result<&'s RunRecord, EfficiencyError> {
    snapshot
        .records()
        .filter(|r| r.application_id == application && r.platform_id == platform && r.workload == workload)
        .filter(|r| space.admits(r))
        .min_by(|a, b| {
            a.median_seconds.total_cmp(&b.median_seconds).then(a.ingest_seq.cmp(&b.ingest_seq))
        })
        .ok_or_else(|| {
            RepoError::BaselineNotFound {
                application: application.to_string(),
                platform: platform.to_string(),
                workload: workload.to_string(),
                space: space.clone(),
            }
            .into()
        })
}

/// Efficiency of a stored record, resolving whatever baseline the type needs.
pub fn record_efficiency(
    snapshot: &Snapshot,
    record: &RunRecord,
    etype: EfficiencyType,
) -> Result<EfficiencyScore<f64>, EfficiencyError> {
    match etype {
        EfficiencyType::Application(app) => {
            if !record.portable {
                return Err(EfficiencyError::NotPortable { record: record.record_id, etype });
            }
            let space = match app {
                AppEfficiencyType::Type0 => {
                    if record.level != Level::Base {
                        return Err(EfficiencyError::WrongLevel { record: record.record_id, level: record.level, etype });
                    }
                    ReferenceSpace::SameImplPeak { model: record.model.clone() }
                }
                AppEfficiencyType::Type1 => ReferenceSpace::PortableAny,
                AppEfficiencyType::Type2 => ReferenceSpace::AnyImpl,
            };
            let (baseline_id, baseline_seconds) =
                snapshot.best_known(&record.application_id, &record.platform_id, &record.workload, space)?;
            let mut score = app_efficiency(record.median_seconds, baseline_seconds, app)?;
            score.baseline_record = Some(baseline_id);
            Ok(score)
        }
        EfficiencyType::Architectural(arch) => {
            let platform = snapshot
                .platform(&record.platform_id)
                .ok_or_else(|| EfficiencyError::UnknownPlatform(record.platform_id.clone()))?;
            let throughput = record.achieved_throughput.ok_or(EfficiencyError::MissingRecordData {
                record: record.record_id,
                missing: "achieved_throughput",
                etype,
            })?;
            if arch == ArchEfficiencyType::Type1 && record.arithmetic_intensity.is_none() {
                return Err(EfficiencyError::MissingRecordData {
                    record: record.record_id,
                    missing: "arithmetic_intensity",
                    etype,
                });
            }
            arch_efficiency(
                throughput,
                &platform.platform_id,
                &PlatformPeaks::from(platform),
                arch,
                record.arithmetic_intensity,
            )
        }
    }
}
