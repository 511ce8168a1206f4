use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::RooflineSpec;
use crate::scalar::Scalar;

/// Disclosure keys every record must carry.
pub const REQUIRED_DISCLOSURE: [&str; 2] = ["compiler", "flags"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RecordId(pub u64);

impl fmt::Display for RecordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Base,
    Peak,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Base => "base",
            Level::Peak => "peak",
        })
    }
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base" => Ok(Level::Base),
            "peak" => Ok(Level::Peak),
            other => Err(format!("unknown level `{other}` (expected base or peak)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchClass {
    Cpu,
    Gpu,
    Other,
}

impl fmt::Display for ArchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArchClass::Cpu => "cpu",
            ArchClass::Gpu => "gpu",
            ArchClass::Other => "other",
        })
    }
}

impl std::str::FromStr for ArchClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cpu" => Ok(ArchClass::Cpu),
            "gpu" => Ok(ArchClass::Gpu),
            "other" => Ok(ArchClass::Other),
            other => Err(format!("unknown architecture class `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Platform {
    pub platform_id: String,
    pub name: String,
    pub arch_class: ArchClass,
    pub cores: u32,
    pub chips: u32,
    pub cores_per_chip: u32,
    #[serde(default)]
    pub peak_theoretical: Option<f64>,
    #[serde(default)]
    pub roofline: Option<RooflineSpec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlatformError {
    #[error("platform_id must not be empty")]
    EmptyId,
    #[error("platform `{id}`: cores ({cores}) != chips ({chips}) x cores_per_chip ({per_chip})")]
    CoreCount { id: String, cores: u32, chips: u32, per_chip: u32 },
    #[error("platform `{id}`: peak_theoretical must be positive")]
    NonPositivePeak { id: String },
    #[error("platform `{id}`: invalid roofline: {reason}")]
    Roofline { id: String, reason: String },
    #[error("platform `{id}` already exists with different fields")]
    Conflict { id: String },
}

impl Platform {
    pub fn validate(&self) -> Result<(), PlatformError> {
        let id = &self.platform_id;
        if id.trim().is_empty() {
            return Err(PlatformError::EmptyId);
        }
        if self.chips.checked_mul(self.cores_per_chip) != Some(self.cores) || self.cores == 0 {
            return Err(PlatformError::CoreCount {
                id: id.clone(),
                cores: self.cores,
                chips: self.chips,
                per_chip: self.cores_per_chip,
            });
        }
        if let Some(p) = self.peak_theoretical {
            if !p.is_positive() || !p.is_finite() {
                return Err(PlatformError::NonPositivePeak { id: id.clone() });
            }
        }
        if let Some(r) = &self.roofline {
            r.validate().map_err(|e| PlatformError::Roofline { id: id.clone(), reason: e.to_string() })?;
        }
        Ok(())
    }
}

/// A run record as submitted, before the store assigns identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordInput {
    pub application_id: String,
    pub suite_id: String,
    pub platform_id: String,
    pub model: String,
    pub portable: bool,
    pub level: Level,
    pub workload: String,
    pub threads: u32,
    pub run_seconds: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median_seconds: Option<f64>,
    #[serde(default)]
    pub achieved_throughput: Option<f64>,
    #[serde(default)]
    pub arithmetic_intensity: Option<f64>,
    pub disclosure: BTreeMap<String, String>,
}

/// A stored run record. Immutable once ingested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub record_id: RecordId,
    pub application_id: String,
    pub suite_id: String,
    pub platform_id: String,
    pub model: String,
    pub portable: bool,
    pub level: Level,
    pub workload: String,
    pub threads: u32,
    pub run_seconds: Vec<f64>,
    pub median_seconds: f64,
    pub achieved_throughput: Option<f64>,
    pub arithmetic_intensity: Option<f64>,
    pub disclosure: BTreeMap<String, String>,
    pub ingest_seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supersedes: Option<RecordId>,
}

impl RunRecord {
    pub(crate) fn from_input(input: RecordInput, seq: u64, median: f64, supersedes: Option<RecordId>) -> Self {
        Self {
            record_id: RecordId(seq),
            application_id: input.application_id,
            suite_id: input.suite_id,
            platform_id: input.platform_id,
            model: input.model,
            portable: input.portable,
            level: input.level,
            workload: input.workload,
            threads: input.threads,
            run_seconds: input.run_seconds,
            median_seconds: median,
            achieved_throughput: input.achieved_throughput,
            arithmetic_intensity: input.arithmetic_intensity,
            disclosure: input.disclosure,
            ingest_seq: seq,
            supersedes,
        }
    }

    pub(crate) fn duplicate_key(&self) -> DuplicateKey {
        DuplicateKey {
            application_id: self.application_id.clone(),
            platform_id: self.platform_id.clone(),
            model: self.model.clone(),
            level: self.level,
            workload: self.workload.clone(),
            disclosure: self.disclosure.clone(),
        }
    }
}

impl RecordInput {
    pub(crate) fn duplicate_key(&self) -> DuplicateKey {
        DuplicateKey {
            application_id: self.application_id.clone(),
            platform_id: self.platform_id.clone(),
            model: self.model.clone(),
            level: self.level,
            workload: self.workload.clone(),
            disclosure: self.disclosure.clone(),
        }
    }
}

/// Two records with equal keys describe the same measurement configuration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct DuplicateKey {
    application_id: String,
    platform_id: String,
    model: String,
    level: Level,
    workload: String,
    disclosure: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MedianError {
    #[error("expected 1 to 3 runs, got {0}")]
    RunCount(usize),
    #[error("run {index} has non-positive runtime {value}")]
    NonPositive { index: usize, value: String },
}

/// Reported runtime of a set of 1-3 runs.
///
/// Three runs give the middle value; two runs give their mean.
pub fn median_of_runs<T: Scalar>(runs: &[T]) -> Result<T, MedianError> {
    if runs.is_empty() || runs.len() > 3 {
        return Err(MedianError::RunCount(runs.len()));
    }
    for (index, &v) in runs.iter().enumerate() {
        if !v.is_positive() {
            return Err(MedianError::NonPositive { index, value: format!("{v:?}") });
        }
    }
    let mut sorted = runs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(match sorted.len() {
        1 => sorted[0],
        2 => (sorted[0] + sorted[1]) / (T::one() + T::one()),
        _ => sorted[1],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyField { field: &'static str },
    UnknownPlatform { platform_id: String },
    RunCount { count: usize },
    NonPositiveRuntime { index: usize, value: f64 },
    MedianMismatch { given: f64, computed: f64 },
    NonPortablePeak,
    MissingDisclosure { key: &'static str },
    ZeroThreads,
    NonPositiveThroughput { value: f64 },
    NonPositiveIntensity { value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyField { field } => write!(f, "empty field `{field}`"),
            Violation::UnknownPlatform { platform_id } => write!(f, "unknown platform `{platform_id}`"),
            Violation::RunCount { count } => write!(f, "run_seconds must hold 1 to 3 runs, got {count}"),
            Violation::NonPositiveRuntime { index, value } => {
                write!(f, "non-positive runtime {value} at run_seconds[{index}]")
            }
            Violation::MedianMismatch { given, computed } => {
                write!(f, "median_seconds {given} does not match median of runs {computed}")
            }
            Violation::NonPortablePeak => {
                write!(f, "non-portable records are external baselines and must use level base")
            }
            Violation::MissingDisclosure { key } => write!(f, "missing disclosure key `{key}`"),
            Violation::ZeroThreads => write!(f, "threads must be at least 1"),
            Violation::NonPositiveThroughput { value } => {
                write!(f, "non-positive achieved_throughput {value}")
            }
            Violation::NonPositiveIntensity { value } => {
                write!(f, "non-positive arithmetic_intensity {value}")
            }
        }
    }
}

/// Every rule violated by a record, in check order.
#[derive(Debug, Clone, PartialEq, Serialize, Error)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn validate_record(record: &RecordInput, known_platforms: &[Platform]) -> Result<(), ValidationReport> {
    let mut violations = Vec::new();

    for (field, value) in [
        ("application_id", &record.application_id),
        ("suite_id", &record.suite_id),
        ("platform_id", &record.platform_id),
        ("model", &record.model),
        ("workload", &record.workload),
    ] {
        if value.trim().is_empty() {
            violations.push(Violation::EmptyField { field });
        }
    }
    if !record.platform_id.trim().is_empty()
        && !known_platforms.iter().any(|p| p.platform_id == record.platform_id)
    {
        violations.push(Violation::UnknownPlatform { platform_id: record.platform_id.clone() });
    }

    let runs = &record.run_seconds;
    if runs.is_empty() || runs.len() > 3 {
        violations.push(Violation::RunCount { count: runs.len() });
    }
    let mut runs_ok = !runs.is_empty() && runs.len() <= 3;
    for (index, &value) in runs.iter().enumerate() {
        if value <= 0.0 || !value.is_finite() {
            violations.push(Violation::NonPositiveRuntime { index, value });
            runs_ok = false;
        }
    }
    if let (true, Some(given)) = (runs_ok, record.median_seconds) {
        let computed = median_of_runs(runs).expect("runs already checked");
        if (given - computed).abs() > 1e-9 * computed.abs().max(1.0) {
            violations.push(Violation::MedianMismatch { given, computed });
        }
    }

    if !record.portable && record.level == Level::Peak {
        violations.push(Violation::NonPortablePeak);
    }
    for key in REQUIRED_DISCLOSURE {
        if !record.disclosure.contains_key(key) {
            violations.push(Violation::MissingDisclosure { key });
        }
    }
    if record.threads == 0 {
        violations.push(Violation::ZeroThreads);
    }
    if let Some(value) = record.achieved_throughput {
        if value <= 0.0 || !value.is_finite() {
            violations.push(Violation::NonPositiveThroughput { value });
        }
    }
    if let Some(value) = record.arithmetic_intensity {
        if value <= 0.0 || !value.is_finite() {
            violations.push(Violation::NonPositiveIntensity { value });
        }
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(ValidationReport { violations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn platform(id: &str) -> Platform {
        Platform {
            platform_id: id.into(),
            name: format!("machine {id}"),
            arch_class: ArchClass::Cpu,
            cores: 16,
            chips: 2,
            cores_per_chip: 8,
            peak_theoretical: None,
            roofline: None,
        }
    }

    fn input() -> RecordInput {
        RecordInput {
            application_id: "350.md".into(),
            suite_id: "OMP2012".into(),
            platform_id: "1".into(),
            model: "OpenMP 3.1".into(),
            portable: true,
            level: Level::Base,
            workload: "ref".into(),
            threads: 32,
            run_seconds: vec![975.0],
            median_seconds: None,
            achieved_throughput: None,
            arithmetic_intensity: None,
            disclosure: [("compiler".to_string(), "icc".to_string()), ("flags".to_string(), "-O2".to_string())]
                .into_iter()
                .collect(),
        }
    }

    #[test]
    fn medians() {
        assert_eq!(median_of_runs(&[10.0, 12.0, 11.0]).unwrap(), 11.0);
        assert_eq!(median_of_runs(&[10.0]).unwrap(), 10.0);
        assert_eq!(median_of_runs(&[10.0, 1000.0, 11.0]).unwrap(), 11.0);
        assert_eq!(median_of_runs(&[10.0, 12.0]).unwrap(), 11.0);
        assert_eq!(median_of_runs::<f64>(&[]), Err(MedianError::RunCount(0)));
        assert_eq!(median_of_runs(&[1.0, 2.0, 3.0, 4.0]), Err(MedianError::RunCount(4)));
        assert!(matches!(median_of_runs(&[1.0, -2.0]), Err(MedianError::NonPositive { index: 1, .. })));
    }

    #[test]
    fn well_formed_record_is_ok() {
        assert_eq!(validate_record(&input(), &[platform("1")]), Ok(()));
    }

    #[test]
    fn unknown_platform() {
        let err = validate_record(&input(), &[platform("2")]).unwrap_err();
        assert_eq!(err.violations, vec![Violation::UnknownPlatform { platform_id: "1".into() }]);
        assert!(err.to_string().contains("unknown platform"));
    }

    #[test]
    fn negative_runtime() {
        let mut r = input();
        r.run_seconds = vec![-1.0, 5.0, 5.0];
        let err = validate_record(&r, &[platform("1")]).unwrap_err();
        assert_eq!(err.violations, vec![Violation::NonPositiveRuntime { index: 0, value: -1.0 }]);
        assert!(err.to_string().contains("non-positive runtime"));
    }

    #[test]
    fn all_violations_reported() {
        let mut r = input();
        r.portable = false;
        r.level = Level::Peak;
        r.threads = 0;
        r.run_seconds = vec![];
        r.disclosure.clear();
        r.platform_id = "9".into();
        let err = validate_record(&r, &[platform("1")]).unwrap_err();
        assert_eq!(err.violations.len(), 6, "{err}");
    }

    #[test]
    fn median_must_match_when_given() {
        let mut r = input();
        r.run_seconds = vec![10.0, 12.0, 11.0];
        r.median_seconds = Some(11.0);
        assert!(validate_record(&r, &[platform("1")]).is_ok());
        r.median_seconds = Some(12.0);
        let err = validate_record(&r, &[platform("1")]).unwrap_err();
        assert!(matches!(err.violations[0], Violation::MedianMismatch { .. }));
    }

    #[test]
    fn platform_rules() {
        assert!(platform("1").validate().is_ok());
        let mut p = platform("1");
        p.cores = 15;
        assert!(matches!(p.validate(), Err(PlatformError::CoreCount { .. })));
        let mut p = platform("1");
        p.peak_theoretical = Some(0.0);
        assert!(p.validate().is_err());
        let mut p = platform("1");
        p.roofline = Some(RooflineSpec { peak_flops: 1.0, peak_bandwidth: 0.0 });
        assert!(p.validate().is_err());
    }

    #[test]
    fn record_input_requires_disclosure_key() {
        let line = r#"{"application_id":"a","suite_id":"s","platform_id":"1","model":"m","portable":true,
            "level":"base","workload":"w","threads":1,"run_seconds":[1.0]}"#;
        assert!(serde_json::from_str::<RecordInput>(line).is_err());
        let line = r#"{"application_id":"a","suite_id":"s","platform_id":"1","model":"m","portable":true,
            "level":"base","workload":"w","threads":1,"run_seconds":[1.0],"disclosure":{},"bogus":1}"#;
        assert!(serde_json::from_str::<RecordInput>(line).is_err());
    }
}
