//! Append-only store of platforms and run records with a best-known baseline index.
//!
//! Writers are serialized; readers take a [`Snapshot`], an immutable
//! point-in-time view that later ingests never touch.

mod query;
mod record;
mod storage;

pub use query::{FilterError, RecordFilter};
pub use record::{
    median_of_runs, validate_record, ArchClass, Level, MedianError, Platform, PlatformError, RecordId, RecordInput,
    RunRecord, ValidationReport, Violation, REQUIRED_DISCLOSURE,
};
pub use storage::{LOCK_FILE, PLATFORMS_FILE, RECORDS_FILE};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::Serialize;
use thiserror::Error;

use crate::efficiency::{AppEfficiencyType, EfficiencyType};
use record::DuplicateKey;
use storage::WriterLock;

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("repository not found at {0}")]
    NotFound(PathBuf),
    #[error("repository at {0} is locked by another writer")]
    Locked(PathBuf),
    #[error("repository opened read-only")]
    ReadOnly,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {reason}")]
    Corrupt { path: PathBuf, line: usize, reason: String },
    #[error(transparent)]
    Platform(#[from] PlatformError),
    #[error("record rejected: {0}")]
    Rejected(ValidationReport),
    #[error("duplicate of record {existing}; pass supersede to replace it")]
    Duplicate { existing: RecordId },
    #[error("no baseline for application `{application}` on platform `{platform}` workload `{workload}` in space {space}")]
    BaselineNotFound { application: String, platform: String, workload: String, space: ReferenceSpace },
}

/// Which implementations may serve as the reference for an efficiency.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "space", rename_all = "snake_case")]
pub enum ReferenceSpace {
    /// Peak-level run of one portable implementation (programming model).
    SameImplPeak { model: String },
    /// Any portable implementation, any programming model.
    PortableAny,
    /// Every implementation, portable or not.
    AnyImpl,
}

impl ReferenceSpace {
    pub fn admits(&self, r: &RunRecord) -> bool {
        match self {
            ReferenceSpace::SameImplPeak { model } => r.portable && r.level == Level::Peak && &r.model == model,
            ReferenceSpace::PortableAny => r.portable,
            ReferenceSpace::AnyImpl => true,
        }
    }

    /// Spaces a record can be a baseline in.
    pub fn admitting(r: &RunRecord) -> Vec<ReferenceSpace> {
        let mut out = Vec::with_capacity(3);
        if r.portable && r.level == Level::Peak {
            out.push(ReferenceSpace::SameImplPeak { model: r.model.clone() });
        }
        if r.portable {
            out.push(ReferenceSpace::PortableAny);
        }
        out.push(ReferenceSpace::AnyImpl);
        out
    }

    /// Application efficiency type whose baseline lives in this space.
    pub fn efficiency_type(&self) -> AppEfficiencyType {
        match self {
            ReferenceSpace::SameImplPeak { .. } => AppEfficiencyType::Type0,
            ReferenceSpace::PortableAny => AppEfficiencyType::Type1,
            ReferenceSpace::AnyImpl => AppEfficiencyType::Type2,
        }
    }

    fn depends(&self, r: &RunRecord) -> bool {
        match self {
            ReferenceSpace::SameImplPeak { model } => r.portable && r.level == Level::Base && &r.model == model,
            ReferenceSpace::PortableAny | ReferenceSpace::AnyImpl => r.portable,
        }
    }
}

impl fmt::Display for ReferenceSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceSpace::SameImplPeak { model } => write!(f, "same_impl_peak({model})"),
            ReferenceSpace::PortableAny => f.write_str("portable_any"),
            ReferenceSpace::AnyImpl => f.write_str("any_impl"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BaselineKey {
    pub application_id: String,
    pub platform_id: String,
    pub workload: String,
    pub space: ReferenceSpace,
}

impl BaselineKey {
    pub fn new(application: &str, platform: &str, workload: &str, space: ReferenceSpace) -> Self {
        Self {
            application_id: application.to_string(),
            platform_id: platform.to_string(),
            workload: workload.to_string(),
            space,
        }
    }

    fn of(r: &RunRecord, space: ReferenceSpace) -> Self {
        Self::new(&r.application_id, &r.platform_id, &r.workload, space)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineEntry {
    pub best_record: RecordId,
    pub best_seconds: f64,
    pub best_seq: u64,
}

impl BaselineEntry {
    fn of(r: &RunRecord) -> Self {
        Self { best_record: r.record_id, best_seconds: r.median_seconds, best_seq: r.ingest_seq }
    }

    /// Strictly better: lower runtime, ties to the earlier ingest.
    fn beaten_by(&self, r: &RunRecord) -> bool {
        r.median_seconds < self.best_seconds
            || (r.median_seconds == self.best_seconds && r.ingest_seq < self.best_seq)
    }
}

pub type BaselineIndex = BTreeMap<BaselineKey, BaselineEntry>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineChange {
    pub key: BaselineKey,
    pub previous: Option<BaselineEntry>,
    pub current: BaselineEntry,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct StaleScore {
    pub record_id: RecordId,
    pub etype: EfficiencyType,
}

/// A report whose numbers moved because a baseline moved.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct StaleReport {
    pub application_id: String,
    pub workload: String,
    pub etype: EfficiencyType,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecomputeSummary {
    pub baseline_changes: Vec<BaselineChange>,
    pub stale_scores: Vec<StaleScore>,
    pub stale_reports: Vec<StaleReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestOutcome {
    pub record_id: RecordId,
    pub supersedes: Option<RecordId>,
    pub summary: RecomputeSummary,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestOptions {
    /// Accept a duplicate as a new record that supersedes the earlier one.
    pub supersede: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlatformAdd {
    Added,
    Unchanged,
}

#[derive(Debug, Clone, Default)]
struct State {
    platforms: Vec<Platform>,
    records: Vec<Arc<RunRecord>>,
    by_id: HashMap<RecordId, usize>,
    index: BaselineIndex,
    duplicates: HashMap<DuplicateKey, RecordId>,
    superseded: BTreeSet<RecordId>,
    next_seq: u64,
}

impl State {
    /// Fold one record into the derived structures and report index changes.
    fn apply(&mut self, record: RunRecord) -> Vec<BaselineChange> {
        let mut changes = Vec::new();
        for space in ReferenceSpace::admitting(&record) {
            let key = BaselineKey::of(&record, space);
            let previous = self.index.get(&key).copied();
            if previous.is_none_or(|e| e.beaten_by(&record)) {
                let current = BaselineEntry::of(&record);
                self.index.insert(key.clone(), current);
                changes.push(BaselineChange { key, previous, current });
            }
        }
        if let Some(old) = record.supersedes {
            self.superseded.insert(old);
        }
        self.duplicates.insert(record.duplicate_key(), record.record_id);
        self.next_seq = self.next_seq.max(record.ingest_seq + 1);
        self.by_id.insert(record.record_id, self.records.len());
        self.records.push(Arc::new(record));
        changes
    }
}

/// Immutable point-in-time view of a repository.
#[derive(Debug, Clone)]
pub struct Snapshot(Arc<State>);

impl Snapshot {
    pub fn platforms(&self) -> &[Platform] {
        &self.0.platforms
    }

    pub fn platform(&self, id: &str) -> Option<&Platform> {
        self.0.platforms.iter().find(|p| p.platform_id == id)
    }

    /// All records in ingest order, superseded ones included.
    pub fn records(&self) -> impl Iterator<Item = &RunRecord> + '_ {
        self.0.records.iter().map(|r| r.as_ref())
    }

    pub fn len(&self) -> usize {
        self.0.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.records.is_empty()
    }

    pub fn record(&self, id: RecordId) -> Option<&RunRecord> {
        self.0.by_id.get(&id).map(|&i| self.0.records[i].as_ref())
    }

    pub fn is_superseded(&self, id: RecordId) -> bool {
        self.0.superseded.contains(&id)
    }

    /// Records not replaced by a later supersession, in ingest order.
    pub fn current_records(&self) -> impl Iterator<Item = &RunRecord> + '_ {
        self.records().filter(|r| !self.is_superseded(r.record_id))
    }

    pub fn query(&self, filter: &RecordFilter) -> Vec<&RunRecord> {
        self.records().filter(|r| filter.matches(r)).collect()
    }

    pub fn index(&self) -> &BaselineIndex {
        &self.0.index
    }

    pub fn best_known(
        &self,
        application: &str,
        platform: &str,
        workload: &str,
        space: ReferenceSpace,
    ) -> Result<(RecordId, f64), RepoError> {
        let key = BaselineKey::new(application, platform, workload, space);
        match self.0.index.get(&key) {
            Some(e) => Ok((e.best_record, e.best_seconds)),
            None => Err(RepoError::BaselineNotFound {
                application: key.application_id,
                platform: key.platform_id,
                workload: key.workload,
                space: key.space,
            }),
        }
    }

    /// Same snapshot contents, compared by identity of the underlying state.
    pub fn same_state(&self, other: &Snapshot) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

/// Single-writer, multi-reader repository, optionally backed by a directory.
#[derive(Debug)]
pub struct Repository {
    state: RwLock<Arc<State>>,
    writer: Mutex<()>,
    dir: Option<PathBuf>,
    writable: bool,
    _lock: Option<WriterLock>,
}

impl Default for Repository {
    fn default() -> Self {
        Self::in_memory()
    }
}

impl Repository {
    pub fn in_memory() -> Self {
        Self {
            state: RwLock::new(Arc::new(State { next_seq: 1, ..State::default() })),
            writer: Mutex::new(()),
            dir: None,
            writable: true,
            _lock: None,
        }
    }

    /// Open an existing repository directory for reading.
    pub fn open_read(dir: impl AsRef<Path>) -> Result<Self, RepoError> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(RepoError::NotFound(dir.to_path_buf()));
        }
        let mut repo = Self::load(dir)?;
        repo.writable = false;
        Ok(repo)
    }

    /// Open (creating if needed) a repository directory and take the writer lock.
    pub fn open_write(dir: impl AsRef<Path>) -> Result<Self, RepoError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|source| RepoError::Io { path: dir.to_path_buf(), source })?;
        let lock = WriterLock::acquire(dir)?;
        let mut repo = Self::load(dir)?;
        repo._lock = Some(lock);
        Ok(repo)
    }

    fn load(dir: &Path) -> Result<Self, RepoError> {
        let platforms: Vec<Platform> = storage::read_log(&dir.join(PLATFORMS_FILE))?;
        let records: Vec<RunRecord> = storage::read_log(&dir.join(RECORDS_FILE))?;
        let mut state = State { next_seq: 1, platforms, ..State::default() };
        for r in records {
            if r.ingest_seq < state.next_seq {
                return Err(RepoError::Corrupt {
                    path: dir.join(RECORDS_FILE),
                    line: state.records.len() + 1,
                    reason: format!("ingest_seq {} is not increasing", r.ingest_seq),
                });
            }
            state.apply(r);
        }
        Ok(Self {
            state: RwLock::new(Arc::new(state)),
            writer: Mutex::new(()),
            dir: Some(dir.to_path_buf()),
            writable: true,
            _lock: None,
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot(self.state.read().expect("state lock poisoned").clone())
    }

    fn publish(&self, next: State) {
        *self.state.write().expect("state lock poisoned") = Arc::new(next);
    }

    pub fn add_platform(&self, platform: Platform) -> Result<PlatformAdd, RepoError> {
        if !self.writable {
            return Err(RepoError::ReadOnly);
        }
        platform.validate()?;
        let _w = self.writer.lock().expect("writer lock poisoned");
        let current = self.snapshot();
        if let Some(existing) = current.platform(&platform.platform_id) {
            return if *existing == platform {
                Ok(PlatformAdd::Unchanged)
            } else {
                Err(PlatformError::Conflict { id: platform.platform_id }.into())
            };
        }
        if let Some(dir) = &self.dir {
            storage::append_line(&dir.join(PLATFORMS_FILE), &platform)?;
        }
        let mut next = (*current.0).clone();
        next.platforms.push(platform);
        self.publish(next);
        Ok(PlatformAdd::Added)
    }

    /// Validate, persist and index one record.
    ///
    /// Readers holding an earlier snapshot keep seeing the pre-ingest state;
    /// new snapshots see the record and every index update at once.
    pub fn ingest(&self, input: RecordInput, opts: IngestOptions) -> Result<IngestOutcome, RepoError> {
        if !self.writable {
            return Err(RepoError::ReadOnly);
        }
        let _w = self.writer.lock().expect("writer lock poisoned");
        let current = self.snapshot();
        let state = &current.0;

        validate_record(&input, &state.platforms).map_err(RepoError::Rejected)?;
        let supersedes = match state.duplicates.get(&input.duplicate_key()) {
            Some(&existing) if !opts.supersede => return Err(RepoError::Duplicate { existing }),
            found => found.copied(),
        };

        let median = median_of_runs(&input.run_seconds).expect("validated runs");
        let record = RunRecord::from_input(input, state.next_seq, median, supersedes);
        if let Some(dir) = &self.dir {
            storage::append_line(&dir.join(RECORDS_FILE), &record)?;
        }

        let mut next = (**state).clone();
        let record_id = record.record_id;
        let changes = next.apply(record);
        let summary = recompute_summary(&next, record_id, changes);
        self.publish(next);
        Ok(IngestOutcome { record_id, supersedes, summary })
    }
}

fn recompute_summary(state: &State, new_record: RecordId, changes: Vec<BaselineChange>) -> RecomputeSummary {
    let mut stale_scores = BTreeSet::new();
    let mut stale_reports = BTreeSet::new();
    for change in &changes {
        let key = &change.key;
        let etype = EfficiencyType::Application(key.space.efficiency_type());
        for r in state.records.iter() {
            if r.application_id == key.application_id
                && r.platform_id == key.platform_id
                && r.workload == key.workload
                && key.space.depends(r)
            {
                if r.record_id != new_record {
                    stale_scores.insert(StaleScore { record_id: r.record_id, etype });
                }
                stale_reports.insert(StaleReport {
                    application_id: r.application_id.clone(),
                    workload: r.workload.clone(),
                    etype,
                });
            }
        }
    }
    RecomputeSummary {
        baseline_changes: changes,
        stale_scores: stale_scores.into_iter().collect(),
        stale_reports: stale_reports.into_iter().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn platform(id: &str) -> Platform {
        Platform {
            platform_id: id.into(),
            name: format!("machine {id}"),
            arch_class: ArchClass::Gpu,
            cores: 4,
            chips: 1,
            cores_per_chip: 4,
            peak_theoretical: None,
            roofline: None,
        }
    }

    fn rec(model: &str, portable: bool, level: Level, secs: f64, tag: &str) -> RecordInput {
        RecordInput {
            application_id: "lud".into(),
            suite_id: "rodinia".into(),
            platform_id: "v100".into(),
            model: model.into(),
            portable,
            level,
            workload: "large".into(),
            threads: 1,
            run_seconds: vec![secs],
            median_seconds: None,
            achieved_throughput: None,
            arithmetic_intensity: None,
            disclosure: [("compiler", "nvcc"), ("flags", tag)].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
    }

    fn repo() -> Repository {
        let r = Repository::in_memory();
        r.add_platform(platform("v100")).unwrap();
        r
    }

    #[test]
    fn first_record_becomes_baseline() {
        let r = repo();
        let out = r.ingest(rec("OpenCL", true, Level::Base, 100.0, "a"), IngestOptions::default()).unwrap();
        assert_eq!(out.summary.baseline_changes.len(), 2);
        let s = r.snapshot();
        assert_eq!(s.best_known("lud", "v100", "large", ReferenceSpace::PortableAny).unwrap(), (out.record_id, 100.0));
        assert_eq!(s.best_known("lud", "v100", "large", ReferenceSpace::AnyImpl).unwrap(), (out.record_id, 100.0));
        assert!(s
            .best_known("lud", "v100", "large", ReferenceSpace::SameImplPeak { model: "OpenCL".into() })
            .is_err());
    }

    #[test]
    fn nonportable_baseline_only_moves_any_impl() {
        let r = repo();
        let a = r.ingest(rec("OpenCL", true, Level::Base, 100.0, "a"), IngestOptions::default()).unwrap();
        let b = r.ingest(rec("CUDA", false, Level::Base, 70.0, "b"), IngestOptions::default()).unwrap();
        let changed: Vec<_> = b.summary.baseline_changes.iter().map(|c| c.key.space.clone()).collect();
        assert_eq!(changed, vec![ReferenceSpace::AnyImpl]);
        assert_eq!(
            b.summary.stale_scores,
            vec![StaleScore {
                record_id: a.record_id,
                etype: EfficiencyType::Application(AppEfficiencyType::Type2)
            }]
        );
        let s = r.snapshot();
        assert_eq!(s.best_known("lud", "v100", "large", ReferenceSpace::PortableAny).unwrap().1, 100.0);
        assert_eq!(s.best_known("lud", "v100", "large", ReferenceSpace::AnyImpl).unwrap().1, 70.0);
    }

    #[test]
    fn duplicates_need_supersede() {
        let r = repo();
        let a = r.ingest(rec("OpenCL", true, Level::Base, 100.0, "a"), IngestOptions::default()).unwrap();
        let err = r.ingest(rec("OpenCL", true, Level::Base, 90.0, "a"), IngestOptions::default()).unwrap_err();
        assert!(matches!(err, RepoError::Duplicate { existing } if existing == a.record_id));
        let b = r.ingest(rec("OpenCL", true, Level::Base, 90.0, "a"), IngestOptions { supersede: true }).unwrap();
        assert_eq!(b.supersedes, Some(a.record_id));
        let s = r.snapshot();
        assert_eq!(s.len(), 2);
        assert!(s.is_superseded(a.record_id));
        assert_eq!(s.current_records().count(), 1);
    }

    #[test]
    fn rejected_records_leave_state_alone() {
        let r = repo();
        let mut bad = rec("OpenCL", true, Level::Base, 100.0, "a");
        bad.platform_id = "mi250".into();
        assert!(matches!(r.ingest(bad, IngestOptions::default()), Err(RepoError::Rejected(_))));
        assert!(r.snapshot().is_empty());
    }

    #[test]
    fn snapshots_are_isolated() {
        let r = repo();
        let s0 = r.snapshot();
        let s0b = r.snapshot();
        assert!(s0.same_state(&s0b));
        r.ingest(rec("OpenCL", true, Level::Base, 100.0, "a"), IngestOptions::default()).unwrap();
        let s1 = r.snapshot();
        assert_eq!(s0.len(), 0);
        assert_eq!(s1.len(), 1);
        assert!(!s0.same_state(&s1));
    }

    #[test]
    fn platform_add_is_idempotent() {
        let r = repo();
        assert_eq!(r.add_platform(platform("v100")).unwrap(), PlatformAdd::Unchanged);
        let mut other = platform("v100");
        other.name = "different".into();
        assert!(matches!(r.add_platform(other), Err(RepoError::Platform(PlatformError::Conflict { .. }))));
        assert_eq!(r.snapshot().platforms().len(), 1);
    }

    #[test]
    fn equal_runtime_keeps_earlier_baseline() {
        let r = repo();
        let a = r.ingest(rec("OpenCL", true, Level::Base, 90.0, "a"), IngestOptions::default()).unwrap();
        let b = r.ingest(rec("SYCL", true, Level::Base, 90.0, "b"), IngestOptions::default()).unwrap();
        assert!(b.summary.baseline_changes.is_empty());
        let s = r.snapshot();
        assert_eq!(s.best_known("lud", "v100", "large", ReferenceSpace::PortableAny).unwrap().0, a.record_id);
    }

    #[test]
    fn persists_and_reloads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("repo");
        {
            let r = Repository::open_write(&path).unwrap();
            r.add_platform(platform("v100")).unwrap();
            r.ingest(rec("OpenCL", true, Level::Base, 100.0, "a"), IngestOptions::default()).unwrap();
            r.ingest(rec("OpenCL", true, Level::Peak, 80.0, "a"), IngestOptions::default()).unwrap();
            assert!(matches!(Repository::open_write(&path), Err(RepoError::Locked(_))));
        }
        let r = Repository::open_read(&path).unwrap();
        let s = r.snapshot();
        assert_eq!(s.len(), 2);
        assert_eq!(s.platforms().len(), 1);
        assert_eq!(s.best_known("lud", "v100", "large", ReferenceSpace::PortableAny).unwrap().1, 80.0);
        assert!(matches!(r.ingest(rec("x", true, Level::Base, 1.0, "z"), IngestOptions::default()), Err(RepoError::ReadOnly)));

        let w = Repository::open_write(&path).unwrap();
        let out = w.ingest(rec("CUDA", false, Level::Base, 50.0, "c"), IngestOptions::default()).unwrap();
        assert_eq!(out.record_id, RecordId(3));
    }

    #[test]
    fn open_read_missing_dir() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(Repository::open_read(dir.path().join("nope")), Err(RepoError::NotFound(_))));
    }
}
