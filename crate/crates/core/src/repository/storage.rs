//! On-disk layout: a directory with two line-delimited JSON logs and a lock file.
//!
//! ```text
//! <repo>/platforms.jsonl   one Platform per line
//! <repo>/records.jsonl     one RunRecord per line, in ingest order
//! <repo>/.lock             present while a writer holds the repository
//! ```
//!
//! A trailing line without a newline is an append still in flight and is ignored.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::RepoError;

pub const PLATFORMS_FILE: &str = "platforms.jsonl";
pub const RECORDS_FILE: &str = "records.jsonl";
pub const LOCK_FILE: &str = ".lock";

/// Exclusive writer lock, released on drop.
#[derive(Debug)]
pub(crate) struct WriterLock {
    path: PathBuf,
}

impl WriterLock {
    pub(crate) fn acquire(dir: &Path) -> Result<Self, RepoError> {
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(RepoError::Locked(path)),
            Err(e) => Err(RepoError::Io { path, source: e }),
        }
    }
}

impl Drop for WriterLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

pub(crate) fn read_log<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, RepoError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(RepoError::Io { path: path.to_path_buf(), source: e }),
    };
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    complete
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| RepoError::Corrupt {
                path: path.to_path_buf(),
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

pub(crate) fn append_line<T: Serialize>(path: &Path, value: &T) -> Result<(), RepoError> {
    let io_err = |source| RepoError::Io { path: path.to_path_buf(), source };
    let mut line = serde_json::to_string(value).expect("record types serialize");
    line.push('\n');
    let mut f: File = OpenOptions::new().create(true).append(true).open(path).map_err(io_err)?;
    f.write_all(line.as_bytes()).map_err(io_err)?;
    f.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_trailing_line_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.jsonl");
        fs::write(&p, "1\n2\n\n3").unwrap();
        let v: Vec<u32> = read_log(&p).unwrap();
        assert_eq!(v, vec![1, 2]);
    }

    #[test]
    fn lock_is_exclusive() {
        let dir = tempfile::tempdir().unwrap();
        let a = WriterLock::acquire(dir.path()).unwrap();
        assert!(matches!(WriterLock::acquire(dir.path()), Err(RepoError::Locked(_))));
        drop(a);
        assert!(WriterLock::acquire(dir.path()).is_ok());
    }
}
