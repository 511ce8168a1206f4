use serde::Serialize;
use thiserror::Error;

use super::record::{Level, RunRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FilterError {
    #[error("malformed filter `{0}`: expected key=value")]
    Malformed(String),
    #[error("unknown filter key `{0}` (expected application, suite, platform, model, level, workload or portable)")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    BadValue { key: String, reason: String },
}

/// Conjunction of equality predicates over record fields. Unset fields match anything.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RecordFilter {
    pub application: Option<String>,
    pub suite: Option<String>,
    pub platform: Option<String>,
    pub model: Option<String>,
    pub level: Option<Level>,
    pub workload: Option<String>,
    pub portable: Option<bool>,
}

impl RecordFilter {
    pub fn matches(&self, r: &RunRecord) -> bool {
        fn eq(want: &Option<String>, have: &str) -> bool {
            want.as_deref().is_none_or(|w| w == have)
        }
        eq(&self.application, &r.application_id)
            && eq(&self.suite, &r.suite_id)
            && eq(&self.platform, &r.platform_id)
            && eq(&self.model, &r.model)
            && eq(&self.workload, &r.workload)
            && self.level.is_none_or(|l| l == r.level)
            && self.portable.is_none_or(|p| p == r.portable)
    }

    /// Add one `key=value` predicate.
    pub fn push_pair(&mut self, pair: &str) -> Result<(), FilterError> {
        let (key, value) = pair.split_once('=').ok_or_else(|| FilterError::Malformed(pair.to_string()))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(FilterError::Malformed(pair.to_string()));
        }
        let bad = |reason: String| FilterError::BadValue { key: key.to_string(), reason };
        match key {
            "application" | "app" => self.application = Some(value.to_string()),
            "suite" => self.suite = Some(value.to_string()),
            "platform" => self.platform = Some(value.to_string()),
            "model" => self.model = Some(value.to_string()),
            "workload" => self.workload = Some(value.to_string()),
            "level" => self.level = Some(value.parse().map_err(bad)?),
            "portable" => {
                self.portable = Some(value.parse().map_err(|_| bad(format!("`{value}` is not true/false")))?)
            }
            other => return Err(FilterError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn parse_pairs<'a>(pairs: impl IntoIterator<Item = &'a str>) -> Result<Self, FilterError> {
        let mut f = Self::default();
        for p in pairs {
            f.push_pair(p)?;
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs() {
        let f = RecordFilter::parse_pairs(["level=peak", "platform = 6"]).unwrap();
        assert_eq!(f.level, Some(Level::Peak));
        assert_eq!(f.platform.as_deref(), Some("6"));
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(RecordFilter::parse_pairs(["level"]), Err(FilterError::Malformed(_))));
        assert!(matches!(RecordFilter::parse_pairs(["level="]), Err(FilterError::Malformed(_))));
        assert!(matches!(RecordFilter::parse_pairs(["colour=red"]), Err(FilterError::UnknownKey(_))));
        assert!(matches!(RecordFilter::parse_pairs(["level=turbo"]), Err(FilterError::BadValue { .. })));
        assert!(matches!(RecordFilter::parse_pairs(["portable=yes"]), Err(FilterError::BadValue { .. })));
    }
}
