//! Portability metrics and the statistics that go with them.
//!
//! All functions here are pure. Efficiencies enter as fractions in (0, 1];
//! dispersion results come back in percentage points.

mod roofline;

pub use roofline::{classify_bound, roofline_attainable, Boundedness, RooflineSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{in_unit_interval, RealScalar, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("efficiency for platform `{platform}` is {value}, expected a value in (0, 1]")]
    EfficiencyOutOfRange { platform: String, value: String },
    #[error("{0} requires at least one value")]
    Empty(&'static str),
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: String },
    #[error("{what} must be non-negative, got {value}")]
    Negative { what: &'static str, value: String },
}

/// Efficiency of one application on one platform of the platform set.
///
/// `value` is `None` when the application does not run on the platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencySample<T> {
    pub platform_id: String,
    pub value: Option<T>,
}

impl<T: Scalar> EfficiencySample<T> {
    pub fn supported(platform_id: impl Into<String>, value: T) -> Self {
        Self { platform_id: platform_id.into(), value: Some(value) }
    }

    pub fn unsupported(platform_id: impl Into<String>) -> Self {
        Self { platform_id: platform_id.into(), value: None }
    }

    pub fn is_supported(&self) -> bool {
        self.value.is_some()
    }
}

/// Build a sample list from bare values, naming platforms by position.
pub fn samples_from<T: Scalar>(values: &[Option<T>]) -> Vec<EfficiencySample<T>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| EfficiencySample { platform_id: (i + 1).to_string(), value: *v })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortabilityMetric {
    /// Arithmetic mean over the supported platforms.
    Arithmetic,
    /// Harmonic mean that collapses to zero on any unsupported platform.
    HarmonicStrict,
    /// Harmonic mean over the supported platforms only.
    HarmonicSupported,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicMode {
    Strict,
    Supported,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortabilityScore<T> {
    pub value: T,
    pub metric: PortabilityMetric,
    pub platform_count_total: usize,
    pub platform_count_supported: usize,
}

/// Standard deviations in percentage points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionPair<T> {
    pub sd_am: T,
    pub sd_hm: T,
}

fn supported_values<T: Scalar>(samples: &[EfficiencySample<T>]) -> Result<Vec<T>, MetricsError> {
    let mut out = Vec::with_capacity(samples.len());
    for s in samples {
        if let Some(v) = s.value {
            if !in_unit_interval(v) {
                return Err(MetricsError::EfficiencyOutOfRange {
                    platform: s.platform_id.clone(),
                    value: format!("{v:?}"),
                });
            }
            out.push(v);
        }
    }
    Ok(out)
}

fn mean<T: Scalar>(values: &[T]) -> T {
    let sum = values.iter().fold(T::zero(), |acc, &v| acc + v);
    sum / T::from_count(values.len())
}

fn harmonic_mean<T: Scalar>(values: &[T]) -> T {
    let recip = values.iter().fold(T::zero(), |acc, &v| acc + T::one() / v);
    T::from_count(values.len()) / recip
}

/// Arithmetic-mean portability over the supported platforms; 0 when none is supported.
pub fn arithmetic_pp<T: Scalar>(
    samples: &[EfficiencySample<T>],
) -> Result<PortabilityScore<T>, MetricsError> {
    let values = supported_values(samples)?;
    let value = if values.is_empty() { T::zero() } else { mean(&values) };
    Ok(PortabilityScore {
        value,
        metric: PortabilityMetric::Arithmetic,
        platform_count_total: samples.len(),
        platform_count_supported: values.len(),
    })
}

/// Harmonic-mean portability.
///
/// In [`HarmonicMode::Strict`] a single unsupported platform makes the score 0.
/// In [`HarmonicMode::Supported`] only supported platforms take part.
pub fn harmonic_pp<T: Scalar>(
    samples: &[EfficiencySample<T>],
    mode: HarmonicMode,
) -> Result<PortabilityScore<T>, MetricsError> {
    let values = supported_values(samples)?;
    let any_unsupported = values.len() < samples.len();
    let value = match mode {
        _ if values.is_empty() => T::zero(),
        HarmonicMode::Strict if any_unsupported => T::zero(),
        _ => harmonic_mean(&values),
    };
    Ok(PortabilityScore {
        value,
        metric: match mode {
            HarmonicMode::Strict => PortabilityMetric::HarmonicStrict,
            HarmonicMode::Supported => PortabilityMetric::HarmonicSupported,
        },
        platform_count_total: samples.len(),
        platform_count_supported: values.len(),
    })
}

/// Spread of the supported efficiencies around each mean, in percentage points.
///
/// `sd_am` is the population standard deviation of the percentages. `sd_hm`
/// is the delta-method spread of the harmonic mean: `HM^2` times the sample
/// standard deviation of the reciprocal percentages.
pub fn dispersion<T: RealScalar>(
    samples: &[EfficiencySample<T>],
) -> Result<DispersionPair<T>, MetricsError> {
    let percents: Vec<T> =
        supported_values(samples)?.into_iter().map(|v| v * T::hundred()).collect();
    if percents.is_empty() {
        return Err(MetricsError::Empty("dispersion over supported platforms"));
    }
    let n = percents.len();
    if n == 1 {
        return Ok(DispersionPair { sd_am: T::zero(), sd_hm: T::zero() });
    }

    let am = mean(&percents);
    let sq_dev = percents.iter().fold(T::zero(), |acc, &p| acc + (p - am) * (p - am));
    let sd_am = (sq_dev / T::from_count(n)).sqrt();

    let recips: Vec<T> = percents.iter().map(|&p| T::one() / p).collect();
    let rm = mean(&recips);
    let rdev = recips.iter().fold(T::zero(), |acc, &r| acc + (r - rm) * (r - rm));
    let sd_recip = (rdev / T::from_count(n - 1)).sqrt();
    let hm = harmonic_mean(&percents);
    let sd_hm = hm * hm * sd_recip;

    Ok(DispersionPair { sd_am, sd_hm })
}

/// Relative distance of an achieved efficiency from its same-size baseline.
///
/// Inputs are expected already clamped to (0, 1]; anything else is rejected.
pub fn performance_distance<T: Scalar>(achieved_efficiency: T) -> Result<T, MetricsError> {
    if !in_unit_interval(achieved_efficiency) {
        return Err(MetricsError::EfficiencyOutOfRange {
            platform: String::new(),
            value: format!("{achieved_efficiency:?}"),
        });
    }
    Ok(T::one() - achieved_efficiency)
}

/// Root mean square of performance distances across input sizes.
pub fn rms_divergence<T: RealScalar>(distances: &[T]) -> Result<T, MetricsError> {
    if distances.is_empty() {
        return Err(MetricsError::Empty("rms_divergence"));
    }
    for &d in distances {
        if !d.is_non_negative() {
            return Err(MetricsError::Negative { what: "performance distance", value: format!("{d:?}") });
        }
    }
    let sq = distances.iter().fold(T::zero(), |acc, &d| acc + d * d);
    Ok((sq / T::from_count(distances.len())).sqrt())
}

/// Mean RMS divergence over a platform set.
pub fn pd_metric<T: Scalar>(per_platform_divergences: &[T]) -> Result<T, MetricsError> {
    if per_platform_divergences.is_empty() {
        return Err(MetricsError::Empty("pd_metric"));
    }
    for &d in per_platform_divergences {
        if !d.is_non_negative() {
            return Err(MetricsError::Negative { what: "RMS divergence", value: format!("{d:?}") });
        }
    }
    Ok(mean(per_platform_divergences))
}

/// Harmonic mean of the speedups that non-portable components contribute on one platform.
pub fn pp_md<T: Scalar>(component_speedups: &[T]) -> Result<T, MetricsError> {
    if component_speedups.is_empty() {
        return Err(MetricsError::Empty("pp_md"));
    }
    for &s in component_speedups {
        if !s.is_positive() {
            return Err(MetricsError::NonPositive { what: "component speedup", value: format!("{s:?}") });
        }
    }
    Ok(harmonic_mean(component_speedups))
}
