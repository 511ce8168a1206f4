use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::scalar::Scalar;

/// Measured roof of a platform: peak compute (GFLOP/s) and peak memory bandwidth (GB/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RooflineSpec<T> {
    pub peak_flops: T,
    pub peak_bandwidth: T,
}

impl<T: Scalar> RooflineSpec<T> {
    pub fn new(peak_flops: T, peak_bandwidth: T) -> Result<Self, MetricsError> {
        let spec = Self { peak_flops, peak_bandwidth };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        if !self.peak_flops.is_positive() {
            return Err(MetricsError::NonPositive { what: "peak_flops", value: format!("{:?}", self.peak_flops) });
        }
        if !self.peak_bandwidth.is_positive() {
            return Err(MetricsError::NonPositive {
                what: "peak_bandwidth",
                value: format!("{:?}", self.peak_bandwidth),
            });
        }
        Ok(())
    }

    /// Ridge point in FLOP/byte.
    pub fn machine_balance(&self) -> T {
        self.peak_flops / self.peak_bandwidth
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundedness {
    ComputeBound,
    MemoryBound,
}

fn check_ai<T: Scalar>(ai: T) -> Result<(), MetricsError> {
    if ai.is_positive() {
        Ok(())
    } else {
        Err(MetricsError::NonPositive { what: "arithmetic intensity", value: format!("{ai:?}") })
    }
}

/// Attainable GFLOP/s at arithmetic intensity `ai`: `min(peak_flops, ai * peak_bandwidth)`.
pub fn roofline_attainable<T: Scalar>(ai: T, spec: &RooflineSpec<T>) -> Result<T, MetricsError> {
    check_ai(ai)?;
    // At or right of the ridge the flat roof applies exactly.
    if ai >= spec.machine_balance() {
        return Ok(spec.peak_flops);
    }
    Ok((ai * spec.peak_bandwidth).min_of(spec.peak_flops))
}

/// Ties at the ridge point count as compute bound.
pub fn classify_bound<T: Scalar>(ai: T, spec: &RooflineSpec<T>) -> Result<Boundedness, MetricsError> {
    check_ai(ai)?;
    Ok(if ai >= spec.machine_balance() { Boundedness::ComputeBound } else { Boundedness::MemoryBound })
}
