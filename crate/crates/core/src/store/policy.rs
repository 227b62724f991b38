//! Customer policy: the probabilities that resolve each nondeterministic
//! branch of the store net, plus the wait-loop bound.
//!
//! Policy files are plain `key = value` lines; `#` starts a comment. Keys
//! match the struct fields. Unknown keys and out-of-range probabilities are
//! errors.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Branch probabilities for one simulated customer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomerPolicy {
    /// The store is full at a capacity check.
    pub p_store_full: f64,
    /// The body-temperature check fails.
    pub p_temp_fail: f64,
    /// The customer refuses to wear a mask.
    pub p_mask_refuse: f64,
    /// The customer requests delivery.
    pub p_delivery: f64,
    /// The customer requests customer service.
    pub p_service: f64,
    /// After this many full-store draws the customer is admitted anyway.
    pub max_wait_loops: usize,
}

impl CustomerPolicy {
    /// Every branch taken with probability zero; at most 3 wait loops.
    pub fn zeroed() -> Self {
        CustomerPolicy {
            p_store_full: 0.0,
            p_temp_fail: 0.0,
            p_mask_refuse: 0.0,
            p_delivery: 0.0,
            p_service: 0.0,
            max_wait_loops: 3,
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        for (name, p) in [
            ("p_store_full", self.p_store_full),
            ("p_temp_fail", self.p_temp_fail),
            ("p_mask_refuse", self.p_mask_refuse),
            ("p_delivery", self.p_delivery),
            ("p_service", self.p_service),
        ] {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(PolicyError::ProbabilityOutOfRange {
                    key: name.to_string(),
                    value: p,
                });
            }
        }
        Ok(())
    }
}

/// The five policy-governed branch points of the store net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchPoint {
    StoreFull,
    TemperatureFail,
    MaskRefuse,
    Delivery,
    Service,
}

impl BranchPoint {
    pub fn probability(self, policy: &CustomerPolicy) -> f64 {
        match self {
            BranchPoint::StoreFull => policy.p_store_full,
            BranchPoint::TemperatureFail => policy.p_temp_fail,
            BranchPoint::MaskRefuse => policy.p_mask_refuse,
            BranchPoint::Delivery => policy.p_delivery,
            BranchPoint::Service => policy.p_service,
        }
    }
}

impl fmt::Display for BranchPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchPoint::StoreFull => "store_full",
            BranchPoint::TemperatureFail => "temperature_fail",
            BranchPoint::MaskRefuse => "mask_refuse",
            BranchPoint::Delivery => "delivery",
            BranchPoint::Service => "service",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("{key} = {value} is not a probability in [0, 1]")]
    ProbabilityOutOfRange { key: String, value: f64 },
    #[error("the enabled transitions do not form a known branch point")]
    UnknownBranchPoint,
}

/// Parses a `key = value` policy file. Keys not present keep the zeroed
/// defaults.
pub fn parse_policy(text: &str) -> Result<CustomerPolicy, PolicyError> {
    let mut policy = CustomerPolicy::zeroed();
    for (ix, raw) in text.lines().enumerate() {
        let line_no = ix + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or(PolicyError::Malformed { line: line_no })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |k: &str| PolicyError::BadValue {
            line: line_no,
            key: k.to_string(),
            value: value.to_string(),
        };
        match key {
            "p_store_full" => policy.p_store_full = value.parse().map_err(|_| bad(key))?,
            "p_temp_fail" => policy.p_temp_fail = value.parse().map_err(|_| bad(key))?,
            "p_mask_refuse" => policy.p_mask_refuse = value.parse().map_err(|_| bad(key))?,
            "p_delivery" => policy.p_delivery = value.parse().map_err(|_| bad(key))?,
            "p_service" => policy.p_service = value.parse().map_err(|_| bad(key))?,
            "max_wait_loops" => policy.max_wait_loops = value.parse().map_err(|_| bad(key))?,
            _ => {
                return Err(PolicyError::UnknownKey {
                    line: line_no,
                    key: key.to_string(),
                })
            }
        }
    }
    policy.validate()?;
    Ok(policy)
}
