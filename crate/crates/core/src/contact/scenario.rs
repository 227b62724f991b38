//! Scenario configuration files: `key = value` lines grouped into
//! `[store]`, `[policy]`, and `[epi]` sections.
//!
//! Every key has a default (the moderate-load demo day and the benchmark
//! epidemic parameters); unknown sections and keys are errors, as are
//! values that fail validation. `#` starts a comment.

use super::{DwellRange, SimError, StoreConfig};
use crate::sir::{SirParams, SirState};
use crate::store::{CustomerPolicy, PolicyError};
use serde::Serialize;

/// Epidemic parameters of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpiConfig {
    pub gamma: f64,
    pub alpha: f64,
    pub s0: f64,
    pub i0: f64,
    pub dt: f64,
    pub t_end: f64,
}

impl EpiConfig {
    pub fn params(&self) -> Result<SirParams, crate::sir::SirError> {
        SirParams::new(self.gamma, self.alpha)
    }

    pub fn initial_state(&self) -> Result<SirState, crate::sir::SirError> {
        SirState::initial(self.s0, self.i0)
    }
}

impl Default for EpiConfig {
    fn default() -> Self {
        EpiConfig {
            gamma: 0.5,
            alpha: 0.2,
            s0: 0.99,
            i0: 0.01,
            dt: 1e-3,
            t_end: 200.0,
        }
    }
}

/// A full scenario: store day, customer policy, epidemic parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Scenario {
    pub store: StoreConfig,
    pub policy: CustomerPolicy,
    pub epi: EpiConfig,
}

impl Default for CustomerPolicy {
    fn default() -> Self {
        CustomerPolicy::zeroed()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("line {line}: expected `key = value` or `[section]`")]
    Malformed { line: usize },
    #[error("line {line}: unknown section `[{name}]`")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: key `{key}` outside any section")]
    KeyOutsideSection { line: usize, key: String },
    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: bad value `{value}` for `{key}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid [epi] values: {0}")]
    Epi(String),
}

/// Parses a scenario file over the defaults and validates the result.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut scenario = Scenario::default();
    let mut section: Option<String> = None;

    for (ix, raw) in text.lines().enumerate() {
        let line_no = ix + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if !["store", "policy", "epi"].contains(&name) {
                return Err(ScenarioError::UnknownSection {
                    line: line_no,
                    name: name.to_string(),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or(ScenarioError::Malformed { line: line_no })?;
        let key = key.trim();
        let value = value.trim();
        let section = section
            .as_deref()
            .ok_or_else(|| ScenarioError::KeyOutsideSection {
                line: line_no,
                key: key.to_string(),
            })?;
        match section {
            "store" => set_store_key(&mut scenario.store, line_no, key, value)?,
            "policy" => set_policy_key(&mut scenario.policy, line_no, key, value)?,
            "epi" => set_epi_key(&mut scenario.epi, line_no, key, value)?,
            _ => unreachable!(),
        }
    }

    scenario.store.validate()?;
    scenario.policy.validate()?;
    validate_epi(&scenario.epi)?;
    Ok(scenario)
}

fn bad(line: usize, key: &str, value: &str) -> ScenarioError {
    ScenarioError::BadValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ScenarioError> {
    value.parse().map_err(|_| bad(line, key, value))
}

fn parse_dwell(line: usize, key: &str, value: &str) -> Result<DwellRange, ScenarioError> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(bad(line, key, value));
    }
    Ok(DwellRange::new(
        parse_f64(line, key, parts[0])?,
        parse_f64(line, key, parts[1])?,
    ))
}

fn set_store_key(
    store: &mut StoreConfig,
    line: usize,
    key: &str,
    value: &str,
) -> Result<(), ScenarioError> {
    match key {
        "arrival_rate" => store.arrival_rate = parse_f64(line, key, value)?,
        "capacity" => store.capacity = value.parse().map_err(|_| bad(line, key, value))?,
        "zone_capacity" => {
            store.zone_capacity = value.parse().map_err(|_| bad(line, key, value))?
        }
        "duration" => store.duration = parse_f64(line, key, value)?,
        "contact_threshold" => store.contact_threshold = parse_f64(line, key, value)?,
        "dwell_entering" => store.dwell_entering = parse_dwell(line, key, value)?,
        "dwell_purchasing" => store.dwell_purchasing = parse_dwell(line, key, value)?,
        "dwell_payment" => store.dwell_payment = parse_dwell(line, key, value)?,
        "dwell_delivery" => store.dwell_delivery = parse_dwell(line, key, value)?,
        "dwell_service" => store.dwell_service = parse_dwell(line, key, value)?,
        _ => {
            return Err(ScenarioError::UnknownKey {
                line,
                section: "store".into(),
                key: key.to_string(),
            })
        }
    }
    Ok(())
}

fn set_policy_key(
    policy: &mut CustomerPolicy,
    line: usize,
    key: &str,
    value: &str,
) -> Result<(), ScenarioError> {
    match key {
        "p_store_full" => policy.p_store_full = parse_f64(line, key, value)?,
        "p_temp_fail" => policy.p_temp_fail = parse_f64(line, key, value)?,
        "p_mask_refuse" => policy.p_mask_refuse = parse_f64(line, key, value)?,
        "p_delivery" => policy.p_delivery = parse_f64(line, key, value)?,
        "p_service" => policy.p_service = parse_f64(line, key, value)?,
        "max_wait_loops" => {
            policy.max_wait_loops = value.parse().map_err(|_| bad(line, key, value))?
        }
        _ => {
            return Err(ScenarioError::UnknownKey {
                line,
                section: "policy".into(),
                key: key.to_string(),
            })
        }
    }
    Ok(())
}

fn set_epi_key(
    epi: &mut EpiConfig,
    line: usize,
    key: &str,
    value: &str,
) -> Result<(), ScenarioError> {
    let v = parse_f64(line, key, value)?;
    match key {
        "gamma" => epi.gamma = v,
        "alpha" => epi.alpha = v,
        "s0" => epi.s0 = v,
        "i0" => epi.i0 = v,
        "dt" => epi.dt = v,
        "t_end" => epi.t_end = v,
        _ => {
            return Err(ScenarioError::UnknownKey {
                line,
                section: "epi".into(),
                key: key.to_string(),
            })
        }
    }
    Ok(())
}

fn validate_epi(epi: &EpiConfig) -> Result<(), ScenarioError> {
    epi.params()
        .map_err(|e| ScenarioError::Epi(e.to_string()))?;
    epi.initial_state()
        .map_err(|e| ScenarioError::Epi(e.to_string()))?;
    if !epi.dt.is_finite() || epi.dt <= 0.0 {
        return Err(ScenarioError::Epi(format!(
            "dt must be positive, got {}",
            epi.dt
        )));
    }
    if !epi.t_end.is_finite() || epi.t_end <= 0.0 {
        return Err(ScenarioError::Epi(format!(
            "t_end must be positive, got {}",
            epi.t_end
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_scenario_over_defaults() {
        let scenario = parse_scenario(
            "
[store]
arrival_rate = 0.8   # brisk morning
capacity = 6
dwell_purchasing = 20 30

[policy]
p_delivery = 0.25

[epi]
gamma = 0.4
",
        )
        .unwrap();
        assert_eq!(scenario.store.arrival_rate, 0.8);
        assert_eq!(scenario.store.capacity, 6);
        assert_eq!(scenario.store.dwell_purchasing, DwellRange::new(20.0, 30.0));
        assert_eq!(scenario.policy.p_delivery, 0.25);
        assert_eq!(scenario.epi.gamma, 0.4);
        assert_eq!(scenario.epi.alpha, 0.2, "default kept");
    }

    #[test]
    fn rejects_unknown_sections_keys_and_stray_lines() {
        assert!(matches!(
            parse_scenario("[lounge]\n"),
            Err(ScenarioError::UnknownSection { .. })
        ));
        assert!(matches!(
            parse_scenario("[store]\nfloor_area = 12\n"),
            Err(ScenarioError::UnknownKey { .. })
        ));
        assert!(matches!(
            parse_scenario("arrival_rate = 1\n"),
            Err(ScenarioError::KeyOutsideSection { .. })
        ));
        assert!(matches!(
            parse_scenario("[store]\narrival_rate\n"),
            Err(ScenarioError::Malformed { .. })
        ));
    }

    #[test]
    fn validation_runs_on_the_merged_result() {
        assert!(matches!(
            parse_scenario("[store]\ncapacity = 0\n"),
            Err(ScenarioError::Sim(_))
        ));
        assert!(matches!(
            parse_scenario("[epi]\nalpha = 0\n"),
            Err(ScenarioError::Epi(_))
        ));
        assert!(matches!(
            parse_scenario("[policy]\np_delivery = 2\n"),
            Err(ScenarioError::Policy(_))
        ));
    }
}
