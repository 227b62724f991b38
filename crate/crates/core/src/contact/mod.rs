//! Store-day contact simulation and its coupling to the epidemic model.
//!
//! A simulated day pushes Poisson arrivals through the store workflow and
//! records, zone by zone, every co-presence long enough to count as a close
//! contact (same zone, overlap at least `contact_threshold`). Running the
//! same day with and without the resilience measures (store capacity gate,
//! per-zone occupancy caps) yields two contact rates; their ratio scales the
//! contact ratio `q`, and the epidemic consequences of `q_base` versus
//! `q_eff` are compared through the SIR analytics.

mod scenario;
mod sim;

pub use scenario::{parse_scenario, EpiConfig, Scenario, ScenarioError};
pub use sim::run_store_day;

use crate::sir::{self, SirError, SirParams, SirState};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// The zones a customer can occupy: the distanced pre-entry queue plus one
/// zone per workflow procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Zone {
    Queue,
    Entering,
    Purchasing,
    Payment,
    Delivery,
    Service,
}

impl Zone {
    pub const ALL: [Zone; 6] = [
        Zone::Queue,
        Zone::Entering,
        Zone::Purchasing,
        Zone::Payment,
        Zone::Delivery,
        Zone::Service,
    ];

    /// Zones inside the store; the pre-entry queue is outside and distanced,
    /// so co-presence there is never a close contact.
    pub const IN_STORE: [Zone; 5] = [
        Zone::Entering,
        Zone::Purchasing,
        Zone::Payment,
        Zone::Delivery,
        Zone::Service,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Zone::Queue => "queue",
            Zone::Entering => "entering",
            Zone::Purchasing => "purchasing",
            Zone::Payment => "payment",
            Zone::Delivery => "delivery",
            Zone::Service => "service",
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Uniform dwell-time bounds (minutes) for one zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DwellRange {
    pub lo: f64,
    pub hi: f64,
}

impl DwellRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        DwellRange { lo, hi }
    }
}

/// Store-day configuration. Times are minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreConfig {
    /// Poisson arrival rate, customers per minute.
    pub arrival_rate: f64,
    /// Maximum simultaneous customers in the store (resilience gate).
    pub capacity: usize,
    /// Maximum simultaneous customers per zone (crowd monitor).
    pub zone_capacity: usize,
    /// Arrivals stop after this many minutes; everyone already waiting is
    /// still served.
    pub duration: f64,
    /// Minimum same-zone overlap that counts as a close contact.
    pub contact_threshold: f64,
    pub dwell_entering: DwellRange,
    pub dwell_purchasing: DwellRange,
    pub dwell_payment: DwellRange,
    pub dwell_delivery: DwellRange,
    pub dwell_service: DwellRange,
}

impl StoreConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !self.arrival_rate.is_finite() || self.arrival_rate < 0.0 {
            return Err(SimError::Config(format!(
                "arrival_rate must be finite and non-negative, got {}",
                self.arrival_rate
            )));
        }
        if self.capacity < 1 {
            return Err(SimError::Config("capacity must be at least 1".into()));
        }
        if self.zone_capacity < 1 {
            return Err(SimError::Config("zone_capacity must be at least 1".into()));
        }
        if !self.duration.is_finite() || self.duration <= 0.0 {
            return Err(SimError::Config(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if !self.contact_threshold.is_finite() || self.contact_threshold <= 0.0 {
            return Err(SimError::Config(format!(
                "contact_threshold must be positive, got {}",
                self.contact_threshold
            )));
        }
        for (name, d) in [
            ("dwell_entering", self.dwell_entering),
            ("dwell_purchasing", self.dwell_purchasing),
            ("dwell_payment", self.dwell_payment),
            ("dwell_delivery", self.dwell_delivery),
            ("dwell_service", self.dwell_service),
        ] {
            if !(d.lo.is_finite() && d.hi.is_finite()) || d.lo <= 0.0 || d.hi < d.lo {
                return Err(SimError::Config(format!(
                    "{name} must satisfy 0 < lo <= hi, got {} {}",
                    d.lo, d.hi
                )));
            }
        }
        Ok(())
    }

    pub fn dwell(&self, zone: Zone) -> DwellRange {
        match zone {
            Zone::Queue => DwellRange::new(0.0, 0.0),
            Zone::Entering => self.dwell_entering,
            Zone::Purchasing => self.dwell_purchasing,
            Zone::Payment => self.dwell_payment,
            Zone::Delivery => self.dwell_delivery,
            Zone::Service => self.dwell_service,
        }
    }
}

impl Default for StoreConfig {
    /// A moderate-load eight-hour day.
    fn default() -> Self {
        StoreConfig {
            arrival_rate: 0.5,
            capacity: 8,
            zone_capacity: 4,
            duration: 480.0,
            contact_threshold: 15.0,
            dwell_entering: DwellRange::new(2.0, 4.0),
            dwell_purchasing: DwellRange::new(18.0, 35.0),
            dwell_payment: DwellRange::new(2.0, 6.0),
            dwell_delivery: DwellRange::new(3.0, 8.0),
            dwell_service: DwellRange::new(4.0, 10.0),
        }
    }
}

/// One recorded close contact: an unordered customer pair, the zone, and
/// the maximal overlap interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactEvent {
    pub a: usize,
    pub b: usize,
    pub zone: Zone,
    pub start: f64,
    pub end: f64,
}

impl ContactEvent {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// One customer's stay in one zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Presence {
    pub customer: usize,
    pub zone: Zone,
    pub start: f64,
    pub end: f64,
}

/// One customer's whole time inside the store (admission to exit).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stay {
    pub customer: usize,
    pub admitted: f64,
    pub left: f64,
}

/// Contact statistics for one simulated day.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactReport {
    pub arrivals: usize,
    pub admitted: usize,
    /// Customers that completed a purchase.
    pub served: usize,
    /// Customers denied at the temperature or mask check.
    pub denied: usize,
    pub total_contacts: usize,
    pub per_zone: BTreeMap<String, usize>,
    /// Contact participations per admitted customer (each event counts for
    /// both participants).
    pub mean_contacts_per_customer: f64,
}

/// Full output of one simulated day.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoreDay {
    pub report: ContactReport,
    pub contacts: Vec<ContactEvent>,
    pub presences: Vec<Presence>,
    pub stays: Vec<Stay>,
}

impl StoreDay {
    /// Contact events as CSV: `customer_a,customer_b,zone,t_start,t_end`.
    pub fn contacts_to_csv(&self) -> String {
        let mut out = String::from("customer_a,customer_b,zone,t_start,t_end\n");
        for e in &self.contacts {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.a, e.b, e.zone, e.start, e.end
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid store config: {0}")]
    Config(String),
    #[error(transparent)]
    Policy(#[from] crate::store::PolicyError),
}

/// The effective contact ratio after scaling `q_base` by the observed
/// contact reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveQ {
    pub q_base: f64,
    pub q_eff: f64,
    /// mean contacts with resilience over mean contacts without.
    pub contact_scale: f64,
    /// The baseline day had no contacts at all; `q_eff = q_base` by
    /// convention and the scale is meaningless.
    pub zero_baseline: bool,
}

/// Scales the contact ratio by the ratio of mean contacts per customer with
/// resilience on versus off, clamped to `[0, q_base]`.
pub fn effective_q(
    q_base: f64,
    report_on: &ContactReport,
    report_off: &ContactReport,
) -> EffectiveQ {
    if report_off.mean_contacts_per_customer <= 0.0 {
        return EffectiveQ {
            q_base,
            q_eff: q_base,
            contact_scale: 1.0,
            zero_baseline: true,
        };
    }
    let contact_scale =
        report_on.mean_contacts_per_customer / report_off.mean_contacts_per_customer;
    EffectiveQ {
        q_base,
        q_eff: (q_base * contact_scale).clamp(0.0, q_base),
        contact_scale,
        zero_baseline: false,
    }
}

/// Epidemic consequences of one contact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutbreakStats {
    pub q: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub threshold: f64,
    pub epidemic: bool,
    pub i_max: f64,
    pub s_end: f64,
    pub r_end: f64,
}

/// Side-by-side epidemic outcomes under the baseline and effective contact
/// ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub q_base: f64,
    pub q_eff: f64,
    pub base: OutbreakStats,
    pub eff: OutbreakStats,
    pub i_max_reduction: f64,
    pub i_max_reduction_rel: f64,
    pub r_end_reduction: f64,
    pub r_end_reduction_rel: f64,
    /// `q_eff * s0 <= 1`: infections can only decline under the effective
    /// ratio.
    pub epidemic_averted: bool,
}

fn outbreak_stats(q: f64, alpha: f64, init: &SirState) -> Result<OutbreakStats, SirError> {
    let params = SirParams::with_contact_ratio(q, alpha)?;
    let threshold = sir::epidemic_threshold(&params, init.s);
    let peak = sir::i_max(&params, init);
    // A zero ratio means no transmission at all: nobody new is infected and
    // the initially infectious mass is removed.
    let (s_end, r_end) = if q > 0.0 {
        let fs = sir::final_size(&params, init)?;
        (fs.s_end, fs.r_end)
    } else {
        (init.s, init.i)
    };
    Ok(OutbreakStats {
        q,
        gamma: params.gamma,
        alpha,
        threshold: threshold.value,
        epidemic: threshold.epidemic,
        i_max: peak,
        s_end,
        r_end,
    })
}

/// Evaluates peak prevalence and final size under both contact ratios,
/// keeping `alpha` fixed and recomputing `gamma = q * alpha`.
pub fn compare_outbreaks(
    params: &SirParams,
    init: &SirState,
    q_base: f64,
    q_eff: f64,
) -> Result<ComparisonReport, SirError> {
    let alpha = params.alpha;
    let base = outbreak_stats(q_base, alpha, init)?;
    let eff = outbreak_stats(q_eff, alpha, init)?;
    let rel = |delta: f64, base: f64| if base > 0.0 { delta / base } else { 0.0 };
    Ok(ComparisonReport {
        q_base,
        q_eff,
        base,
        eff,
        i_max_reduction: base.i_max - eff.i_max,
        i_max_reduction_rel: rel(base.i_max - eff.i_max, base.i_max),
        r_end_reduction: base.r_end - eff.r_end,
        r_end_reduction_rel: rel(base.r_end - eff.r_end, base.r_end),
        epidemic_averted: q_eff * init.s <= 1.0,
    })
}
