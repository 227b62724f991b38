//! Event-driven store-day simulation.
//!
//! Arrivals are a Poisson process; each customer's workflow outcome and zone
//! dwell times are drawn from a per-customer stream derived from the run
//! seed, so the same customers behave identically with resilience on or off.
//! With resilience on, the capacity gate holds arrivals in the distanced
//! pre-entry queue until someone leaves, and the crowd monitor holds
//! customers in distanced corridors until their next zone has room. With
//! resilience off, both limits are ignored and everyone walks straight in.
//!
//! Arrivals stop at `duration`; customers already present are served to
//! completion so every admitted customer ends as served or denied.

use super::{ContactEvent, ContactReport, Presence, SimError, Stay, StoreConfig, StoreDay, Zone};
use crate::petri::LabeledNet;
use crate::store::{run_customer, transitions, CustomerPolicy, Goal};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

/// splitmix64, used to derive independent per-customer seeds from the run
/// seed.
fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Action {
    Arrive(usize),
    /// The customer's dwell in its current zone is over.
    Advance(usize),
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    action: Action,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}
impl Eq for Event {}
impl Ord for Event {
    // Reverse order: BinaryHeap is a max-heap and we want earliest first.
    // Ties break on schedule order, keeping the run deterministic.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .partial_cmp(&self.time)
            .expect("event times are finite")
            .then(other.seq.cmp(&self.seq))
    }
}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Everything drawn about a customer before the day starts.
#[derive(Debug, Clone)]
struct Plan {
    arrival: f64,
    goal: Goal,
    delivery: bool,
    service: bool,
    dwell: [f64; 5], // indexed by in-store zone order
}

fn zone_slot(zone: Zone) -> usize {
    match zone {
        Zone::Entering => 0,
        Zone::Purchasing => 1,
        Zone::Payment => 2,
        Zone::Delivery => 3,
        Zone::Service => 4,
        Zone::Queue => unreachable!("queue dwell is not drawn"),
    }
}

fn draw_plans(
    net: &LabeledNet,
    config: &StoreConfig,
    policy: &CustomerPolicy,
    seed: u64,
) -> Result<Vec<Plan>, SimError> {
    // Arrival gaps come from the master stream; everything customer-specific
    // comes from per-customer streams so both resilience modes see the same
    // customers.
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut arrivals = Vec::new();
    let mut t = 0.0;
    loop {
        let u: f64 = master.gen();
        t += -(1.0 - u).ln() / config.arrival_rate;
        if t >= config.duration {
            break;
        }
        arrivals.push(t);
    }

    // The capacity branch is realized by the admission gate, not by policy
    // draws, so the trace is generated with the store never reported full.
    let trace_policy = CustomerPolicy {
        p_store_full: 0.0,
        ..policy.clone()
    };

    let mut plans = Vec::with_capacity(arrivals.len());
    for (ix, arrival) in arrivals.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, ix as u64));
        let mut dwell = [0.0; 5];
        for zone in Zone::IN_STORE {
            let range = config.dwell(zone);
            let u: f64 = rng.gen();
            dwell[zone_slot(zone)] = range.lo + u * (range.hi - range.lo);
        }
        let trace_seed: u64 = rng.gen();
        let trace = run_customer(net, &trace_policy, trace_seed)?;
        let ids = trace.transition_ids();
        plans.push(Plan {
            arrival,
            goal: trace.terminal,
            delivery: ids.contains(&transitions::DELIVERY_REQUEST),
            service: ids.contains(&transitions::SERVICE_REQUEST),
            dwell,
        });
    }
    Ok(plans)
}

struct Day<'a> {
    config: &'a StoreConfig,
    resilience: bool,
    plans: &'a [Plan],

    heap: BinaryHeap<Event>,
    seq: u64,

    store_occ: usize,
    entry_queue: VecDeque<usize>,
    zone_occ: [usize; 5],
    zone_wait: [VecDeque<usize>; 5],

    // Per customer.
    current_zone: Vec<Option<Zone>>,
    zone_since: Vec<f64>,
    queued_since: Vec<f64>,
    admitted_at: Vec<f64>,

    presences: Vec<Presence>,
    stays: Vec<Stay>,
    served: usize,
    denied: usize,
}

impl<'a> Day<'a> {
    fn new(config: &'a StoreConfig, resilience: bool, plans: &'a [Plan]) -> Self {
        let n = plans.len();
        Day {
            config,
            resilience,
            plans,
            heap: BinaryHeap::new(),
            seq: 0,
            store_occ: 0,
            entry_queue: VecDeque::new(),
            zone_occ: [0; 5],
            zone_wait: Default::default(),
            current_zone: vec![None; n],
            zone_since: vec![0.0; n],
            queued_since: vec![0.0; n],
            admitted_at: vec![0.0; n],
            presences: Vec::new(),
            stays: Vec::new(),
            served: 0,
            denied: 0,
        }
    }

    fn schedule(&mut self, time: f64, action: Action) {
        let seq = self.seq;
        self.seq += 1;
        self.heap.push(Event { time, seq, action });
    }

    fn record_presence(&mut self, customer: usize, zone: Zone, start: f64, end: f64) {
        if end > start {
            self.presences.push(Presence {
                customer,
                zone,
                start,
                end,
            });
        }
    }

    fn run(&mut self) {
        for (c, plan) in self.plans.iter().enumerate() {
            self.schedule(plan.arrival, Action::Arrive(c));
        }
        while let Some(event) = self.heap.pop() {
            match event.action {
                Action::Arrive(c) => {
                    self.queued_since[c] = event.time;
                    self.entry_queue.push_back(c);
                    self.try_admit(event.time);
                }
                Action::Advance(c) => self.advance(c, event.time),
            }
        }
    }

    fn try_admit(&mut self, now: f64) {
        while let Some(&c) = self.entry_queue.front() {
            if self.resilience && self.store_occ >= self.config.capacity {
                break;
            }
            self.entry_queue.pop_front();
            self.record_presence(c, Zone::Queue, self.queued_since[c], now);
            self.store_occ += 1;
            self.admitted_at[c] = now;
            self.enter_zone(c, Zone::Entering, now);
        }
    }

    fn enter_zone(&mut self, c: usize, zone: Zone, now: f64) {
        let slot = zone_slot(zone);
        if self.resilience && self.zone_occ[slot] >= self.config.zone_capacity {
            // Held in a distanced corridor until the zone has room.
            self.zone_wait[slot].push_back(c);
            return;
        }
        self.zone_occ[slot] += 1;
        self.current_zone[c] = Some(zone);
        self.zone_since[c] = now;
        self.schedule(now + self.plans[c].dwell[slot], Action::Advance(c));
    }

    fn advance(&mut self, c: usize, now: f64) {
        let zone = self.current_zone[c].take().expect("customer is in a zone");
        let slot = zone_slot(zone);
        self.record_presence(c, zone, self.zone_since[c], now);
        self.zone_occ[slot] -= 1;
        if let Some(waiter) = self.zone_wait[slot].pop_front() {
            self.enter_zone(waiter, zone, now);
        }

        let plan = &self.plans[c];
        let next = match zone {
            Zone::Entering => match plan.goal {
                Goal::TemperatureDenied | Goal::MaskDenied => None,
                Goal::Completed => Some(Zone::Purchasing),
            },
            Zone::Purchasing => Some(Zone::Payment),
            Zone::Payment if plan.delivery => Some(Zone::Delivery),
            Zone::Payment if plan.service => Some(Zone::Service),
            Zone::Payment => None,
            Zone::Delivery if plan.service => Some(Zone::Service),
            Zone::Delivery => None,
            Zone::Service => None,
            Zone::Queue => unreachable!("queue is left via try_admit"),
        };
        match next {
            Some(zone) => self.enter_zone(c, zone, now),
            None => {
                self.store_occ -= 1;
                self.stays.push(Stay {
                    customer: c,
                    admitted: self.admitted_at[c],
                    left: now,
                });
                match plan.goal {
                    Goal::Completed => self.served += 1,
                    _ => self.denied += 1,
                }
                self.try_admit(now);
            }
        }
    }
}

/// Pairwise same-zone overlaps of at least `threshold`, one event per
/// unordered pair per zone. The pre-entry queue is distanced and excluded.
fn extract_contacts(presences: &[Presence], threshold: f64) -> Vec<ContactEvent> {
    let mut events = Vec::new();
    for zone in Zone::IN_STORE {
        let mut intervals: Vec<&Presence> = presences.iter().filter(|p| p.zone == zone).collect();
        intervals.sort_by(|a, b| {
            a.start
                .partial_cmp(&b.start)
                .expect("finite times")
                .then(a.customer.cmp(&b.customer))
        });
        for (ix, p) in intervals.iter().enumerate() {
            for q in &intervals[ix + 1..] {
                if q.start > p.end - threshold {
                    break; // sorted by start: no later interval can reach the threshold
                }
                let start = p.start.max(q.start);
                let end = p.end.min(q.end);
                if end - start >= threshold {
                    events.push(ContactEvent {
                        a: p.customer.min(q.customer),
                        b: p.customer.max(q.customer),
                        zone,
                        start,
                        end,
                    });
                }
            }
        }
    }
    events.sort_by(|x, y| {
        x.start
            .partial_cmp(&y.start)
            .expect("finite times")
            .then(x.a.cmp(&y.a))
            .then(x.b.cmp(&y.b))
            .then(x.zone.cmp(&y.zone))
    });
    events
}

/// Simulates one store day and reports every close contact.
///
/// Deterministic: the same (config, policy, seed, resilience) always
/// produces the same output.
pub fn run_store_day(
    net: &LabeledNet,
    config: &StoreConfig,
    policy: &CustomerPolicy,
    resilience: bool,
    seed: u64,
) -> Result<StoreDay, SimError> {
    config.validate()?;
    policy.validate().map_err(SimError::Policy)?;
    let plans = draw_plans(net, config, policy, seed)?;

    let mut day = Day::new(config, resilience, &plans);
    day.run();

    let contacts = extract_contacts(&day.presences, config.contact_threshold);
    let mut per_zone: std::collections::BTreeMap<String, usize> = Zone::ALL
        .iter()
        .map(|z| (z.as_str().to_string(), 0))
        .collect();
    for e in &contacts {
        *per_zone.get_mut(e.zone.as_str()).expect("zone key") += 1;
    }

    let admitted = day.served + day.denied;
    debug_assert_eq!(admitted, plans.len(), "the day drains every arrival");
    let mean = if admitted > 0 {
        2.0 * contacts.len() as f64 / admitted as f64
    } else {
        0.0
    };

    Ok(StoreDay {
        report: ContactReport {
            arrivals: plans.len(),
            admitted,
            served: day.served,
            denied: day.denied,
            total_contacts: contacts.len(),
            per_zone,
            mean_contacts_per_customer: mean,
        },
        contacts,
        presences: day.presences,
        stays: day.stays,
    })
}
