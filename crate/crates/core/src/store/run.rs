//! Running customers through the store net: policy-resolved single runs and
//! exhaustive trace enumeration.

use super::policy::{BranchPoint, CustomerPolicy, PolicyError};
use super::{transitions as t, Goal};
use crate::petri::{LabeledNet, Marking, Message};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;
use std::collections::HashMap;
use std::fmt::Write as _;

/// One fired transition with the message it exchanged, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Firing {
    pub transition: usize,
    pub message: Option<Message>,
}

/// A realized customer path from the source to one terminal goal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub seed: u64,
    pub firings: Vec<Firing>,
    pub terminal: Goal,
    pub wait_loops: usize,
}

impl Trace {
    pub fn transition_ids(&self) -> Vec<usize> {
        self.firings.iter().map(|f| f.transition).collect()
    }
}

/// A firing sequence without a seed, as produced by enumeration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct TraceSkeleton {
    /// Terminal place name, e.g. `O3`.
    pub terminal: String,
    pub firings: Vec<usize>,
    /// Traversals of the capacity-wait cycle.
    pub loops: usize,
}

/// Resolves one branch point: a single uniform draw compared against the
/// policy probability.
///
/// Exactly one draw is consumed per call, whatever the probability, so runs
/// with the same seed see the same draw sequence; raising a probability can
/// only flip outcomes from "no" to "yes" (coupled draws).
pub fn resolve_choice(policy: &CustomerPolicy, branch: BranchPoint, rng: &mut ChaCha8Rng) -> bool {
    let u: f64 = rng.gen();
    u < branch.probability(policy)
}

/// Classifies a set of simultaneously enabled transitions as one of the five
/// policy-governed branch points of the store net.
fn classify(enabled: &[usize]) -> Result<BranchPoint, PolicyError> {
    match *enabled {
        [t::NOTIFY_FULL, t::ADMIT] => Ok(BranchPoint::StoreFull),
        [t::TEMP_FAIL, t::TEMP_PASS] => Ok(BranchPoint::TemperatureFail),
        [t::MASK_REFUSE, t::MASK_PASS] => Ok(BranchPoint::MaskRefuse),
        [t::DELIVERY_REQUEST, t::DELIVERY_DECLINE] => Ok(BranchPoint::Delivery),
        [t::SERVICE_REQUEST, t::SERVICE_DECLINE] => Ok(BranchPoint::Service),
        _ => Err(PolicyError::UnknownBranchPoint),
    }
}

/// Walks one customer from the source place to a terminal goal, resolving
/// every branch with the policy.
///
/// The capacity branch stops being drawn once `max_wait_loops` full-store
/// draws have come up full; the customer is then admitted.
pub fn run_customer(
    net: &LabeledNet,
    policy: &CustomerPolicy,
    seed: u64,
) -> Result<Trace, PolicyError> {
    policy.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = net.initial_state();
    let mut firings = Vec::new();
    let mut wait_loops = 0usize;

    loop {
        let enabled = net.enabled(&state);
        let next = match enabled.len() {
            0 => break,
            1 => enabled[0],
            _ => {
                let branch = classify(&enabled)?;
                match branch {
                    BranchPoint::StoreFull => {
                        if wait_loops < policy.max_wait_loops
                            && resolve_choice(policy, branch, &mut rng)
                        {
                            wait_loops += 1;
                            t::NOTIFY_FULL
                        } else {
                            t::ADMIT
                        }
                    }
                    BranchPoint::TemperatureFail => {
                        if resolve_choice(policy, branch, &mut rng) {
                            t::TEMP_FAIL
                        } else {
                            t::TEMP_PASS
                        }
                    }
                    BranchPoint::MaskRefuse => {
                        if resolve_choice(policy, branch, &mut rng) {
                            t::MASK_REFUSE
                        } else {
                            t::MASK_PASS
                        }
                    }
                    BranchPoint::Delivery => {
                        if resolve_choice(policy, branch, &mut rng) {
                            t::DELIVERY_REQUEST
                        } else {
                            t::DELIVERY_DECLINE
                        }
                    }
                    BranchPoint::Service => {
                        if resolve_choice(policy, branch, &mut rng) {
                            t::SERVICE_REQUEST
                        } else {
                            t::SERVICE_DECLINE
                        }
                    }
                }
            }
        };
        let message = net.transition(next).and_then(|tr| tr.message.clone());
        state = net
            .fire(&state, next)
            .expect("chosen transition is enabled");
        firings.push(Firing {
            transition: next,
            message,
        });
    }

    let terminal = Goal::ALL
        .into_iter()
        .find(|g| {
            net.place_index(g.place_name())
                .is_some_and(|p| state.marking.is_marked(p))
        })
        .expect("a finished customer marks a terminal goal");
    Ok(Trace {
        seed,
        firings,
        terminal,
        wait_loops,
    })
}

/// Enumerates every source-to-sink firing sequence in which no marking
/// occurs more than `loop_bound + 1` times, i.e. every cycle of the net is
/// traversed at most `loop_bound` times. Results are deduplicated and sorted
/// by (terminal, firing sequence).
///
/// Terminates on any safe net: markings are finite, so path lengths are
/// bounded by `(loop_bound + 1)` times the number of reachable markings.
pub fn enumerate_traces(net: &LabeledNet, loop_bound: usize) -> Vec<TraceSkeleton> {
    let mut out = BTreeSet::new();
    let state = net.initial_state();
    let mut seen: HashMap<Marking, usize> = HashMap::new();
    seen.insert(state.marking.clone(), 1);
    let mut path = Vec::new();
    dfs(net, &state, &mut path, &mut seen, loop_bound, &mut out);
    out.into_iter().collect()
}

fn dfs(
    net: &LabeledNet,
    state: &crate::petri::NetState,
    path: &mut Vec<usize>,
    seen: &mut HashMap<Marking, usize>,
    loop_bound: usize,
    out: &mut BTreeSet<TraceSkeleton>,
) {
    let enabled = net.enabled(state);
    if enabled.is_empty() {
        let marked_sinks: Vec<usize> = net
            .sink_places()
            .iter()
            .copied()
            .filter(|&p| state.marking.is_marked(p))
            .collect();
        if let [sink] = marked_sinks[..] {
            let loops = seen.values().max().copied().unwrap_or(1) - 1;
            out.insert(TraceSkeleton {
                terminal: net.place_name(sink).to_string(),
                firings: path.clone(),
                loops,
            });
        }
        return;
    }
    for transition in enabled {
        // Skip firings that would break safeness; reachability reports them.
        let Ok(next) = net.fire(state, transition) else {
            continue;
        };
        let count = seen.entry(next.marking.clone()).or_insert(0);
        if *count + 1 > loop_bound + 1 {
            continue;
        }
        *count += 1;
        path.push(transition);
        dfs(net, &next, path, seen, loop_bound, out);
        path.pop();
        let count = seen.get_mut(&next.marking).expect("pushed above");
        *count -= 1;
        if *count == 0 {
            seen.remove(&next.marking);
        }
    }
}

/// Renders a firing sequence as CSV with columns
/// `step,transition,msg,sender,receiver`.
pub fn trace_to_csv(net: &LabeledNet, firings: &[usize]) -> String {
    let mut out = String::from("step,transition,msg,sender,receiver\n");
    for (step, &id) in firings.iter().enumerate() {
        match net.transition(id).and_then(|t| t.message.as_ref()) {
            Some(m) => {
                let _ = writeln!(out, "{step},{id},{},{},{}", m.msg, m.sender, m.receiver);
            }
            None => {
                let _ = writeln!(out, "{step},{id},,,");
            }
        }
    }
    out
}
