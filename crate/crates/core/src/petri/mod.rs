//! Labeled Petri net data model and firing semantics.
//!
//! A net couples a classical safe Petri net (places, transitions, arcs,
//! 0/1 marking) with a message pool: transitions are either `In` (consume
//! one matching message from the pool), `Out` (append one message to the
//! pool), or `Inner` (pool untouched). A net state is the pair of marking
//! and pool, plus an append-only log of everything that fired.
//!
//! `enabled` and `fire` are pure: they never mutate their inputs and
//! identical inputs produce identical outputs.

mod format;
mod reach;

pub use format::{parse_net, write_net, ParseError};
pub use reach::{
    is_workflow_net, reachability, reachability_with, DeadState, ReachConfig, ReachReport,
    SafenessViolation, StateGraph, StateNode, TerminalReport, WorkflowReport,
};

use crate::roles::RolePlayer;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A place: a dense index (its slot in the marking) plus a unique name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlaceId {
    pub index: usize,
    pub name: String,
}

/// Transition category. The three kinds are mutually exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionKind {
    /// Receives a message from a partner: consumes one pool entry.
    In,
    /// Sends a message to a partner: appends one pool entry.
    Out,
    /// Internal activity: no message involved.
    Inner,
}

impl fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransitionKind::In => "in",
            TransitionKind::Out => "out",
            TransitionKind::Inner => "inner",
        })
    }
}

/// A message triple: name, sender, receiver.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Message {
    pub msg: String,
    pub sender: RolePlayer,
    pub receiver: RolePlayer,
}

impl Message {
    pub fn new(msg: impl Into<String>, sender: RolePlayer, receiver: RolePlayer) -> Self {
        Message {
            msg: msg.into(),
            sender,
            receiver,
        }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.msg, self.sender, self.receiver)
    }
}

/// A transition: id, kind, the message it exchanges (`In`/`Out` only),
/// an opaque activity label, and a weight.
///
/// The weight is carried for reporting; no operation consumes it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub id: usize,
    pub kind: TransitionKind,
    pub message: Option<Message>,
    pub label: String,
    pub weight: f64,
}

impl Transition {
    pub fn inner(id: usize, label: impl Into<String>) -> Self {
        Transition {
            id,
            kind: TransitionKind::Inner,
            message: None,
            label: label.into(),
            weight: 1.0,
        }
    }

    pub fn receive(id: usize, message: Message, label: impl Into<String>) -> Self {
        Transition {
            id,
            kind: TransitionKind::In,
            message: Some(message),
            label: label.into(),
            weight: 1.0,
        }
    }

    pub fn send(id: usize, message: Message, label: impl Into<String>) -> Self {
        Transition {
            id,
            kind: TransitionKind::Out,
            message: Some(message),
            label: label.into(),
            weight: 1.0,
        }
    }
}

/// A directed arc. Place endpoints are place indices, transition endpoints
/// are transition ids; place-to-place and transition-to-transition arcs
/// cannot be represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arc {
    PlaceToTransition { place: usize, transition: usize },
    TransitionToPlace { transition: usize, place: usize },
}

/// A safe marking: one bit per place, index-aligned with the net's places.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Marking {
    bits: Vec<bool>,
}

impl Marking {
    pub fn empty(places: usize) -> Self {
        Marking {
            bits: vec![false; places],
        }
    }

    pub fn is_marked(&self, place: usize) -> bool {
        self.bits.get(place).copied().unwrap_or(false)
    }

    pub fn token_count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn marked_places(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(ix, b)| b.then_some(ix))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    fn set(&mut self, place: usize, marked: bool) {
        self.bits[place] = marked;
    }
}

/// A multiset of in-flight messages.
///
/// Counts are kept in a sorted map so iteration order, equality and hashing
/// are all deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessagePool {
    counts: BTreeMap<Message, u32>,
}

impl MessagePool {
    pub fn new() -> Self {
        MessagePool::default()
    }

    pub fn from_messages<I: IntoIterator<Item = Message>>(messages: I) -> Self {
        let mut pool = MessagePool::new();
        for m in messages {
            pool.add(m);
        }
        pool
    }

    pub fn add(&mut self, message: Message) {
        *self.counts.entry(message).or_insert(0) += 1;
    }

    /// Removes one occurrence. Returns false (and leaves the pool untouched)
    /// if the message is absent.
    pub fn remove(&mut self, message: &Message) -> bool {
        match self.counts.get_mut(message) {
            Some(n) if *n > 1 => {
                *n -= 1;
                true
            }
            Some(_) => {
                self.counts.remove(message);
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, message: &Message) -> bool {
        self.counts.contains_key(message)
    }

    pub fn count(&self, message: &Message) -> u32 {
        self.counts.get(message).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().map(|n| u64::from(*n)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Message, u32)> {
        self.counts.iter().map(|(m, n)| (m, *n))
    }

    /// Sorted (message, count) snapshot; the canonical pool summary used for
    /// state identity.
    pub fn summary(&self) -> Vec<(Message, u32)> {
        self.counts.iter().map(|(m, n)| (m.clone(), *n)).collect()
    }
}

impl std::hash::Hash for MessagePool {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for (m, n) in &self.counts {
            m.hash(state);
            n.hash(state);
        }
    }
}

/// One log entry per firing: the step number, the transition, and the
/// message it exchanged (none for `Inner`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogEntry {
    pub step: usize,
    pub transition: usize,
    pub message: Option<Message>,
}

/// A net state: marking plus message pool, with an append-only audit log.
/// The log length always equals the number of firings since the initial
/// state; it does not participate in state identity.
#[derive(Debug, Clone, PartialEq)]
pub struct NetState {
    pub marking: Marking,
    pub pool: MessagePool,
    pub log: Vec<LogEntry>,
}

/// A validated labeled net.
///
/// Construction goes through [`LabeledNet::build`], which checks every
/// structural invariant; the fields are immutable afterwards.
#[derive(Debug, Clone)]
pub struct LabeledNet {
    places: Vec<PlaceId>,
    transitions: Vec<Transition>,
    arcs: Vec<Arc>,
    initial_marking: Marking,
    initial_messages: MessagePool,
    // Derived adjacency, index-aligned with `transitions`.
    inputs: Vec<Vec<usize>>,
    outputs: Vec<Vec<usize>>,
    // Place indices with no outgoing arc and at least one incoming arc.
    sink_places: Vec<usize>,
}

/// Plain description of a net, as assembled programmatically or parsed from
/// the text format. `LabeledNet::build` validates it.
#[derive(Debug, Clone, Default)]
pub struct NetDescription {
    /// Place names; the position in this list becomes the place index.
    pub places: Vec<String>,
    pub transitions: Vec<Transition>,
    /// Arcs as (from, to) name pairs. Transition endpoints use `t<id>`,
    /// place endpoints use the place name.
    pub arcs: Vec<(String, String)>,
    /// Names of initially marked places.
    pub initial_marking: Vec<String>,
    /// Initial message pool.
    pub initial_messages: Vec<Message>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetError {
    #[error("duplicate place name `{0}`")]
    DuplicatePlaceName(String),
    #[error("place name `{0}` is reserved for transition references (t<id>)")]
    ReservedPlaceName(String),
    #[error("duplicate transition id {0}")]
    DuplicateTransitionId(usize),
    #[error("arc endpoint `{0}` does not name a place or transition in the net")]
    ArcEndpointMissing(String),
    #[error("arc `{0} -> {1}` connects two places or two transitions")]
    ArcNotBipartite(String, String),
    #[error("transition {0} is {1} but carries no message")]
    MissingMessage(usize, TransitionKind),
    #[error("transition {0} is inner but carries message {1}")]
    InnerWithMessage(usize, Message),
    #[error("transition {0}: message name is empty")]
    EmptyMessageName(usize),
    #[error("transition {0}: message sender and receiver are both {1}")]
    SelfAddressedMessage(usize, RolePlayer),
    #[error("transition {0}: weight {1} is not a finite non-negative number")]
    InvalidWeight(usize, f64),
    #[error("initially marked place `{0}` does not exist")]
    UnknownInitialPlace(String),
    #[error("net exchanges messages but the initial message pool is empty")]
    EmptyInitialMessages,
    #[error("net is not connected: `{0}` is isolated from the rest of the net")]
    Disconnected(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FireError {
    #[error("transition {0} does not exist")]
    UnknownTransition(usize),
    #[error("transition {0} is not enabled in the given state")]
    Disabled(usize),
    #[error("firing transition {transition} would put a second token on place `{place}`")]
    SafenessViolation { transition: usize, place: String },
}

impl LabeledNet {
    /// Validates a description and builds the net.
    pub fn build(desc: NetDescription) -> Result<Self, NetError> {
        let mut name_to_index = BTreeMap::new();
        for (ix, name) in desc.places.iter().enumerate() {
            if is_transition_ref(name) {
                return Err(NetError::ReservedPlaceName(name.clone()));
            }
            if name_to_index.insert(name.clone(), ix).is_some() {
                return Err(NetError::DuplicatePlaceName(name.clone()));
            }
        }

        let mut transitions = desc.transitions;
        transitions.sort_by_key(|t| t.id);
        let mut id_to_slot = BTreeMap::new();
        for (slot, t) in transitions.iter().enumerate() {
            if id_to_slot.insert(t.id, slot).is_some() {
                return Err(NetError::DuplicateTransitionId(t.id));
            }
            match (t.kind, &t.message) {
                (TransitionKind::Inner, Some(m)) => {
                    return Err(NetError::InnerWithMessage(t.id, m.clone()))
                }
                (TransitionKind::Inner, None) => {}
                (kind, None) => return Err(NetError::MissingMessage(t.id, kind)),
                (_, Some(m)) => {
                    if m.msg.is_empty() {
                        return Err(NetError::EmptyMessageName(t.id));
                    }
                    if m.sender == m.receiver {
                        return Err(NetError::SelfAddressedMessage(t.id, m.sender));
                    }
                }
            }
            if !t.weight.is_finite() || t.weight < 0.0 {
                return Err(NetError::InvalidWeight(t.id, t.weight));
            }
        }

        let mut arcs = Vec::with_capacity(desc.arcs.len());
        let mut inputs = vec![Vec::new(); transitions.len()];
        let mut outputs = vec![Vec::new(); transitions.len()];
        let mut place_has_in = vec![false; desc.places.len()];
        let mut place_has_out = vec![false; desc.places.len()];
        for (from, to) in &desc.arcs {
            let from_place = name_to_index.get(from);
            let to_place = name_to_index.get(to);
            let from_trans =
                parse_transition_ref(from).and_then(|id| id_to_slot.get(&id).map(|s| (id, *s)));
            let to_trans =
                parse_transition_ref(to).and_then(|id| id_to_slot.get(&id).map(|s| (id, *s)));
            match (from_place, to_trans, from_trans, to_place) {
                (Some(&p), Some((id, slot)), _, _) => {
                    arcs.push(Arc::PlaceToTransition {
                        place: p,
                        transition: id,
                    });
                    inputs[slot].push(p);
                    place_has_out[p] = true;
                }
                (_, _, Some((id, slot)), Some(&p)) => {
                    arcs.push(Arc::TransitionToPlace {
                        transition: id,
                        place: p,
                    });
                    outputs[slot].push(p);
                    place_has_in[p] = true;
                }
                (Some(_), None, _, Some(_)) | (None, Some(_), Some(_), None) => {
                    return Err(NetError::ArcNotBipartite(from.clone(), to.clone()))
                }
                _ => {
                    let missing = if from_place.is_none() && from_trans.is_none() {
                        from
                    } else {
                        to
                    };
                    return Err(NetError::ArcEndpointMissing(missing.clone()));
                }
            }
        }
        for ins in &mut inputs {
            ins.sort_unstable();
            ins.dedup();
        }
        for outs in &mut outputs {
            outs.sort_unstable();
            outs.dedup();
        }

        let mut initial_marking = Marking::empty(desc.places.len());
        for name in &desc.initial_marking {
            let ix = name_to_index
                .get(name)
                .ok_or_else(|| NetError::UnknownInitialPlace(name.clone()))?;
            initial_marking.set(*ix, true);
        }

        let has_interactions = transitions
            .iter()
            .any(|t| matches!(t.kind, TransitionKind::In | TransitionKind::Out));
        if has_interactions && desc.initial_messages.is_empty() {
            return Err(NetError::EmptyInitialMessages);
        }

        let sink_places = (0..desc.places.len())
            .filter(|&p| place_has_in[p] && !place_has_out[p])
            .collect();

        let places: Vec<PlaceId> = desc
            .places
            .into_iter()
            .enumerate()
            .map(|(index, name)| PlaceId { index, name })
            .collect();

        let net = LabeledNet {
            places,
            transitions,
            arcs,
            initial_marking,
            initial_messages: MessagePool::from_messages(desc.initial_messages),
            inputs,
            outputs,
            sink_places,
        };
        net.check_connected()?;
        Ok(net)
    }

    /// Connectivity over the undirected bipartite graph of places and
    /// transitions. A single-place net is trivially connected.
    fn check_connected(&self) -> Result<(), NetError> {
        let n = self.places.len() + self.transitions.len();
        if n <= 1 {
            return Ok(());
        }
        // Node ids: places first, then transitions by slot.
        let mut adj = vec![Vec::new(); n];
        for arc in &self.arcs {
            let (p, t) = match arc {
                Arc::PlaceToTransition { place, transition } => (*place, *transition),
                Arc::TransitionToPlace { transition, place } => (*place, *transition),
            };
            let t_node = self.places.len() + self.slot_of(t).expect("validated transition id");
            adj[p].push(t_node);
            adj[t_node].push(p);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(node) = stack.pop() {
            for &next in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        if let Some(node) = seen.iter().position(|s| !s) {
            let name = if node < self.places.len() {
                self.places[node].name.clone()
            } else {
                format!("t{}", self.transitions[node - self.places.len()].id)
            };
            return Err(NetError::Disconnected(name));
        }
        Ok(())
    }

    pub fn places(&self) -> &[PlaceId] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial_marking
    }

    pub fn initial_messages(&self) -> &MessagePool {
        &self.initial_messages
    }

    /// The initial state: initial marking, initial pool, empty log.
    pub fn initial_state(&self) -> NetState {
        NetState {
            marking: self.initial_marking.clone(),
            pool: self.initial_messages.clone(),
            log: Vec::new(),
        }
    }

    pub fn place_index(&self, name: &str) -> Option<usize> {
        self.places.iter().position(|p| p.name == name)
    }

    pub fn place_name(&self, index: usize) -> &str {
        &self.places[index].name
    }

    pub fn transition(&self, id: usize) -> Option<&Transition> {
        self.slot_of(id).map(|slot| &self.transitions[slot])
    }

    fn slot_of(&self, id: usize) -> Option<usize> {
        self.transitions.binary_search_by_key(&id, |t| t.id).ok()
    }

    /// Input place indices of a transition.
    pub fn transition_inputs(&self, id: usize) -> &[usize] {
        self.slot_of(id).map(|s| &self.inputs[s][..]).unwrap_or(&[])
    }

    /// Output place indices of a transition.
    pub fn transition_outputs(&self, id: usize) -> &[usize] {
        self.slot_of(id)
            .map(|s| &self.outputs[s][..])
            .unwrap_or(&[])
    }

    /// Sink places: no outgoing arc, at least one incoming arc. These are
    /// the candidate terminal goals of a workflow net.
    pub fn sink_places(&self) -> &[usize] {
        &self.sink_places
    }

    /// Source places: no incoming arc, at least one outgoing arc (or, for a
    /// degenerate net without arcs, every place).
    pub fn source_places(&self) -> Vec<usize> {
        let mut has_in = vec![false; self.places.len()];
        for arc in &self.arcs {
            if let Arc::TransitionToPlace { place, .. } = arc {
                has_in[*place] = true;
            }
        }
        (0..self.places.len()).filter(|&p| !has_in[p]).collect()
    }

    /// The ids of all transitions enabled in `state`, in ascending order.
    ///
    /// A transition is enabled iff every input place is marked and, for an
    /// `In` transition, its message is present in the pool.
    pub fn enabled(&self, state: &NetState) -> Vec<usize> {
        self.transitions
            .iter()
            .enumerate()
            .filter(|(slot, t)| {
                self.inputs[*slot]
                    .iter()
                    .all(|&p| state.marking.is_marked(p))
                    && match t.kind {
                        TransitionKind::In => {
                            state.pool.contains(t.message.as_ref().expect("validated"))
                        }
                        _ => true,
                    }
            })
            .map(|(_, t)| t.id)
            .collect()
    }

    /// Fires `transition`, producing the successor state.
    ///
    /// Input places lose their token, output places gain one; `In` consumes
    /// its message, `Out` appends its message, `Inner` leaves the pool
    /// unchanged; the log grows by one entry. Firing a disabled transition
    /// or marking an already-marked output place is an error.
    pub fn fire(&self, state: &NetState, transition: usize) -> Result<NetState, FireError> {
        let slot = self
            .slot_of(transition)
            .ok_or(FireError::UnknownTransition(transition))?;
        let t = &self.transitions[slot];
        let inputs = &self.inputs[slot];
        let outputs = &self.outputs[slot];

        let input_ok = inputs.iter().all(|&p| state.marking.is_marked(p));
        let message_ok = match t.kind {
            TransitionKind::In => state.pool.contains(t.message.as_ref().expect("validated")),
            _ => true,
        };
        if !input_ok || !message_ok {
            return Err(FireError::Disabled(transition));
        }

        let mut next = state.clone();
        for &p in inputs {
            next.marking.set(p, false);
        }
        for &p in outputs {
            if next.marking.is_marked(p) {
                return Err(FireError::SafenessViolation {
                    transition,
                    place: self.places[p].name.clone(),
                });
            }
            next.marking.set(p, true);
        }
        match t.kind {
            TransitionKind::In => {
                let m = t.message.as_ref().expect("validated");
                let removed = next.pool.remove(m);
                debug_assert!(removed);
            }
            TransitionKind::Out => next.pool.add(t.message.clone().expect("validated")),
            TransitionKind::Inner => {}
        }
        next.log.push(LogEntry {
            step: state.log.len(),
            transition,
            message: t.message.clone(),
        });
        Ok(next)
    }

    /// Replays a firing sequence from the initial state.
    pub fn replay(&self, firings: &[usize]) -> Result<NetState, FireError> {
        let mut state = self.initial_state();
        for &t in firings {
            state = self.fire(&state, t)?;
        }
        Ok(state)
    }

    /// The set of distinct messages carried by `In`/`Out` transitions.
    pub fn message_alphabet(&self) -> BTreeSet<Message> {
        self.transitions
            .iter()
            .filter_map(|t| t.message.clone())
            .collect()
    }
}

fn is_transition_ref(token: &str) -> bool {
    parse_transition_ref(token).is_some()
}

fn parse_transition_ref(token: &str) -> Option<usize> {
    let rest = token.strip_prefix('t')?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}
