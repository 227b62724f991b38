//! Exhaustive state-space exploration and workflow-net verification.
//!
//! States are explored breadth-first from the initial state, so the first
//! path that discovers a state is a shortest one, and expanding transitions
//! in ascending id order makes it the lexicographically smallest shortest
//! path. Exploration is sequential and fully deterministic: the same net and
//! configuration always produce the same graph and report.
//!
//! Unbounded message pools are tamed coverability-style: per-message
//! multiplicities are clamped at `pool_cap` for state identity, and any
//! message that reaches the cap is flagged as potentially divergent.
//! Enabledness only ever tests presence (count >= 1), so clamping never
//! changes which transitions a state admits.

use super::{LabeledNet, Marking, Message, MessagePool, NetState};
use serde::Serialize;
use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap, VecDeque};

/// Exploration limits.
#[derive(Debug, Clone)]
pub struct ReachConfig {
    /// Stop expanding states deeper than this many firings.
    pub step_bound: Option<usize>,
    /// Hard cap on stored states; exploration beyond it is reported partial.
    pub node_cap: usize,
    /// Per-message multiplicity clamp for state identity.
    pub pool_cap: u32,
}

impl Default for ReachConfig {
    fn default() -> Self {
        ReachConfig {
            step_bound: None,
            node_cap: 100_000,
            pool_cap: 4,
        }
    }
}

/// One explored state.
#[derive(Debug, Clone)]
pub struct StateNode {
    pub marking: Marking,
    pub pool: Vec<(Message, u32)>,
    /// No transition is enabled here.
    pub dead: bool,
    /// Dead and at least one sink place is marked.
    pub terminal: bool,
}

impl StateNode {
    /// Sink place indices marked in this node.
    pub fn marked_sinks(&self, net: &LabeledNet) -> Vec<usize> {
        net.sink_places()
            .iter()
            .copied()
            .filter(|&p| self.marking.is_marked(p))
            .collect()
    }
}

/// The reachable state graph: deterministic node ids, edges labeled with
/// transition ids.
#[derive(Debug, Clone)]
pub struct StateGraph {
    pub nodes: Vec<StateNode>,
    /// (from node, transition id, to node)
    pub edges: Vec<(usize, usize, usize)>,
}

/// Reachability findings for one sink place.
#[derive(Debug, Clone, Serialize)]
pub struct TerminalReport {
    pub place: String,
    pub reachable: bool,
    /// Number of distinct terminal states marking this sink.
    pub states: usize,
    /// Shortest firing sequence reaching a terminal state that marks this
    /// sink; ties broken lexicographically by transition id.
    pub witness: Option<Vec<usize>>,
    /// The witness was replayed through `fire` from the initial state and
    /// ended in a dead state with this sink marked.
    pub witness_replayed: bool,
}

/// A dead state that marks no sink.
#[derive(Debug, Clone, Serialize)]
pub struct DeadState {
    pub node: usize,
    pub marked_places: Vec<String>,
    pub witness: Vec<usize>,
}

/// An enabled firing that would put a second token on a place. The edge is
/// not taken; the offending state and transition are reported.
#[derive(Debug, Clone, Serialize)]
pub struct SafenessViolation {
    pub node: usize,
    pub transition: usize,
    pub place: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReachReport {
    pub nodes: usize,
    pub edges: usize,
    pub terminal_states: usize,
    pub terminals: Vec<TerminalReport>,
    pub deadlocks: Vec<DeadState>,
    /// Firings that would break the one-token-per-place rule. Empty for a
    /// safe net.
    pub safeness_violations: Vec<SafenessViolation>,
    /// Messages whose pool multiplicity hit the clamp: an `Out` loop keeps
    /// producing them faster than anything consumes them.
    pub pool_saturated: Vec<Message>,
    /// Exploration hit the node cap; the graph is a prefix of the true one.
    pub truncated: bool,
    /// Exploration stopped at the configured step bound.
    pub step_bounded: bool,
}

/// Explores with the default configuration.
pub fn reachability(net: &LabeledNet) -> (StateGraph, ReachReport) {
    reachability_with(net, &ReachConfig::default())
}

/// Breadth-first exploration of every state reachable from the initial
/// state, then a report over the finished graph.
pub fn reachability_with(net: &LabeledNet, config: &ReachConfig) -> (StateGraph, ReachReport) {
    let mut nodes: Vec<StateNode> = Vec::new();
    let mut states: Vec<NetState> = Vec::new(); // representative per node, log-free
    let mut depth: Vec<usize> = Vec::new();
    let mut parent: Vec<Option<(usize, usize)>> = Vec::new(); // (node, transition)
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    let mut index: HashMap<(Marking, Vec<(Message, u32)>), usize> = HashMap::new();
    let mut saturated: BTreeSet<Message> = BTreeSet::new();
    let mut violations: Vec<SafenessViolation> = Vec::new();
    let mut truncated = false;
    let mut step_bounded = false;

    let initial = NetState {
        marking: net.initial_marking().clone(),
        pool: clamp_pool(net.initial_messages(), config.pool_cap, &mut saturated),
        log: Vec::new(),
    };
    index.insert((initial.marking.clone(), initial.pool.summary()), 0);
    nodes.push(StateNode {
        marking: initial.marking.clone(),
        pool: initial.pool.summary(),
        dead: false,
        terminal: false,
    });
    states.push(initial);
    depth.push(0);
    parent.push(None);

    let mut queue = VecDeque::from([0usize]);
    while let Some(node) = queue.pop_front() {
        let enabled = net.enabled(&states[node]);
        if enabled.is_empty() {
            nodes[node].dead = true;
            nodes[node].terminal = !nodes[node].marked_sinks(net).is_empty();
            continue;
        }
        if let Some(bound) = config.step_bound {
            if depth[node] >= bound {
                step_bounded = true;
                continue;
            }
        }
        for t in enabled {
            let raw = match net.fire(&states[node], t) {
                Ok(next) => next,
                Err(super::FireError::SafenessViolation { transition, place }) => {
                    violations.push(SafenessViolation {
                        node,
                        transition,
                        place,
                    });
                    continue;
                }
                Err(e) => unreachable!("enabled transition failed to fire: {e}"),
            };
            let pool = clamp_pool(&raw.pool, config.pool_cap, &mut saturated);
            let key = (raw.marking.clone(), pool.summary());
            let next = match index.entry(key) {
                Entry::Occupied(e) => *e.get(),
                Entry::Vacant(e) => {
                    if nodes.len() >= config.node_cap {
                        truncated = true;
                        continue;
                    }
                    let id = nodes.len();
                    e.insert(id);
                    nodes.push(StateNode {
                        marking: raw.marking.clone(),
                        pool: pool.summary(),
                        dead: false,
                        terminal: false,
                    });
                    states.push(NetState {
                        marking: raw.marking,
                        pool,
                        log: Vec::new(),
                    });
                    depth.push(depth[node] + 1);
                    parent.push(Some((node, t)));
                    queue.push_back(id);
                    id
                }
            };
            edges.push((node, t, next));
        }
    }

    let graph = StateGraph { nodes, edges };
    let report = build_report(
        net,
        &graph,
        &parent,
        violations,
        saturated.into_iter().collect(),
        truncated,
        step_bounded,
    );
    (graph, report)
}

fn clamp_pool(pool: &MessagePool, cap: u32, saturated: &mut BTreeSet<Message>) -> MessagePool {
    let mut clamped = MessagePool::new();
    for (m, n) in pool.iter() {
        if n >= cap {
            saturated.insert(m.clone());
        }
        for _ in 0..n.min(cap) {
            clamped.add(m.clone());
        }
    }
    clamped
}

fn witness_path(parent: &[Option<(usize, usize)>], mut node: usize) -> Vec<usize> {
    let mut firings = Vec::new();
    while let Some((prev, t)) = parent[node] {
        firings.push(t);
        node = prev;
    }
    firings.reverse();
    firings
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    net: &LabeledNet,
    graph: &StateGraph,
    parent: &[Option<(usize, usize)>],
    safeness_violations: Vec<SafenessViolation>,
    pool_saturated: Vec<Message>,
    truncated: bool,
    step_bounded: bool,
) -> ReachReport {
    let mut terminals = Vec::new();
    for &sink in net.sink_places() {
        // Nodes are in BFS discovery order, so the first hit is a shortest
        // witness with the lexicographic tie-break.
        let mut states = 0;
        let mut first: Option<usize> = None;
        for (id, node) in graph.nodes.iter().enumerate() {
            if node.terminal && node.marking.is_marked(sink) {
                states += 1;
                if first.is_none() {
                    first = Some(id);
                }
            }
        }
        let witness = first.map(|id| witness_path(parent, id));
        let witness_replayed = witness.as_ref().is_some_and(|w| {
            net.replay(w)
                .is_ok_and(|end| end.marking.is_marked(sink) && net.enabled(&end).is_empty())
        });
        terminals.push(TerminalReport {
            place: net.place_name(sink).to_string(),
            reachable: first.is_some(),
            states,
            witness,
            witness_replayed,
        });
    }

    let deadlocks = graph
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.dead && !n.terminal)
        .map(|(id, n)| DeadState {
            node: id,
            marked_places: n
                .marking
                .marked_places()
                .map(|p| net.place_name(p).to_string())
                .collect(),
            witness: witness_path(parent, id),
        })
        .collect();

    ReachReport {
        nodes: graph.nodes.len(),
        edges: graph.edges.len(),
        terminal_states: graph.nodes.iter().filter(|n| n.terminal).count(),
        terminals,
        deadlocks,
        safeness_violations,
        pool_saturated,
        truncated,
        step_bounded,
    }
}

/// Workflow-net report: structural source/sink/path conditions plus
/// behavioral soundness diagnostics computed over the reachable state graph.
#[derive(Debug, Clone, Serialize)]
pub struct WorkflowReport {
    /// The unique source place, when there is exactly one.
    pub source: Option<String>,
    pub source_unique: bool,
    pub source_initially_marked: bool,
    pub sinks: Vec<String>,
    pub has_sinks: bool,
    /// Every place and transition lies on some source-to-sink path.
    pub all_nodes_on_path: bool,
    pub stranded_nodes: Vec<String>,
    /// All structural conditions above hold.
    pub structurally_workflow: bool,
    /// From every reachable state some terminal state is still reachable.
    pub option_to_complete: bool,
    /// Reachable states from which no terminal state can be reached.
    pub stuck_states: usize,
    /// Transitions never enabled in any reachable state.
    pub dead_transitions: Vec<usize>,
    /// option_to_complete holds and there are no dead transitions.
    pub sound: bool,
    /// The behavioral checks ran on a truncated graph and are approximate.
    pub analysis_truncated: bool,
}

/// Checks the workflow-net conditions: a unique, initially marked source
/// place without incoming arcs; a non-empty set of sink places without
/// outgoing arcs; every node on a path from the source to some sink; and the
/// soundness diagnostics (option to complete, no dead transitions).
pub fn is_workflow_net(net: &LabeledNet) -> WorkflowReport {
    let sources = net.source_places();
    let source_unique = sources.len() == 1;
    let source = source_unique.then(|| net.place_name(sources[0]).to_string());
    let source_initially_marked = source_unique && net.initial_marking().is_marked(sources[0]);

    let sinks: Vec<String> = net
        .sink_places()
        .iter()
        .map(|&p| net.place_name(p).to_string())
        .collect();
    let has_sinks = !sinks.is_empty();

    // Structural path coverage on the bipartite graph: forward from the
    // source, backward from the sinks.
    let n_places = net.places().len();
    let n = n_places + net.transitions().len();
    let slot = |id: usize| {
        net.transitions()
            .iter()
            .position(|t| t.id == id)
            .expect("validated transition id")
    };
    let mut fwd = vec![Vec::new(); n];
    let mut bwd = vec![Vec::new(); n];
    for arc in net.arcs() {
        let (from, to) = match arc {
            super::Arc::PlaceToTransition { place, transition } => {
                (*place, n_places + slot(*transition))
            }
            super::Arc::TransitionToPlace { transition, place } => {
                (n_places + slot(*transition), *place)
            }
        };
        fwd[from].push(to);
        bwd[to].push(from);
    }
    let sweep = |starts: Vec<usize>, adj: &Vec<Vec<usize>>| {
        let mut seen = vec![false; n];
        let mut stack = starts;
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(node) = stack.pop() {
            for &next in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        seen
    };
    let from_source = sweep(
        if source_unique {
            sources.clone()
        } else {
            vec![]
        },
        &fwd,
    );
    let to_sink = sweep(net.sink_places().to_vec(), &bwd);
    let mut stranded_nodes = Vec::new();
    for node in 0..n {
        if !(from_source[node] && to_sink[node]) {
            stranded_nodes.push(if node < n_places {
                net.place_name(node).to_string()
            } else {
                format!("t{}", net.transitions()[node - n_places].id)
            });
        }
    }
    let all_nodes_on_path = stranded_nodes.is_empty();
    let structurally_workflow =
        source_unique && source_initially_marked && has_sinks && all_nodes_on_path;

    // Behavioral diagnostics over the reachable graph.
    let (graph, reach) = reachability(net);
    let fired: BTreeSet<usize> = graph.edges.iter().map(|(_, t, _)| *t).collect();
    let dead_transitions: Vec<usize> = net
        .transitions()
        .iter()
        .map(|t| t.id)
        .filter(|id| !fired.contains(id))
        .collect();

    // Reverse reachability from terminal nodes over the state graph.
    let mut rev = vec![Vec::new(); graph.nodes.len()];
    for &(from, _, to) in &graph.edges {
        rev[to].push(from);
    }
    let mut can_finish = vec![false; graph.nodes.len()];
    let mut stack: Vec<usize> = graph
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(id, node)| node.terminal.then_some(id))
        .collect();
    for &s in &stack {
        can_finish[s] = true;
    }
    while let Some(node) = stack.pop() {
        for &prev in &rev[node] {
            if !can_finish[prev] {
                can_finish[prev] = true;
                stack.push(prev);
            }
        }
    }
    let stuck_states = can_finish.iter().filter(|c| !**c).count();
    let option_to_complete = stuck_states == 0;
    let sound = option_to_complete && dead_transitions.is_empty();

    WorkflowReport {
        source,
        source_unique,
        source_initially_marked,
        sinks,
        has_sinks,
        all_nodes_on_path,
        stranded_nodes,
        structurally_workflow,
        option_to_complete,
        stuck_states,
        dead_transitions,
        sound,
        analysis_truncated: reach.truncated,
    }
}
