//! Property-style checks of the firing semantics and reachability analysis,
//! driven by seeded random walks over the store net.

use contactless_core::petri::{
    is_workflow_net, parse_net, reachability, write_net, LabeledNet, MessagePool, NetDescription,
    NetState, Transition, TransitionKind,
};
use contactless_core::store::{build_store_net, run_customer, CustomerPolicy};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Walks the net by firing uniformly random enabled transitions, checking
/// the firing invariants at every step. Returns the number of firings.
fn checked_random_walk(net: &LabeledNet, seed: u64, max_steps: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = net.initial_state();
    let mut outs: MessagePool = MessagePool::new();
    let mut ins: MessagePool = MessagePool::new();

    for step in 0..max_steps {
        let enabled = net.enabled(&state);
        if enabled.is_empty() {
            return step;
        }
        let t = enabled[rng.gen_range(0..enabled.len())];
        let next = net.fire(&state, t).expect("enabled transitions fire");
        let transition = net.transition(t).unwrap();

        // Token-count delta equals outputs minus inputs.
        let inputs = net.transition_inputs(t);
        let outputs = net.transition_outputs(t);
        let delta = next.marking.token_count() as i64 - state.marking.token_count() as i64;
        assert_eq!(delta, outputs.len() as i64 - inputs.len() as i64);

        // Locality: only the input/output places change.
        for place in 0..net.places().len() {
            let changed = state.marking.is_marked(place) != next.marking.is_marked(place);
            if changed {
                assert!(
                    inputs.contains(&place) || outputs.contains(&place),
                    "place {place} changed but is not adjacent to t{t}"
                );
            }
        }

        // Pool bookkeeping for the conservation identity.
        match transition.kind {
            TransitionKind::Out => outs.add(transition.message.clone().unwrap()),
            TransitionKind::In => ins.add(transition.message.clone().unwrap()),
            TransitionKind::Inner => {}
        }

        // pool = initial + outs - ins, entrywise non-negative.
        let mut expected = net.initial_messages().clone();
        for (m, n) in outs.iter() {
            for _ in 0..n {
                expected.add(m.clone());
            }
        }
        for (m, n) in ins.iter() {
            for _ in 0..n {
                assert!(expected.remove(m), "an In firing outran production of {m}");
            }
        }
        assert_eq!(
            next.pool, expected,
            "message conservation after step {step}"
        );

        // At most one pool entry changed, by at most one.
        let pool_changes: u64 = net
            .message_alphabet()
            .iter()
            .map(|m| (next.pool.count(m) as i64 - state.pool.count(m) as i64).unsigned_abs())
            .sum();
        assert!(pool_changes <= 1);

        assert_eq!(next.log.len(), state.log.len() + 1);
        assert_eq!(next.log.last().unwrap().transition, t);
        state = next;
    }
    max_steps
}

#[test]
fn random_walks_preserve_every_firing_invariant() {
    let net = build_store_net();
    let mut total = 0;
    for seed in 0..100 {
        total += checked_random_walk(&net, seed, 200);
    }
    assert!(
        total > 1_000,
        "walks actually exercised the net ({total} firings)"
    );
}

#[test]
fn store_net_reachability_proves_all_three_goals() {
    let net = build_store_net();
    let (graph, report) = reachability(&net);

    assert!(report.deadlocks.is_empty(), "no non-terminal deadlocks");
    assert!(!report.truncated);
    for terminal in &report.terminals {
        assert!(terminal.reachable, "{} unreachable", terminal.place);
        assert!(
            terminal.witness_replayed,
            "{} witness must replay",
            terminal.place
        );
    }

    // Terminal exclusivity: every dead state marks exactly one goal.
    for node in &graph.nodes {
        if node.dead {
            assert_eq!(node.marked_sinks(&net).len(), 1);
            assert_eq!(node.marking.token_count(), 1);
        }
    }
}

#[test]
fn witnesses_are_shortest_with_lexicographic_tie_break() {
    let net = build_store_net();
    let (_, report) = reachability(&net);
    let witness = |place: &str| -> Vec<usize> {
        report
            .terminals
            .iter()
            .find(|t| t.place == place)
            .and_then(|t| t.witness.clone())
            .unwrap()
    };
    assert_eq!(witness("O1"), vec![1, 2, 5, 6, 7]);
    assert_eq!(witness("O2"), vec![1, 2, 5, 6, 8, 9, 10]);
    // The shortest completed path is also what a zero-probability customer
    // walks.
    let trace = run_customer(&net, &CustomerPolicy::zeroed(), 0).unwrap();
    assert_eq!(witness("O3"), trace.transition_ids());
}

#[test]
fn store_net_is_a_sound_workflow_net() {
    let net = build_store_net();
    let report = is_workflow_net(&net);
    assert_eq!(report.source.as_deref(), Some("i"));
    assert!(report.source_unique);
    assert!(report.source_initially_marked);
    assert_eq!(report.sinks, vec!["O1", "O2", "O3"]);
    assert!(
        report.all_nodes_on_path,
        "stranded: {:?}",
        report.stranded_nodes
    );
    assert!(report.structurally_workflow);
    assert!(report.option_to_complete);
    assert!(report.dead_transitions.is_empty());
    assert!(report.sound);
    assert!(!report.analysis_truncated);
}

#[test]
fn unreachable_transition_is_reported_dead() {
    // c feeds t1 but never holds a token, so t1 can never fire.
    let net = LabeledNet::build(NetDescription {
        places: vec!["a".into(), "b".into(), "c".into()],
        transitions: vec![Transition::inner(0, "go"), Transition::inner(1, "never")],
        arcs: vec![
            ("a".into(), "t0".into()),
            ("t0".into(), "b".into()),
            ("c".into(), "t1".into()),
            ("t1".into(), "b".into()),
        ],
        initial_marking: vec!["a".into()],
        initial_messages: vec![],
    })
    .unwrap();
    let report = is_workflow_net(&net);
    assert_eq!(report.dead_transitions, vec![1]);
    assert!(!report.sound);
}

#[test]
fn store_net_round_trips_through_the_text_format() {
    let net = build_store_net();
    let text = write_net(&net);
    let reparsed = parse_net(&text).expect("canonical text parses");
    assert_eq!(reparsed.places(), net.places());
    assert_eq!(reparsed.transitions(), net.transitions());
    assert_eq!(reparsed.arcs(), net.arcs());
    assert_eq!(
        reparsed
            .initial_marking()
            .marked_places()
            .collect::<Vec<_>>(),
        net.initial_marking().marked_places().collect::<Vec<_>>()
    );
    assert_eq!(write_net(&reparsed), text);

    // The reparsed net behaves identically.
    let (_, a) = reachability(&net);
    let (_, b) = reachability(&reparsed);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn shipped_net_file_matches_the_builder() {
    // configs/store.net is the canonical text form of the built-in net;
    // regenerate it with write_net(&build_store_net()) if this drifts.
    let shipped = include_str!("../../../configs/store.net");
    assert_eq!(shipped, write_net(&build_store_net()));
}

#[test]
fn reachability_report_is_byte_identical_across_runs() {
    let net = build_store_net();
    let (_, a) = reachability(&net);
    let (_, b) = reachability(&net);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn replay_reproduces_the_walk_endpoint() {
    let net = build_store_net();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = net.initial_state();
        let mut firings = Vec::new();
        loop {
            let enabled = net.enabled(&state);
            if enabled.is_empty() || firings.len() > 100 {
                break;
            }
            let t = enabled[rng.gen_range(0..enabled.len())];
            state = net.fire(&state, t).unwrap();
            firings.push(t);
        }
        let replayed: NetState = net.replay(&firings).unwrap();
        assert_eq!(replayed, state);
    }
}
