//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured runtime (visible with `--nocapture`). Tolerances and bounds
//! are pinned in the assertions.

use contactless_core::contact::{compare_outbreaks, effective_q, run_store_day, StoreConfig};
use contactless_core::petri::{reachability, LabeledNet, TransitionKind};
use contactless_core::sir::{
    epidemic_threshold, final_size, first_integral, i_max, integrate, SirParams, SirState,
};
use contactless_core::store::{build_store_net, enumerate_traces, message_catalog, CustomerPolicy};
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

fn benchmark() -> (SirParams, SirState) {
    (
        SirParams::new(0.5, 0.2).unwrap(),
        SirState::initial(0.99, 0.01).unwrap(),
    )
}

#[test]
fn criterion_01_workflow_goals() {
    let start = Instant::now();
    let net = build_store_net();
    let (graph, report) = reachability(&net);

    for place in ["O1", "O2", "O3"] {
        let terminal = report
            .terminals
            .iter()
            .find(|t| t.place == place)
            .unwrap_or_else(|| panic!("{place} missing from the report"));
        assert!(terminal.reachable, "{place} must be reachable");
        assert!(terminal.witness_replayed, "{place} witness must replay");
        let witness = terminal.witness.as_ref().unwrap();
        let end = net.replay(witness).expect("witness replays");
        let sink = net.place_index(place).unwrap();
        assert!(end.marking.is_marked(sink));
        assert!(net.enabled(&end).is_empty());
    }
    assert!(report.deadlocks.is_empty(), "no non-terminal deadlocks");
    for node in &graph.nodes {
        if node.dead {
            assert_eq!(
                node.marked_sinks(&net).len(),
                1,
                "terminal states mark exactly one goal"
            );
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "ran in {elapsed:?}, bound 1 s");
    println!("criterion 1 PASS: goals O1/O2/O3 reachable with replayable witnesses, no deadlocks, exclusive goals ({elapsed:?})");
}

/// Independent census oracle: its own token game and depth-first search over
/// the net structure, sharing nothing with `enumerate_traces`.
fn oracle_census(net: &LabeledNet, loop_bound: usize) -> Vec<(String, Vec<usize>)> {
    type Pool = BTreeMap<contactless_core::petri::Message, u32>;
    fn walk(
        net: &LabeledNet,
        tokens: &BTreeSet<usize>,
        pool: &Pool,
        counts: &mut BTreeMap<BTreeSet<usize>, usize>,
        path: &mut Vec<usize>,
        bound: usize,
        out: &mut Vec<(String, Vec<usize>)>,
    ) {
        let enabled: Vec<usize> = net
            .transitions()
            .iter()
            .filter(|t| {
                net.transition_inputs(t.id)
                    .iter()
                    .all(|p| tokens.contains(p))
                    && match t.kind {
                        TransitionKind::In => {
                            pool.get(t.message.as_ref().unwrap()).copied().unwrap_or(0) > 0
                        }
                        _ => true,
                    }
            })
            .map(|t| t.id)
            .collect();
        if enabled.is_empty() {
            let sinks: Vec<usize> = net
                .sink_places()
                .iter()
                .copied()
                .filter(|p| tokens.contains(p))
                .collect();
            if let [sink] = sinks[..] {
                out.push((net.place_name(sink).to_string(), path.clone()));
            }
            return;
        }
        for id in enabled {
            let t = net.transition(id).unwrap();
            let mut next_tokens = tokens.clone();
            for p in net.transition_inputs(id) {
                next_tokens.remove(p);
            }
            for p in net.transition_outputs(id) {
                next_tokens.insert(*p);
            }
            let mut next_pool = pool.clone();
            match t.kind {
                TransitionKind::In => {
                    let m = t.message.as_ref().unwrap();
                    let c = next_pool.get_mut(m).unwrap();
                    *c -= 1;
                    if *c == 0 {
                        next_pool.remove(m);
                    }
                }
                TransitionKind::Out => {
                    *next_pool.entry(t.message.clone().unwrap()).or_insert(0) += 1
                }
                TransitionKind::Inner => {}
            }
            let seen = counts.entry(next_tokens.clone()).or_insert(0);
            if *seen + 1 > bound + 1 {
                continue;
            }
            *seen += 1;
            path.push(id);
            walk(net, &next_tokens, &next_pool, counts, path, bound, out);
            path.pop();
            *counts.get_mut(&next_tokens).unwrap() -= 1;
        }
    }

    let tokens: BTreeSet<usize> = net.initial_marking().marked_places().collect();
    let pool: Pool = net
        .initial_messages()
        .iter()
        .map(|(m, n)| (m.clone(), n))
        .collect();
    let mut counts = BTreeMap::new();
    counts.insert(tokens.clone(), 1);
    let mut out = Vec::new();
    walk(
        net,
        &tokens,
        &pool,
        &mut counts,
        &mut Vec::new(),
        loop_bound,
        &mut out,
    );
    out.sort();
    out
}

#[test]
fn criterion_02_trace_census() {
    let start = Instant::now();
    let net = build_store_net();

    let expected = oracle_census(&net, 0);
    assert_eq!(expected.len(), 6, "oracle finds 6 acyclic traces");
    let per_goal = |traces: &[(String, Vec<usize>)], goal: &str| {
        traces.iter().filter(|(t, _)| t == goal).count()
    };
    assert_eq!(per_goal(&expected, "O1"), 1);
    assert_eq!(per_goal(&expected, "O2"), 1);
    assert_eq!(per_goal(&expected, "O3"), 4);

    let got: Vec<(String, Vec<usize>)> = enumerate_traces(&net, 0)
        .into_iter()
        .map(|s| (s.terminal, s.firings))
        .collect();
    assert_eq!(got, expected, "enumeration matches the oracle exactly");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "ran in {elapsed:?}, bound 1 s");
    println!("criterion 2 PASS: 6 acyclic traces (1 to O1, 1 to O2, 4 to O3), oracle-exact ({elapsed:?})");
}

#[test]
fn criterion_03_message_catalog() {
    let catalog = message_catalog();
    assert_eq!(catalog.len(), 18);
    let catalog_set: BTreeSet<_> = catalog.into_iter().collect();
    assert_eq!(catalog_set.len(), 18, "catalog triples are distinct");

    let net = build_store_net();
    assert_eq!(
        net.message_alphabet(),
        catalog_set,
        "the net uses exactly the 18 catalog messages"
    );
    println!("criterion 3 PASS: net messages equal the 18-entry catalog");
}

#[test]
fn criterion_04_sir_conservation() {
    let start = Instant::now();
    let (params, init) = benchmark();
    let traj = integrate(&params, &init, 200.0, 1e-3).unwrap();
    let mut worst = 0.0_f64;
    for sample in &traj.samples {
        worst = worst.max((sample.total() - 1.0).abs());
    }
    assert!(worst <= 1e-9, "conservation drift {worst} exceeds 1e-9");
    println!(
        "criterion 4 PASS: |s+i+r-1| <= 1e-9 at all {} samples (max {worst:e}) ({:?})",
        traj.samples.len(),
        start.elapsed()
    );
}

#[test]
fn criterion_05_peak_reproduction() {
    let start = Instant::now();
    let (params, init) = benchmark();
    let analytic = i_max(&params, &init);
    let traj = integrate(&params, &init, 200.0, 1e-4).unwrap();
    let gap = (traj.peak.i - analytic).abs();
    assert!(gap < 1e-4, "analytic vs integrated peak differ by {gap}");

    // The peak sample sits where s = 1/q, within the step bound.
    let q = params.contact_ratio();
    let ds = params.gamma * traj.peak.i * traj.peak.s;
    let offset = (traj.peak.s - 1.0 / q).abs();
    assert!(
        offset <= 2.0 * traj.dt * ds,
        "peak s offset {offset} exceeds the step bound"
    );

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "ran in {elapsed:?}, bound 10 s"
    );
    println!(
        "criterion 5 PASS: analytic peak {analytic:.6} matches dt=1e-4 integration within {gap:e}, at s = 1/q ({elapsed:?})"
    );
}

#[test]
fn criterion_06_final_size_reproduction() {
    let start = Instant::now();
    let (params, init) = benchmark();
    let fs = final_size(&params, &init).unwrap();
    assert!(
        fs.residual < 1e-12,
        "bisection residual {} too large",
        fs.residual
    );

    let traj = integrate(&params, &init, 400.0, 1e-3).unwrap();
    let gap = (traj.last().s - fs.s_end).abs();
    assert!(
        gap < 1e-3,
        "long-horizon s {} vs s_end {}",
        traj.last().s,
        fs.s_end
    );
    println!(
        "criterion 6 PASS: s_end {:.6} with residual {:e}, long-horizon agreement {gap:e} ({:?})",
        fs.s_end,
        fs.residual,
        start.elapsed()
    );
}

#[test]
fn criterion_07_first_integral_constancy() {
    let start = Instant::now();
    let (params, init) = benchmark();
    let q = params.contact_ratio();
    let traj = integrate(&params, &init, 200.0, 1e-3).unwrap();
    let reference = first_integral(&init, q).unwrap();
    let mut worst = 0.0_f64;
    for sample in &traj.samples {
        worst = worst.max((first_integral(sample, q).unwrap() - reference).abs());
    }
    assert!(worst <= 1e-6, "first integral drifted by {worst}");
    println!(
        "criterion 7 PASS: first integral constant within {worst:e} (bound 1e-6) ({:?})",
        start.elapsed()
    );
}

#[test]
fn criterion_08_threshold_dichotomy() {
    let start = Instant::now();
    let alpha = 0.2;
    let s0 = 0.99;
    let i0 = 0.01;
    let init = SirState::initial(s0, i0).unwrap();

    // 20 evenly spaced threshold targets across [0.2, 4].
    for k in 0..20 {
        let target = 0.2 + k as f64 * (4.0 - 0.2) / 19.0;
        let gamma = target * alpha / s0;
        let params = SirParams::new(gamma, alpha).unwrap();
        let threshold = epidemic_threshold(&params, s0);
        assert!((threshold.value - target).abs() < 1e-12);

        let traj = integrate(&params, &init, 200.0, 1e-3).unwrap();
        let monotone = traj
            .samples
            .windows(2)
            .all(|pair| pair[1].i <= pair[0].i + 1e-15);
        assert_eq!(
            monotone,
            threshold.value <= 1.0,
            "dichotomy broken at threshold {}",
            threshold.value
        );
        if threshold.value > 1.0 {
            assert!(traj.samples[1].i > traj.samples[0].i, "growth at t = 0");
        }
        if (2.0..=4.0).contains(&threshold.value) {
            assert!(threshold.epidemic, "plausible regime must flag an epidemic");
        }
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "ran in {elapsed:?}, bound 30 s"
    );
    println!("criterion 8 PASS: i monotone non-increasing iff threshold <= 1 across 20 points; regime [2,4] always epidemic ({elapsed:?})");
}

#[test]
fn criterion_09_mitigation_direction() {
    let start = Instant::now();
    let net = build_store_net();
    let config = StoreConfig::default();
    let policy = CustomerPolicy {
        p_temp_fail: 0.02,
        p_mask_refuse: 0.02,
        p_delivery: 0.3,
        p_service: 0.2,
        ..CustomerPolicy::zeroed()
    };
    let (params, init) = benchmark();
    let q_base = params.contact_ratio();

    for seed in 0..100u64 {
        let off = run_store_day(&net, &config, &policy, false, seed).unwrap();
        let on = run_store_day(&net, &config, &policy, true, seed).unwrap();
        assert!(
            on.report.total_contacts <= off.report.total_contacts,
            "seed {seed}: resilience added contacts ({} > {})",
            on.report.total_contacts,
            off.report.total_contacts
        );
        let eq = effective_q(q_base, &on.report, &off.report);
        assert!(
            eq.q_eff <= q_base,
            "seed {seed}: q_eff {} > q_base",
            eq.q_eff
        );
        let cmp = compare_outbreaks(&params, &init, eq.q_base, eq.q_eff).unwrap();
        assert!(cmp.i_max_reduction >= 0.0, "seed {seed}");
        assert!(cmp.r_end_reduction >= 0.0, "seed {seed}");
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "ran in {elapsed:?}, bound 60 s"
    );
    println!("criterion 9 PASS: resilience-on contacts <= off in all 100 pairs; q_eff <= q_base; reductions >= 0 ({elapsed:?})");
}

#[test]
fn criterion_10_determinism() {
    use std::fs;
    use std::process::Command;

    let start = Instant::now();
    let base = std::env::temp_dir().join(format!("contactless-acc10-{}", std::process::id()));
    let _ = fs::remove_dir_all(&base);
    fs::create_dir_all(&base).unwrap();

    let runs: Vec<(&str, Vec<String>)> = vec![
        ("verify", vec![]),
        (
            "epi",
            [
                "--gamma", "0.5", "--alpha", "0.2", "--s0", "0.99", "--i0", "0.01", "--t-end",
                "20", "--dt", "0.01",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        ),
        (
            "store",
            ["--seed", "7", "--resilience", "on"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        ),
        (
            "couple",
            ["--seed", "7"].iter().map(|s| s.to_string()).collect(),
        ),
    ];

    for (sub, args) in &runs {
        let mut dirs = Vec::new();
        for round in 0..2 {
            let out = base.join(format!("{sub}-{round}"));
            let status = Command::new(env!("CARGO_BIN_EXE_contactless"))
                .arg(sub)
                .args(args)
                .arg("--out")
                .arg(&out)
                .status()
                .expect("binary runs");
            assert!(status.success(), "{sub} run {round} failed");
            dirs.push(out);
        }
        let mut names: Vec<String> = fs::read_dir(&dirs[0])
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert!(names.contains(&"manifest.json".to_string()));
        for name in &names {
            let a = fs::read(dirs[0].join(name)).unwrap();
            let b = fs::read(dirs[1].join(name)).unwrap();
            assert_eq!(a, b, "{sub}/{name} differs between identical runs");
        }
    }

    let _ = fs::remove_dir_all(&base);
    println!(
        "criterion 10 PASS: verify/epi/store/couple reruns are byte-identical ({:?})",
        start.elapsed()
    );
}
