//! The five subcommands. Each resolves its inputs, runs the corresponding
//! library operations, writes artifacts plus a manifest, and prints a
//! deterministic summary.

use crate::manifest::{OutDir, RunManifest};
use crate::CliError;
use contactless_core::contact::{
    compare_outbreaks, effective_q, parse_scenario, run_store_day, Scenario, StoreDay,
};
use contactless_core::petri::{
    is_workflow_net, parse_net, reachability_with, LabeledNet, ReachConfig,
};
use contactless_core::sir::{
    self, epidemic_threshold, final_size, first_integral, integrate, FinalSize, SirParams, SirState,
};
use contactless_core::store::{build_store_net, enumerate_traces, trace_to_csv};
use serde::Serialize;
use serde_json::json;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

fn load_net(path: Option<&Path>) -> Result<(LabeledNet, String), CliError> {
    match path {
        None => Ok((build_store_net(), "builtin:store".to_string())),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Validation(format!("cannot read {}: {e}", path.display()))
            })?;
            let net = parse_net(&text).map_err(CliError::validation)?;
            Ok((net, path.display().to_string()))
        }
    }
}

fn load_scenario(path: Option<&Path>) -> Result<(Scenario, String), CliError> {
    match path {
        None => Ok((Scenario::default(), "builtin:demo".to_string())),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Validation(format!("cannot read {}: {e}", path.display()))
            })?;
            let scenario = parse_scenario(&text).map_err(CliError::validation)?;
            Ok((scenario, path.display().to_string()))
        }
    }
}

fn require_seed(seed: Option<u64>) -> Result<u64, CliError> {
    seed.ok_or_else(|| {
        CliError::Validation("simulation subcommands require --seed <N>".to_string())
    })
}

pub fn verify(net_path: Option<&Path>, limits: &ReachConfig, out: &Path) -> Result<(), CliError> {
    let (net, source) = load_net(net_path)?;
    let workflow = is_workflow_net(&net);
    let (_, reach) = reachability_with(&net, limits);

    let mut manifest = RunManifest::new(
        "verify",
        None,
        json!({
            "net": source,
            "pool_cap": limits.pool_cap,
            "node_cap": limits.node_cap,
            "step_bound": limits.step_bound,
        }),
    );
    if let Some(p) = net_path {
        manifest.arg("net", p.display());
    }
    manifest.arg("pool-cap", limits.pool_cap);
    manifest.arg("node-cap", limits.node_cap);
    if let Some(bound) = limits.step_bound {
        manifest.arg("step-bound", bound);
    }
    let mut dir = OutDir::create(out, manifest)?;
    #[derive(Serialize)]
    struct VerifyReport<'a> {
        net: &'a str,
        places: usize,
        transitions: usize,
        workflow: &'a contactless_core::petri::WorkflowReport,
        reachability: &'a contactless_core::petri::ReachReport,
    }
    dir.write_json(
        "verify.json",
        &VerifyReport {
            net: &source,
            places: net.places().len(),
            transitions: net.transitions().len(),
            workflow: &workflow,
            reachability: &reach,
        },
    )?;
    dir.finish()?;

    println!("net: {source}");
    println!(
        "structure: places {}, transitions {}, arcs {}",
        net.places().len(),
        net.transitions().len(),
        net.arcs().len()
    );
    println!(
        "workflow: structurally_workflow {}, sound {}",
        workflow.structurally_workflow, workflow.sound
    );
    println!(
        "reachability: {} states, {} edges, {} deadlocks",
        reach.nodes,
        reach.edges,
        reach.deadlocks.len()
    );
    for terminal in &reach.terminals {
        match &terminal.witness {
            Some(w) => println!(
                "goal {}: reachable ({} terminal states, witness length {})",
                terminal.place,
                terminal.states,
                w.len()
            ),
            None => println!("goal {}: UNREACHABLE", terminal.place),
        }
    }
    if !reach.safeness_violations.is_empty() {
        println!(
            "safeness violations: {} (see verify.json)",
            reach.safeness_violations.len()
        );
    }
    if !reach.pool_saturated.is_empty() {
        let names: Vec<String> = reach.pool_saturated.iter().map(|m| m.to_string()).collect();
        println!("pool growth cut off for: {}", names.join(", "));
    }
    if reach.truncated {
        println!("exploration hit the node cap; the report is partial");
    }
    Ok(())
}

pub fn traces(net_path: Option<&Path>, loop_bound: usize, out: &Path) -> Result<(), CliError> {
    let (net, source) = load_net(net_path)?;
    let skeletons = enumerate_traces(&net, loop_bound);

    let mut csv = String::from("trace,step,transition,msg,sender,receiver\n");
    for (ix, skeleton) in skeletons.iter().enumerate() {
        for line in trace_to_csv(&net, &skeleton.firings).lines().skip(1) {
            let _ = writeln!(csv, "{ix},{line}");
        }
    }

    let mut manifest = RunManifest::new(
        "traces",
        None,
        json!({ "net": source, "loop_bound": loop_bound }),
    );
    if let Some(p) = net_path {
        manifest.arg("net", p.display());
    }
    manifest.arg("loop-bound", loop_bound);
    let mut dir = OutDir::create(out, manifest)?;
    dir.write_json("traces.json", &skeletons)?;
    dir.write("traces.csv", &csv)?;
    dir.finish()?;

    println!("net: {source}");
    println!("loop bound: {loop_bound}");
    println!("traces: {}", skeletons.len());
    let terminals: std::collections::BTreeSet<&str> =
        skeletons.iter().map(|s| s.terminal.as_str()).collect();
    for terminal in terminals {
        let count = skeletons.iter().filter(|s| s.terminal == terminal).count();
        println!("  to {terminal}: {count}");
    }
    Ok(())
}

pub struct EpiFlags {
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub s0: Option<f64>,
    pub i0: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
}

pub fn epi(config: Option<&Path>, flags: EpiFlags, out: &Path) -> Result<(), CliError> {
    let (scenario, source) = load_scenario(config)?;
    let mut epi = scenario.epi;

    // Flags override the config; every override is reported.
    let mut overridden: Vec<(&str, f64)> = Vec::new();
    let mut apply = |name: &'static str, slot: &mut f64, flag: Option<f64>| {
        if let Some(v) = flag {
            if config.is_some() && v != *slot {
                overridden.push((name, *slot));
            }
            *slot = v;
        }
    };
    apply("gamma", &mut epi.gamma, flags.gamma);
    apply("alpha", &mut epi.alpha, flags.alpha);
    apply("s0", &mut epi.s0, flags.s0);
    apply("i0", &mut epi.i0, flags.i0);
    apply("t_end", &mut epi.t_end, flags.t_end);
    apply("dt", &mut epi.dt, flags.dt);
    for (name, old) in &overridden {
        eprintln!("note: --{name} overrides the config value {old}");
    }

    let params = SirParams::new(epi.gamma, epi.alpha).map_err(CliError::validation)?;
    let init = SirState::initial(epi.s0, epi.i0).map_err(CliError::validation)?;
    let trajectory = integrate(&params, &init, epi.t_end, epi.dt).map_err(CliError::validation)?;

    let q = params.contact_ratio();
    let threshold = epidemic_threshold(&params, init.s);
    let peak_analytic = sir::i_max(&params, &init);
    let (final_size, final_size_error): (Option<FinalSize>, Option<String>) =
        match final_size(&params, &init) {
            Ok(fs) => (Some(fs), None),
            Err(e) => (None, Some(e.to_string())),
        };
    let conserved = first_integral(&init, q).ok();

    #[derive(Serialize)]
    struct Analytics {
        gamma: f64,
        alpha: f64,
        s0: f64,
        i0: f64,
        dt: f64,
        t_end: f64,
        q: f64,
        threshold: contactless_core::sir::Threshold,
        first_integral: Option<f64>,
        i_max_analytic: f64,
        peak: contactless_core::sir::Peak,
        final_size: Option<FinalSize>,
        final_size_error: Option<String>,
        conservation_max_drift: f64,
        samples: usize,
    }
    let analytics = Analytics {
        gamma: epi.gamma,
        alpha: epi.alpha,
        s0: epi.s0,
        i0: epi.i0,
        dt: epi.dt,
        t_end: epi.t_end,
        q,
        threshold: threshold.clone(),
        first_integral: conserved,
        i_max_analytic: peak_analytic,
        peak: trajectory.peak,
        final_size,
        final_size_error,
        conservation_max_drift: trajectory.max_conservation_drift(),
        samples: trajectory.samples.len(),
    };

    let mut manifest = RunManifest::new(
        "epi",
        None,
        json!({
            "config": source,
            "epi": serde_json::to_value(epi).map_err(CliError::internal)?,
        }),
    );
    if let Some(p) = config {
        manifest.arg("config", p.display());
    }
    manifest.arg("gamma", epi.gamma);
    manifest.arg("alpha", epi.alpha);
    manifest.arg("s0", epi.s0);
    manifest.arg("i0", epi.i0);
    manifest.arg("t-end", epi.t_end);
    manifest.arg("dt", epi.dt);
    let mut dir = OutDir::create(out, manifest)?;
    dir.write("trajectory.csv", &trajectory.to_csv())?;
    dir.write_json("analytics.json", &analytics)?;
    dir.finish()?;

    println!("q = {q}");
    println!(
        "threshold = {} (epidemic: {})",
        threshold.value, threshold.epidemic
    );
    match threshold.reciprocal_ratio {
        Some(r) => println!("reciprocal ratio alpha/gamma = {r}"),
        None => println!("reciprocal ratio alpha/gamma = unbounded (gamma = 0)"),
    }
    println!("I_MAX (analytic) = {peak_analytic}");
    println!(
        "peak (integrated): i = {} at t = {} (s = {})",
        trajectory.peak.i, trajectory.peak.t, trajectory.peak.s
    );
    match (&analytics.final_size, &analytics.final_size_error) {
        (Some(fs), _) => {
            println!("s_end = {} (residual {})", fs.s_end, fs.residual);
            println!("r_end = {}", fs.r_end);
        }
        (None, Some(e)) => println!("final size: not available ({e})"),
        (None, None) => unreachable!(),
    }
    println!("conservation drift = {}", analytics.conservation_max_drift);
    println!("samples = {}", analytics.samples);
    Ok(())
}

fn store_day_csvs(day: &StoreDay) -> (String, String) {
    (
        serde_json::to_string_pretty(&day.report).expect("report serializes") + "\n",
        day.contacts_to_csv(),
    )
}

pub fn store(
    config: Option<&Path>,
    seed: Option<u64>,
    resilience: &str,
    out: &Path,
) -> Result<(), CliError> {
    let seed = require_seed(seed)?;
    let resilience_on = match resilience {
        "on" => true,
        "off" => false,
        other => {
            return Err(CliError::Validation(format!(
                "--resilience must be `on` or `off`, got `{other}`"
            )))
        }
    };
    let (scenario, source) = load_scenario(config)?;
    let net = build_store_net();
    let day = run_store_day(&net, &scenario.store, &scenario.policy, resilience_on, seed)
        .map_err(CliError::validation)?;

    let mut manifest = RunManifest::new(
        "store",
        Some(seed),
        json!({
            "config": source,
            "resilience": resilience,
            "scenario": serde_json::to_value(&scenario).map_err(CliError::internal)?,
        }),
    );
    if let Some(p) = config {
        manifest.arg("config", p.display());
    }
    manifest.arg("seed", seed);
    manifest.arg("resilience", resilience);
    let mut dir = OutDir::create(out, manifest)?;
    let (report_json, contacts_csv) = store_day_csvs(&day);
    dir.write("report.json", &report_json)?;
    dir.write("contacts.csv", &contacts_csv)?;
    dir.finish()?;

    let r = &day.report;
    println!("resilience: {resilience}");
    println!(
        "arrivals {}, served {}, denied {}",
        r.arrivals, r.served, r.denied
    );
    println!("contacts: {}", r.total_contacts);
    for (zone, count) in &r.per_zone {
        println!("  {zone}: {count}");
    }
    println!(
        "mean contacts per customer = {}",
        r.mean_contacts_per_customer
    );
    Ok(())
}

pub fn couple(config: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<(), CliError> {
    let seed = require_seed(seed)?;
    let (scenario, source) = load_scenario(config)?;
    let net = build_store_net();

    let off = run_store_day(&net, &scenario.store, &scenario.policy, false, seed)
        .map_err(CliError::validation)?;
    let on = run_store_day(&net, &scenario.store, &scenario.policy, true, seed)
        .map_err(CliError::validation)?;

    let params = scenario.epi.params().map_err(CliError::validation)?;
    let init = scenario.epi.initial_state().map_err(CliError::validation)?;
    let eq = effective_q(params.contact_ratio(), &on.report, &off.report);
    let comparison =
        compare_outbreaks(&params, &init, eq.q_base, eq.q_eff).map_err(CliError::validation)?;

    #[derive(Serialize)]
    struct CoupleReport {
        effective: contactless_core::contact::EffectiveQ,
        comparison: contactless_core::contact::ComparisonReport,
    }

    let mut manifest = RunManifest::new(
        "couple",
        Some(seed),
        json!({
            "config": source,
            "scenario": serde_json::to_value(&scenario).map_err(CliError::internal)?,
        }),
    );
    if let Some(p) = config {
        manifest.arg("config", p.display());
    }
    manifest.arg("seed", seed);
    let mut dir = OutDir::create(out, manifest)?;
    let (off_json, off_csv) = store_day_csvs(&off);
    let (on_json, on_csv) = store_day_csvs(&on);
    dir.write("store_off.json", &off_json)?;
    dir.write("store_on.json", &on_json)?;
    dir.write("contacts_off.csv", &off_csv)?;
    dir.write("contacts_on.csv", &on_csv)?;
    dir.write_json(
        "comparison.json",
        &CoupleReport {
            effective: eq,
            comparison,
        },
    )?;
    dir.finish()?;

    println!(
        "contacts: off {} / on {}",
        off.report.total_contacts, on.report.total_contacts
    );
    if eq.zero_baseline {
        println!("baseline day had no contacts; q_eff = q_base by convention");
    }
    println!(
        "q_base = {}, q_eff = {} (scale {})",
        eq.q_base, eq.q_eff, eq.contact_scale
    );
    println!(
        "I_MAX: base {} -> eff {} (reduction {})",
        comparison.base.i_max, comparison.eff.i_max, comparison.i_max_reduction
    );
    println!(
        "R(end): base {} -> eff {} (reduction {})",
        comparison.base.r_end, comparison.eff.r_end, comparison.r_end_reduction
    );
    println!("epidemic averted: {}", comparison.epidemic_averted);
    Ok(())
}
