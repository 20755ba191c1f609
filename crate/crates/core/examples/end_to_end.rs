//! Full pipeline on a synthetic process with two routes: generate a log,
//! partition it, discover one graph per partition, unify, verify and simplify.

use ucx::event_log::EventLog;
use ucx::simplify::simplify_graph;
use ucx::unification::{unify_log, UnifyConfig};
use ucx::verify::{gen_synthetic_log, verify, SyntheticSpec};
use ucx::Direction;

fn route(names: &[&str], seed: u64, prefix: &str) -> Result<EventLog, Box<dyn std::error::Error>> {
    let mut spec = SyntheticSpec::chain(names, 400, seed);
    spec.base_time += seed as i64 * 1_000_000;
    let log = gen_synthetic_log(&spec)?;
    // Keep case ids distinct between routes.
    Ok(EventLog::from_events(log.traces().iter().flat_map(|t| {
        t.events.iter().map(move |e| {
            let mut e = e.clone();
            e.case_id = format!("{prefix}{}", e.case_id);
            e
        })
    }))?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fast = route(&["Screen", "Decide"], 1, "f")?;
    let full = route(&["Screen", "Credit", "Decide"], 2, "s")?;
    let log = EventLog::from_events(fast.traces().iter().chain(full.traces()).flat_map(|t| t.events.clone()))?;

    let config = UnifyConfig {
        direction: Direction::Split,
        ..Default::default()
    };
    let result = unify_log(&log, None, &config)?;
    let mut inputs = Vec::new();
    for p in &result.partitions {
        let edges: Vec<String> = p.graph.edges().map(|(a, b)| format!("{a}->{b}")).collect();
        println!("{} ({} traces): {}", p.label, p.traces, edges.join(" "));
        inputs.push(p.graph.without_coefficients());
    }

    let unified = &result.unification.graph;
    println!("\n{}", unified.to_json());
    let report = verify(unified, &inputs)?;
    println!("sound {:?}, complete {:?}", report.sound, report.complete);
    for (gateway, raw, factored) in simplify_graph(unified)? {
        println!("{gateway}: {raw} => {factored}");
    }
    Ok(())
}
