//! Parses the five-case running example and prints its variants and partitions.

use ucx::event_log::{extract_variants, partition};
use ucx::fixtures::running_example_log;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let log = running_example_log();
    println!("{} traces, {} events", log.len(), log.event_count());

    println!("variants:");
    for v in extract_variants(&log) {
        let cases: Vec<&str> = v.case_ids.iter().map(String::as_str).collect();
        println!("  <{}>  cases {}", v.sequence.join(", "), cases.join(","));
    }

    println!("partitions:");
    for p in partition(&log, None, false)? {
        let cases: Vec<&str> = p.case_ids.iter().map(String::as_str).collect();
        println!("  {}  cases {}", p.label(), cases.join(","));
    }
    Ok(())
}
