//! The worked examples used throughout the docs, tests and runnable examples.

use crate::cx_model::CxGraph;
use crate::event_log::{parse_csv, CsvSchema, EventLog, TimestampFormat};

/// Five cases over activities A, B, C, F, G, H; timestamps are small integers.
pub const RUNNING_EXAMPLE_CSV: &str = "\
case,activity,timestamp
1,A,1
1,B,3
1,C,6
2,A,2
2,F,5
3,F,4
3,G,8
3,H,12
4,A,10
4,F,15
5,A,13
5,C,14
5,B,17
";

/// Schema for [`RUNNING_EXAMPLE_CSV`] (timestamps read as epoch seconds).
pub fn running_example_schema() -> CsvSchema {
    CsvSchema {
        case_column: "case".into(),
        activity_column: "activity".into(),
        timestamp_column: "timestamp".into(),
        timestamp_format: TimestampFormat::EpochSeconds,
        ..CsvSchema::default()
    }
}

pub fn running_example_log() -> EventLog {
    parse_csv(RUNNING_EXAMPLE_CSV.as_bytes(), &running_example_schema()).expect("fixture parses")
}

fn graph(nodes: &[&str], edges: &[(&str, &str)]) -> CxGraph {
    CxGraph::from_edges(nodes.iter().copied(), edges.iter().copied()).expect("fixture graphs are valid")
}

/// One graph per partition of the running example: `{a,b,c}`, `{a,f}`, `{f,g,h}`.
pub fn partition_graphs() -> Vec<CxGraph> {
    vec![
        graph(&["a", "b", "c"], &[("a", "b"), ("a", "c")]),
        graph(&["a", "f"], &[("a", "f")]),
        graph(&["f", "g", "h"], &[("f", "g"), ("f", "h")]),
    ]
}

/// Two graphs whose unification needs a non-exhaustive OR gateway.
pub fn or_example_graphs() -> Vec<CxGraph> {
    vec![
        graph(&["f", "a", "b"], &[("f", "a"), ("f", "b")]),
        graph(&["f", "a", "c"], &[("f", "a"), ("f", "c")]),
    ]
}
