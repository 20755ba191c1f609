//! Unification of per-partition CX graphs into one U-CX graph: family matrix
//! construction, row classification, and graph reconstruction, for split
//! (children) and join (parents) directions.

mod classify;
mod matrix;
mod reconstruct;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cx_model::{CxGraph, Direction, GraphError, UcxGraph};
use crate::discovery::{discover_partitions, DiscoveryConfig, DiscoveryError, PartitionOutcome};
use crate::event_log::{partition, EventLog, EventLogError, Variant};

pub use self::classify::{classify, classify_family, FamilyClass};
pub use self::matrix::{build_matrix, ChildSet, Element, FamilyMatrix, OrAlternativesMap, RowAnnotation};
pub use self::reconstruct::reconstruct;

#[derive(Debug, Error)]
pub enum UnifyError {
    #[error("the log yields no partitions to unify")]
    NoPartitions,
    #[error("input graphs disagree on orientation; the unified graph would contain the cycle {}", .0.join(" -> "))]
    Cyclic(Vec<String>),
    #[error("internal invariant violated: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Log(#[from] EventLogError),
    #[error(transparent)]
    Discovery(#[from] DiscoveryError),
}

/// Classified matrix, OR alternatives and the resulting graph.
#[derive(Debug, Clone)]
pub struct Unification {
    pub matrix: FamilyMatrix,
    pub alternatives: OrAlternativesMap,
    pub graph: UcxGraph,
}

/// Unifies pre-built graphs.
pub fn unify_graphs(graphs: &[CxGraph], direction: Direction) -> Result<Unification, UnifyError> {
    for g in graphs {
        g.validate()?;
    }
    let nodes: BTreeSet<String> = graphs.iter().flat_map(|g| g.nodes().map(str::to_string)).collect();
    let (matrix, alternatives) = classify(&build_matrix(graphs, direction));
    let graph = reconstruct(&matrix, &alternatives, &nodes)?;
    Ok(Unification {
        matrix,
        alternatives,
        graph,
    })
}

#[derive(Debug, Clone, Default)]
pub struct UnifyConfig {
    pub discovery: DiscoveryConfig,
    pub direction: Direction,
    pub split_by_variants: bool,
    /// Worker threads for discovery; `None` uses the available parallelism.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct LogUnification {
    pub partitions: Vec<PartitionOutcome>,
    pub unification: Unification,
}

/// Partitions `log`, discovers one graph per partition and unifies them.
/// Partitions too small for discovery contribute their nodes without edges.
pub fn unify_log(
    log: &EventLog,
    selected: Option<&[Variant]>,
    config: &UnifyConfig,
) -> Result<LogUnification, UnifyError> {
    let parts = partition(log, selected, config.split_by_variants)?;
    if parts.is_empty() {
        return Err(UnifyError::NoPartitions);
    }
    let outcomes = discover_partitions(&parts, &config.discovery, config.jobs)?;
    let graphs: Vec<CxGraph> = outcomes.iter().map(|o| o.graph.without_coefficients()).collect();
    let unification = unify_graphs(&graphs, config.direction)?;
    Ok(LogUnification {
        partitions: outcomes,
        unification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx_model::GatewayKind;
    use crate::fixtures::{partition_graphs, or_example_graphs};

    fn edges(u: &UcxGraph) -> BTreeSet<(String, String)> {
        u.edge_set().clone()
    }

    fn pairs(xs: &[(&str, &str)]) -> BTreeSet<(String, String)> {
        xs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn running_unified() {
        let u = unify_graphs(&partition_graphs(), Direction::Split).unwrap().graph;
        let acts: Vec<&str> = u.activities().iter().map(String::as_str).collect();
        assert_eq!(acts, ["a", "b", "c", "f", "g", "h"]);
        let gw: Vec<(&str, GatewayKind)> = u.gateways().map(|g| (g.id.as_str(), g.kind)).collect();
        assert_eq!(
            gw,
            [("AND_C1", GatewayKind::And), ("AND_C2", GatewayKind::And), ("XOR_C1", GatewayKind::Xor)]
        );
        assert_eq!(
            edges(&u),
            pairs(&[
                ("a", "XOR_C1"),
                ("XOR_C1", "AND_C1"),
                ("AND_C1", "b"),
                ("AND_C1", "c"),
                ("XOR_C1", "f"),
                ("f", "AND_C2"),
                ("AND_C2", "g"),
                ("AND_C2", "h"),
            ])
        );
        assert_eq!(u.validate(), Ok(()));
    }

    #[test]
    fn or_example() {
        let u = unify_graphs(&or_example_graphs(), Direction::Split).unwrap().graph;
        assert_eq!(
            edges(&u),
            pairs(&[("f", "OR_C1"), ("OR_C1", "a"), ("OR_C1", "b"), ("OR_C1", "c")])
        );
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(u.alternatives("OR_C1").unwrap(), [set(&["a", "b"]), set(&["a", "c"])]);
        assert_eq!(u.validate(), Ok(()));
    }

    #[test]
    fn single_graph_collapses_back() {
        let g = CxGraph::from_edges(
            ["p", "q", "r", "s"],
            [("p", "q"), ("p", "r"), ("q", "s"), ("r", "s"), ("p", "s")],
        )
        .unwrap();
        let u = unify_graphs(std::slice::from_ref(&g), Direction::Split).unwrap().graph;
        assert!(u.gateways().all(|gw| gw.kind == GatewayKind::And));
        let collapsed = u.collapse_and_gateways();
        assert_eq!(collapsed.edge_set(), &g.edge_set());
    }

    #[test]
    fn join_is_mirror_of_split_on_reversed_inputs() {
        let graphs = partition_graphs();
        let join = unify_graphs(&graphs, Direction::Join).unwrap().graph;
        let reversed: Vec<CxGraph> = graphs.iter().map(CxGraph::reversed).collect();
        let split = unify_graphs(&reversed, Direction::Split).unwrap().graph;
        assert_eq!(join, split.mirrored());
        assert_eq!(join.validate(), Ok(()));
    }

    #[test]
    fn conflicting_orientation_is_reported() {
        let g1 = CxGraph::from_edges(["x", "y"], [("x", "y")]).unwrap();
        let g2 = CxGraph::from_edges(["x", "y"], [("y", "x")]).unwrap();
        assert!(matches!(unify_graphs(&[g1, g2], Direction::Split), Err(UnifyError::Cyclic(_))));
    }

    #[test]
    fn empty_input() {
        let u = unify_graphs(&[], Direction::Split).unwrap().graph;
        assert!(u.activities().is_empty());
        assert_eq!(u.edges().count(), 0);
    }

    #[test]
    fn gateway_ids_avoid_activity_names() {
        let g1 = CxGraph::from_edges(["AND_C1", "b", "c"], [("AND_C1", "b"), ("AND_C1", "c")]).unwrap();
        let u = unify_graphs(&[g1], Direction::Split).unwrap().graph;
        assert!(u.gateway("AND_C1'").is_some());
        assert_eq!(u.validate(), Ok(()));
    }

    #[test]
    fn missing_alternatives_is_internal_error() {
        let (matrix, _) = classify(&build_matrix(&or_example_graphs(), Direction::Split));
        let nodes = matrix.row_nodes.iter().cloned().collect();
        let err = reconstruct(&matrix, &OrAlternativesMap::new(), &nodes).unwrap_err();
        assert!(matches!(err, UnifyError::Inconsistent(_)));
    }

    #[test]
    fn log_with_single_partition() {
        use crate::verify::{gen_synthetic_log, SyntheticSpec};
        let spec = SyntheticSpec::chain(&["A", "B", "C"], 300, 3);
        let log = gen_synthetic_log(&spec).unwrap();
        let result = unify_log(&log, None, &UnifyConfig::default()).unwrap();
        assert_eq!(result.partitions.len(), 1);
        let collapsed = result.unification.graph.collapse_and_gateways();
        assert_eq!(collapsed.edge_set(), &result.partitions[0].graph.edge_set());
    }

    #[test]
    fn empty_log_is_an_error() {
        let err = unify_log(&EventLog::default(), None, &UnifyConfig::default()).unwrap_err();
        assert!(matches!(err, UnifyError::NoPartitions));
    }
}
