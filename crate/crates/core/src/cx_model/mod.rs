//! Graph model for causal execution (CX) graphs and unified (U-CX) graphs.

mod dot;
mod json;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::json::{parse_graph_json, GraphDocument};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("self-loop on {0:?}")]
    SelfLoop(String),
    #[error("graph contains a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("id {0:?} is used by both an activity and a gateway")]
    DuplicateId(String),
    #[error("gateway {id}: {inbound} inbound / {outbound} outbound edges violate {direction} arity")]
    GatewayArity {
        id: String,
        direction: Direction,
        inbound: usize,
        outbound: usize,
    },
    #[error("OR gateway {0} has no alternatives entry")]
    MissingAlternatives(String),
    #[error("alternatives recorded for {0}, which is not a non-exhaustive OR gateway")]
    UnexpectedAlternatives(String),
    #[error("alternatives of {id} do not cover its neighbours: {detail}")]
    AlternativesMismatch { id: String, detail: String },
    #[error("non-finite coefficient on edge {0} -> {1}")]
    NonFiniteCoefficient(String, String),
    #[error("invalid graph document: {0}")]
    Json(String),
}

/// Orientation of a unification: split gateways fan out from a cause, join
/// gateways fan in to an effect.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Split,
    Join,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Split => "split",
            Direction::Join => "join",
        })
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "split" => Ok(Direction::Split),
            "join" => Ok(Direction::Join),
            other => Err(format!("unknown direction {other:?} (expected split|join)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GatewayKind {
    /// All targets execute.
    #[serde(rename = "AND")]
    And,
    /// Exactly one target executes.
    #[serde(rename = "XOR")]
    Xor,
    /// Any non-empty combination of targets may execute.
    #[serde(rename = "OR_E")]
    OrExhaustive,
    /// One of the recorded alternatives executes.
    #[serde(rename = "OR")]
    Or,
}

impl GatewayKind {
    /// Prefix of generated gateway ids, e.g. `AND_C` in `AND_C1`.
    pub fn id_prefix(self) -> &'static str {
        match self {
            GatewayKind::And => "AND_C",
            GatewayKind::Xor => "XOR_C",
            GatewayKind::OrExhaustive => "ORE_C",
            GatewayKind::Or => "OR_C",
        }
    }

    /// Diagram symbol.
    pub fn symbol(self) -> &'static str {
        match self {
            GatewayKind::And => "&",
            GatewayKind::Xor => "×",
            GatewayKind::OrExhaustive => "O*",
            GatewayKind::Or => "O",
        }
    }
}

impl fmt::Display for GatewayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GatewayKind::And => "AND",
            GatewayKind::Xor => "XOR",
            GatewayKind::OrExhaustive => "OR_E",
            GatewayKind::Or => "OR",
        })
    }
}

/// Causal execution graph over activity names. Edges may carry a coefficient.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CxGraph {
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), Option<f64>>,
}

impl CxGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph and checks every invariant (known endpoints, no self-loops,
    /// acyclic).
    pub fn from_edges<N, E, S>(nodes: N, edges: E) -> Result<Self, GraphError>
    where
        N: IntoIterator<Item = S>,
        E: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let mut g = CxGraph::new();
        for n in nodes {
            g.add_node(n);
        }
        for (from, to) in edges {
            g.insert_edge(from.into(), to.into(), None)?;
        }
        g.validate()?;
        Ok(g)
    }

    pub fn add_node(&mut self, node: impl Into<String>) {
        self.nodes.insert(node.into());
    }

    /// Inserts an edge between existing nodes. Acyclicity is not checked here;
    /// use [`CxGraph::add_edge`] for a checked insert.
    pub fn insert_edge(&mut self, from: String, to: String, coefficient: Option<f64>) -> Result<(), GraphError> {
        for n in [&from, &to] {
            if !self.nodes.contains(n) {
                return Err(GraphError::UnknownNode(n.clone()));
            }
        }
        if from == to {
            return Err(GraphError::SelfLoop(from));
        }
        if let Some(c) = coefficient {
            if !c.is_finite() {
                return Err(GraphError::NonFiniteCoefficient(from, to));
            }
        }
        self.edges.insert((from, to), coefficient);
        Ok(())
    }

    /// Inserts an edge, refusing it when it would close a cycle.
    pub fn add_edge(&mut self, from: &str, to: &str, coefficient: Option<f64>) -> Result<(), GraphError> {
        self.insert_edge(from.to_string(), to.to_string(), coefficient)?;
        if let Some(cycle) = find_cycle(&self.nodes, self.edges.keys()) {
            self.edges.remove(&(from.to_string(), to.to_string()));
            return Err(GraphError::Cycle(cycle));
        }
        Ok(())
    }

    pub fn remove_edge(&mut self, from: &str, to: &str) -> bool {
        self.edges.remove(&(from.to_string(), to.to_string())).is_some()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> + '_ {
        self.nodes.iter().map(String::as_str)
    }

    pub fn node_set(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn contains_node(&self, n: &str) -> bool {
        self.nodes.contains(n)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges.keys().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn weighted_edges(&self) -> impl Iterator<Item = (&str, &str, Option<f64>)> + '_ {
        self.edges.iter().map(|((a, b), c)| (a.as_str(), b.as_str(), *c))
    }

    pub fn edge_set(&self) -> BTreeSet<(String, String)> {
        self.edges.keys().cloned().collect()
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edges.contains_key(&(from.to_string(), to.to_string()))
    }

    pub fn coefficient(&self, from: &str, to: &str) -> Option<f64> {
        self.edges.get(&(from.to_string(), to.to_string())).copied().flatten()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn children(&self, node: &str) -> BTreeSet<String> {
        self.edges
            .keys()
            .filter(|(a, _)| a == node)
            .map(|(_, b)| b.clone())
            .collect()
    }

    pub fn parents(&self, node: &str) -> BTreeSet<String> {
        self.edges
            .keys()
            .filter(|(_, b)| b == node)
            .map(|(a, _)| a.clone())
            .collect()
    }

    /// Same nodes, every edge flipped.
    pub fn reversed(&self) -> CxGraph {
        CxGraph {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|((a, b), c)| ((b.clone(), a.clone()), *c))
                .collect(),
        }
    }

    pub fn without_coefficients(&self) -> CxGraph {
        CxGraph {
            nodes: self.nodes.clone(),
            edges: self.edges.keys().map(|k| (k.clone(), None)).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        for ((a, b), c) in &self.edges {
            for n in [a, b] {
                if !self.nodes.contains(n) {
                    return Err(GraphError::UnknownNode(n.clone()));
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a.clone()));
            }
            if c.is_some_and(|c| !c.is_finite()) {
                return Err(GraphError::NonFiniteCoefficient(a.clone(), b.clone()));
            }
        }
        match find_cycle(&self.nodes, self.edges.keys()) {
            Some(cycle) => Err(GraphError::Cycle(cycle)),
            None => Ok(()),
        }
    }

    /// Kahn order with lexicographic tie-breaking; `None` when cyclic.
    pub fn topological_order(&self) -> Option<Vec<String>> {
        topological_order(&self.nodes, self.edges.keys())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gateway {
    pub id: String,
    pub kind: GatewayKind,
    pub direction: Direction,
}

/// Unified causal execution graph: activity nodes plus gateway nodes.
///
/// Non-exhaustive OR gateways carry their alternatives: each alternative is a
/// set of the gateway's neighbour ids (activities or AND gateways) that execute
/// together.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UcxGraph {
    direction: Direction,
    activities: BTreeSet<String>,
    gateways: BTreeMap<String, Gateway>,
    edges: BTreeSet<(String, String)>,
    or_alternatives: BTreeMap<String, Vec<BTreeSet<String>>>,
}

impl UcxGraph {
    pub fn new(direction: Direction) -> Self {
        UcxGraph {
            direction,
            ..Self::default()
        }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn add_activity(&mut self, name: impl Into<String>) {
        self.activities.insert(name.into());
    }

    /// Registers a gateway with the graph's direction.
    pub fn add_gateway(&mut self, id: impl Into<String>, kind: GatewayKind) {
        let id = id.into();
        self.gateways.insert(
            id.clone(),
            Gateway {
                id,
                kind,
                direction: self.direction,
            },
        );
    }

    pub fn remove_gateway(&mut self, id: &str) -> Option<Gateway> {
        self.or_alternatives.remove(id);
        self.edges.retain(|(a, b)| a != id && b != id);
        self.gateways.remove(id)
    }

    /// Unchecked insert; [`UcxGraph::validate`] reports any resulting violation.
    pub fn insert_edge(&mut self, from: impl Into<String>, to: impl Into<String>) -> bool {
        self.edges.insert((from.into(), to.into()))
    }

    pub fn remove_edge(&mut self, from: &str, to: &str) -> bool {
        self.edges.remove(&(from.to_string(), to.to_string()))
    }

    pub fn set_alternatives(&mut self, gateway: impl Into<String>, alternatives: Vec<BTreeSet<String>>) {
        let mut alternatives = alternatives;
        alternatives.sort();
        alternatives.dedup();
        self.or_alternatives.insert(gateway.into(), alternatives);
    }

    pub fn activities(&self) -> &BTreeSet<String> {
        &self.activities
    }

    pub fn gateways(&self) -> impl Iterator<Item = &Gateway> + '_ {
        self.gateways.values()
    }

    pub fn gateway(&self, id: &str) -> Option<&Gateway> {
        self.gateways.get(id)
    }

    pub fn is_activity(&self, id: &str) -> bool {
        self.activities.contains(id)
    }

    pub fn contains_node(&self, id: &str) -> bool {
        self.activities.contains(id) || self.gateways.contains_key(id)
    }

    pub fn node_ids(&self) -> BTreeSet<String> {
        self.activities.iter().chain(self.gateways.keys()).cloned().collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn edge_set(&self) -> &BTreeSet<(String, String)> {
        &self.edges
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edges.contains(&(from.to_string(), to.to_string()))
    }

    pub fn or_alternatives(&self) -> &BTreeMap<String, Vec<BTreeSet<String>>> {
        &self.or_alternatives
    }

    pub fn alternatives(&self, gateway: &str) -> Option<&[BTreeSet<String>]> {
        self.or_alternatives.get(gateway).map(Vec::as_slice)
    }

    pub fn successors(&self, node: &str) -> BTreeSet<String> {
        self.edges
            .iter()
            .filter(|(a, _)| a == node)
            .map(|(_, b)| b.clone())
            .collect()
    }

    pub fn predecessors(&self, node: &str) -> BTreeSet<String> {
        self.edges
            .iter()
            .filter(|(_, b)| b == node)
            .map(|(a, _)| a.clone())
            .collect()
    }

    /// Flips every edge and switches gateway direction (split ↔ join).
    pub fn mirrored(&self) -> UcxGraph {
        let direction = match self.direction {
            Direction::Split => Direction::Join,
            Direction::Join => Direction::Split,
        };
        UcxGraph {
            direction,
            activities: self.activities.clone(),
            gateways: self
                .gateways
                .iter()
                .map(|(k, g)| (k.clone(), Gateway { direction, ..g.clone() }))
                .collect(),
            edges: self.edges.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
            or_alternatives: self.or_alternatives.clone(),
        }
    }

    /// Every invariant violation, in a stable order. Empty for a valid graph.
    pub fn violations(&self) -> Vec<GraphError> {
        let mut out = Vec::new();
        for id in self.gateways.keys() {
            if self.activities.contains(id) {
                out.push(GraphError::DuplicateId(id.clone()));
            }
        }
        for (a, b) in &self.edges {
            for n in [a, b] {
                if !self.contains_node(n) {
                    out.push(GraphError::UnknownNode(n.clone()));
                }
            }
            if a == b {
                out.push(GraphError::SelfLoop(a.clone()));
            }
        }
        let nodes = self.node_ids();
        if let Some(cycle) = find_cycle(&nodes, self.edges.iter()) {
            out.push(GraphError::Cycle(cycle));
        }
        for g in self.gateways.values() {
            let inbound = self.predecessors(&g.id);
            let outbound = self.successors(&g.id);
            let (single, fan) = match g.direction {
                Direction::Split => (&inbound, &outbound),
                Direction::Join => (&outbound, &inbound),
            };
            if single.len() != 1 || fan.len() < 2 {
                out.push(GraphError::GatewayArity {
                    id: g.id.clone(),
                    direction: g.direction,
                    inbound: inbound.len(),
                    outbound: outbound.len(),
                });
            }
            match (g.kind, self.or_alternatives.get(&g.id)) {
                (GatewayKind::Or, None) => out.push(GraphError::MissingAlternatives(g.id.clone())),
                (GatewayKind::Or, Some(alts)) => {
                    let union: BTreeSet<String> = alts.iter().flatten().cloned().collect();
                    if union != *fan || alts.iter().any(BTreeSet::is_empty) {
                        out.push(GraphError::AlternativesMismatch {
                            id: g.id.clone(),
                            detail: format!("alternatives cover {union:?}, neighbours are {fan:?}"),
                        });
                    }
                }
                _ => {}
            }
        }
        for id in self.or_alternatives.keys() {
            if self.gateways.get(id).map(|g| g.kind) != Some(GatewayKind::Or) {
                out.push(GraphError::UnexpectedAlternatives(id.clone()));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        match self.violations().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Replaces every AND gateway by direct edges between its single neighbour
    /// and its fan. Used to compare a unification of one graph with its input.
    pub fn collapse_and_gateways(&self) -> UcxGraph {
        let mut out = self.clone();
        let ands: Vec<String> = self
            .gateways
            .values()
            .filter(|g| g.kind == GatewayKind::And)
            .map(|g| g.id.clone())
            .collect();
        for id in ands {
            let preds = out.predecessors(&id);
            let succs = out.successors(&id);
            out.gateways.remove(&id);
            out.edges.retain(|(a, b)| *a != id && *b != id);
            for p in &preds {
                for s in &succs {
                    out.edges.insert((p.clone(), s.clone()));
                }
            }
        }
        out
    }
}

pub(crate) fn topological_order<'a>(
    nodes: &BTreeSet<String>,
    edges: impl Iterator<Item = &'a (String, String)>,
) -> Option<Vec<String>> {
    let mut indegree: BTreeMap<&str, usize> = nodes.iter().map(|n| (n.as_str(), 0)).collect();
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in edges {
        if let Some(d) = indegree.get_mut(b.as_str()) {
            *d += 1;
        }
        succ.entry(a.as_str()).or_default().push(b.as_str());
    }
    let mut ready: BTreeSet<&str> = indegree.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
    let mut order = Vec::with_capacity(nodes.len());
    while let Some(n) = ready.pop_first() {
        order.push(n.to_string());
        for s in succ.get(n).into_iter().flatten() {
            if let Some(d) = indegree.get_mut(s) {
                *d -= 1;
                if *d == 0 {
                    ready.insert(s);
                }
            }
        }
    }
    (order.len() == nodes.len()).then_some(order)
}

/// One directed cycle through `edges`, if any.
pub(crate) fn find_cycle<'a>(
    nodes: &BTreeSet<String>,
    edges: impl Iterator<Item = &'a (String, String)>,
) -> Option<Vec<String>> {
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in edges {
        succ.entry(a.as_str()).or_default().push(b.as_str());
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<&str, u8> = BTreeMap::new();
    let starts: BTreeSet<&str> = nodes.iter().map(String::as_str).chain(succ.keys().copied()).collect();
    for &start in &starts {
        if state.get(start).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut path: Vec<(&str, usize)> = vec![(start, 0)];
        state.insert(start, 1);
        while let Some(&mut (node, ref mut next)) = path.last_mut() {
            let children = succ.get(node).map(Vec::as_slice).unwrap_or(&[]);
            if *next < children.len() {
                let child = children[*next];
                *next += 1;
                match state.get(child).copied().unwrap_or(0) {
                    0 => {
                        state.insert(child, 1);
                        path.push((child, 0));
                    }
                    1 => {
                        let pos = path.iter().position(|(n, _)| *n == child).unwrap_or(0);
                        let mut cycle: Vec<String> = path[pos..].iter().map(|(n, _)| n.to_string()).collect();
                        cycle.push(child.to_string());
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                state.insert(node, 2);
                path.pop();
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn partition_graph_fixture() -> Vec<CxGraph> {
        vec![
            CxGraph::from_edges(["a", "b", "c"], [("a", "b"), ("a", "c")]).unwrap(),
            CxGraph::from_edges(["a", "f"], [("a", "f")]).unwrap(),
            CxGraph::from_edges(["f", "g", "h"], [("f", "g"), ("f", "h")]).unwrap(),
        ]
    }

    #[test]
    fn cx_rejects_bad_edges() {
        let mut g = CxGraph::new();
        g.add_node("a");
        g.add_node("b");
        assert_eq!(g.add_edge("a", "z", None), Err(GraphError::UnknownNode("z".into())));
        assert_eq!(g.add_edge("a", "a", None), Err(GraphError::SelfLoop("a".into())));
        g.add_edge("a", "b", Some(0.5)).unwrap();
        assert!(matches!(g.add_edge("b", "a", None), Err(GraphError::Cycle(_))));
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.coefficient("a", "b"), Some(0.5));
    }

    #[test]
    fn topological_order_is_lexicographic() {
        let g = CxGraph::from_edges(["c", "b", "a"], [("c", "a")]).unwrap();
        assert_eq!(g.topological_order().unwrap(), ["b", "c", "a"]);
    }

    #[test]
    fn cycle_found() {
        let nodes: BTreeSet<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let edges = [("x", "y"), ("y", "z"), ("z", "x")].map(|(a, b)| (a.to_string(), b.to_string()));
        let cycle = find_cycle(&nodes, edges.iter()).unwrap();
        assert_eq!(cycle.first(), cycle.last());
        assert_eq!(cycle.len(), 4);
    }

    #[test]
    fn gateway_arity_checked() {
        let mut u = UcxGraph::new(Direction::Split);
        for a in ["a", "b"] {
            u.add_activity(a);
        }
        u.add_gateway("AND_C1", GatewayKind::And);
        u.insert_edge("a", "AND_C1");
        u.insert_edge("AND_C1", "b");
        assert!(matches!(u.validate(), Err(GraphError::GatewayArity { .. })));
    }

    #[test]
    fn or_needs_alternatives() {
        let mut u = UcxGraph::new(Direction::Split);
        for a in ["f", "a", "b"] {
            u.add_activity(a);
        }
        u.add_gateway("OR_C1", GatewayKind::Or);
        u.insert_edge("f", "OR_C1");
        u.insert_edge("OR_C1", "a");
        u.insert_edge("OR_C1", "b");
        assert_eq!(u.validate(), Err(GraphError::MissingAlternatives("OR_C1".into())));
        u.set_alternatives("OR_C1", vec![["a"].iter().map(|s| s.to_string()).collect()]);
        assert!(matches!(u.validate(), Err(GraphError::AlternativesMismatch { .. })));
        u.set_alternatives(
            "OR_C1",
            vec![
                ["a"].iter().map(|s| s.to_string()).collect(),
                ["a", "b"].iter().map(|s| s.to_string()).collect(),
            ],
        );
        assert_eq!(u.validate(), Ok(()));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut u = UcxGraph::new(Direction::Split);
        u.add_activity("AND_C1");
        u.add_gateway("AND_C1", GatewayKind::And);
        assert!(u.violations().contains(&GraphError::DuplicateId("AND_C1".into())));
    }

    #[test]
    fn mirrored_twice_is_identity() {
        let mut u = UcxGraph::new(Direction::Split);
        for a in ["a", "b", "c"] {
            u.add_activity(a);
        }
        u.add_gateway("AND_C1", GatewayKind::And);
        u.insert_edge("a", "AND_C1");
        u.insert_edge("AND_C1", "b");
        u.insert_edge("AND_C1", "c");
        let m = u.mirrored();
        assert_eq!(m.direction(), Direction::Join);
        assert!(m.has_edge("AND_C1", "a"));
        assert_eq!(m.validate(), Ok(()));
        assert_eq!(m.mirrored(), u);
    }
}
