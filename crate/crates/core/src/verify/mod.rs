//! Executable soundness and completeness checks for unified graphs, a
//! brute-force classification oracle, and generators of synthetic logs and
//! random unification instances.

mod oracle;
mod random;
mod synthetic;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cx_model::{CxGraph, Direction, GatewayKind, UcxGraph};

pub use self::oracle::{classify_oracle, OracleClass, ORACLE_UNION_BOUND};
pub use self::random::{mutate, random_instance, Mutation, RandomInstanceConfig};
pub use self::synthetic::{gen_synthetic_log, Noise, SyntheticEdge, SyntheticSpec};

/// Default cap on activity nodes for exhaustive checking.
pub const ENUMERATION_BOUND: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("{what} has {size} elements, above the enumeration bound {bound}; refusing to check")]
    BoundExceeded { what: &'static str, size: usize, bound: usize },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// A gateway-admissible group no input graph produces.
    Unsound,
    /// An input out-set the unified graph cannot express.
    Incomplete,
    /// The unified graph breaks a structural invariant.
    Structural,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub node: String,
    pub group: BTreeSet<String>,
    /// Input edges that have no path in the unified graph.
    pub missing: Vec<(String, String)>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.node.is_empty() {
            write!(f, "{:?}: {}", self.kind, self.message)
        } else {
            write!(f, "{:?} at {}: {}", self.kind, self.node, self.message)
        }
    }
}

/// `None` flags mean the property was not checked.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub sound: Option<bool>,
    pub complete: Option<bool>,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.sound != Some(false) && self.complete != Some(false)
    }

    pub fn merge(mut self, other: VerificationReport) -> Self {
        self.sound = other.sound.or(self.sound);
        self.complete = other.complete.or(self.complete);
        self.violations.extend(other.violations);
        self.violations.sort();
        self.violations.dedup();
        self
    }
}

type Group = BTreeSet<String>;

/// Split-oriented view of a unified graph and its inputs.
struct View {
    graph: UcxGraph,
    inputs: Vec<CxGraph>,
}

fn split_view(u: &UcxGraph, inputs: &[CxGraph]) -> Result<View, VerifyError> {
    let n = u.activities().len();
    if n > ENUMERATION_BOUND {
        return Err(VerifyError::BoundExceeded {
            what: "unified graph",
            size: n,
            bound: ENUMERATION_BOUND,
        });
    }
    Ok(match u.direction() {
        Direction::Split => View {
            graph: u.clone(),
            inputs: inputs.to_vec(),
        },
        Direction::Join => View {
            graph: u.mirrored(),
            inputs: inputs.iter().map(CxGraph::reversed).collect(),
        },
    })
}

fn union_product(a: &[Group], b: &[Group]) -> Vec<Group> {
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            out.insert(x.union(y).cloned().collect::<Group>());
        }
    }
    out.into_iter().collect()
}

fn product_all<'a>(parts: impl IntoIterator<Item = &'a Vec<Group>>) -> Vec<Group> {
    parts
        .into_iter()
        .fold(vec![Group::new()], |acc, p| union_product(&acc, p))
}

/// Activity groups a path into `node` can activate.
fn options(g: &UcxGraph, node: &str, depth: usize) -> Vec<Group> {
    let Some(gw) = g.gateway(node) else {
        return vec![Group::from([node.to_string()])];
    };
    if depth > g.gateways().count() {
        // Only reachable through a gateway cycle, which violations() reports.
        return Vec::new();
    }
    let succ: Vec<String> = g.successors(node).into_iter().collect();
    let child: BTreeMap<&str, Vec<Group>> = succ
        .iter()
        .map(|s| (s.as_str(), options(g, s, depth + 1)))
        .collect();
    let mut out: BTreeSet<Group> = BTreeSet::new();
    match gw.kind {
        GatewayKind::And => out.extend(product_all(child.values())),
        GatewayKind::Xor => out.extend(child.values().flatten().cloned()),
        GatewayKind::OrExhaustive => {
            for mask in 1u64..(1u64 << succ.len().min(63)) {
                let parts = succ
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, s)| &child[s.as_str()]);
                out.extend(product_all(parts));
            }
        }
        GatewayKind::Or => {
            for alt in g.alternatives(node).unwrap_or_default() {
                if alt.is_empty() || !alt.iter().all(|m| child.contains_key(m.as_str())) {
                    continue;
                }
                out.extend(product_all(alt.iter().map(|m| &child[m.as_str()])));
            }
        }
    }
    out.retain(|g| !g.is_empty());
    out.into_iter().collect()
}

/// Every out-group the unified graph admits at activity `node`.
fn admissible_groups(g: &UcxGraph, node: &str) -> Vec<Group> {
    let succ = g.successors(node);
    if succ.is_empty() {
        return Vec::new();
    }
    let parts: Vec<Vec<Group>> = succ.iter().map(|s| options(g, s, 0)).collect();
    product_all(&parts)
}

/// Admissible out-groups of every activity, read in the graph's own direction
/// (child groups for split, parent groups for join). Activities without
/// outgoing edges are omitted.
pub fn group_semantics(u: &UcxGraph) -> BTreeMap<String, Vec<BTreeSet<String>>> {
    let g = match u.direction() {
        Direction::Split => u.clone(),
        Direction::Join => u.mirrored(),
    };
    g.activities()
        .iter()
        .map(|a| (a.clone(), admissible_groups(&g, a)))
        .filter(|(_, groups)| !groups.is_empty())
        .collect()
}

fn show(group: &Group) -> String {
    let items: Vec<&str> = group.iter().map(String::as_str).collect();
    format!("{{{}}}", items.join(","))
}

/// Every gateway-admissible group at every activity must equal the full
/// out-set of that activity in some input graph.
pub fn check_soundness(u: &UcxGraph, inputs: &[CxGraph]) -> Result<VerificationReport, VerifyError> {
    let view = split_view(u, inputs)?;
    let mut violations: Vec<Violation> = u
        .violations()
        .into_iter()
        .map(|e| Violation {
            kind: ViolationKind::Structural,
            node: String::new(),
            group: Group::new(),
            missing: Vec::new(),
            message: e.to_string(),
        })
        .collect();
    for node in view.graph.activities() {
        let observed: BTreeSet<Group> = view
            .inputs
            .iter()
            .filter(|g| g.contains_node(node))
            .map(|g| g.children(node))
            .collect();
        for group in admissible_groups(&view.graph, node) {
            if !observed.contains(&group) {
                violations.push(Violation {
                    kind: ViolationKind::Unsound,
                    node: node.clone(),
                    message: format!(
                        "group {} of {node} is not the {} of {node} in any input graph",
                        show(&group),
                        out_word(u.direction())
                    ),
                    group,
                    missing: Vec::new(),
                });
            }
        }
    }
    violations.sort();
    Ok(VerificationReport {
        sound: Some(violations.is_empty()),
        complete: None,
        violations,
    })
}

fn out_word(d: Direction) -> &'static str {
    match d {
        Direction::Split => "child set",
        Direction::Join => "parent set",
    }
}

/// Every input node and every non-empty input out-set must be expressible by
/// the unified graph.
pub fn check_completeness(u: &UcxGraph, inputs: &[CxGraph]) -> Result<VerificationReport, VerifyError> {
    let view = split_view(u, inputs)?;
    let mut violations = Vec::new();
    let mut cache: BTreeMap<String, Vec<Group>> = BTreeMap::new();
    for (i, g) in view.inputs.iter().enumerate() {
        let label = format!("g{}", i + 1);
        for node in g.nodes() {
            if !view.graph.is_activity(node) {
                violations.push(Violation {
                    kind: ViolationKind::Incomplete,
                    node: node.to_string(),
                    group: Group::new(),
                    missing: Vec::new(),
                    message: format!("activity {node} of {label} is missing from the unified graph"),
                });
                continue;
            }
            let out = g.children(node);
            if out.is_empty() {
                continue;
            }
            let groups = cache
                .entry(node.to_string())
                .or_insert_with(|| admissible_groups(&view.graph, node));
            if groups.contains(&out) {
                continue;
            }
            let reachable: Group = groups.iter().flatten().cloned().collect();
            let missing: Vec<(String, String)> = out
                .iter()
                .filter(|t| !reachable.contains(*t))
                .map(|t| match u.direction() {
                    Direction::Split => (node.to_string(), t.clone()),
                    Direction::Join => (t.clone(), node.to_string()),
                })
                .collect();
            let message = if missing.is_empty() {
                format!(
                    "{} {} of {node} in {label} is not an admissible combination",
                    out_word(u.direction()),
                    show(&out)
                )
            } else {
                let edges: Vec<String> = missing.iter().map(|(a, b)| format!("({a},{b})")).collect();
                format!("missing {} of {label}", edges.join(", "))
            };
            violations.push(Violation {
                kind: ViolationKind::Incomplete,
                node: node.to_string(),
                group: out,
                missing,
                message,
            });
        }
    }
    violations.sort();
    Ok(VerificationReport {
        sound: None,
        complete: Some(violations.is_empty()),
        violations,
    })
}

/// Both checks.
pub fn verify(u: &UcxGraph, inputs: &[CxGraph]) -> Result<VerificationReport, VerifyError> {
    Ok(check_soundness(u, inputs)?.merge(check_completeness(u, inputs)?))
}
