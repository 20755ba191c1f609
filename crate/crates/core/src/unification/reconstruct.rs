use std::collections::{BTreeMap, BTreeSet};

use super::matrix::{Element, FamilyMatrix, OrAlternativesMap, RowAnnotation};
use super::UnifyError;
use crate::cx_model::{find_cycle, Direction, GatewayKind, UcxGraph};

/// Builds the unified graph from a classified matrix.
///
/// Gateways are numbered by 1-based row index: composites of row `r` become
/// `AND_Cr` (then `AND_Cr.2`, ...), and an annotated row gets one outer gateway
/// (`XOR_Cr`, `ORE_Cr`, `OR_Cr`) through which all of the row's edges pass.
/// Join matrices are built in split orientation and mirrored at the end.
pub fn reconstruct(
    matrix: &FamilyMatrix,
    alternatives: &OrAlternativesMap,
    input_nodes: &BTreeSet<String>,
) -> Result<UcxGraph, UnifyError> {
    let mut graph = UcxGraph::new(Direction::Split);
    for n in input_nodes.iter().chain(&matrix.row_nodes) {
        graph.add_activity(n.clone());
    }
    let mut taken: BTreeSet<String> = graph.activities().clone();
    let mut fresh = |base: String| {
        let mut id = base;
        while taken.contains(&id) {
            id.push('\'');
        }
        taken.insert(id.clone());
        id
    };

    for (r, node) in matrix.row_nodes.iter().enumerate() {
        let family = matrix.promoted_family(r);
        if family.is_empty() {
            if matrix.annotations[r] != RowAnnotation::None {
                return Err(UnifyError::Inconsistent(format!("row {node} is annotated but has no children")));
            }
            continue;
        }
        let number = r + 1;

        let mut composite_ids: BTreeMap<&BTreeSet<String>, String> = BTreeMap::new();
        for (k, group) in matrix.promotions[r].iter().enumerate() {
            let id = match k {
                0 => fresh(format!("{}{number}", GatewayKind::And.id_prefix())),
                k => fresh(format!("{}{number}.{}", GatewayKind::And.id_prefix(), k + 1)),
            };
            graph.add_gateway(id.clone(), GatewayKind::And);
            for member in group {
                graph.insert_edge(id.clone(), member.clone());
            }
            composite_ids.insert(group, id);
        }
        let target_of = |e: &Element| -> Result<String, UnifyError> {
            match e {
                Element::Activity(a) => Ok(a.clone()),
                Element::Composite(group) => composite_ids
                    .get(group)
                    .cloned()
                    .ok_or_else(|| UnifyError::Inconsistent(format!("row {node}: composite {e} was never promoted"))),
            }
        };
        let targets: BTreeSet<String> = family
            .iter()
            .flatten()
            .map(&target_of)
            .collect::<Result<_, _>>()?;

        let outer = match matrix.annotations[r] {
            RowAnnotation::None => None,
            RowAnnotation::Xor => Some(GatewayKind::Xor),
            RowAnnotation::OrExhaustive => Some(GatewayKind::OrExhaustive),
            RowAnnotation::Or => Some(GatewayKind::Or),
        };
        match outer {
            None => {
                if family.len() != 1 {
                    return Err(UnifyError::Inconsistent(format!(
                        "row {node} has {} distinct child sets but no gateway annotation",
                        family.len()
                    )));
                }
                for t in targets {
                    graph.insert_edge(node.clone(), t);
                }
            }
            Some(kind) => {
                let id = fresh(format!("{}{number}", kind.id_prefix()));
                graph.add_gateway(id.clone(), kind);
                graph.insert_edge(node.clone(), id.clone());
                for t in targets {
                    graph.insert_edge(id.clone(), t);
                }
                if kind == GatewayKind::Or {
                    let alts = alternatives
                        .get(node)
                        .ok_or_else(|| UnifyError::Inconsistent(format!("OR row {node} has no alternatives entry")))?;
                    let alts: Vec<BTreeSet<String>> = alts
                        .iter()
                        .map(|alt| alt.iter().map(&target_of).collect::<Result<_, _>>())
                        .collect::<Result<_, _>>()?;
                    graph.set_alternatives(id, alts);
                }
            }
        }
    }
    for row in alternatives.keys() {
        let annotated = matrix
            .row_index(row)
            .map(|r| matrix.annotations[r] == RowAnnotation::Or)
            .unwrap_or(false);
        if !annotated {
            return Err(UnifyError::Inconsistent(format!("alternatives recorded for non-OR row {row}")));
        }
    }

    if let Some(cycle) = find_cycle(&graph.node_ids(), graph.edge_set().iter()) {
        return Err(UnifyError::Cyclic(cycle));
    }
    Ok(match matrix.direction {
        Direction::Split => graph,
        Direction::Join => graph.mirrored(),
    })
}
