use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::cx_model::{CxGraph, Direction};

/// Member of a classified child set: a plain activity, or a group promoted to a
/// single composite (AND) element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Activity(String),
    Composite(BTreeSet<String>),
}

impl Element {
    /// Activities this element stands for.
    pub fn activities(&self) -> Vec<&str> {
        match self {
            Element::Activity(a) => vec![a.as_str()],
            Element::Composite(group) => group.iter().map(String::as_str).collect(),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Activity(a) => f.write_str(a),
            Element::Composite(group) => {
                let names: Vec<&str> = group.iter().map(String::as_str).collect();
                write!(f, "({})", names.join(", "))
            }
        }
    }
}

pub type ChildSet = BTreeSet<Element>;

/// Outer marking of a matrix row.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowAnnotation {
    /// Plain edge, or a pure AND fan-out.
    #[default]
    None,
    Xor,
    OrExhaustive,
    Or,
}

/// Row alternatives of non-exhaustive OR rows, keyed by row node.
pub type OrAlternativesMap = BTreeMap<String, Vec<ChildSet>>;

/// Rows are nodes, columns are input graphs, cells hold the children (split)
/// or parents (join) of the row node in each graph. Rows with a non-empty
/// family come first, each block sorted by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyMatrix {
    pub direction: Direction,
    pub row_nodes: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<BTreeSet<String>>>,
    pub annotations: Vec<RowAnnotation>,
    /// Per row: groups promoted to composite elements (each with ≥ 2 members).
    pub promotions: Vec<Vec<BTreeSet<String>>>,
}

impl FamilyMatrix {
    pub fn row_index(&self, node: &str) -> Option<usize> {
        self.row_nodes.iter().position(|n| n == node)
    }

    pub fn cell(&self, node: &str, column: usize) -> Option<&BTreeSet<String>> {
        self.row_index(node).map(|r| &self.cells[r][column])
    }

    /// Distinct non-empty cells of a row, sorted.
    pub fn family(&self, row: usize) -> Vec<BTreeSet<String>> {
        let distinct: BTreeSet<&BTreeSet<String>> = self.cells[row].iter().filter(|c| !c.is_empty()).collect();
        distinct.into_iter().cloned().collect()
    }

    /// A cell with the row's promotions applied.
    pub fn cell_elements(&self, row: usize, column: usize) -> ChildSet {
        apply_promotions(&self.cells[row][column], &self.promotions[row])
    }

    /// The row family with promotions applied.
    pub fn promoted_family(&self, row: usize) -> Vec<ChildSet> {
        self.family(row)
            .iter()
            .map(|s| apply_promotions(s, &self.promotions[row]))
            .collect()
    }
}

/// Replaces every promoted group contained in `set` by its composite element.
pub(crate) fn apply_promotions(set: &BTreeSet<String>, promotions: &[BTreeSet<String>]) -> ChildSet {
    let mut remaining = set.clone();
    let mut out = ChildSet::new();
    for group in promotions {
        if group.is_subset(&remaining) {
            for m in group {
                remaining.remove(m);
            }
            out.insert(Element::Composite(group.clone()));
        }
    }
    out.extend(remaining.into_iter().map(Element::Activity));
    out
}

/// Builds the family matrix of `graphs`. Columns are named `g1..gn` in input order.
pub fn build_matrix(graphs: &[CxGraph], direction: Direction) -> FamilyMatrix {
    let nodes: BTreeSet<&str> = graphs.iter().flat_map(|g| g.nodes()).collect();
    let mut families: BTreeMap<&str, Vec<BTreeSet<String>>> =
        nodes.iter().map(|&n| (n, vec![BTreeSet::new(); graphs.len()])).collect();
    for (col, g) in graphs.iter().enumerate() {
        for (u, v) in g.edges() {
            let (row, member) = match direction {
                Direction::Split => (u, v),
                Direction::Join => (v, u),
            };
            families.get_mut(row).expect("edge endpoints are nodes")[col].insert(member.to_string());
        }
    }
    let (active, idle): (Vec<_>, Vec<_>) = families
        .into_iter()
        .partition(|(_, cells)| cells.iter().any(|c| !c.is_empty()));
    let (row_nodes, cells): (Vec<String>, Vec<_>) = active
        .into_iter()
        .chain(idle)
        .map(|(n, cells)| (n.to_string(), cells))
        .unzip();
    FamilyMatrix {
        direction,
        columns: (1..=graphs.len()).map(|i| format!("g{i}")).collect(),
        annotations: vec![RowAnnotation::None; row_nodes.len()],
        promotions: vec![Vec::new(); row_nodes.len()],
        row_nodes,
        cells,
    }
}

fn render_set(set: &ChildSet) -> String {
    if set.is_empty() {
        return "∅".to_string();
    }
    let items: Vec<String> = set.iter().map(Element::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

/// Tabular rendering with the row markings `}a{` (XOR), `[a]` (exhaustive OR)
/// and `*a*` (OR).
impl fmt::Display for FamilyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut rows: Vec<Vec<String>> = Vec::with_capacity(self.row_nodes.len() + 1);
        let mut header = vec!["node".to_string()];
        header.extend(self.columns.iter().cloned());
        rows.push(header);
        for (r, node) in self.row_nodes.iter().enumerate() {
            let label = match self.annotations[r] {
                RowAnnotation::None => node.clone(),
                RowAnnotation::Xor => format!("}}{node}{{"),
                RowAnnotation::OrExhaustive => format!("[{node}]"),
                RowAnnotation::Or => format!("*{node}*"),
            };
            let mut row = vec![label];
            row.extend((0..self.columns.len()).map(|c| render_set(&self.cell_elements(r, c))));
            rows.push(row);
        }
        let ncols = rows[0].len();
        let widths: Vec<usize> = (0..ncols)
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        for row in rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
                .collect();
            writeln!(f, "{}", cells.join(" | ").trim_end())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::partition_graphs;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn matrix_split() {
        let m = build_matrix(&partition_graphs(), Direction::Split);
        assert_eq!(m.row_nodes, ["a", "f", "b", "c", "g", "h"]);
        assert_eq!(m.cells[m.row_index("a").unwrap()], vec![set(&["b", "c"]), set(&["f"]), set(&[])]);
        assert_eq!(m.cells[m.row_index("f").unwrap()], vec![set(&[]), set(&[]), set(&["g", "h"])]);
        for n in ["b", "c", "g", "h"] {
            assert!(m.cells[m.row_index(n).unwrap()].iter().all(BTreeSet::is_empty));
        }
    }

    #[test]
    fn matrix_join() {
        let m = build_matrix(&partition_graphs(), Direction::Join);
        let row = |n: &str| m.cells[m.row_index(n).unwrap()].clone();
        assert_eq!(row("b"), vec![set(&["a"]), set(&[]), set(&[])]);
        assert_eq!(row("c"), vec![set(&["a"]), set(&[]), set(&[])]);
        assert_eq!(row("f"), vec![set(&[]), set(&["a"]), set(&[])]);
        assert_eq!(row("g"), vec![set(&[]), set(&[]), set(&["f"])]);
        assert_eq!(row("h"), vec![set(&[]), set(&[]), set(&["f"])]);
        assert!(row("a").iter().all(BTreeSet::is_empty));
    }

    #[test]
    fn single_graph_mirrors_adjacency() {
        let g = CxGraph::from_edges(["x", "y", "z"], [("x", "y"), ("x", "z"), ("y", "z")]).unwrap();
        let m = build_matrix(std::slice::from_ref(&g), Direction::Split);
        assert_eq!(m.columns, ["g1"]);
        for (r, node) in m.row_nodes.iter().enumerate() {
            assert_eq!(m.cells[r][0], g.children(node));
        }
    }

    #[test]
    fn promotions_replace_whole_groups_only() {
        let promoted = apply_promotions(&set(&["a", "b", "c"]), &[set(&["a", "b"])]);
        let expected: ChildSet = [Element::Composite(set(&["a", "b"])), Element::Activity("c".into())]
            .into_iter()
            .collect();
        assert_eq!(promoted, expected);
        let untouched = apply_promotions(&set(&["a", "c"]), &[set(&["a", "b"])]);
        assert_eq!(untouched.len(), 2);
    }
}
